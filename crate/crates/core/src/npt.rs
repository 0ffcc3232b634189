//! Node probability tables for ranked and indicator nodes.
//!
//! Ranked nodes split `[0, 1]` into `k` equal intervals. A child's NPT column
//! for a given parent configuration is a doubly truncated Normal on `[0, 1]`
//! centred on the weighted mean of the parents' interval midpoints,
//! discretized over the child's intervals. Indicator nodes use the same
//! discretization over their own (unit-bearing) interval boundaries.

use thiserror::Error;

use crate::model::{IndicatorExpr, IndicatorSpec, Sign};
use crate::scalar::{normalize, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NptError {
    #[error("variance must be positive and finite, got {0}")]
    InvalidVariance(f64),
    #[error("mean must be finite, got {0}")]
    InvalidMean(f64),
    #[error("support [{lo}, {hi}] is empty")]
    EmptySupport { lo: f64, hi: f64 },
    #[error("interval boundaries must be strictly increasing and span the support")]
    BadIntervals,
    #[error("a weighted mean needs at least one parent")]
    NoParents,
    #[error("parent weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("partitioned expression of `{indicator}` has no distribution for state `{state}`")]
    MissingPartition { indicator: String, state: String },
}

/// Default state labels for a ranked node with `k` states.
pub fn ranked_labels(k: usize) -> Vec<String> {
    let names: &[&str] = match k {
        2 => &["low", "high"],
        3 => &["low", "medium", "high"],
        4 => &["very_low", "low", "high", "very_high"],
        5 => &["very_low", "low", "medium", "high", "very_high"],
        7 => &[
            "lowest",
            "very_low",
            "low",
            "medium",
            "high",
            "very_high",
            "highest",
        ],
        _ => return (0..k).map(|i| format!("level{i}")).collect(),
    };
    names.iter().map(|s| s.to_string()).collect()
}

/// Equal-width partition of `[0, 1]` into `k` ordered states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankedScale {
    states: usize,
}

impl RankedScale {
    pub fn new(states: usize) -> Self {
        assert!(states >= 2, "a ranked scale needs at least two states");
        RankedScale { states }
    }

    pub fn len(&self) -> usize {
        self.states
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(2i + 1) / 2k`
    pub fn midpoint<S: Scalar>(&self, state: usize) -> S {
        S::of_usize(2 * state + 1) / S::of_usize(2 * self.states)
    }

    pub fn midpoints<S: Scalar>(&self) -> Vec<S> {
        (0..self.states).map(|i| self.midpoint(i)).collect()
    }

    /// `k + 1` boundaries `0, 1/k, ..., 1`.
    pub fn boundaries<S: Scalar>(&self) -> Vec<S> {
        (0..=self.states)
            .map(|i| S::of_usize(i) / S::of_usize(self.states))
            .collect()
    }

    pub fn labels(&self) -> Vec<String> {
        ranked_labels(self.states)
    }
}

/// Standard normal CDF.
///
/// Evaluated through `erfc` so both tails keep full relative precision.
pub fn std_normal_cdf<S: Scalar>(x: S) -> S {
    S::of(0.5 * libm::erfc(-x.as_f64() / std::f64::consts::SQRT_2))
}

/// Upper tail `1 - Φ(x)`.
fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `P(a < Z < b)` for a standard normal `Z`, computed in the tail that
/// avoids cancellation.
fn normal_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        std_normal_sf(a) - std_normal_sf(b)
    } else if b <= 0.0 {
        std_normal_sf(-b) - std_normal_sf(-a)
    } else {
        1.0 - std_normal_sf(-a) - std_normal_sf(b)
    }
}

/// Normal distribution truncated to `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TNormalSpec<S> {
    pub mean: S,
    pub variance: S,
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> TNormalSpec<S> {
    pub fn new(mean: S, variance: S, lo: S, hi: S) -> Result<Self, NptError> {
        if !(variance > S::zero() && variance.is_finite()) {
            return Err(NptError::InvalidVariance(variance.as_f64()));
        }
        if !mean.is_finite() {
            return Err(NptError::InvalidMean(mean.as_f64()));
        }
        if !(lo < hi) {
            return Err(NptError::EmptySupport {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        Ok(TNormalSpec {
            mean,
            variance,
            lo,
            hi,
        })
    }

    /// Truncated Normal on the unit interval, as used for ranked nodes.
    pub fn unit(mean: S, variance: S) -> Result<Self, NptError> {
        Self::new(mean, variance, S::zero(), S::one())
    }
}

/// Probability of each interval `[b_i, b_{i+1})` under `spec`.
///
/// `boundaries` must start at `spec.lo`, end at `spec.hi` and increase
/// strictly. When the normalizer underflows (the mean lies many standard
/// deviations outside the support) all mass goes to the interval nearest
/// the mean.
pub fn discretize_tnormal<S: Scalar>(
    spec: &TNormalSpec<S>,
    boundaries: &[S],
) -> Result<Vec<S>, NptError> {
    if boundaries.len() < 2
        || boundaries.windows(2).any(|w| !(w[0] < w[1]))
        || boundaries[0] != spec.lo
        || boundaries[boundaries.len() - 1] != spec.hi
    {
        return Err(NptError::BadIntervals);
    }
    let mean = spec.mean.as_f64();
    let sd = spec.variance.as_f64().sqrt();
    let z: Vec<f64> = boundaries.iter().map(|b| (b.as_f64() - mean) / sd).collect();
    let masses: Vec<f64> = z.windows(2).map(|w| normal_mass(w[0], w[1]).max(0.0)).collect();
    let total: f64 = masses.iter().sum();

    let mut probs: Vec<S> = if total > 0.0 && total.is_finite() {
        masses.iter().map(|&m| S::of(m / total)).collect()
    } else {
        let n = masses.len();
        let nearest = if spec.mean <= spec.lo {
            0
        } else if spec.mean >= spec.hi {
            n - 1
        } else {
            boundaries
                .windows(2)
                .position(|w| spec.mean < w[1])
                .unwrap_or(n - 1)
        };
        let mut point = vec![S::zero(); n];
        point[nearest] = S::one();
        point
    };
    normalize(&mut probs);
    Ok(probs)
}

/// A node probability table. Column `c` (one per parent configuration,
/// row-major with the last parent varying fastest) is the contiguous slice
/// `table[c * states .. (c + 1) * states]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Npt<S> {
    pub parent_states: Vec<usize>,
    pub states: usize,
    pub table: Vec<S>,
}

impl<S: Scalar> Npt<S> {
    pub fn columns(&self) -> usize {
        self.parent_states.iter().product()
    }

    pub fn column(&self, index: usize) -> &[S] {
        &self.table[index * self.states..(index + 1) * self.states]
    }

    /// Table of a parentless node.
    pub fn prior(probabilities: Vec<S>) -> Self {
        Npt {
            parent_states: Vec::new(),
            states: probabilities.len(),
            table: probabilities,
        }
    }

    fn from_columns(
        parent_states: Vec<usize>,
        states: usize,
        mut column: impl FnMut(&[usize]) -> Result<Vec<S>, NptError>,
    ) -> Result<Self, NptError> {
        let mut table = Vec::with_capacity(parent_states.iter().product::<usize>() * states);
        for combo in ParentCombinations::new(&parent_states) {
            let col = column(&combo)?;
            debug_assert_eq!(col.len(), states);
            table.extend(col);
        }
        Ok(Npt {
            parent_states,
            states,
            table,
        })
    }
}

/// Iterates parent state combinations row-major, last parent fastest.
#[derive(Clone, Debug)]
pub struct ParentCombinations {
    cards: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl ParentCombinations {
    pub fn new(cards: &[usize]) -> Self {
        let current = if cards.contains(&0) {
            None
        } else {
            Some(vec![0; cards.len()])
        };
        ParentCombinations {
            cards: cards.to_vec(),
            current,
        }
    }
}

impl Iterator for ParentCombinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let mut next = out.clone();
        let mut advanced = false;
        for i in (0..next.len()).rev() {
            next[i] += 1;
            if next[i] < self.cards[i] {
                advanced = true;
                break;
            }
            next[i] = 0;
        }
        self.current = advanced.then_some(next);
        Some(out)
    }
}

/// One parent's contribution to a weighted mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedParent<S> {
    pub scale: RankedScale,
    pub weight: S,
    pub sign: Sign,
}

/// `Σ w_i x_i / Σ w_i` where `x_i` is the parent's interval midpoint,
/// reflected to `1 - x_i` for a negative influence.
pub fn effective_level<S: Scalar>(parent_states: &[usize], parents: &[WeightedParent<S>]) -> S {
    debug_assert_eq!(parent_states.len(), parents.len());
    let (num, den) = parents
        .iter()
        .zip(parent_states)
        .fold((S::zero(), S::zero()), |(num, den), (p, &state)| {
            let mid: S = p.scale.midpoint(state);
            let x = match p.sign {
                Sign::Positive => mid,
                Sign::Negative => S::one() - mid,
            };
            (num + p.weight * x, den + p.weight)
        });
    num / den
}

/// NPT of a ranked node whose level is a weighted mean of its ranked parents.
pub fn build_ranked_npt<S: Scalar>(
    parents: &[WeightedParent<S>],
    variance: S,
    child: RankedScale,
) -> Result<Npt<S>, NptError> {
    if parents.is_empty() {
        return Err(NptError::NoParents);
    }
    if let Some(p) = parents
        .iter()
        .find(|p| !(p.weight > S::zero() && p.weight.is_finite()))
    {
        return Err(NptError::InvalidWeight(p.weight.as_f64()));
    }
    let boundaries: Vec<S> = child.boundaries();
    let cards: Vec<usize> = parents.iter().map(|p| p.scale.len()).collect();
    Npt::from_columns(cards, child.len(), |combo| {
        let spec = TNormalSpec::unit(effective_level(combo, parents), variance)?;
        discretize_tnormal(&spec, &boundaries)
    })
}

/// NPT of an indicator attached to a ranked node with scale `parent`.
///
/// Arithmetic expressions place the mean at `intercept + slope * midpoint`;
/// both kinds truncate to `[first boundary, last boundary]`.
pub fn build_indicator_npt<S: Scalar>(
    spec: &IndicatorSpec,
    parent: RankedScale,
) -> Result<Npt<S>, NptError> {
    let boundaries: Vec<S> = spec.boundaries.iter().map(|&b| S::of(b)).collect();
    let (lo, hi) = (boundaries[0], boundaries[boundaries.len() - 1]);
    let labels = parent.labels();
    Npt::from_columns(vec![parent.len()], boundaries.len() - 1, |combo| {
        let state = combo[0];
        let tn = match &spec.expression {
            IndicatorExpr::Partitioned(parts) => {
                let label = &labels[state];
                let (_, params) = parts.iter().find(|(l, _)| l == label).ok_or_else(|| {
                    NptError::MissingPartition {
                        indicator: spec.id.clone(),
                        state: label.clone(),
                    }
                })?;
                TNormalSpec::new(S::of(params.mean), S::of(params.variance), lo, hi)?
            }
            IndicatorExpr::Arithmetic {
                intercept,
                slope,
                variance,
            } => {
                let level: S = parent.midpoint(state);
                let mean = S::of(*intercept) + S::of(*slope) * level;
                TNormalSpec::new(mean, S::of(*variance), lo, hi)?
            }
        };
        discretize_tnormal(&tn, &boundaries)
    })
}

#[cfg(test)]
pub(crate) mod quadrature {
    //! Adaptive Simpson integration of the Gaussian density; a reference
    //! for the erfc-based discretization.

    fn density(x: f64, mean: f64, sd: f64) -> f64 {
        let z = (x - mean) / sd;
        (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
    }

    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn adapt(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }

    pub fn gaussian_mass(a: f64, b: f64, mean: f64, sd: f64) -> f64 {
        let f = |x: f64| density(x, mean, sd);
        // Pre-split so narrow peaks are not missed by the first Simpson panel.
        let panels = 64;
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
                let (flo, fmid, fhi) = (f(lo), f(0.5 * (lo + hi)), f(hi));
                let whole = simpson(lo, hi, flo, fmid, fhi);
                adapt(&f, lo, hi, flo, fmid, fhi, whole, 1e-15, 40)
            })
            .sum()
    }

    pub fn discretize(mean: f64, variance: f64, boundaries: &[f64]) -> Vec<f64> {
        let sd = variance.sqrt();
        let masses: Vec<f64> = boundaries
            .windows(2)
            .map(|w| gaussian_mass(w[0], w[1], mean, sd))
            .collect();
        let total: f64 = masses.iter().sum();
        masses.iter().map(|m| m / total).collect()
    }
}
