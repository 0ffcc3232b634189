use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::inference::{evidence_probability, posterior_marginals, Evidence, Posterior};
use crate::network::CompiledNetwork;
use crate::scalar::Scalar;

/// An observed value: a state label, or a raw value for indicator nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observation {
    Value(f64),
    Label(String),
}

impl From<f64> for Observation {
    fn from(v: f64) -> Self {
        Observation::Value(v)
    }
}

impl From<&str> for Observation {
    fn from(s: &str) -> Self {
        Observation::Label(s.to_owned())
    }
}

/// `{"name": ..., "evidence": {node: number | label}}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub evidence: BTreeMap<String, Observation>,
}

impl Scenario {
    pub fn new(name: impl Into<String>) -> Self {
        Scenario {
            name: name.into(),
            evidence: BTreeMap::new(),
        }
    }

    pub fn observe(mut self, node: impl Into<String>, value: impl Into<Observation>) -> Self {
        self.evidence.insert(node.into(), value.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct Moments<S> {
    pub mean: S,
    pub sd: S,
}

/// Mean and standard deviation of an interval distribution, placing each
/// interval's mass at its midpoint.
pub fn indicator_moments<S: Scalar>(marginal: &[S], bounds: &[S]) -> Moments<S> {
    assert_eq!(
        marginal.len() + 1,
        bounds.len(),
        "one probability per interval"
    );
    let two = S::one() + S::one();
    let mids: Vec<S> = bounds.windows(2).map(|w| (w[0] + w[1]) / two).collect();
    let mean = marginal
        .iter()
        .zip(&mids)
        .fold(S::zero(), |acc, (&p, &m)| acc + p * m);
    let var = marginal
        .iter()
        .zip(&mids)
        .fold(S::zero(), |acc, (&p, &m)| acc + p * (m - mean) * (m - mean));
    Moments {
        mean,
        sd: var.max(S::zero()).sqrt(),
    }
}

/// Maps scenario observations to state indices. Values outside an
/// indicator's bounds are clamped to the end interval; each clamp yields a
/// warning.
pub fn resolve_evidence<S: Scalar>(
    net: &CompiledNetwork<S>,
    observations: &BTreeMap<String, Observation>,
) -> Result<(Evidence, Vec<String>), AnalysisError> {
    let mut evidence = Evidence::new();
    let mut warnings = Vec::new();
    for (id, obs) in observations {
        let node = net
            .get(id)
            .ok_or_else(|| AnalysisError::UnknownNode(id.clone()))?;
        let state = match obs {
            Observation::Label(label) => {
                node.state_index(label)
                    .ok_or_else(|| AnalysisError::UnknownState {
                        node: id.clone(),
                        state: label.clone(),
                    })?
            }
            Observation::Value(v) => {
                if !v.is_finite() {
                    return Err(AnalysisError::NonFiniteValue(id.clone()));
                }
                let (state, clamped) = node
                    .interval_of(S::of(*v))
                    .ok_or_else(|| AnalysisError::ValueOnRankedNode(id.clone()))?;
                if clamped {
                    let message = format!(
                        "{id}: value {v} lies outside the indicator range and was clamped to {}",
                        node.states[state]
                    );
                    log::warn!("{message}");
                    warnings.push(message);
                }
                state
            }
        };
        evidence.set(id.clone(), state);
    }
    Ok((evidence, warnings))
}

/// Indicator id to moments, in network order.
pub type MomentTable<S> = IndexMap<String, Moments<S>>;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", bound(serialize = "S: Scalar"))]
pub struct ScenarioReport<S> {
    pub scenario: String,
    pub evidence_probability: S,
    pub posteriors: Posterior<S>,
    /// Indicator nodes only.
    pub moments: MomentTable<S>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<S: Scalar> ScenarioReport<S> {
    /// Aligned-column text rendering.
    pub fn to_text(&self, net: &CompiledNetwork<S>) -> String {
        let mut out = format!(
            "scenario {}\nP(evidence) = {}\n",
            self.scenario,
            crate::json::format_f64(self.evidence_probability.as_f64())
        );
        let width = net.nodes().iter().map(|n| n.id.len()).max().unwrap_or(0);
        for (id, dist) in self.posteriors.iter() {
            let node = net.get(id).expect("posterior ids come from the network");
            let cells: Vec<String> = node
                .states
                .iter()
                .zip(dist)
                .map(|(label, p)| format!("{label}={:.4}", p.as_f64()))
                .collect();
            out.push_str(&format!("{id:<width$}  {}", cells.join("  ")));
            if let Some(m) = self.moments.get(id) {
                out.push_str(&format!(
                    "  mean={:.3} sd={:.3}",
                    m.mean.as_f64(),
                    m.sd.as_f64()
                ));
            }
            out.push('\n');
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

/// Posteriors, moments and evidence probability of one scenario.
pub fn run_scenario<S: Scalar>(
    net: &CompiledNetwork<S>,
    scenario: &Scenario,
) -> Result<ScenarioReport<S>, AnalysisError> {
    let (evidence, warnings) = resolve_evidence(net, &scenario.evidence)?;
    let evidence_probability = evidence_probability(net, &evidence)?;
    let posteriors = posterior_marginals(net, &evidence)?;
    let moments = net
        .nodes()
        .iter()
        .filter_map(|node| {
            let bounds = node.bounds.as_ref()?;
            let marginal = posteriors.get(&node.id)?;
            Some((node.id.clone(), indicator_moments(marginal, bounds)))
        })
        .collect();
    Ok(ScenarioReport {
        scenario: scenario.name.clone(),
        evidence_probability,
        posteriors,
        moments,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_examples() {
        let m: Moments<f64> = indicator_moments(&[0.0, 0.0, 1.0, 0.0], &[0.0, 10.0, 20.0, 30.0, 40.0]);
        assert_eq!((m.mean, m.sd), (25.0, 0.0));
        let m: Moments<f64> = indicator_moments(&[0.2, 0.5, 0.3], &[0.0, 10.0, 20.0, 30.0]);
        assert!((m.mean - 16.0).abs() < 1e-12);
        assert!((m.sd - 7.0).abs() < 1e-12);
        let m: Moments<f64> = indicator_moments(&[0.25; 4], &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(m.mean.abs() < 1e-15);
    }

    #[test]
    fn scenario_file_format() {
        let s: Scenario = serde_json::from_str(
            r#"{"name": "measured", "evidence": {"CommentRatio": 0.2517, "Maintenance": "low"}}"#,
        )
        .unwrap();
        assert_eq!(s.evidence["CommentRatio"], Observation::Value(0.2517));
        assert_eq!(s.evidence["Maintenance"], Observation::Label("low".into()));
        let empty: Scenario = serde_json::from_str(r#"{"name": "baseline"}"#).unwrap();
        assert!(empty.evidence.is_empty());
    }
}
