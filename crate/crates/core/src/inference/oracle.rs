use super::{Evidence, Explanation, InferenceError, Posterior};
use crate::network::CompiledNetwork;
use crate::scalar::{normalize, Scalar};

/// Offset of the table column selected by the parents' states.
fn column_start<S: Scalar>(net: &CompiledNetwork<S>, i: usize, states: &[usize]) -> usize {
    net.parents_of(i)
        .iter()
        .fold(0, |acc, &p| acc * net.cardinality(p) + states[p])
        * net.cardinality(i)
}

fn entry<S: Scalar>(net: &CompiledNetwork<S>, i: usize, states: &[usize]) -> usize {
    column_start(net, i, states) + states[i]
}

/// Largest number of joint configurations [`brute_force_oracle`] enumerates.
pub const ORACLE_STATE_CAP: usize = 1_000_000;

/// Posterior marginals by enumerating the joint distribution.
pub fn brute_force_oracle<S: Scalar>(
    net: &CompiledNetwork<S>,
    evidence: &Evidence,
) -> Result<Posterior<S>, InferenceError> {
    brute_force_oracle_with_cap(net, evidence, ORACLE_STATE_CAP)
}

/// Enumerates every configuration of the unobserved nodes that have
/// children. Unobserved leaves are not enumerated: given a configuration of
/// everything else, a leaf's states contribute `weight * P(leaf | parents)`
/// to its marginal and sum to `weight` overall.
pub fn brute_force_oracle_with_cap<S: Scalar>(
    net: &CompiledNetwork<S>,
    evidence: &Evidence,
    cap: usize,
) -> Result<Posterior<S>, InferenceError> {
    let observed = evidence.resolve(net)?;
    let n = net.len();
    let free_leaf: Vec<bool> = (0..n)
        .map(|i| observed[i].is_none() && net.children_of(i).is_empty())
        .collect();
    let enumerated: Vec<usize> = (0..n)
        .filter(|&i| observed[i].is_none() && !free_leaf[i])
        .collect();

    let size: f64 = enumerated
        .iter()
        .map(|&i| net.cardinality(i) as f64)
        .product();
    if size > cap as f64 {
        return Err(InferenceError::StateSpaceTooLarge { size, cap });
    }

    let mut marginals: Vec<Vec<S>> = (0..n).map(|i| vec![S::zero(); net.cardinality(i)]).collect();
    let mut states: Vec<usize> = observed.iter().map(|s| s.unwrap_or(0)).collect();
    let mut total = S::zero();
    let topo = net.topological_order();

    let fixed: Vec<usize> = topo.iter().copied().filter(|&i| !free_leaf[i]).collect();

    loop {
        let mut weight = S::one();
        for &i in &fixed {
            weight = weight * net.node(i).cpt[entry(net, i, &states)];
        }
        if weight > S::zero() {
            total = total + weight;
            for i in 0..n {
                if free_leaf[i] {
                    let k = net.cardinality(i);
                    let column = &net.node(i).cpt[column_start(net, i, &states)..][..k];
                    for (m, &p) in marginals[i].iter_mut().zip(column) {
                        *m = *m + weight * p;
                    }
                } else {
                    marginals[i][states[i]] = marginals[i][states[i]] + weight;
                }
            }
        }

        // Advance the odometer over the enumerated nodes, last fastest.
        let mut advanced = false;
        for &i in enumerated.iter().rev() {
            states[i] += 1;
            if states[i] < net.cardinality(i) {
                advanced = true;
                break;
            }
            states[i] = 0;
        }
        if !advanced {
            break;
        }
    }

    if n > 0 && total <= S::zero() {
        return Err(InferenceError::ImpossibleEvidence);
    }
    let entries = marginals
        .into_iter()
        .enumerate()
        .map(|(i, mut m)| {
            normalize(&mut m);
            (net.node(i).id.clone(), m)
        })
        .collect();
    Ok(Posterior::new(entries))
}

/// Most probable explanation by enumeration, for cross-checking [`super::mpe`].
/// Free leaves take their most likely state given the enumerated rest. Ties
/// within a relative `1e-12` go to the lexicographically smallest assignment,
/// comparing nodes in id order.
pub fn brute_force_mpe<S: Scalar>(
    net: &CompiledNetwork<S>,
    evidence: &Evidence,
) -> Result<Explanation<S>, InferenceError> {
    let observed = evidence.resolve(net)?;
    let n = net.len();
    let free_leaf: Vec<bool> = (0..n)
        .map(|i| observed[i].is_none() && net.children_of(i).is_empty())
        .collect();
    let enumerated: Vec<usize> = (0..n)
        .filter(|&i| observed[i].is_none() && !free_leaf[i])
        .collect();
    let size: f64 = enumerated
        .iter()
        .map(|&i| net.cardinality(i) as f64)
        .product();
    if size > ORACLE_STATE_CAP as f64 {
        return Err(InferenceError::StateSpaceTooLarge {
            size,
            cap: ORACLE_STATE_CAP,
        });
    }
    let mut by_id: Vec<usize> = (0..n).filter(|&i| observed[i].is_none()).collect();
    by_id.sort_by(|&a, &b| net.node(a).id.cmp(&net.node(b).id));
    let tolerance = S::of(1e-12);

    let mut states: Vec<usize> = observed.iter().map(|s| s.unwrap_or(0)).collect();
    let mut best: Option<(S, Vec<usize>)> = None;
    loop {
        for i in (0..n).filter(|&i| free_leaf[i]) {
            let column = &net.node(i).cpt[column_start(net, i, &states)..][..net.cardinality(i)];
            let mut arg = 0;
            for s in 1..column.len() {
                if column[s] > column[arg] {
                    arg = s;
                }
            }
            states[i] = arg;
        }
        let p = (0..n).fold(S::one(), |acc, i| acc * net.node(i).cpt[entry(net, i, &states)]);
        let key: Vec<usize> = by_id.iter().map(|&i| states[i]).collect();
        let replace = match &best {
            None => true,
            Some((q, k)) => {
                let scale = p.max(*q);
                if p - *q > tolerance * scale {
                    true
                } else if *q - p > tolerance * scale {
                    false
                } else {
                    key < *k
                }
            }
        };
        if replace {
            best = Some((p, key));
        }

        let mut advanced = false;
        for &i in enumerated.iter().rev() {
            states[i] += 1;
            if states[i] < net.cardinality(i) {
                advanced = true;
                break;
            }
            states[i] = 0;
        }
        if !advanced {
            break;
        }
    }

    let (probability, key) = best.expect("at least one configuration");
    if probability <= S::zero() {
        return Err(InferenceError::ImpossibleEvidence);
    }
    let mut final_states = vec![0; n];
    for (&i, &s) in by_id.iter().zip(&key) {
        final_states[i] = s;
    }
    let assignment = (0..n)
        .filter(|&i| observed[i].is_none())
        .map(|i| (net.node(i).id.clone(), final_states[i]))
        .collect();
    Ok(Explanation {
        assignment,
        probability,
    })
}
