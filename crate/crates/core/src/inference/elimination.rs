use std::collections::HashSet;

use super::factor::Factor;
use super::{ancestral_set, Evidence, InferenceError, Posterior};
use crate::network::CompiledNetwork;
use crate::scalar::{normalize, Scalar};

/// Picks the next variable by min-fill; ties go to the lexicographically
/// smallest node id.
fn next_min_fill<S: Scalar>(
    net: &CompiledNetwork<S>,
    factors: &[Factor<S>],
    remaining: &[usize],
) -> usize {
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    for f in factors {
        for &a in f.vars() {
            for &b in f.vars() {
                if a < b {
                    edges.insert((a, b));
                }
            }
        }
    }
    let mut best: Option<(usize, &str, usize)> = None;
    for (pos, &v) in remaining.iter().enumerate() {
        let mut neighbours: Vec<usize> = factors
            .iter()
            .filter(|f| f.contains(v))
            .flat_map(|f| f.vars().iter().copied())
            .filter(|&u| u != v)
            .collect();
        neighbours.sort_unstable();
        neighbours.dedup();
        let mut fill = 0;
        for (i, &a) in neighbours.iter().enumerate() {
            for &b in &neighbours[i + 1..] {
                if !edges.contains(&(a, b)) {
                    fill += 1;
                }
            }
        }
        let id = net.node(v).id.as_str();
        let better = match best {
            None => true,
            Some((best_fill, best_id, _)) => fill < best_fill || (fill == best_fill && id < best_id),
        };
        if better {
            best = Some((fill, id, pos));
        }
    }
    best.map(|(_, _, pos)| pos).expect("remaining is not empty")
}

/// Sums out `eliminate` in min-fill order. Each intermediate factor is
/// rescaled to a maximum of one; the log of the removed scale is returned.
fn sum_eliminate<S: Scalar>(
    net: &CompiledNetwork<S>,
    mut factors: Vec<Factor<S>>,
    mut eliminate: Vec<usize>,
) -> (Vec<Factor<S>>, S) {
    let mut log_scale = S::zero();
    while !eliminate.is_empty() {
        let pos = next_min_fill(net, &factors, &eliminate);
        let var = eliminate.swap_remove(pos);
        let (touching, rest): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.contains(var));
        factors = rest;
        let Some(first) = touching.first() else { continue };
        let product = touching[1..].iter().fold(first.clone(), |acc, f| acc.product(f));
        let mut reduced = product.sum_out(var);
        let scale = reduced.rescale();
        log_scale = log_scale + if scale > S::zero() { scale.ln() } else { S::neg_infinity() };
        factors.push(reduced);
    }
    (factors, log_scale)
}

fn reduced_factors<S: Scalar>(
    net: &CompiledNetwork<S>,
    keep: &[bool],
    observed: &[Option<usize>],
) -> Vec<Factor<S>> {
    (0..net.len())
        .filter(|&i| keep[i])
        .map(|i| {
            let mut f = Factor::from_node(net, i);
            for (v, state) in observed.iter().enumerate() {
                if let Some(s) = state {
                    if f.contains(v) {
                        f = f.reduce(v, *s);
                    }
                }
            }
            f
        })
        .collect()
}

fn evidence_probability_resolved<S: Scalar>(
    net: &CompiledNetwork<S>,
    observed: &[Option<usize>],
) -> S {
    let targets: Vec<usize> = (0..net.len()).filter(|&i| observed[i].is_some()).collect();
    if targets.is_empty() {
        return S::one();
    }
    let keep = ancestral_set(net, &targets);
    let factors = reduced_factors(net, &keep, observed);
    let eliminate: Vec<usize> = (0..net.len())
        .filter(|&i| keep[i] && observed[i].is_none())
        .collect();
    let (factors, mut log_p) = sum_eliminate(net, factors, eliminate);
    for f in &factors {
        let value = f.table()[0];
        if value <= S::zero() {
            return S::zero();
        }
        log_p = log_p + value.ln();
    }
    log_p.exp()
}

/// `P(evidence)`; one for empty evidence.
pub fn evidence_probability<S: Scalar>(
    net: &CompiledNetwork<S>,
    evidence: &Evidence,
) -> Result<S, InferenceError> {
    let observed = evidence.resolve(net)?;
    Ok(evidence_probability_resolved(net, &observed))
}

fn marginal<S: Scalar>(
    net: &CompiledNetwork<S>,
    observed: &[Option<usize>],
    query: usize,
) -> Result<Vec<S>, InferenceError> {
    if let Some(state) = observed[query] {
        let mut point = vec![S::zero(); net.cardinality(query)];
        point[state] = S::one();
        return Ok(point);
    }
    let mut targets: Vec<usize> = (0..net.len()).filter(|&i| observed[i].is_some()).collect();
    targets.push(query);
    let keep = ancestral_set(net, &targets);
    let factors = reduced_factors(net, &keep, observed);
    let eliminate: Vec<usize> = (0..net.len())
        .filter(|&i| keep[i] && observed[i].is_none() && i != query)
        .collect();
    let (factors, _) = sum_eliminate(net, factors, eliminate);
    // Factors without the query are constants and cancel on normalization.
    let mut dist: Option<Factor<S>> = None;
    for f in factors.iter().filter(|f| f.contains(query)) {
        dist = Some(match dist {
            None => f.clone(),
            Some(acc) => acc.product(f),
        });
    }
    let mut values = dist.expect("query has its own factor").table().to_vec();
    let total = normalize(&mut values);
    if !(total > S::zero() && total.is_finite()) {
        return Err(InferenceError::ImpossibleEvidence);
    }
    Ok(values)
}

/// Exact posterior marginal of one node given hard evidence.
pub fn posterior_marginal<S: Scalar>(
    net: &CompiledNetwork<S>,
    evidence: &Evidence,
    node: &str,
) -> Result<Vec<S>, InferenceError> {
    let observed = evidence.resolve(net)?;
    let query = net
        .index_of(node)
        .ok_or_else(|| InferenceError::UnknownNode(node.to_owned()))?;
    if evidence_probability_resolved(net, &observed) <= S::zero() {
        return Err(InferenceError::ImpossibleEvidence);
    }
    marginal(net, &observed, query)
}

/// Exact posterior marginal of every node given hard evidence.
pub fn posterior_marginals<S: Scalar>(
    net: &CompiledNetwork<S>,
    evidence: &Evidence,
) -> Result<Posterior<S>, InferenceError> {
    let observed = evidence.resolve(net)?;
    if evidence_probability_resolved(net, &observed) <= S::zero() {
        return Err(InferenceError::ImpossibleEvidence);
    }
    let entries = (0..net.len())
        .map(|i| Ok((net.node(i).id.clone(), marginal(net, &observed, i)?)))
        .collect::<Result<Vec<_>, InferenceError>>()?;
    Ok(Posterior::new(entries))
}
