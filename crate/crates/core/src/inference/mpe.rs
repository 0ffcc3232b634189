use serde::Serialize;

use super::factor::Factor;
use super::{Evidence, InferenceError};
use crate::network::CompiledNetwork;
use crate::scalar::Scalar;

/// Relative tolerance under which two log-probabilities count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct Explanation<S> {
    /// State index of every unobserved node, in network order.
    pub assignment: Vec<(String, usize)>,
    /// Joint probability of the assignment together with the evidence.
    pub probability: S,
}

impl<S: Scalar> Explanation<S> {
    pub fn state_of(&self, id: &str) -> Option<usize> {
        self.assignment.iter().find(|(k, _)| k == id).map(|(_, s)| *s)
    }
}

struct Trace {
    var: usize,
    scope: Vec<usize>,
    cards: Vec<usize>,
    argmax: Vec<usize>,
}

/// `P(node states)` of a complete assignment, by the chain rule.
pub(crate) fn joint_probability<S: Scalar>(net: &CompiledNetwork<S>, states: &[usize]) -> S {
    (0..net.len()).fold(S::one(), |acc, i| {
        let parent_states: Vec<usize> = net.parents_of(i).iter().map(|&p| states[p]).collect();
        acc * net.probability(i, &parent_states, states[i])
    })
}

/// Most probable joint assignment of the unobserved nodes.
///
/// Max-product elimination in log space. Variables are eliminated in
/// reverse lexicographic id order so that the traceback, which runs in
/// lexicographic order and picks the lowest tied state, returns the
/// lexicographically smallest of all maximizing assignments.
pub fn mpe<S: Scalar>(
    net: &CompiledNetwork<S>,
    evidence: &Evidence,
) -> Result<Explanation<S>, InferenceError> {
    let observed = evidence.resolve(net)?;
    let tolerance = S::of(TIE_TOLERANCE);

    let mut factors: Vec<Factor<S>> = (0..net.len())
        .map(|i| {
            let mut f = Factor::from_node(net, i).map(|p| p.ln());
            for (v, state) in observed.iter().enumerate() {
                if let Some(s) = state {
                    if f.contains(v) {
                        f = f.reduce(v, *s);
                    }
                }
            }
            f
        })
        .collect();

    let mut order: Vec<usize> = (0..net.len()).filter(|&i| observed[i].is_none()).collect();
    order.sort_by(|&a, &b| net.node(b).id.cmp(&net.node(a).id));

    let mut traces = Vec::with_capacity(order.len());
    for &var in &order {
        let (touching, rest): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.contains(var));
        factors = rest;
        let product = touching[1..]
            .iter()
            .fold(touching[0].clone(), |acc, f| acc.log_product(f));
        let (reduced, argmax) = product.max_out(var, tolerance);
        traces.push(Trace {
            var,
            scope: reduced.vars().to_vec(),
            cards: reduced.cards().to_vec(),
            argmax,
        });
        factors.push(reduced);
    }

    let best = factors
        .iter()
        .fold(S::zero(), |acc, f| acc + f.table()[0]);
    if best == S::neg_infinity() || best.is_nan() {
        return Err(InferenceError::ImpossibleEvidence);
    }

    let mut states: Vec<usize> = observed.iter().map(|s| s.unwrap_or(usize::MAX)).collect();
    for trace in traces.iter().rev() {
        let idx = Factor::<S>::flat_index(&trace.scope, &trace.cards, |v| states[v]);
        states[trace.var] = trace.argmax[idx];
    }

    let probability = joint_probability(net, &states);
    let assignment = (0..net.len())
        .filter(|&i| observed[i].is_none())
        .map(|i| (net.node(i).id.clone(), states[i]))
        .collect();
    Ok(Explanation {
        assignment,
        probability,
    })
}
