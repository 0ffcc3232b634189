use super::{CompileError, EdgeTag, NetworkSkeleton, SkeletonNode, StateSpace};
use crate::model::{expand_inheritance, FactRef, NodeRef, QualityModel};
use crate::network::{CompiledNetwork, NetworkNode, NodeKind};
use crate::npt::{
    build_indicator_npt, build_ranked_npt, ranked_labels, NptError, RankedScale, WeightedParent,
};
use crate::scalar::Scalar;

fn node_ref(node: &SkeletonNode) -> Option<NodeRef> {
    match node.kind {
        NodeKind::Activity => Some(NodeRef::Activity(node.id.clone())),
        NodeKind::Fact => node
            .id
            .split_once('.')
            .map(|(e, a)| NodeRef::Fact(FactRef::new(e, a))),
        NodeKind::Indicator => None,
    }
}

fn interval_labels(bounds: &[f64]) -> Vec<String> {
    let n = bounds.len() - 1;
    (0..n)
        .map(|i| {
            let close = if i + 1 == n { ']' } else { ')' };
            format!("[{}, {}{close}", bounds[i], bounds[i + 1])
        })
        .collect()
}

fn ranked(node: &SkeletonNode) -> RankedScale {
    match node.states {
        StateSpace::Ranked(k) => RankedScale::new(k),
        StateSpace::Intervals(_) => unreachable!("indicators have no ranked scale"),
    }
}

fn npt_error(node: &str) -> impl Fn(NptError) -> CompileError + '_ {
    move |source| CompileError::Npt {
        node: node.to_owned(),
        source,
    }
}

/// Step 4: quantifies a skeleton into a validated network.
pub fn synthesize_network<S: Scalar>(
    skeleton: &NetworkSkeleton,
    model: &QualityModel,
) -> Result<CompiledNetwork<S>, CompileError> {
    let model = expand_inheritance(model);
    let mut nodes = Vec::with_capacity(skeleton.nodes.len());

    for node in &skeleton.nodes {
        let incoming = skeleton.incoming(&node.id);
        let parents: Vec<String> = incoming.iter().map(|e| e.from.clone()).collect();
        let (states, bounds, cpt) = match &node.states {
            StateSpace::Intervals(bounds) => {
                let spec = model
                    .indicator(&node.id)
                    .expect("skeleton indicators come from the model");
                let subject = skeleton
                    .node(&incoming[0].from)
                    .expect("indicator subject is a skeleton node");
                let npt = build_indicator_npt::<S>(spec, ranked(subject))
                    .map_err(npt_error(&node.id))?;
                let bounds_s = bounds.iter().map(|&b| S::of(b)).collect();
                (interval_labels(bounds), Some(bounds_s), npt.table)
            }
            StateSpace::Ranked(k) => {
                let reference = node_ref(node).expect("ranked nodes are activities or facts");
                let quant = model.quantification(&reference);
                if let Some(q) = quant {
                    for (w, _) in &q.weights {
                        if !parents.contains(&w.node_id()) {
                            return Err(CompileError::WeightNotParent {
                                node: node.id.clone(),
                                weight: w.node_id(),
                            });
                        }
                    }
                }
                let prior = quant.and_then(|q| q.prior.as_ref());
                let cpt = if incoming.is_empty() {
                    match prior {
                        Some(p) if p.len() != *k => {
                            return Err(CompileError::PriorArity {
                                node: node.id.clone(),
                                states: *k,
                                actual: p.len(),
                            })
                        }
                        Some(p) => p.iter().map(|&x| S::of(x)).collect(),
                        None => vec![S::one() / S::of_usize(*k); *k],
                    }
                } else {
                    if prior.is_some() {
                        return Err(CompileError::PriorOnNonRoot(node.id.clone()));
                    }
                    let weighted: Vec<WeightedParent<S>> = incoming
                        .iter()
                        .map(|e| {
                            let parent = skeleton.node(&e.from).expect("edge source exists");
                            let weight = quant.map_or(crate::model::DEFAULT_WEIGHT, |q| {
                                q.weight(&node_ref(parent).expect("ranked parent"))
                            });
                            debug_assert!(e.tag != EdgeTag::Indicates);
                            WeightedParent {
                                scale: ranked(parent),
                                weight: S::of(weight),
                                sign: e.tag.sign(),
                            }
                        })
                        .collect();
                    let variance = quant.map_or(crate::model::DEFAULT_VARIANCE, |q| q.variance());
                    build_ranked_npt(&weighted, S::of(variance), RankedScale::new(*k))
                        .map_err(npt_error(&node.id))?
                        .table
                };
                (ranked_labels(*k), None, cpt)
            }
        };
        nodes.push(NetworkNode {
            id: node.id.clone(),
            kind: node.kind,
            states,
            bounds,
            parents,
            cpt,
        });
    }
    Ok(CompiledNetwork::new(skeleton.name.clone(), nodes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{build_skeleton, compile};
    use crate::model::parse_model;

    const SMALL: &str = r#"model "small" {
        activity Use { activity Read }
        entity Code
        fact Code.Clarity
        impact Code.Clarity -> Read +
        quantify Code.Clarity { prior [0.2, 0.3, 0.5] }
        quantify Use { variance 0.01 }
        indicator Effort for Use { intervals [0, 5, 10] arithmetic mean = 8 - 6 * level variance 4 }
        indicator Clarity for Code.Clarity { intervals [0, 0.5, 1] partitioned {
            low: tnormal(0.2, 0.01) medium: tnormal(0.5, 0.01) high: tnormal(0.8, 0.01) } }
        goal "effort" { question "How much?" metric Effort activity Use }
    }"#;

    #[test]
    fn compiles_small_model() {
        let m = parse_model(SMALL).unwrap();
        let net: CompiledNetwork<f64> = compile(&m, &m.goals[0]).unwrap();
        let ids: Vec<&str> = net.nodes().iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, vec!["Use", "Read", "Code.Clarity", "Effort", "Clarity"]);
        assert_eq!(net.get("Code.Clarity").unwrap().cpt, vec![0.2, 0.3, 0.5]);
        assert_eq!(net.get("Read").unwrap().parents, vec!["Code.Clarity"]);
        assert_eq!(
            net.get("Effort").unwrap().states,
            vec!["[0, 5)", "[5, 10]"]
        );
        let effort = net.get("Effort").unwrap();
        // Lower level of Use gives higher effort.
        assert!(effort.cpt[1] > effort.cpt[5]);
    }

    #[test]
    fn weight_on_non_parent_is_rejected() {
        let text = SMALL.replace(
            "quantify Use { variance 0.01 }",
            "quantify Use { variance 0.01 weights { Code.Clarity: 2 } }",
        );
        let m = parse_model(&text).unwrap();
        let s = build_skeleton(&m, &m.goals[0]).unwrap();
        assert!(matches!(
            synthesize_network::<f64>(&s, &m),
            Err(CompileError::WeightNotParent { .. })
        ));
    }

    #[test]
    fn prior_on_non_root_is_rejected() {
        let text = SMALL.replace(
            "quantify Use { variance 0.01 }",
            "quantify Use { prior [0.2, 0.3, 0.5] }",
        );
        let m = parse_model(&text).unwrap();
        assert_eq!(
            compile::<f64>(&m, &m.goals[0]),
            Err(CompileError::PriorOnNonRoot("Use".into()))
        );
    }

    #[test]
    fn f32_and_f64_agree() {
        let m = parse_model(SMALL).unwrap();
        let a: CompiledNetwork<f64> = compile(&m, &m.goals[0]).unwrap();
        let b: CompiledNetwork<f32> = compile(&m, &m.goals[0]).unwrap();
        for (x, y) in a.nodes().iter().zip(b.nodes()) {
            for (p, q) in x.cpt.iter().zip(&y.cpt) {
                assert!((p - *q as f64).abs() < 1e-5);
            }
        }
    }
}
