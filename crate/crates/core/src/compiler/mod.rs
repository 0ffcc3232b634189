//! Derives a Bayesian network from a quality model and an assessment goal.
//!
//! 1. The goal names an activity; it and its sub-activities are collected,
//!    dropping branches that no fact impacts.
//! 2. Facts impacting those activities become nodes, with edges from
//!    sub-activities to parents and from facts to the impacted activities.
//! 3. Indicators attached to any collected node are added; every fact needs
//!    at least one.
//! 4. NPTs are synthesized: weighted-mean truncated Normals for ranked
//!    nodes, priors for roots and indicator expressions for indicators.

mod skeleton;
mod synthesize;

use thiserror::Error;

use crate::model::{expand_inheritance, FactRef, GoalSpec, Impact, QualityModel};
use crate::network::{CompiledNetwork, NetworkError};
use crate::npt::NptError;
use crate::scalar::Scalar;

pub use skeleton::{build_skeleton, Edge, EdgeTag, NetworkSkeleton, SkeletonNode, StateSpace};
pub use synthesize::synthesize_network;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("unknown goal `{0}`")]
    UnknownGoal(String),
    #[error("the model defines {0} goals; choose one")]
    AmbiguousGoal(usize),
    #[error("unknown activity `{0}`")]
    UnknownActivity(String),
    #[error("fact `{0}` has no indicator; every modelled fact needs at least one")]
    FactWithoutIndicator(String),
    #[error("`{node}` gives a weight to `{weight}`, which is not one of its parents")]
    WeightNotParent { node: String, weight: String },
    #[error("`{0}` has parents and cannot take a prior")]
    PriorOnNonRoot(String),
    #[error("prior of `{node}` has {actual} entries for {states} states")]
    PriorArity {
        node: String,
        states: usize,
        actual: usize,
    },
    #[error("NPT of `{node}`: {source}")]
    Npt { node: String, source: NptError },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Finds a goal by exact name, then by case-insensitive target activity or
/// name. With no selector the model's only goal is used.
pub fn resolve_goal<'m>(
    model: &'m QualityModel,
    selector: Option<&str>,
) -> Result<&'m GoalSpec, CompileError> {
    let Some(selector) = selector else {
        return match model.goals.as_slice() {
            [only] => Ok(only),
            [] => Err(CompileError::UnknownGoal("<none>".into())),
            many => Err(CompileError::AmbiguousGoal(many.len())),
        };
    };
    model
        .goal(selector)
        .or_else(|| {
            model
                .goals
                .iter()
                .find(|g| g.target_activity.eq_ignore_ascii_case(selector))
        })
        .or_else(|| {
            model
                .goals
                .iter()
                .find(|g| g.name.eq_ignore_ascii_case(selector))
        })
        .ok_or_else(|| CompileError::UnknownGoal(selector.to_owned()))
}

/// Goal activity plus its transitive sub-activities in pre-order, without
/// sub-trees that carry no impact. The goal activity itself is always kept.
pub fn derive_activities(
    model: &QualityModel,
    goal: &GoalSpec,
) -> Result<Vec<String>, CompileError> {
    let model = expand_inheritance(model);
    if model.activity(&goal.target_activity).is_none() {
        return Err(CompileError::UnknownActivity(goal.target_activity.clone()));
    }
    let impacted = |id: &str| model.impacts.iter().any(|i| i.activity == id);
    Ok(model
        .activity_subtree(&goal.target_activity)
        .into_iter()
        .filter(|a| {
            a.id == goal.target_activity
                || model
                    .activity_subtree(&a.id)
                    .iter()
                    .any(|d| impacted(&d.id))
        })
        .map(|a| a.id.clone())
        .collect())
}

/// Facts (tree order) with their impacts (declaration order) on `activities`.
pub fn collect_impacted_facts(
    model: &QualityModel,
    activities: &[String],
) -> Vec<(FactRef, Vec<Impact>)> {
    let model = expand_inheritance(model);
    model
        .facts_in_tree_order()
        .into_iter()
        .filter_map(|fact| {
            let reference = fact.reference();
            let impacts: Vec<Impact> = model
                .impacts
                .iter()
                .filter(|i| i.fact == reference && activities.contains(&i.activity))
                .cloned()
                .collect();
            (!impacts.is_empty()).then_some((reference, impacts))
        })
        .collect()
}

/// Runs all four steps.
pub fn compile<S: Scalar>(
    model: &QualityModel,
    goal: &GoalSpec,
) -> Result<CompiledNetwork<S>, CompileError> {
    let skeleton = build_skeleton(model, goal)?;
    synthesize_network(&skeleton, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    fn goal_on(activity: &str, indicator: &str) -> GoalSpec {
        GoalSpec {
            name: "g".into(),
            question: "q".into(),
            target_activity: activity.into(),
            target_indicator: indicator.into(),
        }
    }

    #[test]
    fn leaf_goal_with_one_impact() {
        let m = parse_model(
            r#"model "m" { activity A { activity B } entity E fact E.X impact E.X -> B + }"#,
        )
        .unwrap();
        assert_eq!(derive_activities(&m, &goal_on("B", "I")).unwrap(), vec!["B"]);
    }

    #[test]
    fn unimpacted_subtree_keeps_only_goal() {
        let m = parse_model(
            r#"model "m" { activity A { activity B { activity C activity D } } }"#,
        )
        .unwrap();
        assert_eq!(derive_activities(&m, &goal_on("B", "I")).unwrap(), vec!["B"]);
    }

    #[test]
    fn prunes_branches_without_impacts() {
        let m = parse_model(
            r#"model "m" {
                activity A { activity B { activity C } activity D { activity F } }
                entity E fact E.X impact E.X -> C -
            }"#,
        )
        .unwrap();
        assert_eq!(
            derive_activities(&m, &goal_on("A", "I")).unwrap(),
            vec!["A", "B", "C"]
        );
        assert_eq!(
            derive_activities(&m, &goal_on("Z", "I")),
            Err(CompileError::UnknownActivity("Z".into()))
        );
    }

    #[test]
    fn fact_impacting_two_activities() {
        let m = parse_model(
            r#"model "m" {
                activity A { activity B activity C }
                entity E fact E.X
                impact E.X -> B + impact E.X -> C -
            }"#,
        )
        .unwrap();
        let acts = derive_activities(&m, &goal_on("A", "I")).unwrap();
        let facts = collect_impacted_facts(&m, &acts);
        assert_eq!(facts.len(), 1);
        assert_eq!(facts[0].1.len(), 2);
        assert!(collect_impacted_facts(&m, &[]).is_empty());
    }

    #[test]
    fn inherited_impacts_are_collected() {
        let m = parse_model(
            r#"model "m" {
                activity A
                entity E entity K : E
                fact E.X impact E.X -> A +
            }"#,
        )
        .unwrap();
        let facts = collect_impacted_facts(&m, &["A".to_string()]);
        let ids: Vec<String> = facts.iter().map(|(f, _)| f.to_string()).collect();
        assert_eq!(ids, vec!["E.X", "K.X"]);
    }

    #[test]
    fn goal_resolution() {
        let m = parse_model(
            r#"model "m" {
                activity Maintenance
                indicator Effort for Maintenance { intervals [0, 1] arithmetic mean = 0.5 + 0 * level variance 1 }
                goal "Planning" { question "How much?" metric Effort activity Maintenance }
            }"#,
        )
        .unwrap();
        assert_eq!(resolve_goal(&m, Some("maintenance")).unwrap().name, "Planning");
        assert_eq!(resolve_goal(&m, Some("Planning")).unwrap().name, "Planning");
        assert_eq!(resolve_goal(&m, None).unwrap().name, "Planning");
        assert!(matches!(
            resolve_goal(&m, Some("security")),
            Err(CompileError::UnknownGoal(_))
        ));
    }
}
