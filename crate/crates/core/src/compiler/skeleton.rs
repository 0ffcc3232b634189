use serde::Serialize;

use super::{collect_impacted_facts, derive_activities, CompileError};
use crate::model::{expand_inheritance, GoalSpec, NodeRef, QualityModel, Sign};
use crate::network::NodeKind;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StateSpace {
    /// Ranked node with this many states.
    Ranked(usize),
    /// Indicator with these interval boundaries.
    Intervals(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkeletonNode {
    pub id: String,
    pub kind: NodeKind,
    pub states: StateSpace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EdgeTag {
    Subactivity,
    Impact(Sign),
    Indicates,
}

impl EdgeTag {
    /// Direction of the parent's influence in a weighted mean.
    pub fn sign(self) -> Sign {
        match self {
            EdgeTag::Impact(sign) => sign,
            EdgeTag::Subactivity | EdgeTag::Indicates => Sign::Positive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub tag: EdgeTag,
}

/// Network structure before quantification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkSkeleton {
    pub name: String,
    /// Activities (pre-order), facts (tree order), indicators (declaration order).
    pub nodes: Vec<SkeletonNode>,
    /// Sub-activity edges, then impact edges, then indicator edges.
    pub edges: Vec<Edge>,
}

impl NetworkSkeleton {
    pub fn node(&self, id: &str) -> Option<&SkeletonNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Incoming edges of `id` in edge order; this is the NPT parent order.
    pub fn incoming(&self, id: &str) -> Vec<&Edge> {
        self.edges.iter().filter(|e| e.to == id).collect()
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }
}

/// Steps 1 to 3: activities, impacting facts and indicators.
pub fn build_skeleton(
    model: &QualityModel,
    goal: &GoalSpec,
) -> Result<NetworkSkeleton, CompileError> {
    let model = expand_inheritance(model);
    let activities = derive_activities(&model, goal)?;
    let facts = collect_impacted_facts(&model, &activities);

    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for id in &activities {
        let node = NodeRef::Activity(id.clone());
        nodes.push(SkeletonNode {
            id: id.clone(),
            kind: NodeKind::Activity,
            states: StateSpace::Ranked(model.state_count(&node)),
        });
        if id == &goal.target_activity {
            continue;
        }
        let parent = model
            .activity(id)
            .and_then(|a| a.parent.clone())
            .expect("non-goal activities have a parent inside the set");
        edges.push(Edge {
            from: id.clone(),
            to: parent,
            tag: EdgeTag::Subactivity,
        });
    }
    for (fact, _) in &facts {
        nodes.push(SkeletonNode {
            id: fact.to_string(),
            kind: NodeKind::Fact,
            states: StateSpace::Ranked(model.state_count(&NodeRef::Fact(fact.clone()))),
        });
    }
    for impact in model.impacts.iter().filter(|i| {
        activities.contains(&i.activity) && facts.iter().any(|(f, _)| *f == i.fact)
    }) {
        edges.push(Edge {
            from: impact.fact.to_string(),
            to: impact.activity.clone(),
            tag: EdgeTag::Impact(impact.sign),
        });
    }

    for indicator in &model.indicators {
        let subject = indicator.subject.node_id();
        if !nodes.iter().any(|n| n.id == subject) {
            continue;
        }
        nodes.push(SkeletonNode {
            id: indicator.id.clone(),
            kind: NodeKind::Indicator,
            states: StateSpace::Intervals(indicator.boundaries.clone()),
        });
        edges.push(Edge {
            from: subject,
            to: indicator.id.clone(),
            tag: EdgeTag::Indicates,
        });
    }

    for (fact, _) in &facts {
        let id = fact.to_string();
        if !edges
            .iter()
            .any(|e| e.tag == EdgeTag::Indicates && e.from == id)
        {
            return Err(CompileError::FactWithoutIndicator(id));
        }
    }
    debug_assert!(nodes.iter().any(|n| n.id == goal.target_indicator));

    Ok(NetworkSkeleton {
        name: model.name.clone(),
        nodes,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    #[test]
    fn single_activity_and_indicator() {
        let m = parse_model(
            r#"model "m" {
                activity A
                indicator I for A { intervals [0, 1, 2] arithmetic mean = 1 + 0 * level variance 1 }
                goal "g" { question "q" metric I activity A }
            }"#,
        )
        .unwrap();
        let s = build_skeleton(&m, &m.goals[0]).unwrap();
        assert_eq!(s.nodes.len(), 2);
        assert_eq!(s.edges.len(), 1);
        assert_eq!(s.edges[0].tag, EdgeTag::Indicates);
    }

    #[test]
    fn fact_without_indicator_is_rejected() {
        let m = parse_model(
            r#"model "m" {
                activity A
                entity Module fact Module.Extent impact Module.Extent -> A -
                indicator I for A { intervals [0, 1, 2] arithmetic mean = 1 + 0 * level variance 1 }
                goal "g" { question "q" metric I activity A }
            }"#,
        )
        .unwrap();
        assert_eq!(
            build_skeleton(&m, &m.goals[0]),
            Err(CompileError::FactWithoutIndicator("Module.Extent".into()))
        );
    }
}
