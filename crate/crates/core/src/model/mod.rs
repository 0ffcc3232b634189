//! Activity-based quality models: entities, facts, activities and the signed
//! impacts between them, plus the indicator, quantification and goal
//! annotations needed to turn a model into a Bayesian network.
//!
//! Models are written in a small block-structured language (see
//! [`parse_model`]) and printed back canonically by [`print_model`].

mod diagnostic;
mod inherit;
mod matrix;
mod printer;
mod syntax;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use diagnostic::{Diagnostic, DiagnosticKind, ModelError, Pos};
pub use inherit::expand_inheritance;
pub use matrix::{export_matrix, MatrixView};
pub use printer::print_model;

/// Number of ranked states used when a node carries no `states` annotation.
pub const DEFAULT_STATE_COUNT: usize = 3;
/// Variance of the truncated Normal used for ranked NPTs when none is given.
pub const DEFAULT_VARIANCE: f64 = 0.05;
/// Weight of a parent in the weighted mean when none is given.
pub const DEFAULT_WEIGHT: f64 = 1.0;

/// Parses and validates model source text.
pub fn parse_model(text: &str) -> Result<QualityModel, ModelError> {
    let ast = syntax::parse(text).map_err(|d| ModelError::new(vec![d]))?;
    validate::validate(ast)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    /// Enclosing entity (the block this entity was declared in).
    pub parent_part_of: Option<String>,
    /// Super-entity this entity is a kind of.
    pub parent_is_a: Option<String>,
}

impl Entity {
    pub fn name(&self) -> &str {
        &self.id
    }
}

/// `Entity.Attribute` pair identifying a fact.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FactRef {
    pub entity: String,
    pub attribute: String,
}

impl FactRef {
    pub fn new(entity: impl Into<String>, attribute: impl Into<String>) -> Self {
        FactRef {
            entity: entity.into(),
            attribute: attribute.into(),
        }
    }
}

impl fmt::Display for FactRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.entity, self.attribute)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fact {
    pub entity: String,
    pub attribute: String,
    pub description: Option<String>,
    /// Set on facts materialized by [`expand_inheritance`]: the entity that declared it.
    pub inherited_from: Option<String>,
}

impl Fact {
    pub fn reference(&self) -> FactRef {
        FactRef::new(self.entity.clone(), self.attribute.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub id: String,
    pub parent: Option<String>,
    pub children: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Impact {
    pub fact: FactRef,
    pub activity: String,
    pub sign: Sign,
}

/// Reference to a node of the quality model that can carry states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeRef {
    Activity(String),
    Fact(FactRef),
}

impl NodeRef {
    /// Identifier of the corresponding network node.
    pub fn node_id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Activity(id) => f.write_str(id),
            NodeRef::Fact(fact) => fact.fmt(f),
        }
    }
}

/// Mean and variance of a truncated Normal in indicator units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TNormalParams {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum IndicatorExpr {
    /// One distribution per state label of the subject node.
    Partitioned(Vec<(String, TNormalParams)>),
    /// `mean = intercept + slope * level`; `slope` carries the sign.
    Arithmetic {
        intercept: f64,
        slope: f64,
        variance: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSpec {
    pub id: String,
    pub subject: NodeRef,
    /// Interval boundaries; `n` boundaries define `n - 1` states.
    pub boundaries: Vec<f64>,
    pub expression: IndicatorExpr,
}

/// Quantitative annotation of an activity or fact node. Missing values fall
/// back to the crate defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantAnnotation {
    pub node: NodeRef,
    pub states: Option<usize>,
    pub variance: Option<f64>,
    pub weights: Vec<(NodeRef, f64)>,
    pub prior: Option<Vec<f64>>,
}

impl QuantAnnotation {
    pub fn new(node: NodeRef) -> Self {
        QuantAnnotation {
            node,
            states: None,
            variance: None,
            weights: Vec::new(),
            prior: None,
        }
    }

    pub fn state_count(&self) -> usize {
        self.states.unwrap_or(DEFAULT_STATE_COUNT)
    }

    pub fn variance(&self) -> f64 {
        self.variance.unwrap_or(DEFAULT_VARIANCE)
    }

    pub fn weight(&self, parent: &NodeRef) -> f64 {
        self.weights
            .iter()
            .find(|(r, _)| r == parent)
            .map_or(DEFAULT_WEIGHT, |(_, w)| *w)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    pub name: String,
    pub question: String,
    pub target_activity: String,
    pub target_indicator: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityModel {
    pub name: String,
    /// Pre-order over the part-of forest.
    pub entities: Vec<Entity>,
    pub facts: Vec<Fact>,
    /// Pre-order over the activity tree.
    pub activities: Vec<Activity>,
    pub impacts: Vec<Impact>,
    pub quantifications: Vec<QuantAnnotation>,
    pub indicators: Vec<IndicatorSpec>,
    pub goals: Vec<GoalSpec>,
}

impl QualityModel {
    pub fn activity(&self, id: &str) -> Option<&Activity> {
        self.activities.iter().find(|a| a.id == id)
    }

    pub fn root_activity(&self) -> Option<&Activity> {
        self.activities.iter().find(|a| a.parent.is_none())
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn fact(&self, fact: &FactRef) -> Option<&Fact> {
        self.facts
            .iter()
            .find(|f| f.entity == fact.entity && f.attribute == fact.attribute)
    }

    pub fn indicator(&self, id: &str) -> Option<&IndicatorSpec> {
        self.indicators.iter().find(|i| i.id == id)
    }

    pub fn goal(&self, name: &str) -> Option<&GoalSpec> {
        self.goals.iter().find(|g| g.name == name)
    }

    pub fn quantification(&self, node: &NodeRef) -> Option<&QuantAnnotation> {
        self.quantifications.iter().find(|q| &q.node == node)
    }

    pub fn contains(&self, node: &NodeRef) -> bool {
        match node {
            NodeRef::Activity(id) => self.activity(id).is_some(),
            NodeRef::Fact(f) => self.fact(f).is_some(),
        }
    }

    /// Number of ranked states of an activity or fact node.
    pub fn state_count(&self, node: &NodeRef) -> usize {
        self.quantification(node)
            .map_or(DEFAULT_STATE_COUNT, QuantAnnotation::state_count)
    }

    /// `id` followed by all transitive sub-activities, in pre-order.
    pub fn activity_subtree(&self, id: &str) -> Vec<&Activity> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(next) = stack.pop() {
            if let Some(activity) = self.activity(next) {
                out.push(activity);
                stack.extend(activity.children.iter().rev().map(String::as_str));
            }
        }
        out
    }

    /// Entities in part-of pre-order (declaration order of the nesting).
    pub fn entity_order(&self) -> Vec<&str> {
        fn visit<'a>(model: &'a QualityModel, id: &'a str, out: &mut Vec<&'a str>) {
            out.push(id);
            for child in model
                .entities
                .iter()
                .filter(|e| e.parent_part_of.as_deref() == Some(id))
            {
                visit(model, &child.id, out);
            }
        }
        let mut out = Vec::with_capacity(self.entities.len());
        for root in self.entities.iter().filter(|e| e.parent_part_of.is_none()) {
            visit(self, &root.id, &mut out);
        }
        out
    }

    /// Facts grouped by entity in part-of pre-order, declaration order within an entity.
    pub fn facts_in_tree_order(&self) -> Vec<&Fact> {
        self.entity_order()
            .into_iter()
            .flat_map(|entity| self.facts.iter().filter(move |f| f.entity == entity))
            .collect()
    }

    /// Transitive is-a descendants of `entity`, nearest first.
    pub fn kinds_of(&self, entity: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let mut frontier = vec![entity];
        while let Some(current) = frontier.pop() {
            for e in &self.entities {
                if e.parent_is_a.as_deref() == Some(current) && !out.contains(&e.id.as_str()) {
                    out.push(&e.id);
                    frontier.push(&e.id);
                }
            }
        }
        out
    }
}
