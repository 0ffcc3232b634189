//! AST to [`QualityModel`] conversion with cross-reference checks.

use std::collections::{HashMap, HashSet};

use super::diagnostic::{Diagnostic, DiagnosticKind, ModelError, Pos};
use super::syntax::{ActivityAst, EntityAst, ExprAst, ItemAst, ModelAst, RefAst};
use super::{
    Activity, Entity, Fact, FactRef, GoalSpec, Impact, IndicatorExpr, IndicatorSpec, NodeRef,
    QualityModel, QuantAnnotation, TNormalParams,
};
use crate::npt::ranked_labels;

struct Checker {
    diags: Vec<Diagnostic>,
}

impl Checker {
    fn push(&mut self, kind: DiagnosticKind, pos: Pos, message: impl Into<String>) {
        self.diags.push(Diagnostic::new(kind, pos, message));
    }
}

fn flatten_activities(
    ast: &ActivityAst,
    parent: Option<&str>,
    out: &mut Vec<(Activity, Pos)>,
) {
    out.push((
        Activity {
            id: ast.id.value.clone(),
            parent: parent.map(str::to_owned),
            children: ast.children.iter().map(|c| c.id.value.clone()).collect(),
        },
        ast.id.pos,
    ));
    for child in &ast.children {
        flatten_activities(child, Some(&ast.id.value), out);
    }
}

fn flatten_entities(
    ast: &EntityAst,
    parent: Option<&str>,
    out: &mut Vec<(Entity, Pos, Option<Pos>)>,
) {
    out.push((
        Entity {
            id: ast.id.value.clone(),
            parent_part_of: parent.map(str::to_owned),
            parent_is_a: ast.is_a.as_ref().map(|i| i.value.clone()),
        },
        ast.id.pos,
        ast.is_a.as_ref().map(|i| i.pos),
    ));
    for child in &ast.children {
        flatten_entities(child, Some(&ast.id.value), out);
    }
}

fn to_node_ref(r: &RefAst) -> NodeRef {
    match r {
        RefAst::Activity(id) => NodeRef::Activity(id.value.clone()),
        RefAst::Fact(e, a) => NodeRef::Fact(FactRef::new(e.value.clone(), a.value.clone())),
    }
}

pub(crate) fn validate(ast: ModelAst) -> Result<QualityModel, ModelError> {
    let mut ck = Checker { diags: Vec::new() };

    let mut activities = Vec::new();
    let mut entities = Vec::new();
    for item in &ast.items {
        match item {
            ItemAst::Activity(a) => flatten_activities(a, None, &mut activities),
            ItemAst::Entity(e) => flatten_entities(e, None, &mut entities),
            _ => {}
        }
    }

    // Activities: unique ids, a single root.
    let mut activity_ids: HashSet<String> = HashSet::new();
    let mut roots = 0;
    for (activity, pos) in &activities {
        if !activity_ids.insert(activity.id.clone()) {
            ck.push(
                DiagnosticKind::Duplicate,
                *pos,
                format!("activity `{}` is declared more than once", activity.id),
            );
        }
        if activity.parent.is_none() {
            roots += 1;
            if roots > 1 {
                ck.push(
                    DiagnosticKind::Invalid,
                    *pos,
                    format!(
                        "activity `{}` is a second root; activities must form a single tree",
                        activity.id
                    ),
                );
            }
        }
    }
    if activities.is_empty() {
        ck.push(DiagnosticKind::Invalid, Pos::new(1, 1), "model declares no activity");
    }

    // Entities: unique ids, resolvable and acyclic is-a edges.
    let mut entity_ids: HashSet<String> = HashSet::new();
    for (entity, pos, _) in &entities {
        if !entity_ids.insert(entity.id.clone()) {
            ck.push(
                DiagnosticKind::Duplicate,
                *pos,
                format!("entity `{}` is declared more than once", entity.id),
            );
        }
    }
    let part_of: HashMap<&str, &str> = entities
        .iter()
        .filter_map(|(e, _, _)| e.parent_part_of.as_deref().map(|p| (e.id.as_str(), p)))
        .collect();
    let is_a: HashMap<&str, &str> = entities
        .iter()
        .filter_map(|(e, _, _)| e.parent_is_a.as_deref().map(|p| (e.id.as_str(), p)))
        .collect();
    for (entity, _, is_a_pos) in &entities {
        let (Some(sup), Some(pos)) = (entity.parent_is_a.as_deref(), is_a_pos) else {
            continue;
        };
        if !entity_ids.contains(sup) {
            ck.push(
                DiagnosticKind::UnknownReference,
                *pos,
                format!("entity `{}` is a kind of unknown entity `{sup}`", entity.id),
            );
            continue;
        }
        // Walk up the is-a chain looking for a cycle through this entity.
        let mut seen = HashSet::new();
        let mut current = entity.id.as_str();
        while let Some(&next) = is_a.get(current) {
            if next == entity.id || !seen.insert(next) {
                ck.push(
                    DiagnosticKind::Cycle,
                    *pos,
                    format!("is-a edges through entity `{}` form a cycle", entity.id),
                );
                break;
            }
            current = next;
        }
        // The super-entity must not be a part-of descendant of this entity.
        let mut up = sup;
        while let Some(&p) = part_of.get(up) {
            if p == entity.id {
                ck.push(
                    DiagnosticKind::Cycle,
                    *pos,
                    format!(
                        "entity `{}` cannot be a kind of `{sup}`, which is one of its parts",
                        entity.id
                    ),
                );
                break;
            }
            up = p;
        }
    }

    // Facts.
    let mut facts = Vec::new();
    let mut fact_keys: HashSet<FactRef> = HashSet::new();
    for item in &ast.items {
        if let ItemAst::Fact { entity, attribute } = item {
            if !entity_ids.contains(&entity.value) {
                ck.push(
                    DiagnosticKind::UnknownReference,
                    entity.pos,
                    format!("fact refers to unknown entity `{}`", entity.value),
                );
            }
            let key = FactRef::new(entity.value.clone(), attribute.value.clone());
            if !fact_keys.insert(key.clone()) {
                ck.push(
                    DiagnosticKind::Duplicate,
                    entity.pos,
                    format!("fact `{key}` is declared more than once"),
                );
                continue;
            }
            facts.push(Fact {
                entity: key.entity,
                attribute: key.attribute,
                description: None,
                inherited_from: None,
            });
        }
    }

    let resolve = |ck: &mut Checker, r: &RefAst| -> bool {
        match r {
            RefAst::Activity(id) if !activity_ids.contains(&id.value) => {
                ck.push(
                    DiagnosticKind::UnknownReference,
                    id.pos,
                    format!("unknown activity `{}`", id.value),
                );
                false
            }
            RefAst::Fact(e, a)
                if !fact_keys.contains(&FactRef::new(e.value.clone(), a.value.clone())) =>
            {
                ck.push(
                    DiagnosticKind::UnknownReference,
                    e.pos,
                    format!("unknown fact `{}.{}`", e.value, a.value),
                );
                false
            }
            _ => true,
        }
    };

    // Impacts.
    let mut impacts: Vec<Impact> = Vec::new();
    for item in &ast.items {
        if let ItemAst::Impact {
            entity,
            attribute,
            activity,
            sign,
        } = item
        {
            let fact_ok = resolve(&mut ck, &RefAst::Fact(entity.clone(), attribute.clone()));
            let activity_ok = resolve(&mut ck, &RefAst::Activity(activity.clone()));
            if !(fact_ok && activity_ok) {
                continue;
            }
            let fact = FactRef::new(entity.value.clone(), attribute.value.clone());
            if impacts
                .iter()
                .any(|i| i.fact == fact && i.activity == activity.value)
            {
                ck.push(
                    DiagnosticKind::Duplicate,
                    entity.pos,
                    format!("impact of `{fact}` on `{}` is declared more than once", activity.value),
                );
                continue;
            }
            impacts.push(Impact {
                fact,
                activity: activity.value.clone(),
                sign: *sign,
            });
        }
    }

    // Quantifications.
    let mut quantifications: Vec<QuantAnnotation> = Vec::new();
    for item in &ast.items {
        let ItemAst::Quantify(q) = item else { continue };
        if !resolve(&mut ck, &q.node) {
            continue;
        }
        let node = to_node_ref(&q.node);
        if quantifications.iter().any(|existing| existing.node == node) {
            ck.push(
                DiagnosticKind::Duplicate,
                q.pos,
                format!("`{node}` is quantified more than once"),
            );
            continue;
        }
        let mut annotation = QuantAnnotation::new(node.clone());
        if let Some(states) = &q.states {
            if states.value < 2 {
                ck.push(
                    DiagnosticKind::Invalid,
                    states.pos,
                    format!("`{node}` needs at least 2 states, got {}", states.value),
                );
            } else {
                annotation.states = Some(states.value as usize);
            }
        }
        if let Some(variance) = &q.variance {
            if variance.value <= 0.0 {
                ck.push(
                    DiagnosticKind::Invalid,
                    variance.pos,
                    format!("variance of `{node}` must be positive, got {}", variance.value),
                );
            } else {
                annotation.variance = Some(variance.value);
            }
        }
        for (parent, weight) in &q.weights {
            if !resolve(&mut ck, parent) {
                continue;
            }
            let parent = to_node_ref(parent);
            if weight.value <= 0.0 {
                ck.push(
                    DiagnosticKind::Invalid,
                    weight.pos,
                    format!("weight of `{parent}` must be positive, got {}", weight.value),
                );
            } else if annotation.weights.iter().any(|(p, _)| *p == parent) {
                ck.push(
                    DiagnosticKind::Duplicate,
                    weight.pos,
                    format!("weight of `{parent}` is given more than once"),
                );
            } else {
                annotation.weights.push((parent, weight.value));
            }
        }
        if let Some(prior) = &q.prior {
            let k = annotation.state_count();
            let total: f64 = prior.value.iter().sum();
            if prior.value.len() != k {
                ck.push(
                    DiagnosticKind::Invalid,
                    prior.pos,
                    format!(
                        "prior of `{node}` has {} entries but the node has {k} states",
                        prior.value.len()
                    ),
                );
            } else if prior.value.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-9 {
                ck.push(
                    DiagnosticKind::Invalid,
                    prior.pos,
                    format!("prior of `{node}` must be non-negative and sum to 1, sums to {total}"),
                );
            } else {
                annotation.prior = Some(prior.value.clone());
            }
        }
        quantifications.push(annotation);
    }
    let state_count = |node: &NodeRef| {
        quantifications
            .iter()
            .find(|q| &q.node == node)
            .map_or(super::DEFAULT_STATE_COUNT, QuantAnnotation::state_count)
    };

    // Indicators.
    let mut indicators: Vec<IndicatorSpec> = Vec::new();
    for item in &ast.items {
        let ItemAst::Indicator(ind) = item else { continue };
        if activity_ids.contains(&ind.id.value) {
            ck.push(
                DiagnosticKind::Duplicate,
                ind.id.pos,
                format!("indicator `{}` has the same name as an activity", ind.id.value),
            );
            continue;
        }
        if indicators.iter().any(|i| i.id == ind.id.value) {
            ck.push(
                DiagnosticKind::Duplicate,
                ind.id.pos,
                format!("indicator `{}` is declared more than once", ind.id.value),
            );
            continue;
        }
        if !resolve(&mut ck, &ind.subject) {
            continue;
        }
        let subject = to_node_ref(&ind.subject);
        let bounds = &ind.intervals.value;
        if bounds.len() < 2 {
            ck.push(
                DiagnosticKind::Invalid,
                ind.intervals.pos,
                format!("indicator `{}` needs at least 2 interval boundaries", ind.id.value),
            );
            continue;
        }
        if bounds.windows(2).any(|w| w[0] >= w[1]) {
            ck.push(
                DiagnosticKind::Invalid,
                ind.intervals.pos,
                format!(
                    "interval boundaries of `{}` must be strictly increasing",
                    ind.id.value
                ),
            );
            continue;
        }
        let expression = match &ind.expr {
            ExprAst::Partitioned(parts) => {
                let labels = ranked_labels(state_count(&subject));
                let mut seen: HashSet<&str> = HashSet::new();
                let mut ok = true;
                for (label, params) in parts {
                    if !labels.contains(&label.value) {
                        ck.push(
                            DiagnosticKind::UnknownReference,
                            label.pos,
                            format!(
                                "`{}` is not a state of `{subject}` (states: {})",
                                label.value,
                                labels.join(", ")
                            ),
                        );
                        ok = false;
                    } else if !seen.insert(&label.value) {
                        ck.push(
                            DiagnosticKind::Duplicate,
                            label.pos,
                            format!("state `{}` is partitioned more than once", label.value),
                        );
                        ok = false;
                    }
                    if params.value.1 <= 0.0 {
                        ck.push(
                            DiagnosticKind::Invalid,
                            params.pos,
                            format!("variance must be positive, got {}", params.value.1),
                        );
                        ok = false;
                    }
                }
                let missing: Vec<&String> =
                    labels.iter().filter(|l| !seen.contains(l.as_str())).collect();
                if ok && !missing.is_empty() {
                    ck.push(
                        DiagnosticKind::Invalid,
                        ind.id.pos,
                        format!(
                            "indicator `{}` has no distribution for state(s) {}",
                            ind.id.value,
                            missing.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
                        ),
                    );
                    ok = false;
                }
                if !ok {
                    continue;
                }
                IndicatorExpr::Partitioned(
                    parts
                        .iter()
                        .map(|(label, p)| {
                            (
                                label.value.clone(),
                                TNormalParams {
                                    mean: p.value.0,
                                    variance: p.value.1,
                                },
                            )
                        })
                        .collect(),
                )
            }
            ExprAst::Arithmetic {
                intercept,
                slope,
                variance,
            } => {
                if variance.value <= 0.0 {
                    ck.push(
                        DiagnosticKind::Invalid,
                        variance.pos,
                        format!("variance must be positive, got {}", variance.value),
                    );
                    continue;
                }
                IndicatorExpr::Arithmetic {
                    intercept: *intercept,
                    slope: *slope,
                    variance: variance.value,
                }
            }
        };
        indicators.push(IndicatorSpec {
            id: ind.id.value.clone(),
            subject,
            boundaries: bounds.clone(),
            expression,
        });
    }

    // Goals.
    let mut goals: Vec<GoalSpec> = Vec::new();
    for item in &ast.items {
        let ItemAst::Goal(g) = item else { continue };
        if goals.iter().any(|existing| existing.name == g.name) {
            ck.push(
                DiagnosticKind::Duplicate,
                g.pos,
                format!("goal \"{}\" is declared more than once", g.name),
            );
            continue;
        }
        if !resolve(&mut ck, &RefAst::Activity(g.activity.clone())) {
            continue;
        }
        let Some(indicator) = indicators.iter().find(|i| i.id == g.metric.value) else {
            ck.push(
                DiagnosticKind::UnknownReference,
                g.metric.pos,
                format!("unknown indicator `{}`", g.metric.value),
            );
            continue;
        };
        if indicator.subject != NodeRef::Activity(g.activity.value.clone()) {
            ck.push(
                DiagnosticKind::Invalid,
                g.metric.pos,
                format!(
                    "metric `{}` measures `{}`, not the goal activity `{}`",
                    g.metric.value, indicator.subject, g.activity.value
                ),
            );
            continue;
        }
        goals.push(GoalSpec {
            name: g.name.clone(),
            question: g.question.clone(),
            target_activity: g.activity.value.clone(),
            target_indicator: g.metric.value.clone(),
        });
    }

    if !ck.diags.is_empty() {
        return Err(ModelError::new(ck.diags));
    }
    Ok(QualityModel {
        name: ast.name,
        entities: entities.into_iter().map(|(e, _, _)| e).collect(),
        facts,
        activities: activities.into_iter().map(|(a, _)| a).collect(),
        impacts,
        quantifications,
        indicators,
        goals,
    })
}
