use std::fmt::Write;

use super::{Entity, IndicatorExpr, QualityModel};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn num(x: f64) -> String {
    // `Display` for f64 is the shortest string that parses back to the same value.
    format!("{x}")
}

fn print_activity(model: &QualityModel, id: &str, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    let Some(activity) = model.activity(id) else { return };
    if activity.children.is_empty() {
        let _ = writeln!(out, "{indent}activity {id}");
        return;
    }
    let _ = writeln!(out, "{indent}activity {id} {{");
    for child in &activity.children {
        print_activity(model, child, depth + 1, out);
    }
    let _ = writeln!(out, "{indent}}}");
}

fn print_entity(model: &QualityModel, entity: &Entity, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    let _ = write!(out, "{indent}entity {}", entity.id);
    if let Some(sup) = &entity.parent_is_a {
        let _ = write!(out, " : {sup}");
    }
    let parts: Vec<&Entity> = model
        .entities
        .iter()
        .filter(|e| e.parent_part_of.as_deref() == Some(entity.id.as_str()))
        .collect();
    if parts.is_empty() {
        out.push('\n');
        return;
    }
    out.push_str(" {\n");
    for part in parts {
        print_entity(model, part, depth + 1, out);
    }
    let _ = writeln!(out, "{indent}}}");
}

/// Prints a model in canonical form. Facts and impacts materialized by
/// inheritance expansion are omitted; parsing the output yields the
/// declared model.
pub fn print_model(model: &QualityModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {} {{", quote(&model.name));

    for root in model.activities.iter().filter(|a| a.parent.is_none()) {
        print_activity(model, &root.id, 1, &mut out);
    }
    for root in model.entities.iter().filter(|e| e.parent_part_of.is_none()) {
        print_entity(model, root, 1, &mut out);
    }
    for fact in model.facts.iter().filter(|f| f.inherited_from.is_none()) {
        let _ = writeln!(out, "  fact {}.{}", fact.entity, fact.attribute);
    }
    for impact in &model.impacts {
        if model
            .fact(&impact.fact)
            .is_some_and(|f| f.inherited_from.is_some())
        {
            continue;
        }
        let _ = writeln!(
            out,
            "  impact {} -> {} {}",
            impact.fact, impact.activity, impact.sign
        );
    }
    for q in &model.quantifications {
        let _ = writeln!(out, "  quantify {} {{", q.node);
        if let Some(k) = q.states {
            let _ = writeln!(out, "    states {k}");
        }
        if let Some(v) = q.variance {
            let _ = writeln!(out, "    variance {}", num(v));
        }
        if !q.weights.is_empty() {
            out.push_str("    weights {");
            for (parent, w) in &q.weights {
                let _ = write!(out, " {parent}: {}", num(*w));
            }
            out.push_str(" }\n");
        }
        if let Some(prior) = &q.prior {
            let values: Vec<String> = prior.iter().map(|p| num(*p)).collect();
            let _ = writeln!(out, "    prior [{}]", values.join(", "));
        }
        out.push_str("  }\n");
    }
    for ind in &model.indicators {
        let bounds: Vec<String> = ind.boundaries.iter().map(|b| num(*b)).collect();
        let _ = writeln!(out, "  indicator {} for {} {{", ind.id, ind.subject);
        let _ = writeln!(out, "    intervals [{}]", bounds.join(", "));
        match &ind.expression {
            IndicatorExpr::Partitioned(parts) => {
                out.push_str("    partitioned {\n");
                for (label, p) in parts {
                    let _ = writeln!(
                        out,
                        "      {label}: tnormal({}, {})",
                        num(p.mean),
                        num(p.variance)
                    );
                }
                out.push_str("    }\n");
            }
            IndicatorExpr::Arithmetic {
                intercept,
                slope,
                variance,
            } => {
                let op = if slope.is_sign_negative() { '-' } else { '+' };
                let _ = writeln!(
                    out,
                    "    arithmetic mean = {} {op} {} * level variance {}",
                    num(*intercept),
                    num(slope.abs()),
                    num(*variance)
                );
            }
        }
        out.push_str("  }\n");
    }
    for goal in &model.goals {
        let _ = writeln!(
            out,
            "  goal {} {{ question {} metric {} activity {} }}",
            quote(&goal.name),
            quote(&goal.question),
            goal.target_indicator,
            goal.target_activity
        );
    }
    out.push_str("}\n");
    out
}
