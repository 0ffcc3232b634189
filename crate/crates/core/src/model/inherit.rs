use super::{Fact, FactRef, Impact, QualityModel};

/// Materializes facts along is-a edges: a fact on entity `E` is copied onto
/// every transitive kind of `E` (with `inherited_from = E`) together with its
/// impacts. Facts a kind declares itself take precedence over inherited ones.
pub fn expand_inheritance(model: &QualityModel) -> QualityModel {
    let mut out = model.clone();
    let declared: Vec<Fact> = model
        .facts
        .iter()
        .filter(|f| f.inherited_from.is_none())
        .cloned()
        .collect();

    for fact in &declared {
        let source = fact.reference();
        for kind in model.kinds_of(&fact.entity) {
            let target = FactRef::new(kind, fact.attribute.clone());
            if out.fact(&target).is_some() {
                continue;
            }
            out.facts.push(Fact {
                entity: target.entity.clone(),
                attribute: target.attribute.clone(),
                description: fact.description.clone(),
                inherited_from: Some(fact.entity.clone()),
            });
            let copied: Vec<Impact> = model
                .impacts
                .iter()
                .filter(|i| i.fact == source)
                .map(|i| Impact {
                    fact: target.clone(),
                    ..i.clone()
                })
                .collect();
            out.impacts.extend(copied);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    #[test]
    fn identifier_naming_conventions_apply_to_variable_names() {
        let model = parse_model(
            r#"model "naming" {
                activity Modification
                entity Identifier
                entity VariableName : Identifier
                fact Identifier.Consistency
                impact Identifier.Consistency -> Modification +
            }"#,
        )
        .unwrap();
        let expanded = expand_inheritance(&model);
        let inherited = expanded
            .fact(&FactRef::new("VariableName", "Consistency"))
            .expect("materialized fact");
        assert_eq!(inherited.inherited_from.as_deref(), Some("Identifier"));
        assert_eq!(expanded.impacts.len(), 2);
        assert_eq!(expanded.impacts[1].fact, FactRef::new("VariableName", "Consistency"));
    }

    #[test]
    fn no_is_a_edges_is_identity() {
        let model = parse_model(
            r#"model "m" { activity A entity E { entity F } fact F.X impact F.X -> A - }"#,
        )
        .unwrap();
        assert_eq!(expand_inheritance(&model), model);
    }

    #[test]
    fn transitive_chain() {
        let model = parse_model(
            r#"model "m" { activity R entity A entity B : A entity C : B fact A.X }"#,
        )
        .unwrap();
        let expanded = expand_inheritance(&model);
        let ids: Vec<String> = expanded.facts.iter().map(|f| f.reference().to_string()).collect();
        assert_eq!(ids, vec!["A.X", "B.X", "C.X"]);
        assert!(expanded
            .facts
            .iter()
            .skip(1)
            .all(|f| f.inherited_from.as_deref() == Some("A")));
    }

    #[test]
    fn explicit_fact_on_kind_is_kept() {
        let model = parse_model(
            r#"model "m" {
                activity R
                entity A entity B : A
                fact A.X fact B.X
                impact A.X -> R +
            }"#,
        )
        .unwrap();
        let expanded = expand_inheritance(&model);
        assert_eq!(expanded, model);
    }

    #[test]
    fn idempotent() {
        let model = parse_model(
            r#"model "m" {
                activity R { activity S }
                entity A entity B : A entity C : B entity D : A
                fact A.X fact B.Y
                impact A.X -> S - impact B.Y -> R +
            }"#,
        )
        .unwrap();
        let once = expand_inheritance(&model);
        assert_eq!(expand_inheritance(&once), once);
        assert_eq!(once.facts.len(), 2 + 3 + 1);
    }
}
