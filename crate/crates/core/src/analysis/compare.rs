use serde::Serialize;

use super::{run_scenario, AnalysisError, Moments, Scenario, ScenarioReport};
use crate::network::CompiledNetwork;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", bound(serialize = "S: Scalar"))]
pub struct CompareRow<S> {
    pub node: String,
    pub states: Vec<String>,
    /// One marginal per scenario, in input order.
    pub posteriors: Vec<Vec<S>>,
    /// `posteriors[j] - posteriors[0]`, entry-wise.
    pub deltas: Vec<Vec<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moments: Option<Vec<Moments<S>>>,
    /// Mean and sd of each scenario minus those of the first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moment_deltas: Option<Vec<Moments<S>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", bound(serialize = "S: Scalar"))]
pub struct CompareTable<S> {
    pub scenarios: Vec<String>,
    pub evidence_probabilities: Vec<S>,
    pub rows: Vec<CompareRow<S>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Runs every scenario and lines the results up per node; deltas are taken
/// against the first scenario.
pub fn compare_scenarios<S: Scalar>(
    net: &CompiledNetwork<S>,
    scenarios: &[Scenario],
) -> Result<CompareTable<S>, AnalysisError> {
    if scenarios.len() < 2 {
        return Err(AnalysisError::TooFewScenarios(scenarios.len()));
    }
    let reports = scenarios
        .iter()
        .map(|s| run_scenario(net, s))
        .collect::<Result<Vec<ScenarioReport<S>>, _>>()?;

    let rows = net
        .nodes()
        .iter()
        .map(|node| {
            let posteriors: Vec<Vec<S>> = reports
                .iter()
                .map(|r| r.posteriors.get(&node.id).expect("every node has a posterior").to_vec())
                .collect();
            let deltas = posteriors
                .iter()
                .map(|p| p.iter().zip(&posteriors[0]).map(|(a, b)| *a - *b).collect())
                .collect();
            let moments: Option<Vec<Moments<S>>> = node.bounds.as_ref().map(|_| {
                reports.iter().map(|r| r.moments[&node.id]).collect()
            });
            let moment_deltas = moments.as_ref().map(|ms| {
                ms.iter()
                    .map(|m| Moments {
                        mean: m.mean - ms[0].mean,
                        sd: m.sd - ms[0].sd,
                    })
                    .collect()
            });
            CompareRow {
                node: node.id.clone(),
                states: node.states.clone(),
                posteriors,
                deltas,
                moments,
                moment_deltas,
            }
        })
        .collect();

    Ok(CompareTable {
        scenarios: reports.iter().map(|r| r.scenario.clone()).collect(),
        evidence_probabilities: reports.iter().map(|r| r.evidence_probability).collect(),
        rows,
        warnings: reports.into_iter().flat_map(|r| r.warnings).collect(),
    })
}

impl<S: Scalar> CompareTable<S> {
    pub fn row(&self, node: &str) -> Option<&CompareRow<S>> {
        self.rows.iter().find(|r| r.node == node)
    }

    fn records(&self) -> Vec<(String, String, Vec<S>, Vec<S>)> {
        let mut out = Vec::new();
        for row in &self.rows {
            for (s, label) in row.states.iter().enumerate() {
                out.push((
                    row.node.clone(),
                    label.clone(),
                    row.posteriors.iter().map(|p| p[s]).collect(),
                    row.deltas[1..].iter().map(|d| d[s]).collect(),
                ));
            }
            if let (Some(ms), Some(ds)) = (&row.moments, &row.moment_deltas) {
                out.push((
                    row.node.clone(),
                    "mean".into(),
                    ms.iter().map(|m| m.mean).collect(),
                    ds[1..].iter().map(|d| d.mean).collect(),
                ));
                out.push((
                    row.node.clone(),
                    "sd".into(),
                    ms.iter().map(|m| m.sd).collect(),
                    ds[1..].iter().map(|d| d.sd).collect(),
                ));
            }
        }
        out
    }

    /// `node,quantity,<scenario>...,delta <scenario>...`; one record per
    /// state, plus mean and sd records for indicators.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["node".to_string(), "quantity".to_string()];
        header.extend(self.scenarios.iter().cloned());
        header.extend(self.scenarios[1..].iter().map(|s| format!("delta {s}")));
        writer.write_record(&header).expect("writing to memory");
        for (node, quantity, values, deltas) in self.records() {
            let mut record = vec![node, quantity];
            record.extend(values.iter().chain(&deltas).map(|v| crate::json::format_f64(v.as_f64())));
            writer.write_record(&record).expect("writing to memory");
        }
        String::from_utf8(writer.into_inner().expect("flushing to memory")).expect("csv is UTF-8")
    }

    /// Aligned-column text rendering.
    pub fn to_text(&self) -> String {
        let records = self.records();
        let mut header = vec!["node".to_string(), "quantity".to_string()];
        header.extend(self.scenarios.iter().cloned());
        header.extend(self.scenarios[1..].iter().map(|s| format!("delta {s}")));
        let mut lines: Vec<Vec<String>> = vec![header];
        for (node, quantity, values, deltas) in records {
            let mut line = vec![node, quantity];
            line.extend(values.iter().chain(&deltas).map(|v| format!("{:.4}", v.as_f64())));
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in lines {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (cell, w))| {
                    if c < 2 {
                        format!("{cell:<w$}")
                    } else {
                        format!("{cell:>w$}")
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}
