use std::fmt;

use serde::Serialize;

use super::{expand_inheritance, QualityModel, Sign};

/// Facts × activities view of a model; each cell holds the impact sign, if any.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixView {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<Option<Sign>>>,
}

impl MatrixView {
    pub fn cell(&self, fact: &str, activity: &str) -> Option<Sign> {
        let r = self.rows.iter().position(|f| f == fact)?;
        let c = self.columns.iter().position(|a| a == activity)?;
        self.cells[r][c]
    }

    pub fn non_blank(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_some()).count()
    }
}

impl fmt::Display for MatrixView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label_width = self.rows.iter().map(String::len).max().unwrap_or(0);
        write!(f, "{:label_width$}", "")?;
        for column in &self.columns {
            write!(f, " | {column}")?;
        }
        writeln!(f)?;
        for (row, cells) in self.rows.iter().zip(&self.cells) {
            write!(f, "{row:label_width$}")?;
            for (column, cell) in self.columns.iter().zip(cells) {
                let mark = cell.map_or(' ', Sign::symbol);
                write!(f, " | {mark:^width$}", width = column.len())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Activities in post-order (sub-activities before their parent).
fn leaf_to_root(model: &QualityModel) -> Vec<&str> {
    fn visit<'a>(model: &'a QualityModel, id: &'a str, out: &mut Vec<&'a str>) {
        if let Some(activity) = model.activity(id) {
            for child in &activity.children {
                visit(model, child, out);
            }
            out.push(&activity.id);
        }
    }
    let mut out = Vec::new();
    if let Some(root) = model.root_activity() {
        visit(model, &root.id, &mut out);
    }
    out
}

/// Builds the matrix view after inheritance expansion.
///
/// Rows are facts in tree order, columns activities from the leaves up. The
/// root activity heads the whole matrix and only gets a column of its own
/// when it is the only activity or carries impacts directly.
pub fn export_matrix(model: &QualityModel) -> MatrixView {
    let model = expand_inheritance(model);
    let root = model.root_activity().map(|a| a.id.clone());
    let columns: Vec<String> = leaf_to_root(&model)
        .into_iter()
        .filter(|&id| {
            Some(id) != root.as_deref()
                || model.activities.len() == 1
                || model.impacts.iter().any(|i| i.activity == id)
        })
        .map(str::to_owned)
        .collect();
    let rows: Vec<String> = model
        .facts_in_tree_order()
        .iter()
        .map(|f| f.reference().to_string())
        .collect();
    let mut cells = vec![vec![None; columns.len()]; rows.len()];
    for impact in &model.impacts {
        let fact = impact.fact.to_string();
        let (Some(r), Some(c)) = (
            rows.iter().position(|x| *x == fact),
            columns.iter().position(|x| *x == impact.activity),
        ) else {
            continue;
        };
        cells[r][c] = Some(impact.sign);
    }
    MatrixView {
        rows,
        columns,
        cells,
    }
}
