//! Data ingestion, validation and fit reports.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::{Criterion, FitResult};
use crate::sim::SUPPORT_TOL;
use crate::tree::{CompositionalTree, Violation};

/// Major.minor version written into every fit report.
pub const SCHEMA_VERSION: &str = "1.0";

/// Leaf values this far below zero are treated as rounding noise.
pub const NEGATIVE_TOL: f64 = 1e-9;

/// Leaf matrix (and optional outcome) read from a CSV file.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// `n x q`, columns in leaf index order.
    pub x_leaf: DMatrix<f64>,
    pub y: Option<DVector<f64>>,
    /// 1-based file line of each row.
    pub lines: Vec<usize>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x_leaf.nrows()
    }
}

/// Reads a headered CSV. Leaf columns are matched to tree leaves by label;
/// internal-node columns and any other extra columns are ignored.
pub fn read_dataset(
    path: impl AsRef<Path>,
    tree: &CompositionalTree,
    outcome: Option<&str>,
) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_dataset_from(file, tree, outcome)
}

pub fn read_dataset_from<R: std::io::Read>(
    reader: R,
    tree: &CompositionalTree,
    outcome: Option<&str>,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
        .clone();
    let col_of = |label: &str| header.iter().position(|h| h == label);

    let q = tree.q();
    let mut leaf_cols = Vec::with_capacity(q);
    let mut missing = Vec::new();
    for j in 0..q {
        match col_of(tree.name(j)) {
            Some(c) => leaf_cols.push(c),
            None => missing.push(tree.name(j).to_string()),
        }
    }
    let y_col = match outcome {
        Some(name) => match col_of(name) {
            Some(c) => Some(c),
            None => {
                missing.push(name.to_string());
                None
            }
        },
        None => None,
    };
    if !missing.is_empty() {
        return Err(Error::MissingColumn(missing));
    }

    let mut values = Vec::new();
    let mut ys = Vec::new();
    let mut lines = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let cell = |c: usize, label: &str| -> Result<f64> {
            let raw = rec.get(c).unwrap_or("");
            raw.parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("column '{label}': cannot parse '{raw}' as a number"),
            })
        };
        for (j, &c) in leaf_cols.iter().enumerate() {
            values.push(cell(c, tree.name(j))?);
        }
        if let (Some(c), Some(name)) = (y_col, outcome) {
            ys.push(cell(c, name)?);
        }
        lines.push(line);
    }
    let n = lines.len();
    Ok(Dataset {
        x_leaf: DMatrix::from_row_slice(n, q, &values),
        y: y_col.map(|_| DVector::from_vec(ys)),
        lines,
    })
}

/// One row failing validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RowIssue {
    /// 0-based data row.
    pub row: usize,
    pub line: usize,
    pub message: String,
}

/// Checks each row: finite values, no leaf below `-NEGATIVE_TOL`, and the
/// compositional constraints at `tol` after recomputing internal nodes.
pub fn validate_rows(tree: &CompositionalTree, data: &Dataset, tol: f64) -> Result<Vec<RowIssue>> {
    let mut issues = Vec::new();
    for i in 0..data.n() {
        let row: Vec<f64> = data.x_leaf.row(i).iter().copied().collect();
        let line = data.lines.get(i).copied().unwrap_or(0);
        let mut push = |message: String| issues.push(RowIssue { row: i, line, message });
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            push(format!("non-finite value in {}", tree.name(j)));
            continue;
        }
        for (j, &v) in row.iter().enumerate() {
            if v < -NEGATIVE_TOL {
                push(format!("negative value {v:e} in {}", tree.name(j)));
            }
        }
        let full = tree.expand_leaves(&row)?;
        for v in tree.check_composition(&full, tol)?.violations {
            push(match v {
                Violation::LeafSum { sum } => format!("leaf values sum to {sum}"),
                Violation::NodeSum { node, value, children_sum } => format!(
                    "{} = {value} but its children sum to {children_sum}",
                    tree.name(node)
                ),
            });
        }
    }
    Ok(issues)
}

/// Divides every row by its leaf sum.
pub fn normalize_rows(x_leaf: &mut DMatrix<f64>) -> Result<()> {
    for i in 0..x_leaf.nrows() {
        let s: f64 = x_leaf.row(i).sum();
        if s == 0.0 || !s.is_finite() {
            return Err(Error::CompositionViolated { rows: vec![i] });
        }
        x_leaf.row_mut(i).scale_mut(1.0 / s);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labeled {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub n: usize,
    pub q: usize,
    pub p: usize,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub polished: bool,
    pub objective: f64,
    pub grid_points: usize,
    pub failed_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: String,
    /// `CLASSO` when the only candidate `eta` is 1, else `proposed`.
    pub method: String,
    pub criterion: Criterion,
    /// Nonzero centered effects, largest magnitude first.
    pub alpha: Vec<Labeled>,
    /// Nonzero non-root conditional effects in node order.
    pub beta: Vec<Labeled>,
    pub intercept: f64,
    pub eta: f64,
    pub lambda: f64,
    pub df: usize,
    pub ic: f64,
    pub diagnostics: FitDiagnostics,
    pub warnings: Vec<String>,
}

impl FitReport {
    pub fn new(tree: &CompositionalTree, fit: &FitResult, n: usize) -> Self {
        let mut alpha: Vec<Labeled> = fit
            .alpha_hat
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > SUPPORT_TOL)
            .map(|(j, &value)| Labeled { label: tree.name(j).to_string(), value })
            .collect();
        alpha.sort_by(|a, b| b.value.abs().total_cmp(&a.value.abs()).then(a.label.cmp(&b.label)));
        let beta = fit
            .beta_hat
            .iter()
            .enumerate()
            .filter(|&(j, v)| j != tree.root() && v.abs() > SUPPORT_TOL)
            .map(|(j, &value)| Labeled { label: tree.name(j).to_string(), value })
            .collect();
        let chosen = fit
            .diagnostics
            .iter()
            .flatten()
            .find(|p| p.eta == fit.eta_hat && p.lambda == fit.lambda_hat);
        let method = if fit.eta_grid.iter().all(|&e| e == 1.0) { "CLASSO" } else { "proposed" };
        FitReport {
            schema_version: SCHEMA_VERSION.to_string(),
            method: method.to_string(),
            criterion: fit.criterion,
            alpha,
            beta,
            intercept: fit.intercept,
            eta: fit.eta_hat,
            lambda: fit.lambda_hat,
            df: fit.df,
            ic: fit.ic_value,
            diagnostics: FitDiagnostics {
                n,
                q: tree.q(),
                p: tree.p(),
                rss: chosen.map_or(f64::NAN, |p| p.rss),
                iterations: chosen.map_or(0, |p| p.iterations),
                converged: chosen.is_some_and(|p| p.converged),
                polished: chosen.is_some_and(|p| p.polished),
                objective: chosen.map_or(f64::NAN, |p| p.objective),
                grid_points: fit.diagnostics.len(),
                failed_points: fit.diagnostics.iter().filter(|p| p.is_none()).count(),
            },
            warnings: fit.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses a report, rejecting schema versions with an unknown major part.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let version = raw
            .get("schema_version")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::SchemaVersion("<missing>".into()))?;
        let major = |v: &str| v.split('.').next().unwrap_or("").to_string();
        if major(version) != major(SCHEMA_VERSION) {
            return Err(Error::SchemaVersion(version.to_string()));
        }
        Ok(serde_json::from_value(raw)?)
    }

    /// Plain-text table of the `k` largest centered effects.
    pub fn top_alpha_table(&self, k: usize) -> String {
        let shown = &self.alpha[..k.min(self.alpha.len())];
        let width = shown.iter().map(|a| a.label.len()).max().unwrap_or(0).max(4);
        let mut out = format!("{:<width$}  {:>12}\n", "node", "alpha");
        for a in shown {
            out.push_str(&format!("{:<width$}  {:>12.6}\n", a.label, a.value));
        }
        out
    }
}

/// Process exit code for an error: 1 validation, 2 parse or usage, 3 numerical.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::CompositionViolated { .. } => 1,
        Error::SingularSystem(_)
        | Error::SingularQ(_)
        | Error::AllSolvesFailed
        | Error::ZeroSignal => 3,
        _ => 2,
    }
}
