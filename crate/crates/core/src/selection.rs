//! Tuning of `(eta, lambda)` by an information criterion over a grid.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::face::{active_tolerance, face_dimension, face_dimension_dense, inactive_mask};
use crate::penalty::PenaltyMatrix;
use crate::recovery::QSystem;
use crate::solver::{center_alpha, AdmmSolver, Design, SolverConfig, SolverSolution};
use crate::tree::CompositionalTree;

/// Leaf-sum tolerance for the composition precondition of [`fit`].
pub const COMPOSITION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Criterion {
    Aic,
    Bic,
}

impl Criterion {
    /// Weight on df.
    pub fn gamma(self, n: usize) -> f64 {
        match self {
            Criterion::Aic => 2.0,
            Criterion::Bic => (n as f64).ln(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Criterion::Aic => "AIC",
            Criterion::Bic => "BIC",
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            other => Err(Error::InvalidConfig(format!("unknown criterion '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningConfig {
    pub eta_grid: Vec<f64>,
    pub lambda_grid_size: usize,
    pub lambda_min_ratio: f64,
    pub criterion: Criterion,
    pub solver: SolverConfig,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self {
            eta_grid: default_eta_grid(),
            lambda_grid_size: 50,
            lambda_min_ratio: 1e-4,
            criterion: Criterion::Bic,
            solver: SolverConfig::default(),
        }
    }
}

/// `0, 0.1, ..., 1`.
pub fn default_eta_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

impl TuningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eta_grid.is_empty() {
            return Err(Error::InvalidConfig("eta grid is empty".into()));
        }
        if let Some(&e) = self.eta_grid.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::EtaOutOfRange(e));
        }
        if self.lambda_grid_size == 0 {
            return Err(Error::InvalidConfig("lambda grid size must be positive".into()));
        }
        if !(self.lambda_min_ratio > 0.0 && self.lambda_min_ratio <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda min ratio must be in (0, 1], got {}",
                self.lambda_min_ratio
            )));
        }
        self.solver.validate()
    }
}

/// One solved grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub eta: f64,
    pub lambda: f64,
    pub rss: f64,
    pub df: usize,
    pub iterations: usize,
    pub converged: bool,
    pub polished: bool,
    pub objective: f64,
    #[serde(skip)]
    pub alpha_tilde: Vec<f64>,
}

impl GridPoint {
    pub fn ic(&self, n: usize, criterion: Criterion) -> f64 {
        information_criterion(n, self.rss, self.df, criterion)
    }
}

/// `n log(RSS) + gamma df`; RSS is floored at the smallest positive normal
/// double so an exact interpolation stays finite.
pub fn information_criterion(n: usize, rss: f64, df: usize, criterion: Criterion) -> f64 {
    n as f64 * rss.max(f64::MIN_POSITIVE).ln() + criterion.gamma(n) * df as f64
}

/// All grid solutions for one dataset, from which any criterion can select.
#[derive(Debug, Clone)]
pub struct FitPath {
    pub n: usize,
    pub eta_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// Row-major by `eta` then `lambda`; `None` where the solve failed.
    pub points: Vec<Option<GridPoint>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha_hat: Vec<f64>,
    pub beta_hat: Vec<f64>,
    pub intercept: f64,
    pub alpha_tilde: Vec<f64>,
    pub eta_hat: f64,
    pub lambda_hat: f64,
    pub ic_value: f64,
    pub df: usize,
    pub criterion: Criterion,
    pub eta_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// IC per grid point, row-major by `eta` then `lambda`; `None` if failed.
    pub ic_surface: Vec<Option<f64>>,
    pub diagnostics: Vec<Option<GridPoint>>,
    pub warnings: Vec<String>,
}

/// `q - rank(D_inactive)` with the default active-set tolerance when
/// `active_tol` is `None`.
pub fn effective_df(d: &PenaltyMatrix, alpha_tilde: &[f64], active_tol: Option<f64>) -> usize {
    let da = d.apply(alpha_tilde);
    let tol = active_tol.unwrap_or_else(|| active_tolerance(&da));
    face_dimension(d, &inactive_mask(&da, tol))
}

/// [`effective_df`] through a dense SVD of the inactive rows.
pub fn effective_df_dense(d: &PenaltyMatrix, alpha_tilde: &[f64], active_tol: Option<f64>) -> usize {
    let da = d.apply(alpha_tilde);
    let tol = active_tol.unwrap_or_else(|| active_tolerance(&da));
    face_dimension_dense(d, &inactive_mask(&da, tol))
}

/// Log-spaced descending grid from `lambda_max = (2/n) ||X^T (y - mean(y))||_inf`
/// down to `min_ratio * lambda_max`. Falls back to `1 .. 1e-4` with a
/// warning when `lambda_max` is zero.
pub fn lambda_grid(
    x_leaf: &DMatrix<f64>,
    y: &DVector<f64>,
    size: usize,
    min_ratio: f64,
) -> (Vec<f64>, Option<String>) {
    let n = y.len();
    let centered = y.add_scalar(-y.mean());
    let g = x_leaf.tr_mul(&centered) * (2.0 / n as f64);
    let lmax = g.amax();
    if lmax > 0.0 && lmax.is_finite() {
        (log_grid(lmax, min_ratio, size), None)
    } else {
        let msg = "outcome is constant; lambda grid falls back to 1 .. 1e-4".to_string();
        log::warn!("{msg}");
        (log_grid(1.0, 1e-4, size), Some(msg))
    }
}

fn log_grid(top: f64, ratio: f64, size: usize) -> Vec<f64> {
    if size == 1 {
        return vec![top];
    }
    let step = ratio.ln() / (size - 1) as f64;
    (0..size).map(|k| top * (step * k as f64).exp()).collect()
}

/// Checks every row of `x_leaf` for leaf sum one within `tol`. Returns the
/// offending row indices.
pub fn composition_violations(x_leaf: &DMatrix<f64>, tol: f64) -> Vec<usize> {
    (0..x_leaf.nrows())
        .filter(|&i| (x_leaf.row(i).sum() - 1.0).abs() > tol)
        .collect()
}

/// Solves the full grid. `lambdas` overrides the automatic grid.
pub fn fit_path(
    tree: &CompositionalTree,
    x_leaf: &DMatrix<f64>,
    y: &DVector<f64>,
    config: &TuningConfig,
    lambdas: Option<Vec<f64>>,
) -> Result<FitPath> {
    config.validate()?;
    if x_leaf.ncols() != tree.q() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} leaf columns, tree has {} leaves",
            x_leaf.ncols(),
            tree.q()
        )));
    }
    if x_leaf.nrows() < 2 {
        return Err(Error::DimensionMismatch("need at least 2 observations".into()));
    }
    let bad = composition_violations(x_leaf, COMPOSITION_TOL);
    if !bad.is_empty() {
        return Err(Error::CompositionViolated { rows: bad });
    }
    let design = Design::new(x_leaf.clone(), y.clone())?;
    let mut warnings = Vec::new();
    let lambda_grid = match lambdas {
        Some(l) => l,
        None => {
            let (l, w) = lambda_grid(x_leaf, y, config.lambda_grid_size, config.lambda_min_ratio);
            warnings.extend(w);
            l
        }
    };

    let rows: Vec<Vec<Option<GridPoint>>> = config
        .eta_grid
        .par_iter()
        .map(|&eta| solve_eta(tree, &design, eta, &lambda_grid, &config.solver))
        .collect();

    let mut points = Vec::with_capacity(config.eta_grid.len() * lambda_grid.len());
    for row in rows {
        points.extend(row);
    }
    let failed = points.iter().filter(|p| p.is_none()).count();
    if failed > 0 {
        warnings.push(format!("{failed} grid points failed to solve"));
    }
    let unconverged = points
        .iter()
        .flatten()
        .filter(|p| !p.converged)
        .count();
    if unconverged > 0 {
        warnings.push(format!(
            "{unconverged} grid points hit the iteration cap"
        ));
    }
    Ok(FitPath {
        n: x_leaf.nrows(),
        eta_grid: config.eta_grid.clone(),
        lambda_grid,
        points,
        warnings,
    })
}

fn solve_eta(
    tree: &CompositionalTree,
    design: &Design,
    eta: f64,
    lambdas: &[f64],
    config: &SolverConfig,
) -> Vec<Option<GridPoint>> {
    let d = match PenaltyMatrix::new(tree, eta) {
        Ok(d) => d,
        Err(e) => {
            log::warn!("eta {eta}: {e}");
            return vec![None; lambdas.len()];
        }
    };
    let mut solver = match AdmmSolver::new(design, &d, config.clone()) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("eta {eta}: {e}");
            return vec![None; lambdas.len()];
        }
    };
    let mut prev: Option<SolverSolution> = None;
    lambdas
        .iter()
        .map(|&lambda| match solver.solve(lambda, prev.as_ref()) {
            Ok(sol) => {
                let rss = design.rss(&sol.alpha_tilde);
                let df = effective_df(&d, &sol.alpha_tilde, None);
                let point = GridPoint {
                    eta,
                    lambda,
                    rss,
                    df,
                    iterations: sol.iterations,
                    converged: sol.converged,
                    polished: sol.polished,
                    objective: sol.objective,
                    alpha_tilde: sol.alpha_tilde.clone(),
                };
                prev = Some(sol);
                Some(point)
            }
            Err(e) => {
                log::warn!("eta {eta}, lambda {lambda:.3e}: {e}");
                None
            }
        })
        .collect()
}

/// Picks the grid point minimizing the criterion. Ties go to the larger
/// `lambda`, then the larger `eta`.
pub fn select(
    tree: &CompositionalTree,
    qsys: &QSystem,
    path: &FitPath,
    criterion: Criterion,
) -> Result<FitResult> {
    let nl = path.lambda_grid.len();
    let ic_surface: Vec<Option<f64>> = path
        .points
        .iter()
        .map(|p| p.as_ref().map(|p| p.ic(path.n, criterion)))
        .collect();
    let mut best: Option<usize> = None;
    for (k, ic) in ic_surface.iter().enumerate() {
        let Some(ic) = *ic else { continue };
        if !ic.is_finite() {
            continue;
        }
        best = match best {
            None => Some(k),
            Some(b) => {
                let cur = ic_surface[b].unwrap();
                if ic < cur || (ic == cur && prefer(path, k, b, nl)) {
                    Some(k)
                } else {
                    Some(b)
                }
            }
        };
    }
    let b = best.ok_or(Error::AllSolvesFailed)?;
    let point = path.points[b].as_ref().unwrap();
    let (alpha_hat, intercept) = center_alpha(&point.alpha_tilde);
    let beta_hat = qsys.recover_beta(&point.alpha_tilde)?;
    debug_assert_eq!(beta_hat.len(), tree.p());
    Ok(FitResult {
        alpha_hat,
        beta_hat,
        intercept,
        alpha_tilde: point.alpha_tilde.clone(),
        eta_hat: point.eta,
        lambda_hat: point.lambda,
        ic_value: ic_surface[b].unwrap(),
        df: point.df,
        criterion,
        eta_grid: path.eta_grid.clone(),
        lambda_grid: path.lambda_grid.clone(),
        ic_surface,
        diagnostics: path.points.clone(),
        warnings: path.warnings.clone(),
    })
}

/// Whether grid point `a` wins a tie against `b`.
fn prefer(path: &FitPath, a: usize, b: usize, nl: usize) -> bool {
    let (la, lb) = (path.lambda_grid[a % nl], path.lambda_grid[b % nl]);
    if la != lb {
        return la > lb;
    }
    path.eta_grid[a / nl] > path.eta_grid[b / nl]
}

/// Fits the model and selects `(eta, lambda)` with `config.criterion`.
pub fn fit(
    tree: &CompositionalTree,
    x_leaf: &DMatrix<f64>,
    y: &DVector<f64>,
    config: &TuningConfig,
) -> Result<FitResult> {
    let qsys = QSystem::new(tree)?;
    let path = fit_path(tree, x_leaf, y, config, None)?;
    select(tree, &qsys, &path, config.criterion)
}
