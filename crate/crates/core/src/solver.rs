//! ADMM solver for the tree-penalized least-squares problem
//!
//! ```text
//! minimize_a  (1/n) ||y - X a||^2 + ridge * ||a||^2 + lambda * ||D a||_1
//! ```
//!
//! split as `z = D a`. The `a`-update solves
//! `((2/n) X^T X + 2 ridge I + rho D^T D) a = (2/n) X^T y + rho D^T (z - u)`
//! with a Cholesky factor cached per penalty matrix, the `z`-update is
//! soft-thresholding at `lambda / rho` and `u` is the scaled dual.
//!
//! Once the sign pattern of `z` settles, the iterate is polished: the problem
//! restricted to the face `{a : (D a)_r = 0 for inactive r}` with fixed signs
//! on the active rows is a plain quadratic, solved exactly. The polished point
//! is kept only if it is sign-consistent and passes the KKT check, so the
//! returned solution has exact zeros in `D a` where the penalty is inactive.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::face::{active_tolerance, face_basis};
use crate::penalty::PenaltyMatrix;

/// How the ADMM penalty parameter is set for each `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoRule {
    /// `rho` as given, one factorization per penalty matrix.
    Fixed,
    /// `rho * lambda`, so the soft-threshold level `1 / rho` is the same at
    /// every grid point. Refactors once per `lambda`.
    ProportionalToLambda,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    pub rho: f64,
    pub rho_rule: RhoRule,
    pub max_iter: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Weight of the `||a||^2` term.
    pub ridge: f64,
    pub warm_start: bool,
    /// Attempt exact polishing on the active face.
    pub polish: bool,
    /// KKT violation, relative to `1 + ||(2/n) X^T y||_inf`, below which a
    /// polished point is accepted.
    pub polish_kkt_tol: f64,
    /// Record the objective at every iteration.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 20.0,
            rho_rule: RhoRule::ProportionalToLambda,
            max_iter: 10_000,
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            ridge: 0.0,
            warm_start: true,
            polish: true,
            polish_kkt_tol: 1e-7,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(Error::InvalidConfig(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be > 0".into()));
        }
        if !(self.ridge >= 0.0) {
            return Err(Error::InvalidConfig(format!("ridge must be >= 0, got {}", self.ridge)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverSolution {
    pub alpha_tilde: Vec<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
    pub objective: f64,
    /// Whether the returned point came from face polishing.
    pub polished: bool,
    /// KKT violation of the returned point, when it was computed.
    pub kkt: Option<f64>,
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
    /// `||z_k - z_{k-1}||^2 + ||u_k - u_{k-1}||^2` per iteration. Non-increasing
    /// for a fixed `rho`, unlike the objective.
    #[serde(skip)]
    pub step_trace: Vec<f64>,
    #[serde(skip)]
    pub(crate) state: Option<AdmmState>,
}

/// ADMM iterates carried between consecutive lambdas on a path.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    lambda: f64,
    rho: f64,
    alpha: Vec<f64>,
    z: Vec<f64>,
    u: Vec<f64>,
}

/// Sufficient statistics of a least-squares design.
#[derive(Debug, Clone)]
pub struct Design {
    n: usize,
    x: DMatrix<f64>,
    y: DVector<f64>,
    /// `(2/n) X^T X`.
    gram: DMatrix<f64>,
    /// `(2/n) X^T y`.
    xty: DVector<f64>,
    /// `(1/n) y^T y`.
    yy: f64,
}

impl Design {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let n = x.nrows();
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "X has {} rows, y has length {}",
                n,
                y.len()
            )));
        }
        if n == 0 {
            return Err(Error::DimensionMismatch("empty design".into()));
        }
        let scale = 2.0 / n as f64;
        let gram = x.tr_mul(&x) * scale;
        let xty = x.tr_mul(&y) * scale;
        let yy = y.norm_squared() / n as f64;
        Ok(Self {
            n,
            x,
            y,
            gram,
            xty,
            yy,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// `sum_i (y_i - a^T x_i)^2`.
    pub fn rss(&self, alpha: &[f64]) -> f64 {
        let a = DVector::from_column_slice(alpha);
        (&self.y - &self.x * a).norm_squared()
    }

    /// Gradient of the smooth part: `(2/n) X^T (X a - y) + 2 ridge a`.
    pub fn gradient(&self, alpha: &[f64], ridge: f64) -> Vec<f64> {
        let a = DVector::from_column_slice(alpha);
        let g = &self.gram * &a - &self.xty + a * (2.0 * ridge);
        g.iter().copied().collect()
    }

    /// `(1/n) ||y - X a||^2 + ridge ||a||^2` from the cached Gram matrix.
    fn smooth_loss(&self, alpha: &DVector<f64>, ridge: f64) -> f64 {
        let ga = &self.gram * alpha;
        self.yy - self.xty.dot(alpha) + 0.5 * alpha.dot(&ga) + ridge * alpha.norm_squared()
    }
}

/// Objective value `(1/n) RSS + ridge ||a||^2 + lambda ||D a||_1`.
pub fn objective(design: &Design, d: &PenaltyMatrix, lambda: f64, ridge: f64, alpha: &[f64]) -> f64 {
    design.rss(alpha) / design.n as f64
        + ridge * alpha.iter().map(|a| a * a).sum::<f64>()
        + lambda * d.l1(alpha)
}

/// Solver bound to one design and one penalty matrix, holding the cached
/// factorization for reuse across a lambda path.
pub struct AdmmSolver<'a> {
    design: &'a Design,
    d: &'a PenaltyMatrix,
    config: SolverConfig,
    /// Factorization and the `rho` it was built for.
    chol: Option<(f64, Cholesky<f64, Dyn>)>,
    /// `(2/n) X^T X + 2 ridge I`.
    hess: DMatrix<f64>,
    dtd: DMatrix<f64>,
}

impl<'a> AdmmSolver<'a> {
    pub fn new(design: &'a Design, d: &'a PenaltyMatrix, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let q = design.q();
        if d.q() != q {
            return Err(Error::DimensionMismatch(format!(
                "design has {} leaf columns, penalty has {}",
                q,
                d.q()
            )));
        }
        let mut hess = design.gram.clone();
        for i in 0..q {
            hess[(i, i)] += 2.0 * config.ridge;
        }
        let dtd = d.gram_rows(&vec![true; d.rows()]);
        let mut solver = Self {
            design,
            d,
            config,
            chol: None,
            hess,
            dtd,
        };
        if solver.config.rho_rule == RhoRule::Fixed {
            solver.factor(solver.config.rho)?;
        }
        Ok(solver)
    }

    fn factor(&mut self, rho: f64) -> Result<()> {
        if matches!(self.chol, Some((r, _)) if r == rho) {
            return Ok(());
        }
        let system = &self.hess + &self.dtd * rho;
        let chol = system.cholesky().ok_or_else(|| {
            Error::SingularSystem("(2/n) X^T X + 2 ridge I + rho D^T D is not positive definite".into())
        })?;
        self.chol = Some((rho, chol));
        Ok(())
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn kkt_scale(&self) -> f64 {
        1.0 + self.design.xty.amax()
    }

    fn kkt_target(&self) -> f64 {
        self.config.polish_kkt_tol * self.kkt_scale()
    }

    pub fn objective(&self, lambda: f64, alpha: &[f64]) -> f64 {
        let a = DVector::from_column_slice(alpha);
        self.design.smooth_loss(&a, self.config.ridge) + lambda * self.d.l1(alpha)
    }

    /// Solves for one `lambda`, optionally warm-started from a previous
    /// solution on the same design and penalty.
    pub fn solve(&mut self, lambda: f64, warm: Option<&SolverSolution>) -> Result<SolverSolution> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidConfig(format!("lambda must be > 0, got {lambda}")));
        }
        let q = self.design.q();
        let m = self.d.rows();
        let rho = match self.config.rho_rule {
            RhoRule::Fixed => self.config.rho,
            RhoRule::ProportionalToLambda => self.config.rho * lambda,
        };
        self.factor(rho)?;
        let chol = &self.chol.as_ref().expect("factored").1;
        let thresh = lambda / rho;

        let (mut alpha, mut z, mut u) = match warm.and_then(|w| w.state.as_ref()) {
            Some(s) if self.config.warm_start => {
                let scale = (s.rho / s.lambda) * (lambda / rho);
                (
                    s.alpha.clone(),
                    s.z.clone(),
                    s.u.iter().map(|v| v * scale).collect::<Vec<_>>(),
                )
            }
            _ => (vec![0.0; q], vec![0.0; m], vec![0.0; m]),
        };

        let mut rhs = DVector::zeros(q);
        let mut w = vec![0.0; m];
        let mut dtw = vec![0.0; q];
        let mut da = vec![0.0; m];
        let mut z_old = vec![0.0; m];
        let mut dz = vec![0.0; m];
        let mut trace = Vec::new();
        let mut step_trace = Vec::new();
        let mut u_step = 0.0;

        let mut primal = f64::INFINITY;
        let mut dual = f64::INFINITY;
        let mut converged = false;
        let mut iterations = 0;
        let mut pattern: Vec<i8> = Vec::new();
        let mut stable_since = 0usize;
        let mut last_tried: Vec<i8> = Vec::new();
        let mut polished: Option<(Vec<f64>, f64)> = None;

        for k in 1..=self.config.max_iter {
            iterations = k;
            for r in 0..m {
                w[r] = z[r] - u[r];
            }
            self.d.apply_t_into(&w, &mut dtw);
            for i in 0..q {
                rhs[i] = self.design.xty[i] + rho * dtw[i];
            }
            chol.solve_mut(&mut rhs);
            alpha.copy_from_slice(rhs.as_slice());

            self.d.apply_into(&alpha, &mut da);
            z_old.copy_from_slice(&z);
            for r in 0..m {
                let v = da[r] + u[r];
                z[r] = soft_threshold(v, thresh);
                let u_new = v - z[r];
                if self.config.trace {
                    u_step += (u_new - u[r]) * (u_new - u[r]);
                }
                u[r] = u_new;
            }

            for r in 0..m {
                dz[r] = z[r] - z_old[r];
            }
            if self.config.trace {
                trace.push(self.objective(lambda, &alpha));
                step_trace.push(dz.iter().map(|v| v * v).sum::<f64>() + u_step);
                u_step = 0.0;
            }
            self.d.apply_t_into(&dz, &mut dtw);
            dual = rho * norm2(&dtw);
            primal = da.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();

            let eps_pri = (m as f64).sqrt() * self.config.abs_tol
                + self.config.rel_tol * norm2(&da).max(norm2(&z));
            self.d.apply_t_into(&u, &mut dtw);
            let eps_dual =
                (q as f64).sqrt() * self.config.abs_tol + self.config.rel_tol * rho * norm2(&dtw);
            if primal <= eps_pri && dual <= eps_dual {
                converged = true;
                break;
            }

            if self.config.polish && k % POLISH_EVERY == 0 {
                let current: Vec<i8> = z.iter().map(|&v| sign(v)).collect();
                if current == pattern {
                    stable_since += POLISH_EVERY;
                } else {
                    pattern = current;
                    stable_since = 0;
                }
                if stable_since >= POLISH_STABLE && pattern != last_tried {
                    last_tried = pattern.clone();
                    if let Some((a, kkt)) = self.polish(lambda, rho, &pattern, &u, POLISH_ROUNDS_EARLY) {
                        if kkt <= self.kkt_target() {
                            polished = Some((a, kkt));
                            break;
                        }
                    }
                }
            }
        }

        let state = AdmmState {
            lambda,
            rho,
            alpha: alpha.clone(),
            z: z.clone(),
            u: u.clone(),
        };

        if polished.is_none() && self.config.polish {
            let current: Vec<i8> = z.iter().map(|&v| sign(v)).collect();
            if let Some((a, kkt)) = self.polish(lambda, rho, &current, &u, POLISH_ROUNDS) {
                let admm_obj = self.objective(lambda, &alpha);
                let pol_obj = self.objective(lambda, &a);
                if kkt <= self.kkt_target()
                    || (converged
                        && kkt <= POLISH_FALLBACK_TOL * self.kkt_scale()
                        && pol_obj <= admm_obj + 1e-12 * admm_obj.abs().max(1.0))
                {
                    polished = Some((a, kkt));
                }
            }
        }

        let (final_alpha, is_polished, kkt) = match polished {
            Some((a, kkt)) => {
                converged = true;
                (a, true, Some(kkt))
            }
            None => (alpha, false, None),
        };
        if !converged {
            log::debug!(
                "ADMM did not converge in {} iterations (lambda {:.3e}, primal {:.3e}, dual {:.3e})",
                iterations,
                lambda,
                primal,
                dual
            );
        }
        let objective = self.objective(lambda, &final_alpha);
        Ok(SolverSolution {
            alpha_tilde: final_alpha,
            iterations,
            primal_residual: primal,
            dual_residual: dual,
            converged,
            objective,
            polished: is_polished,
            kkt,
            objective_trace: trace,
            step_trace,
            state: Some(state),
        })
    }

    /// Exact minimizer on the face given by `pattern` (0 = inactive row,
    /// +-1 = active with that sign). Active rows whose sign is not reproduced
    /// are moved to the inactive set and the face is solved again. Returns the
    /// point and its KKT violation once the signs are consistent.
    fn polish(
        &self,
        lambda: f64,
        rho: f64,
        pattern: &[i8],
        u: &[f64],
        rounds: usize,
    ) -> Option<(Vec<f64>, f64)> {
        let mut pattern = pattern.to_vec();
        let mut best: Option<(Vec<f64>, f64)> = None;
        for _ in 0..rounds {
            let (alpha, basis) = self.face_solve(lambda, &pattern)?;
            let da = self.d.apply(&alpha);
            let tol = active_tolerance(&da);
            let mut changed = false;
            for r in 0..da.len() {
                if pattern[r] != 0 && sign_with_tol(da[r], tol) != pattern[r] {
                    pattern[r] = 0;
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            let gamma0: Vec<f64> = u.iter().map(|v| v * rho / lambda).collect();
            let (kkt, outside) = kkt_core(
                self.d,
                &self.design.gradient(&alpha, self.config.ridge),
                lambda,
                &da,
                Some(&gamma0),
                self.kkt_target(),
                Some(&basis),
            );
            log::trace!("polish at lambda {lambda:.3e}: kkt {kkt:.3e}, {} rows outside", outside.len());
            if kkt <= self.kkt_target() || outside.is_empty() {
                return Some((alpha, kkt));
            }
            best = match best {
                Some((a, b)) if b <= kkt => Some((a, b)),
                _ => Some((alpha, kkt)),
            };
            for (r, sgn) in outside {
                pattern[r] = sgn;
            }
        }
        log::trace!("polish at lambda {lambda:.3e}: active set did not settle");
        best
    }

    fn face_solve(&self, lambda: f64, pattern: &[i8]) -> Option<(Vec<f64>, DMatrix<f64>)> {
        let inactive: Vec<bool> = pattern.iter().map(|&s| s == 0).collect();
        let face = face_basis(self.d, &inactive);
        let n_basis = &face.basis;
        let s: Vec<f64> = pattern.iter().map(|&v| v as f64).collect();
        let dts = DVector::from_vec(self.d.apply_t(&s));
        let g0 = &self.design.xty - dts * lambda;
        let hn = &self.hess * n_basis;
        let reduced = n_basis.tr_mul(&hn);
        let rhs = n_basis.tr_mul(&g0);
        let theta = reduced.cholesky()?.solve(&rhs);
        let alpha: Vec<f64> = (n_basis * theta).iter().copied().collect();
        if alpha.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some((alpha, face.basis))
    }
}

const POLISH_ROUNDS: usize = 8;
/// Relative KKT bound for keeping a polished point that did not reach
/// `polish_kkt_tol` but improves on the converged ADMM iterate.
const POLISH_FALLBACK_TOL: f64 = 1e-6;
const POLISH_ROUNDS_EARLY: usize = 2;
const POLISH_EVERY: usize = 10;
const POLISH_STABLE: usize = 20;

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn sign_with_tol(v: f64, tol: f64) -> i8 {
    if v > tol {
        1
    } else if v < -tol {
        -1
    } else {
        0
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One-shot solve with a fresh factorization.
pub fn solve(
    x_leaf: &DMatrix<f64>,
    y: &DVector<f64>,
    d: &PenaltyMatrix,
    lambda: f64,
    config: &SolverConfig,
) -> Result<SolverSolution> {
    let design = Design::new(x_leaf.clone(), y.clone())?;
    let mut solver = AdmmSolver::new(&design, d, config.clone())?;
    solver.solve(lambda, None)
}

/// Largest stationarity violation of `alpha_tilde`, after choosing the
/// subgradient of `||D a||_1` that minimizes it. Rows with
/// `|(D a)_r| > 1e-6 (1 + ||D a||_inf)` take `sign((D a)_r)`; the remaining
/// multipliers are fitted within `[-1, 1]` by box-constrained least squares,
/// so the result is an upper bound on the minimal infinity-norm residual.
pub fn kkt_check(
    x_leaf: &DMatrix<f64>,
    y: &DVector<f64>,
    d: &PenaltyMatrix,
    lambda: f64,
    alpha_tilde: &[f64],
    ridge: f64,
) -> Result<f64> {
    let design = Design::new(x_leaf.clone(), y.clone())?;
    if alpha_tilde.len() != design.q() || d.q() != design.q() {
        return Err(Error::DimensionMismatch("alpha / penalty / design widths differ".into()));
    }
    let g = design.gradient(alpha_tilde, ridge);
    let da = d.apply(alpha_tilde);
    Ok(kkt_violation(d, &g, lambda, &da, None))
}

/// Core of [`kkt_check`] on a precomputed gradient `g` and `D a`.
pub fn kkt_violation(
    d: &PenaltyMatrix,
    g: &[f64],
    lambda: f64,
    da: &[f64],
    gamma_init: Option<&[f64]>,
) -> f64 {
    kkt_violation_to(d, g, lambda, da, gamma_init, 0.0)
}

/// [`kkt_violation`] that stops as soon as the violation is at most `target`.
///
/// The free multipliers are found by alternating projections between the
/// box `[-1, 1]` and the affine set `{gamma : D_free^T gamma = -r0 / lambda}`,
/// where `r0` is the residual with the fixed signs. The projection onto the
/// affine set uses `(D_free^T D_free + N N^T)^-1` with `N` an orthonormal
/// basis of the null space of `D_free`.
pub fn kkt_violation_to(
    d: &PenaltyMatrix,
    g: &[f64],
    lambda: f64,
    da: &[f64],
    gamma_init: Option<&[f64]>,
    target: f64,
) -> f64 {
    kkt_core(d, g, lambda, da, gamma_init, target, None).0
}

/// Violation plus the free rows whose unconstrained multiplier left the box,
/// with the sign it left by.
fn kkt_core(
    d: &PenaltyMatrix,
    g: &[f64],
    lambda: f64,
    da: &[f64],
    gamma_init: Option<&[f64]>,
    target: f64,
    null: Option<&DMatrix<f64>>,
) -> (f64, Vec<(usize, i8)>) {
    let q = d.q();
    let m = d.rows();
    let tol = active_tolerance(da);
    let mut fixed = vec![0.0; m];
    let mut free_mask = vec![false; m];
    let mut free: Vec<usize> = Vec::new();
    for r in 0..m {
        if da[r].abs() > tol {
            fixed[r] = da[r].signum();
        } else if !d.is_zero_row(r) {
            free_mask[r] = true;
            free.push(r);
        }
    }
    let r0: Vec<f64> = d
        .apply_t(&fixed)
        .iter()
        .zip(g)
        .map(|(a, b)| b + lambda * a)
        .collect();
    let r0_norm = inf_norm(&r0);
    if free.is_empty() || lambda == 0.0 || r0_norm <= target {
        return (r0_norm, Vec::new());
    }

    let k = free.len();
    let mut d_free = DMatrix::zeros(k, q);
    for (i, &r) in free.iter().enumerate() {
        for (j, v) in d.row_dense(r).into_iter().enumerate() {
            d_free[(i, j)] = v;
        }
    }
    let owned;
    let null = match null {
        Some(n) => n,
        None => {
            owned = face_basis(d, &free_mask).basis;
            &owned
        }
    };
    let gram = d.gram_rows(&free_mask) + null * null.transpose();
    let Some(chol) = gram.cholesky() else {
        return (r0_norm, Vec::new());
    };
    let w = DVector::from_iterator(q, r0.iter().map(|v| -v / lambda));

    let mut gamma = DVector::from_fn(k, |i, _| {
        gamma_init.map_or(0.0, |init| init[free[i]].clamp(-1.0, 1.0))
    });
    let residual = |gamma: &DVector<f64>| -> f64 { (d_free.tr_mul(gamma) - &w).amax() * lambda };
    let mut best = residual(&gamma).min(r0_norm);
    let mut checkpoint = best;
    let mut outside = Vec::new();
    let mut iters = 0;
    for it in 1..=KKT_PROJECTIONS {
        iters = it;
        if best <= target {
            break;
        }
        if target > 0.0 && it % 20 == 0 {
            // Linear convergence stalls when the intersection is empty.
            if best > 0.5 * checkpoint {
                break;
            }
            checkpoint = best;
        }
        let e = &w - d_free.tr_mul(&gamma);
        let e_perp = &e - null * null.tr_mul(&e);
        let delta = &d_free * chol.solve(&e_perp);
        let step = delta.amax();
        gamma += delta;
        outside = (0..k)
            .filter(|&i| gamma[i].abs() > 1.0 + 1e-9)
            .map(|i| (free[i], if gamma[i] > 0.0 { 1 } else { -1 }))
            .collect();
        gamma.apply(|v| *v = v.clamp(-1.0, 1.0));
        best = best.min(residual(&gamma));
        if step < 1e-15 {
            break;
        }
    }
    log::trace!("kkt projections: {iters}, violation {best:.3e}");
    (best, outside)
}

const KKT_PROJECTIONS: usize = 5000;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Splits `alpha_tilde` into mean-zero marginal effects and the intercept.
pub fn center_alpha(alpha_tilde: &[f64]) -> (Vec<f64>, f64) {
    let mean = alpha_tilde.iter().sum::<f64>() / alpha_tilde.len() as f64;
    (alpha_tilde.iter().map(|a| a - mean).collect(), mean)
}
