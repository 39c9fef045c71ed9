//! Recovery of conditional deviation effects from marginal ones.
//!
//! `Q1` maps a coefficient vector `beta` on all `p` nodes to the leaf scale:
//! row `j` is the indicator of leaf `j` and every ancestor including the root.
//! `Q2` has one row per internal node holding the indicator of its children,
//! so `Q2 beta = 0` is the per-sibling-group zero-sum constraint. The stacked
//! `p x p` matrix is invertible for every valid tree.
//!
//! The right-hand side uses the uncentered leaf coefficients `alpha_tilde`
//! (marginal effects plus intercept). The solution then carries the intercept
//! in the root coordinate, and the non-root coordinates do not depend on how
//! `alpha_tilde` was shifted.

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{Error, Result};
use crate::tree::CompositionalTree;

/// Smallest singular value below which `Q` is reported as singular.
pub const Q_SINGULAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct QSystem {
    q1: DMatrix<f64>,
    q2: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    min_singular: f64,
    condition: f64,
    p: usize,
    q: usize,
}

pub fn build_q(tree: &CompositionalTree) -> Result<QSystem> {
    QSystem::new(tree)
}

impl QSystem {
    pub fn new(tree: &CompositionalTree) -> Result<Self> {
        let (p, q) = (tree.p(), tree.q());
        let mut q1 = DMatrix::zeros(q, p);
        for j in 0..q {
            q1[(j, j)] = 1.0;
            for a in tree.ancestors(j)? {
                q1[(j, a)] = 1.0;
            }
        }
        let mut q2 = DMatrix::zeros(p - q, p);
        for (r, j) in tree.internal_nodes().enumerate() {
            for &c in tree.children(j) {
                q2[(r, c)] = 1.0;
            }
        }
        let mut full = DMatrix::zeros(p, p);
        full.rows_mut(0, q).copy_from(&q1);
        full.rows_mut(q, p - q).copy_from(&q2);

        let sv = full.clone().singular_values();
        let max_sv = sv.max();
        let min_sv = sv.min();
        if !(min_sv > Q_SINGULAR_TOL) {
            return Err(Error::SingularQ(min_sv));
        }
        Ok(Self {
            q1,
            q2,
            lu: full.lu(),
            min_singular: min_sv,
            condition: max_sv / min_sv,
            p,
            q,
        })
    }

    pub fn q1(&self) -> &DMatrix<f64> {
        &self.q1
    }

    pub fn q2(&self) -> &DMatrix<f64> {
        &self.q2
    }

    pub fn min_singular_value(&self) -> f64 {
        self.min_singular
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// Solves `Q beta = (alpha_tilde ; 0)`.
    pub fn recover_beta(&self, alpha_tilde: &[f64]) -> Result<Vec<f64>> {
        if alpha_tilde.len() != self.q {
            return Err(Error::DimensionMismatch(format!(
                "alpha has length {}, tree has {} leaves",
                alpha_tilde.len(),
                self.q
            )));
        }
        let mut rhs = DVector::zeros(self.p);
        rhs.rows_mut(0, self.q).copy_from_slice(alpha_tilde);
        let beta = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::SingularSystem("Q factorization".into()))?;
        Ok(beta.iter().copied().collect())
    }

    /// Marginal effects `beta_j + sum of beta over non-root ancestors`.
    /// Logs a warning when `beta` violates the sibling zero-sum constraints.
    pub fn forward_alpha(&self, beta: &[f64]) -> Vec<f64> {
        let resid = self.constraint_residual(beta);
        if resid > 1e-8 {
            log::warn!("beta violates sibling zero-sum constraints (max residual {resid:.3e})");
        }
        let root = beta[self.p - 1];
        self.q1_times(beta).into_iter().map(|v| v - root).collect()
    }

    /// `Q1 beta`: marginal effects plus the root coefficient.
    pub fn q1_times(&self, beta: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(beta);
        (&self.q1 * b).iter().copied().collect()
    }

    /// `max |Q2 beta|`.
    pub fn constraint_residual(&self, beta: &[f64]) -> f64 {
        let b = DVector::from_column_slice(beta);
        (&self.q2 * b).amax()
    }
}
