//! Null space of the inactive penalty rows.
//!
//! Given the rows `r` of `D(eta)` with `(D alpha)_r = 0`, the set of `alpha`
//! satisfying all of them is the face of the penalty on which a candidate
//! solution lives. Its dimension is the effective degrees of freedom, and an
//! orthonormal basis of it turns the nonsmooth problem into a small linear
//! solve (used to polish ADMM iterates).
//!
//! Inactive fused rows merge adjacent siblings into blocks with equal
//! conditional effect, so the fused part of the face has an explicit basis
//! built from sibling blocks. Inactive centering rows are then imposed on that
//! basis through a small SVD.

use nalgebra::{DMatrix, DVector};

use crate::penalty::PenaltyMatrix;

/// Relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Face {
    /// Orthonormal basis, `q x dim`.
    pub basis: DMatrix<f64>,
}

impl Face {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Builds the face for a mask of inactive rows (`true` = row constrains
/// `D alpha` to zero). Rows that are identically zero are ignored.
pub fn face_basis(d: &PenaltyMatrix, inactive: &[bool]) -> Face {
    let spanning = face_spanning(d, inactive);
    let basis = if spanning.ncols() == 0 {
        spanning
    } else {
        spanning.qr().q()
    };
    Face { basis }
}

/// Linearly independent (not orthonormal) columns spanning the face.
fn face_spanning(d: &PenaltyMatrix, inactive: &[bool]) -> DMatrix<f64> {
    let q = d.q();
    let eta = d.eta();
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; q]];

    for group in d.sibling_groups() {
        let mut blocks: Vec<Vec<usize>> = vec![vec![group.children[0]]];
        for s in 0..group.children.len() - 1 {
            let r = q + group.first_row + s;
            let merged = inactive[r] && !d.is_zero_row(r);
            if merged {
                blocks.last_mut().unwrap().push(group.children[s + 1]);
            } else {
                blocks.push(vec![group.children[s + 1]]);
            }
        }
        if blocks.len() < 2 {
            continue;
        }
        let first = &blocks[0];
        for block in &blocks[1..] {
            let mut col = vec![0.0; q];
            let w0 = 1.0 / first.len() as f64;
            for &k in first {
                for &leaf in d.subtree_leaves(k) {
                    col[leaf] += w0;
                }
            }
            let wt = 1.0 / block.len() as f64;
            for &k in block {
                for &leaf in d.subtree_leaves(k) {
                    col[leaf] -= wt;
                }
            }
            cols.push(col);
        }
    }

    let dim_f = cols.len();
    let b = DMatrix::from_fn(q, dim_f, |i, j| cols[j][i]);

    let centering: Vec<usize> = if eta > 0.0 {
        (0..q).filter(|&j| inactive[j]).collect()
    } else {
        Vec::new()
    };

    if centering.is_empty() {
        b
    } else {
        // Constraint alpha_j - mean(alpha) = 0 on alpha = B theta.
        let col_means: Vec<f64> = (0..dim_f).map(|c| b.column(c).mean()).collect();
        let g = DMatrix::from_fn(centering.len(), dim_f, |r, c| b[(centering[r], c)] - col_means[c]);
        b * null_space(&g)
    }
}

/// Orthonormal basis of the null space of `g` (`k x m`).
fn null_space(g: &DMatrix<f64>) -> DMatrix<f64> {
    let (k, m) = g.shape();
    if k >= m {
        let svd = g.clone().svd(false, true);
        let v_t = svd.v_t.expect("v_t requested");
        let tol = RANK_TOL * svd.singular_values.max().max(1.0);
        let keep: Vec<usize> = (0..m).filter(|&i| svd.singular_values[i] <= tol).collect();
        return DMatrix::from_fn(m, keep.len(), |i, c| v_t[(keep[c], i)]);
    }
    // Few constraints: orthonormal row space from a thin SVD of g^T, then its
    // complement from the Householder reflections that triangularize it.
    let svd = g.transpose().svd(true, false);
    let u = svd.u.expect("u requested");
    let tol = RANK_TOL * svd.singular_values.max().max(1.0);
    let keep: Vec<usize> = (0..k).filter(|&i| svd.singular_values[i] > tol).collect();
    let r = keep.len();
    let mut a = DMatrix::from_fn(m, r, |i, c| u[(i, keep[c])]);
    let mut reflectors: Vec<DVector<f64>> = Vec::with_capacity(r);
    for j in 0..r {
        let mut v: DVector<f64> = a.view((j, j), (m - j, 1)).column(0).into_owned();
        let norm = v.norm();
        v[0] += if v[0] >= 0.0 { norm } else { -norm };
        let vn = v.norm();
        if vn > 0.0 {
            v /= vn;
        }
        let mut block = a.view_mut((j, j), (m - j, r - j));
        let w = block.tr_mul(&v);
        block.ger(-2.0, &v, &w, 1.0);
        reflectors.push(v);
    }
    let mut z = DMatrix::zeros(m, m - r);
    for c in 0..m - r {
        z[(r + c, c)] = 1.0;
    }
    for (j, v) in reflectors.iter().enumerate().rev() {
        let mut block = z.view_mut((j, 0), (m - j, m - r));
        let w = block.tr_mul(v);
        block.ger(-2.0, v, &w, 1.0);
    }
    z
}

/// Marks rows with `|(D alpha)_r| <= tol` as inactive.
pub fn inactive_mask(d_alpha: &[f64], tol: f64) -> Vec<bool> {
    d_alpha.iter().map(|v| v.abs() <= tol).collect()
}

/// Active-set tolerance `1e-6 * (1 + ||D alpha||_inf)`.
pub fn active_tolerance(d_alpha: &[f64]) -> f64 {
    let m = d_alpha.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    1e-6 * (1.0 + m)
}

/// `q - rank(D_inactive)` via the structured face basis.
pub fn face_dimension(d: &PenaltyMatrix, inactive: &[bool]) -> usize {
    face_spanning(d, inactive).ncols()
}

/// `q - rank(D_inactive)` via a dense SVD of the stacked inactive rows, with
/// cutoff `RANK_TOL * ||D_inactive||_2`.
pub fn face_dimension_dense(d: &PenaltyMatrix, inactive: &[bool]) -> usize {
    let q = d.q();
    let rows: Vec<Vec<f64>> = (0..d.rows())
        .filter(|&r| inactive[r])
        .map(|r| d.row_dense(r))
        .collect();
    if rows.is_empty() {
        return q;
    }
    let m = DMatrix::from_fn(rows.len(), q, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return q;
    }
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * smax).count();
    q - rank
}
