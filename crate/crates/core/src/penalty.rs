//! Tree-structured penalty matrix `D(eta) = [eta * D1 ; (1 - eta) * M * H]`.
//!
//! The first `q` rows select leaves whose marginal effect departs from the
//! leaf average (centering rows). The remaining `q - 1` rows penalize
//! differences between adjacent siblings' conditional effects, expressed on
//! the leaf scale through the subtree-averaging matrix `H` (fused rows).
//!
//! Centering rows are dense but have the closed form `eta * (e_j - 1/q)`, so
//! they are stored implicitly. Fused rows are stored as sparse rows.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tree::CompositionalTree;

/// Which block a penalty row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowTag {
    /// `eta * (e_leaf - 1/q)`.
    Centering { leaf: usize },
    /// `(1 - eta) * (H[left] - H[right])` for adjacent children of `parent`;
    /// `position` is the 0-based slot of `left` among the parent's children.
    Fused {
        parent: usize,
        position: usize,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseRow {
    fn dot(&self, x: &[f64]) -> f64 {
        self.idx.iter().zip(&self.val).map(|(&i, &v)| v * x[i]).sum()
    }
}

/// The `(2q - 1) x q` penalty matrix for a fixed `eta`.
#[derive(Debug, Clone)]
pub struct PenaltyMatrix {
    q: usize,
    eta: f64,
    /// Fused rows already scaled by `1 - eta`.
    fused: Vec<SparseRow>,
    fused_tags: Vec<RowTag>,
    groups: Vec<SiblingGroup>,
    subtree_leaves: Vec<Vec<usize>>,
}

/// Children of one internal node together with the index of the first fused
/// row (within the fused block) that chains them.
#[derive(Debug, Clone, PartialEq)]
pub struct SiblingGroup {
    pub parent: usize,
    pub children: Vec<usize>,
    pub first_row: usize,
}

/// `I_q - (1/q) 1 1^T`.
pub fn build_centering(q: usize) -> Result<DMatrix<f64>> {
    if q < 2 {
        return Err(Error::InvalidDimension(format!(
            "centering matrix needs q >= 2, got {q}"
        )));
    }
    let off = 1.0 / q as f64;
    Ok(DMatrix::from_fn(q, q, |i, j| {
        if i == j {
            1.0 - off
        } else {
            -off
        }
    }))
}

/// Subtree-averaging matrix `H` (`p x q`): unit rows for leaves, and for an
/// internal node the mean of its children's rows, filled level by level.
pub fn build_h(tree: &CompositionalTree) -> DMatrix<f64> {
    let (p, q) = (tree.p(), tree.q());
    let mut h = DMatrix::zeros(p, q);
    for j in 0..q {
        h[(j, j)] = 1.0;
    }
    for level in tree.level_sets().levels.iter().skip(1) {
        for &j in level {
            let children = tree.children(j);
            let w = 1.0 / children.len() as f64;
            for &c in children {
                for col in 0..q {
                    let v = h[(c, col)];
                    if v != 0.0 {
                        h[(j, col)] += w * v;
                    }
                }
            }
        }
    }
    h
}

/// Adjacent-sibling difference matrix `M` (`(q - 1) x p`), rows stacked by
/// increasing parent index, siblings in input order.
pub fn build_fused(tree: &CompositionalTree) -> DMatrix<f64> {
    let tags = fused_tags(tree);
    let mut m = DMatrix::zeros(tags.len(), tree.p());
    for (r, tag) in tags.iter().enumerate() {
        if let RowTag::Fused { left, right, .. } = *tag {
            m[(r, left)] = 1.0;
            m[(r, right)] = -1.0;
        }
    }
    m
}

fn fused_tags(tree: &CompositionalTree) -> Vec<RowTag> {
    let mut tags = Vec::with_capacity(tree.q().saturating_sub(1));
    for j in tree.internal_nodes() {
        let ch = tree.children(j);
        for s in 0..ch.len() - 1 {
            tags.push(RowTag::Fused {
                parent: j,
                position: s,
                left: ch[s],
                right: ch[s + 1],
            });
        }
    }
    tags
}

/// Assembles `D(eta)` for a tree.
pub fn build_d(tree: &CompositionalTree, eta: f64) -> Result<PenaltyMatrix> {
    PenaltyMatrix::new(tree, eta)
}

impl PenaltyMatrix {
    pub fn new(tree: &CompositionalTree, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || eta.is_nan() {
            return Err(Error::EtaOutOfRange(eta));
        }
        let q = tree.q();
        let h = build_h(tree);
        let fused_tags = fused_tags(tree);
        let scale = 1.0 - eta;
        let fused = fused_tags
            .iter()
            .map(|tag| {
                let RowTag::Fused { left, right, .. } = *tag else {
                    unreachable!()
                };
                let mut row = SparseRow {
                    idx: Vec::new(),
                    val: Vec::new(),
                };
                if scale != 0.0 {
                    for col in 0..q {
                        let v = h[(left, col)] - h[(right, col)];
                        if v != 0.0 {
                            row.idx.push(col);
                            row.val.push(scale * v);
                        }
                    }
                }
                row
            })
            .collect();
        let mut groups = Vec::new();
        let mut first_row = 0;
        for j in tree.internal_nodes() {
            let children = tree.children(j).to_vec();
            let len = children.len();
            groups.push(SiblingGroup {
                parent: j,
                children,
                first_row,
            });
            first_row += len - 1;
        }
        let subtree_leaves = (0..tree.p())
            .map(|j| (0..q).filter(|&c| h[(j, c)] != 0.0).collect())
            .collect();
        Ok(Self {
            q,
            eta,
            fused,
            fused_tags,
            groups,
            subtree_leaves,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn rows(&self) -> usize {
        2 * self.q - 1
    }

    pub fn tag(&self, r: usize) -> RowTag {
        if r < self.q {
            RowTag::Centering { leaf: r }
        } else {
            self.fused_tags[r - self.q]
        }
    }

    pub fn sibling_groups(&self) -> &[SiblingGroup] {
        &self.groups
    }

    /// Leaves (column indices) in the subtree of node `j`.
    pub fn subtree_leaves(&self, j: usize) -> &[usize] {
        &self.subtree_leaves[j]
    }

    pub fn fused_rows(&self) -> &[SparseRow] {
        &self.fused
    }

    /// True when row `r` is identically zero because its block weight is 0.
    pub fn is_zero_row(&self, r: usize) -> bool {
        if r < self.q {
            self.eta == 0.0
        } else {
            self.eta == 1.0
        }
    }

    /// Number of stored nonzeros when materialized.
    pub fn nnz(&self) -> usize {
        let centering = if self.eta > 0.0 { self.q * self.q } else { 0 };
        centering + self.fused.iter().map(|r| r.idx.len()).sum::<usize>()
    }

    /// `D alpha` written into `out` (length `2q - 1`).
    pub fn apply_into(&self, alpha: &[f64], out: &mut [f64]) {
        let q = self.q;
        let mean = alpha.iter().sum::<f64>() / q as f64;
        for j in 0..q {
            out[j] = self.eta * (alpha[j] - mean);
        }
        for (s, row) in self.fused.iter().enumerate() {
            out[q + s] = row.dot(alpha);
        }
    }

    pub fn apply(&self, alpha: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.apply_into(alpha, &mut out);
        out
    }

    /// `D^T z` written into `out` (length `q`).
    pub fn apply_t_into(&self, z: &[f64], out: &mut [f64]) {
        let q = self.q;
        let mean = z[..q].iter().sum::<f64>() / q as f64;
        for j in 0..q {
            out[j] = self.eta * (z[j] - mean);
        }
        for (s, row) in self.fused.iter().enumerate() {
            let zs = z[q + s];
            if zs != 0.0 {
                for (&i, &v) in row.idx.iter().zip(&row.val) {
                    out[i] += v * zs;
                }
            }
        }
    }

    pub fn apply_t(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.q];
        self.apply_t_into(z, &mut out);
        out
    }

    /// `||D alpha||_1`.
    pub fn l1(&self, alpha: &[f64]) -> f64 {
        self.apply(alpha).iter().map(|v| v.abs()).sum()
    }

    /// Row `r` as a dense length-`q` vector.
    pub fn row_dense(&self, r: usize) -> Vec<f64> {
        let q = self.q;
        let mut row = vec![0.0; q];
        if r < q {
            if self.eta != 0.0 {
                let off = self.eta / q as f64;
                row.iter_mut().for_each(|v| *v = -off);
                row[r] += self.eta;
            }
        } else {
            let sr = &self.fused[r - q];
            for (&i, &v) in sr.idx.iter().zip(&sr.val) {
                row[i] = v;
            }
        }
        row
    }

    /// `sum of d_r d_r^T` over the rows with `mask[r]`.
    pub fn gram_rows(&self, mask: &[bool]) -> DMatrix<f64> {
        let q = self.q;
        let mut g = DMatrix::zeros(q, q);
        if self.eta != 0.0 {
            let e2 = self.eta * self.eta;
            let inv = 1.0 / q as f64;
            let count = mask[..q].iter().filter(|&&b| b).count() as f64;
            let base = count * inv * inv;
            for b in 0..q {
                for a in 0..q {
                    let mut v = base - inv * (mask[a] as u8 + mask[b] as u8) as f64;
                    if a == b && mask[a] {
                        v += 1.0;
                    }
                    g[(a, b)] = e2 * v;
                }
            }
        }
        for (s, row) in self.fused.iter().enumerate() {
            if !mask[q + s] {
                continue;
            }
            for (&i, &vi) in row.idx.iter().zip(&row.val) {
                for (&j, &vj) in row.idx.iter().zip(&row.val) {
                    g[(i, j)] += vi * vj;
                }
            }
        }
        g
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.rows(), self.q);
        for r in 0..self.rows() {
            for (c, v) in self.row_dense(r).into_iter().enumerate() {
                d[(r, c)] = v;
            }
        }
        d
    }

    /// Writes the matrix in MatrixMarket coordinate format (1-based), with
    /// row tags as comments.
    pub fn write_matrix_market<W: Write>(
        &self,
        tree: &CompositionalTree,
        mut w: W,
    ) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "% penalty matrix D(eta), eta = {}", self.eta)?;
        for r in 0..self.rows() {
            match self.tag(r) {
                RowTag::Centering { leaf } => {
                    writeln!(w, "% row {}: centering {}", r + 1, tree.name(leaf))?
                }
                RowTag::Fused {
                    parent,
                    left,
                    right,
                    ..
                } => writeln!(
                    w,
                    "% row {}: fused {} : {} - {}",
                    r + 1,
                    tree.name(parent),
                    tree.name(left),
                    tree.name(right)
                )?,
            }
        }
        let mut entries = Vec::with_capacity(self.nnz());
        for r in 0..self.rows() {
            for (c, v) in self.row_dense(r).into_iter().enumerate() {
                if v != 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        writeln!(w, "{} {} {}", self.rows(), self.q, entries.len())?;
        for (r, c, v) in entries {
            writeln!(w, "{} {} {:.17e}", r + 1, c + 1, v)?;
        }
        Ok(())
    }
}

/// `eta * sum_j |alpha_j - mean(alpha)| + (1 - eta) * sum over sibling chains
/// of |beta_left - beta_right|`, evaluated straight from the definitions.
pub fn raw_penalty(tree: &CompositionalTree, alpha: &[f64], beta: &[f64], eta: f64) -> Result<f64> {
    if alpha.len() != tree.q() {
        return Err(Error::LengthMismatch {
            expected: tree.q(),
            got: alpha.len(),
        });
    }
    if beta.len() != tree.p() {
        return Err(Error::LengthMismatch {
            expected: tree.p(),
            got: beta.len(),
        });
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::EtaOutOfRange(eta));
    }
    let mean = alpha.iter().sum::<f64>() / alpha.len() as f64;
    let p1: f64 = alpha.iter().map(|a| (a - mean).abs()).sum();
    let mut p2 = 0.0;
    for j in tree.internal_nodes() {
        for pair in tree.children(j).windows(2) {
            p2 += (beta[pair[0]] - beta[pair[1]]).abs();
        }
    }
    Ok(eta * p1 + (1.0 - eta) * p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::build_tree;
    use crate::tree::tests::figure2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gram_rows_matches_dense() {
        let t = figure2();
        for &eta in &[0.0, 0.3, 1.0] {
            let d = build_d(&t, eta).unwrap();
            let mask: Vec<bool> = (0..d.rows()).map(|r| r % 3 != 1).collect();
            let dense = d.to_dense();
            let mut want = DMatrix::zeros(t.q(), t.q());
            for r in 0..d.rows() {
                if mask[r] {
                    let row = dense.row(r);
                    want += row.transpose() * row;
                }
            }
            assert!((d.gram_rows(&mask) - want).amax() < 1e-14);
        }
    }

    #[test]
    fn centering_small_cases() {
        let d2 = build_centering(2).unwrap();
        assert_eq!(d2, DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]));
        let d3 = build_centering(3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 / 3.0 } else { -1.0 / 3.0 };
                assert!(close(d3[(i, j)], want, 1e-15));
            }
        }
        assert!(matches!(build_centering(1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn centering_is_projector() {
        for q in 2..12 {
            let d = build_centering(q).unwrap();
            let dd = &d * &d;
            assert!((dd - &d).amax() < 1e-12);
            assert!((d.transpose() - &d).amax() == 0.0);
            for i in 0..q {
                assert!(d.row(i).sum().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn h_two_leaf() {
        let t = build_tree(&[("A", "R"), ("B", "R")]).unwrap();
        let h = build_h(&t);
        assert_eq!(h, DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.5, 0.5]));
    }

    #[test]
    fn h_figure2_by_hand() {
        let t = figure2();
        let h = build_h(&t);
        let ix = |s: &str| t.index_of(s).unwrap();
        let mut x7 = vec![0.0; 6];
        x7[ix("X2")] = 0.5;
        x7[ix("X3")] = 0.5;
        let mut x9 = vec![0.0; 6];
        x9[ix("X1")] = 0.5;
        x9[ix("X2")] = 0.25;
        x9[ix("X3")] = 0.25;
        for c in 0..6 {
            assert!(close(h[(ix("X7"), c)], x7[c], 1e-15));
            assert!(close(h[(ix("X9"), c)], x9[c], 1e-15));
        }
        for r in 0..t.p() {
            assert!(close(h.row(r).sum(), 1.0, 1e-12));
        }
    }

    #[test]
    fn h_matches_level_product_on_full_ternary_tree() {
        // Full 3-ary tree of depth 2: H restricted to each level equals the
        // product of per-level averaging maps.
        let mut edges = Vec::new();
        for g in 0..3 {
            for l in 0..3 {
                edges.push((format!("L{}", 3 * g + l), format!("G{g}")));
            }
        }
        for g in 0..3 {
            edges.push((format!("G{g}"), "R".to_string()));
        }
        let t = build_tree(&edges).unwrap();
        let h = build_h(&t);
        let ls = t.level_sets();
        let mut acc = DMatrix::<f64>::identity(t.q(), t.q());
        for l in 1..ls.len() {
            let prev = &ls.levels[l - 1];
            let cur = &ls.levels[l];
            let mut hl = DMatrix::zeros(cur.len(), prev.len());
            for (k, &j) in cur.iter().enumerate() {
                let ch = t.children(j);
                for &c in ch {
                    let pos = prev.iter().position(|&x| x == c).unwrap();
                    hl[(k, pos)] = 1.0 / ch.len() as f64;
                }
            }
            acc = hl * acc;
            for (k, &j) in cur.iter().enumerate() {
                for c in 0..t.q() {
                    assert!(close(acc[(k, c)], h[(j, c)], 1e-14));
                }
            }
        }
    }

    #[test]
    fn fused_two_leaf_and_figure2() {
        let t = build_tree(&[("A", "R"), ("B", "R")]).unwrap();
        assert_eq!(build_fused(&t), DMatrix::from_row_slice(1, 3, &[1.0, -1.0, 0.0]));

        let t = figure2();
        let m = build_fused(&t);
        assert_eq!(m.nrows(), 5);
        let ix = |s: &str| t.index_of(s).unwrap();
        let mut rows: Vec<(String, String)> = Vec::new();
        for r in 0..5 {
            let pos = (0..t.p()).find(|&c| m[(r, c)] == 1.0).unwrap();
            let neg = (0..t.p()).find(|&c| m[(r, c)] == -1.0).unwrap();
            rows.push((t.name(pos).to_string(), t.name(neg).to_string()));
            assert_eq!(m.row(r).sum(), 0.0);
        }
        // Stacked by parent index: X7 (index 6), X8 (7), X9 (8), X10 (9).
        assert!(ix("X7") < ix("X8"));
        let want = [("X2", "X3"), ("X4", "X5"), ("X5", "X6"), ("X1", "X7"), ("X9", "X8")];
        for (got, want) in rows.iter().zip(want) {
            assert_eq!((got.0.as_str(), got.1.as_str()), want);
        }
    }

    #[test]
    fn d_blocks_and_null_direction() {
        let t = figure2();
        let q = t.q();
        for &eta in &[0.0, 0.3, 1.0] {
            let d = build_d(&t, eta).unwrap();
            let dense = d.to_dense();
            assert_eq!(dense.nrows(), 2 * q - 1);
            let ones = nalgebra::DVector::from_element(q, 1.0);
            assert!((&dense * ones).amax() < 1e-12);
            let d1 = build_centering(q).unwrap() * eta;
            let mh = build_fused(&t) * build_h(&t) * (1.0 - eta);
            assert!((dense.rows(0, q) - d1).amax() < 1e-14);
            assert!((dense.rows(q, q - 1) - mh).amax() < 1e-14);
            assert!(d.nnz() <= q * q + (q - 1) * q);
        }
        let d1 = build_d(&t, 1.0).unwrap().to_dense();
        assert_eq!(d1.rows(q, q - 1).amax(), 0.0);
        let d0 = build_d(&t, 0.0).unwrap().to_dense();
        assert_eq!(d0.rows(0, q).amax(), 0.0);
        assert!(matches!(build_d(&t, 1.5), Err(Error::EtaOutOfRange(_))));
        assert!(matches!(build_d(&t, -0.1), Err(Error::EtaOutOfRange(_))));
    }

    #[test]
    fn structured_ops_match_dense() {
        let t = figure2();
        let d = build_d(&t, 0.4).unwrap();
        let dense = d.to_dense();
        let a = [0.3, -1.2, 2.5, 0.0, 4.1, -0.7];
        let z: Vec<f64> = (0..d.rows()).map(|r| (r as f64 * 0.37).sin()).collect();
        let da = &dense * nalgebra::DVector::from_column_slice(&a);
        let dtz = dense.transpose() * nalgebra::DVector::from_column_slice(&z);
        for (x, y) in d.apply(&a).iter().zip(da.iter()) {
            assert!(close(*x, *y, 1e-13));
        }
        for (x, y) in d.apply_t(&z).iter().zip(dtz.iter()) {
            assert!(close(*x, *y, 1e-13));
        }
    }

    #[test]
    fn raw_penalty_direct() {
        let t = build_tree(&[("A", "R"), ("B", "R")]).unwrap();
        let v = raw_penalty(&t, &[1.0, -1.0], &[1.0, -1.0, 0.0], 0.5).unwrap();
        assert!(close(v, 2.0, 1e-15));
        let t = figure2();
        let z = raw_penalty(&t, &[2.0; 6], &[0.0; 10], 0.7).unwrap();
        assert_eq!(z, 0.0);
        assert!(matches!(
            raw_penalty(&t, &[0.0; 5], &[0.0; 10], 0.5),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn matrix_market_dump() {
        let t = build_tree(&[("A", "R"), ("B", "R")]).unwrap();
        let d = build_d(&t, 0.5).unwrap();
        let mut buf = Vec::new();
        d.write_matrix_market(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('%')).collect();
        assert_eq!(body[0], "3 2 6");
        assert!(text.contains("% row 3: fused R : A - B"));
    }
}
