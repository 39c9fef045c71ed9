#![allow(dead_code)]

use comptree::CompositionalTree;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random valid tree with at most `max_p` nodes, grown by splitting a random
/// leaf into 2-4 children. Edge order is shuffled.
pub fn random_tree(seed: u64, max_p: usize) -> CompositionalTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = rng.gen_range(3..=max_p.max(3));
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut leaves = vec![0usize];
    let mut next = 1usize;
    while next < target {
        let room = target - next;
        if room < 2 {
            break;
        }
        let k = rng.gen_range(2..=room.min(4));
        let at = rng.gen_range(0..leaves.len());
        let parent = leaves.swap_remove(at);
        for _ in 0..k {
            edges.push((format!("n{next}"), format!("n{parent}")));
            leaves.push(next);
            next += 1;
        }
    }
    edges.shuffle(&mut rng);
    CompositionalTree::from_edges(&edges).expect("generated tree is valid")
}

/// Complete tree where every internal node has `arity` children.
pub fn full_tree(arity: usize, depth: usize) -> CompositionalTree {
    let mut edges = Vec::new();
    let mut level = vec!["r".to_string()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for parent in &level {
            for c in 0..arity {
                let child = format!("{parent}.{c}");
                edges.push((child.clone(), parent.clone()));
                next.push(child);
            }
        }
        level = next;
    }
    CompositionalTree::from_edges(&edges).unwrap()
}

pub fn figure2() -> CompositionalTree {
    let edges = [
        ("X9", "X10"),
        ("X8", "X10"),
        ("X1", "X9"),
        ("X7", "X9"),
        ("X2", "X7"),
        ("X3", "X7"),
        ("X4", "X8"),
        ("X5", "X8"),
        ("X6", "X8"),
    ];
    CompositionalTree::from_edges(&edges).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn normal_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()
}

/// `n x q` matrix of positive compositions.
pub fn dirichlet_like(rng: &mut ChaCha8Rng, n: usize, q: usize) -> nalgebra::DMatrix<f64> {
    let mut x = nalgebra::DMatrix::from_fn(n, q, |_, _| rng.gen_range(0.05..1.0));
    for i in 0..n {
        let s = x.row(i).sum();
        x.row_mut(i).scale_mut(1.0 / s);
    }
    x
}

/// Independent solution of
/// `min (1/n)||y - X a||^2 + ridge ||a||^2 + lambda ||D a||_1`
/// by accelerated projected gradient on the box-constrained dual
/// `min_{|g| <= 1} 1/2 (b - lambda D^T g)^T A^{-1} (b - lambda D^T g)` with
/// `A = (2/n) X^T X + 2 ridge I`, `b = (2/n) X^T y`. Requires `A` positive
/// definite. Returns the primal point, its objective, and the dual value.
pub struct DualOracle {
    pub alpha: Vec<f64>,
    pub primal: f64,
    pub dual: f64,
    pub iterations: usize,
}

pub fn dual_oracle(
    x: &nalgebra::DMatrix<f64>,
    y: &nalgebra::DVector<f64>,
    d: &nalgebra::DMatrix<f64>,
    lambda: f64,
    ridge: f64,
    max_iter: usize,
) -> DualOracle {
    use nalgebra::{DMatrix, DVector};
    let n = x.nrows() as f64;
    let q = x.ncols();
    let a = x.transpose() * x * (2.0 / n) + DMatrix::identity(q, q) * (2.0 * ridge);
    let b = x.transpose() * y * (2.0 / n);
    let yy = y.dot(y) / n;
    let ainv = a.clone().cholesky().expect("A must be positive definite").inverse();
    let m = d * &ainv * d.transpose() * (lambda * lambda);
    let lip = m.symmetric_eigenvalues().max().max(1e-300);
    let primal_at = |g: &DVector<f64>| -> (DVector<f64>, f64, f64) {
        let r = &b - d.transpose() * g * lambda;
        let alpha = &ainv * &r;
        let smooth = 0.5 * alpha.dot(&(&a * &alpha)) - b.dot(&alpha) + yy;
        let primal = smooth + lambda * (d * &alpha).abs().sum();
        let dual = -0.5 * r.dot(&alpha) + yy;
        (alpha, primal, dual)
    };
    let rows = d.nrows();
    let mut g = DVector::zeros(rows);
    let mut z = g.clone();
    let mut t = 1.0f64;
    let mut best = primal_at(&g);
    let mut iterations = 0;
    for k in 0..max_iter {
        iterations = k + 1;
        let r = &b - d.transpose() * &z * lambda;
        let grad = -(d * (&ainv * r)) * lambda;
        let g_next = (&z - grad / lip).map(|v| v.clamp(-1.0, 1.0));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        // Adaptive restart when the step goes uphill.
        let uphill = (&g_next - &g).dot(&(&z - &g_next)) > 0.0;
        if uphill {
            z = g.clone();
            t = 1.0;
            continue;
        }
        z = &g_next + (&g_next - &g) * ((t - 1.0) / t_next);
        g = g_next;
        t = t_next;
        if k % 100 == 0 {
            let cur = primal_at(&g);
            if cur.1 < best.1 {
                best.0 = cur.0;
                best.1 = cur.1;
            }
            best.2 = best.2.max(cur.2);
            if best.1 - best.2 <= 1e-13 * (1.0 + best.1.abs()) {
                break;
            }
        }
    }
    let cur = primal_at(&g);
    if cur.1 < best.1 {
        best.0 = cur.0;
        best.1 = cur.1;
    }
    best.2 = best.2.max(cur.2);
    DualOracle {
        alpha: best.0.iter().copied().collect(),
        primal: best.1,
        dual: best.2,
        iterations,
    }
}

/// `(1/n)||y - X a||^2 + ridge ||a||^2 + lambda ||D a||_1` from dense pieces.
pub fn dense_objective(
    x: &nalgebra::DMatrix<f64>,
    y: &nalgebra::DVector<f64>,
    d: &nalgebra::DMatrix<f64>,
    lambda: f64,
    ridge: f64,
    alpha: &[f64],
) -> f64 {
    let a = nalgebra::DVector::from_column_slice(alpha);
    let r = y - x * &a;
    r.dot(&r) / x.nrows() as f64 + ridge * a.dot(&a) + lambda * (d * &a).abs().sum()
}

/// Zero-sum lasso `min (1/n)||yc - Xc a||^2 + lambda ||a||_1` s.t. `sum a = 0`
/// on the column-centered design, solved by enumerating all sign patterns.
/// Returns `(a, intercept)` with `intercept = mean(y) - mean_row(X) . a`.
pub fn zero_sum_lasso_enumerate(
    x: &nalgebra::DMatrix<f64>,
    y: &nalgebra::DVector<f64>,
    lambda: f64,
) -> (Vec<f64>, f64) {
    use nalgebra::{DMatrix, DVector};
    let (n, q) = x.shape();
    let nf = n as f64;
    let xbar: Vec<f64> = (0..q).map(|j| x.column(j).mean()).collect();
    let xc = DMatrix::from_fn(n, q, |i, j| x[(i, j)] - xbar[j]);
    let yc = y.add_scalar(-y.mean());
    let objective = |a: &DVector<f64>| {
        let r = &yc - &xc * a;
        r.dot(&r) / nf + lambda * a.abs().sum()
    };
    let mut best = (DVector::zeros(q), objective(&DVector::zeros(q)));
    let total = 3usize.pow(q as u32);
    for code in 0..total {
        let mut c = code;
        let signs: Vec<i32> = (0..q)
            .map(|_| {
                let s = (c % 3) as i32 - 1;
                c /= 3;
                s
            })
            .collect();
        let support: Vec<usize> = (0..q).filter(|&j| signs[j] != 0).collect();
        let k = support.len();
        if k < 2 {
            continue;
        }
        let mut m = DMatrix::zeros(k + 1, k + 1);
        let mut rhs = DVector::zeros(k + 1);
        for (a, &ja) in support.iter().enumerate() {
            for (b, &jb) in support.iter().enumerate() {
                m[(a, b)] = 2.0 / nf * xc.column(ja).dot(&xc.column(jb));
            }
            m[(a, k)] = 1.0;
            m[(k, a)] = 1.0;
            rhs[a] = 2.0 / nf * xc.column(ja).dot(&yc) - lambda * signs[ja] as f64;
        }
        let Some(sol) = m.lu().solve(&rhs) else { continue };
        let mut a = DVector::zeros(q);
        let mut consistent = true;
        for (i, &j) in support.iter().enumerate() {
            a[j] = sol[i];
            if (sol[i] > 0.0) != (signs[j] > 0) {
                consistent = false;
            }
        }
        if !consistent {
            continue;
        }
        let f = objective(&a);
        if f < best.1 {
            best = (a, f);
        }
    }
    let a = best.0;
    let intercept = y.mean() - xbar.iter().zip(a.iter()).map(|(m, v)| m * v).sum::<f64>();
    (a.iter().copied().collect(), intercept)
}
