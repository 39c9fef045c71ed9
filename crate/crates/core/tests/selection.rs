mod common;

use common::{dirichlet_like, random_tree};
use comptree::selection::{fit, fit_path, select, Criterion, TuningConfig};
use comptree::{center_alpha, CompositionalTree, Error, QSystem};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64) -> (CompositionalTree, DMatrix<f64>, DVector<f64>) {
    let mut s = seed;
    let tree = loop {
        let t = random_tree(s, 24);
        if t.q() >= 5 {
            break t;
        }
        s += 1000;
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 60;
    let x = dirichlet_like(&mut rng, n, tree.q());
    let y = DVector::from_fn(n, |i, _| {
        1.0 + 3.0 * x[(i, 0)] - 2.0 * x[(i, 1)] + 0.2 * rng.gen_range(-1.0..1.0)
    });
    (tree, x, y)
}

fn small_config() -> TuningConfig {
    TuningConfig {
        eta_grid: vec![0.0, 0.5, 1.0],
        lambda_grid_size: 15,
        ..Default::default()
    }
}

#[test]
fn df_stays_in_range_and_mostly_falls_with_lambda() {
    for seed in 0..4 {
        let (tree, x, y) = instance(seed);
        let path = fit_path(&tree, &x, &y, &small_config(), None).unwrap();
        let nl = path.lambda_grid.len();
        for row in path.points.chunks(nl) {
            let dfs: Vec<usize> = row.iter().map(|p| p.as_ref().unwrap().df).collect();
            assert!(dfs.iter().all(|&d| (1..=tree.q()).contains(&d)));
            // lambda decreases along the row, so df should not drop by more
            // than one in a single step.
            for w in dfs.windows(2) {
                assert!(w[1] + 1 >= w[0], "seed {seed}: {dfs:?}");
            }
        }
    }
}

#[test]
fn selection_is_the_surface_minimum() {
    let (tree, x, y) = instance(9);
    let res = fit(&tree, &x, &y, &small_config()).unwrap();
    let min = res.ic_surface.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
    assert_eq!(res.ic_value, min);
    assert!(res.alpha_hat.iter().sum::<f64>().abs() <= 1e-10);
    let qs = QSystem::new(&tree).unwrap();
    assert!(qs.constraint_residual(&res.beta_hat) <= 1e-10);
    let (alpha, intercept) = center_alpha(&res.alpha_tilde);
    assert_eq!(alpha, res.alpha_hat);
    assert_eq!(intercept, res.intercept);
}

#[test]
fn constant_outcome_is_intercept_only() {
    let (tree, x, _) = instance(2);
    let y = DVector::from_element(x.nrows(), 3.0);
    let res = fit(&tree, &x, &y, &small_config()).unwrap();
    assert!(res.alpha_hat.iter().all(|a| a.abs() < 1e-8), "{:?}", res.alpha_hat);
    assert!((res.intercept - 3.0).abs() < 1e-8);
    assert_eq!(res.df, 1);
    assert!(!res.warnings.is_empty());
}

#[test]
fn pure_centering_grid_matches_full_path_row() {
    let (tree, x, y) = instance(5);
    let qs = QSystem::new(&tree).unwrap();
    let classo = fit(
        &tree,
        &x,
        &y,
        &TuningConfig { eta_grid: vec![1.0], ..small_config() },
    )
    .unwrap();
    assert_eq!(classo.eta_hat, 1.0);
    // Same lambda grid, restricted to the eta = 1 row of a bigger path.
    let path = fit_path(&tree, &x, &y, &small_config(), None).unwrap();
    let nl = path.lambda_grid.len();
    let mut row = path.clone();
    row.eta_grid = vec![1.0];
    row.points = path.points[2 * nl..].to_vec();
    let sel = select(&tree, &qs, &row, Criterion::Bic).unwrap();
    assert_eq!(sel.lambda_hat, classo.lambda_hat);
    for (a, b) in sel.beta_hat.iter().zip(&classo.beta_hat) {
        assert!((a - b).abs() <= 1e-9);
    }
}

#[test]
fn invalid_rows_are_listed() {
    let (tree, mut x, y) = instance(1);
    x[(3, 0)] += 0.02;
    x[(7, 1)] -= 0.5;
    match fit(&tree, &x, &y, &small_config()) {
        Err(Error::CompositionViolated { rows }) => assert_eq!(rows, vec![3, 7]),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn path_is_identical_across_thread_counts() {
    let (tree, x, y) = instance(4);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| fit_path(&tree, &x, &y, &small_config(), None).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.points, b.points);
    for (pa, pb) in a.points.iter().zip(&b.points) {
        assert_eq!(pa.as_ref().unwrap().alpha_tilde, pb.as_ref().unwrap().alpha_tilde);
    }
}
