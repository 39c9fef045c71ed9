mod common;

use common::{full_tree, max_abs_diff, normal_vec, random_tree};
use comptree::face::{face_dimension, face_dimension_dense};
use comptree::penalty::{build_h, raw_penalty};
use comptree::{build_d, center_alpha, QSystem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fused_row_count_is_q_minus_one(seed in any::<u64>()) {
        let t = random_tree(seed, 80);
        let fused: usize = t.internal_nodes().map(|j| t.children(j).len() - 1).sum();
        prop_assert_eq!(fused, t.q() - 1);
        prop_assert_eq!(t.fused_row_count(), t.q() - 1);
    }

    #[test]
    fn ancestors_end_at_root(seed in any::<u64>()) {
        let t = random_tree(seed, 80);
        for j in 0..t.p() {
            let a = t.ancestors(j).unwrap();
            prop_assert_eq!(a.len(), t.depth(j).unwrap());
            if j == t.root() {
                prop_assert!(a.is_empty());
            } else {
                prop_assert_eq!(*a.last().unwrap(), t.root());
            }
        }
    }

    #[test]
    fn level_sets_partition_nodes(seed in any::<u64>()) {
        let t = random_tree(seed, 80);
        let ls = t.level_sets();
        let mut seen = vec![0usize; t.p()];
        for level in &ls.levels {
            for &j in level {
                seen[j] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(ls.levels.last().unwrap().clone(), vec![t.root()]);
        prop_assert_eq!(ls.levels[0].len(), t.q());
        for w in ls.levels.windows(2) {
            prop_assert!(w[1].len() <= w[0].len());
        }
    }

    #[test]
    fn indexing_is_deterministic(seed in any::<u64>()) {
        let t = random_tree(seed, 60);
        let again = comptree::build_tree(&t.edges()).unwrap();
        prop_assert_eq!(t.names(), again.names());
    }

    #[test]
    fn penalty_equals_raw_definition(seed in any::<u64>()) {
        let t = random_tree(seed, 60);
        let qs = QSystem::new(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let alpha = normal_vec(&mut rng, t.q());
        let beta = qs.recover_beta(&alpha).unwrap();
        for eta in [0.0, 0.3, 1.0] {
            let d = build_d(&t, eta).unwrap();
            let raw = raw_penalty(&t, &alpha, &beta, eta).unwrap();
            prop_assert!((raw - d.l1(&alpha)).abs() <= 1e-9, "eta {}: {} vs {}", eta, raw, d.l1(&alpha));
        }
    }

    #[test]
    fn penalty_annihilates_constants(seed in any::<u64>(), eta in 0.0f64..=1.0, shift in -50.0f64..50.0) {
        let t = random_tree(seed, 60);
        let d = build_d(&t, eta).unwrap();
        let ones = vec![1.0; t.q()];
        prop_assert!(d.apply(&ones).iter().all(|v| v.abs() <= 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = normal_vec(&mut rng, t.q());
        let shifted: Vec<f64> = alpha.iter().map(|a| a + shift).collect();
        prop_assert!((d.l1(&alpha) - d.l1(&shifted)).abs() <= 1e-9 * (1.0 + d.l1(&alpha)));
        let (centered, _) = center_alpha(&alpha);
        prop_assert!((d.l1(&alpha) - d.l1(&centered)).abs() <= 1e-9 * (1.0 + d.l1(&alpha)));
    }

    #[test]
    fn penalty_shape_and_sparsity(seed in any::<u64>(), eta in 0.0f64..=1.0) {
        let t = random_tree(seed, 60);
        let q = t.q();
        let d = build_d(&t, eta).unwrap();
        prop_assert_eq!(d.rows(), 2 * q - 1);
        prop_assert!(d.nnz() <= q * q + (q - 1) * q);
        let dense = d.to_dense();
        for r in q..d.rows() {
            prop_assert!(dense.row(r).sum().abs() <= 1e-12);
        }
        let h = build_h(&t);
        for j in 0..t.p() {
            prop_assert!((h.row(j).sum() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn q_system_round_trip(seed in any::<u64>()) {
        let t = random_tree(seed, 100);
        let qs = QSystem::new(&t).unwrap();
        prop_assert!(qs.min_singular_value() > 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha_tilde = normal_vec(&mut rng, t.q());
        let beta = qs.recover_beta(&alpha_tilde).unwrap();
        prop_assert!(qs.constraint_residual(&beta) <= 1e-10);
        // Q1 beta reproduces the uncentered input exactly.
        prop_assert!(max_abs_diff(&qs.q1_times(&beta), &alpha_tilde) <= 1e-9);
        // And the inverse direction: beta on the constraint manifold survives
        // forward then recover.
        let back = qs.recover_beta(&qs.q1_times(&beta)).unwrap();
        prop_assert!(max_abs_diff(&back, &beta) <= 1e-9);
        let root = beta[t.root()];
        let alpha = qs.forward_alpha(&beta);
        let expect: Vec<f64> = alpha_tilde.iter().map(|a| a - root).collect();
        prop_assert!(max_abs_diff(&alpha, &expect) <= 1e-9);
    }

    #[test]
    fn structured_df_matches_dense_rank(seed in any::<u64>(), eta in prop::sample::select(vec![0.0, 0.25, 0.5, 1.0])) {
        let t = random_tree(seed, 40);
        let d = build_d(&t, eta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let density = rng.gen_range(0.1..0.9);
        let mask: Vec<bool> = (0..d.rows()).map(|_| rng.gen_bool(density)).collect();
        prop_assert_eq!(face_dimension(&d, &mask), face_dimension_dense(&d, &mask));
    }
}

#[test]
fn balanced_trees_give_mean_zero_alpha() {
    for (arity, depth) in [(2, 3), (3, 2), (2, 5)] {
        let t = full_tree(arity, depth);
        let qs = QSystem::new(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(arity as u64 * 10 + depth as u64);
        let alpha_tilde = normal_vec(&mut rng, t.q());
        let beta = qs.recover_beta(&alpha_tilde).unwrap();
        let alpha = qs.forward_alpha(&beta);
        assert!(alpha.iter().sum::<f64>().abs() <= 1e-9);
        let (centered, intercept) = center_alpha(&alpha_tilde);
        assert!((beta[t.root()] - intercept).abs() <= 1e-10);
        assert!(max_abs_diff(&alpha, &centered) <= 1e-10);
    }
}

#[test]
fn zero_sibling_differences_zero_the_group() {
    // Leaves under one child of the root share a value: every beta strictly
    // inside that subtree vanishes.
    let t = full_tree(2, 3);
    let qs = QSystem::new(&t).unwrap();
    let left = t.index_of("r.0").unwrap();
    let mut alpha_tilde = vec![0.0; t.q()];
    for j in 0..t.q() {
        let a = t.ancestors(j).unwrap();
        alpha_tilde[j] = if a.contains(&left) { 1.5 } else { (j as f64).sin() };
    }
    let beta = qs.recover_beta(&alpha_tilde).unwrap();
    for k in 0..t.p() {
        let inside = k != left && t.ancestors(k).unwrap().contains(&left);
        if inside {
            assert!(beta[k].abs() <= 1e-8, "beta[{}] = {}", t.name(k), beta[k]);
        }
    }
}
