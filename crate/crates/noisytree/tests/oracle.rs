//! Infinite-sample checks: exact noisy correlations must lead every
//! estimator into the true equivalence class.

use noisytree::model::{exact_correlations, noisy_correlations, IsingNoiseSpec, IsingTreeModel};
use noisytree::quartet::{classify_corr, Classifier, QuartetCorr};
use noisytree::recovery::{chow_liu, detect_clusters, recover, recover_with, ModelKind, RecoveryConfig};
use noisytree::tree_core::{all_labeled_trees, equivalence_clusters, is_equivalent, random_tree, TreeStructure};
use noisytree::CorrelationMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RHO_MIN: f64 = 0.3;
const RHO_MAX: f64 = 0.9;
const Q_MAX: f64 = 0.3;

fn random_params(tree: &TreeStructure, rng: &mut ChaCha8Rng) -> CorrelationMatrix {
    let corr: Vec<f64> = tree
        .edges()
        .iter()
        .map(|_| {
            let mag = rng.random_range(RHO_MIN..=RHO_MAX);
            if rng.random_bool(0.5) { mag } else { -mag }
        })
        .collect();
    let q: Vec<f64> = (0..tree.d()).map(|_| rng.random_range(0.0..=Q_MAX)).collect();
    let m = IsingTreeModel::with_bounds(tree.clone(), corr, RHO_MIN, RHO_MAX).unwrap();
    noisy_correlations(&exact_correlations(&m), &IsingNoiseSpec::new(q).unwrap()).unwrap()
}

fn config(cls: Classifier) -> RecoveryConfig {
    RecoveryConfig::new(RHO_MIN, RHO_MAX, Q_MAX, cls, ModelKind::Ising).unwrap()
}

fn check(tree: &TreeStructure, c: &CorrelationMatrix) {
    for cls in [Classifier::Ka, Classifier::Sga] {
        let out = recover(c, &config(cls)).unwrap();
        assert!(is_equivalent(tree, &out).unwrap(), "{cls:?} on {tree}: got {out}");
    }
}

#[test]
fn every_small_labeled_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in 4..=7 {
        for tree in all_labeled_trees(d) {
            let c = random_params(&tree, &mut rng);
            check(&tree, &c);
        }
    }
}

#[test]
fn random_larger_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..300 {
        let d = 8 + k % 5;
        let tree = random_tree(d, &mut rng).unwrap();
        for _ in 0..3 {
            let c = random_params(&tree, &mut rng);
            check(&tree, &c);
        }
    }
}

#[test]
fn detected_partition_matches_clusters() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cfg = config(Classifier::Sga);
    let a = cfg.alpha().unwrap();
    let classify = |q: &QuartetCorr| classify_corr(Classifier::Sga, q, a);
    for d in 4..=7 {
        for tree in all_labeled_trees(d).into_iter().step_by(3) {
            let c = random_params(&tree, &mut rng);
            let view = detect_clusters(&c, cfg.proximal_threshold().unwrap(), &classify);
            assert_eq!(view.clusters, equivalence_clusters(&tree).clusters, "{tree}");
        }
    }
}

#[test]
fn classifier_swap_only_changes_the_test() {
    // An SGA-shaped closure that answers with KA verdicts must reproduce KA exactly.
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let cfg = config(Classifier::Ka);
    let a = cfg.alpha().unwrap();
    let t = cfg.proximal_threshold().unwrap();
    let stub = |q: &QuartetCorr| classify_corr(Classifier::Ka, q, a);
    for _ in 0..200 {
        let d = rng.random_range(5..=10);
        let tree = random_tree(d, &mut rng).unwrap();
        let mut c = random_params(&tree, &mut rng);
        c = CorrelationMatrix::from_fn(d, |i, j| c.get(i, j) + rng.random_range(-0.01..0.01));
        assert_eq!(recover(&c, &cfg).unwrap(), recover_with(&c, t, &stub).unwrap());
    }
}

#[test]
fn recovery_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let tree = random_tree(11, &mut rng).unwrap();
    let c = random_params(&tree, &mut rng);
    let cfg = config(Classifier::Sga);
    assert_eq!(recover(&c, &cfg).unwrap(), recover(&c, &cfg).unwrap());
}

#[test]
fn chow_liu_recovers_clean_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for d in 2..=6 {
        for tree in all_labeled_trees(d) {
            let corr: Vec<f64> = tree.edges().iter().map(|_| rng.random_range(0.3..0.9)).collect();
            let c = exact_correlations(&IsingTreeModel::new(tree.clone(), corr).unwrap());
            assert_eq!(chow_liu(&c).unwrap(), tree);
        }
    }
    for _ in 0..200 {
        let tree = random_tree(10, &mut rng).unwrap();
        let corr: Vec<f64> = tree.edges().iter().map(|_| rng.random_range(-0.9..-0.3)).collect();
        let c = exact_correlations(&IsingTreeModel::new(tree.clone(), corr).unwrap());
        assert_eq!(chow_liu(&c).unwrap(), tree);
    }
}
