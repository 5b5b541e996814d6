mod common;

use design_forge::invariant::{
    diag_from_uv, torus_curve, InvariantPolynomial, Submanifold, TORUS_LHS_SCALE,
};
use design_forge::matcore::{haar_random, seeded_rng};
use proptest::prelude::*;
use rand::Rng;

use common::{haar, pauli, rel, sl32};

fn sl32_f() -> InvariantPolynomial {
    InvariantPolynomial::new(sl32(), "3,0,-3".parse().unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn single_sum_matches_double_sum(seed in any::<u64>()) {
        let f = sl32_f();
        let u = haar(3, seed);
        prop_assert!(rel(f.eval_f(&u).unwrap(), f.eval_f_naive(&u).unwrap()) <= 1e-9);
    }

    #[test]
    fn single_sum_matches_double_sum_on_pauli(seed in any::<u64>(), k in 1i32..=3) {
        let f = InvariantPolynomial::new(pauli(), format!("{k},-{k}").parse().unwrap()).unwrap();
        let u = haar(2, seed);
        prop_assert!(rel(f.eval_f(&u).unwrap(), f.eval_f_naive(&u).unwrap()) <= 1e-9);
    }

    #[test]
    fn f_is_two_sided_invariant(seed in any::<u64>(), i in 0usize..168, j in 0usize..168) {
        let f = sl32_f();
        let g = sl32();
        let u = haar(3, seed);
        let moved = g.elements()[i].adjoint().mul(&u).mul(&g.elements()[j]);
        prop_assert!((f.eval_f(&moved).unwrap() - f.eval_f(&u).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn submanifold_samples_stay_block_diagonal(blocks in prop::collection::vec(1usize..=3, 1..=3), seed in any::<u64>()) {
        let sub = Submanifold::new(blocks).unwrap();
        let u = sub.sample(&mut seeded_rng(seed));
        prop_assert_eq!(u.dim(), sub.dim());
        prop_assert!(sub.off_block_norm(&u) == 0.0);
    }
}

#[test]
fn haar_mean_of_f_vanishes() {
    let f = sl32_f();
    let mut rng = seeded_rng(11);
    let n = 10_000;
    let values: Vec<f64> = (0..n)
        .map(|_| f.eval_f(&haar_random(3, &mut rng)).unwrap())
        .collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    assert!(mean.abs() <= 5.0 * se, "mean {mean}, standard error {se}");
}

#[test]
fn f_and_torus_condition_share_signs() {
    let f = sl32_f();
    let curve = torus_curve(128).unwrap();
    let mut signs = [0usize; 2];
    for p in &curve.grid {
        if p.lhs.abs() / TORUS_LHS_SCALE <= 1e-3 {
            continue;
        }
        let fv = f.eval_f(&diag_from_uv(p.u, p.v, 0.0)).unwrap();
        let agree = (fv > 0.0) == (p.lhs > 0.0);
        signs[agree as usize] += 1;
    }
    assert!(signs[0] == 0 || signs[1] == 0, "mixed signs {signs:?}");
    assert!(signs[0] + signs[1] > 0);
}

#[test]
fn central_phase_leaves_f_unchanged() {
    let f = sl32_f();
    let mut rng = seeded_rng(2);
    for _ in 0..20 {
        let u = haar_random(3, &mut rng);
        let phi = rng.random_range(-3.0..3.0);
        let moved = f.central_translation(phi).mul(&u);
        assert!((f.eval_f(&moved).unwrap() - f.eval_f(&u).unwrap()).abs() <= 1e-9);
    }
}
