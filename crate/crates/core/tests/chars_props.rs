mod common;

use design_forge::chars::{
    character_eval, group_moment, haar_moment, list_phi, Character, HighestWeight,
};
use design_forge::group::FiniteMatrixGroup;
use proptest::prelude::*;

use common::{haar, pauli, sl32};

fn weight_strategy() -> impl Strategy<Value = HighestWeight> {
    (2usize..=4)
        .prop_flat_map(|d| prop::collection::vec(-3i32..=3, d))
        .prop_map(|mut v| {
            v.sort_unstable_by(|a, b| b.cmp(a));
            HighestWeight::new(v).unwrap()
        })
}

fn average(g: &FiniteMatrixGroup, mu: &HighestWeight) -> f64 {
    let chi = Character::new(mu.clone());
    g.elements()
        .iter()
        .map(|e| chi.eval(e.matrix()).re)
        .sum::<f64>()
        / g.order() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characters_are_class_functions(mu in weight_strategy(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let d = mu.dim();
        let (u, v) = (haar(d, s1), haar(d, s2));
        let a = character_eval(&mu, &u).unwrap();
        let b = character_eval(&mu, &v.adjoint().mul(&u).mul(&v)).unwrap();
        prop_assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0));
    }

    #[test]
    fn character_at_identity_is_the_dimension(mu in weight_strategy()) {
        let d = mu.dim();
        let v = character_eval(&mu, &design_forge::matcore::UnitaryMatrix::identity(d)).unwrap();
        prop_assert!((v.re - mu.weyl_dimension() as f64).abs() <= 1e-6 * v.re.abs().max(1.0));
        prop_assert!(v.im.abs() <= 1e-6);
    }
}

#[test]
fn group_moments_bound_haar_moments() {
    for g in [sl32(), pauli()] {
        for t in 1..=5 {
            assert!(group_moment(&g, t) >= haar_moment(t, g.dim()) as f64 - 1e-9);
        }
    }
}

#[test]
fn haar_moment_is_factorial_up_to_d() {
    for d in 1..=8usize {
        let mut fact = 1u128;
        for t in 1..=d as u32 {
            fact *= t as u128;
            assert_eq!(haar_moment(t, d), fact, "t = {t}, d = {d}");
        }
    }
}

#[test]
fn group_averages_are_multiplicities() {
    for (g, n) in [(sl32(), 3), (pauli(), 3)] {
        for mu in list_phi(n, g.dim()) {
            let avg = average(&g, &mu);
            assert!(
                (avg - avg.round()).abs() <= 1e-6 && avg.round() >= 0.0,
                "{mu}: {avg}"
            );
        }
    }
}
