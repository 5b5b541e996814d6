mod common;

use design_forge::design::orbit_elements;
use design_forge::group::{
    close_group, commutator_subgroup, stabilizer_count, GeneratorSet, DEFAULT_MAX_ORDER,
    SAME_ELEMENT_TOL,
};
use design_forge::matcore::{seeded_rng, UnitaryMatrix};
use design_forge::presets::sl32_generators;
use proptest::prelude::*;
use rand::Rng;

use common::sl32;

#[test]
fn closure_ignores_generator_order() {
    let gens = sl32_generators();
    let a = close_group(&gens, DEFAULT_MAX_ORDER).unwrap();
    let mut reversed = gens.generators.clone();
    reversed.reverse();
    let b = close_group(
        &GeneratorSet::new("reversed", reversed).unwrap(),
        DEFAULT_MAX_ORDER,
    )
    .unwrap();
    assert_eq!(a.order(), b.order());
    assert!(a.elements().iter().all(|e| b.contains(e, SAME_ELEMENT_TOL)));
}

#[test]
fn derived_subgroup_is_normal() {
    let ambient = close_group(&sl32_generators(), DEFAULT_MAX_ORDER).unwrap();
    let derived = commutator_subgroup(&ambient).unwrap();
    let mut rng = seeded_rng(5);
    for _ in 0..100 {
        let g = &ambient.elements()[rng.random_range(0..ambient.order())];
        let h = &derived.elements()[rng.random_range(0..derived.order())];
        assert!(derived.contains(&g.adjoint().mul(h).mul(g), SAME_ELEMENT_TOL));
    }
}

#[test]
fn closure_is_spot_checked() {
    assert!(sl32().spot_check_closure(1000, 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn stabilizer_predicts_orbit_size(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = sl32();
        let base = UnitaryMatrix::from_phases(&[0.0, a, b]);
        let stab = stabilizer_count(&g, &base, 1e-6);
        let orbit = orbit_elements(g.clone(), base).unwrap();
        prop_assert_eq!(g.order() * g.order() / stab, orbit.elements().unwrap().len());
    }
}
