#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use design_forge::group::{close_group, FiniteMatrixGroup, GeneratorSet, DEFAULT_MAX_ORDER};
use design_forge::matcore::{haar_random, seeded_rng, CMatrix, UnitaryMatrix, C64};
use design_forge::presets::sl32_group;

pub fn sl32() -> Arc<FiniteMatrixGroup> {
    static G: OnceLock<Arc<FiniteMatrixGroup>> = OnceLock::new();
    G.get_or_init(|| Arc::new(sl32_group().unwrap())).clone()
}

/// `{+-I, +-X, +-Z, +-XZ}` in U(2).
pub fn pauli() -> Arc<FiniteMatrixGroup> {
    static G: OnceLock<Arc<FiniteMatrixGroup>> = OnceLock::new();
    G.get_or_init(|| {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let x = UnitaryMatrix::new(CMatrix::from_rows(&[vec![o, l], vec![l, o]]).unwrap()).unwrap();
        let z =
            UnitaryMatrix::new(CMatrix::from_rows(&[vec![l, o], vec![o, -l]]).unwrap()).unwrap();
        let gens = GeneratorSet::new("pauli", vec![x, z]).unwrap();
        Arc::new(close_group(&gens, DEFAULT_MAX_ORDER).unwrap())
    })
    .clone()
}

pub fn haar(d: usize, seed: u64) -> UnitaryMatrix {
    haar_random(d, &mut seeded_rng(seed))
}

pub fn haar_set(d: usize, n: usize, seed: u64) -> Vec<UnitaryMatrix> {
    let mut rng = seeded_rng(seed);
    (0..n).map(|_| haar_random(d, &mut rng)).collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
