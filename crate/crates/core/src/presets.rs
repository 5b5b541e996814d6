//! Generator matrices of the two shipped unitary t-groups.
//!
//! Cyclotomic entries are written as closed-form doubles: `E(n)` is
//! `exp(2 pi i / n)`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::group::{
    close_group, commutator_subgroup, FiniteMatrixGroup, GeneratorSet, DEFAULT_MAX_ORDER,
};
use crate::matcore::{CMatrix, UnitaryMatrix, C64};

fn root_of_unity(n: u32, k: u32) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * f64::from(k) / f64::from(n))
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn unitary(rows: Vec<Vec<C64>>) -> UnitaryMatrix {
    UnitaryMatrix::new(CMatrix::from_rows(&rows).expect("square")).expect("preset is unitary")
}

/// `a = -(E(7)^4 + E(7)^2 + E(7)) = (1 - i sqrt 7) / 2`.
pub fn sl32_a() -> C64 {
    -(root_of_unity(7, 4) + root_of_unity(7, 2) + root_of_unity(7, 1))
}

/// Generators of the order-336 group whose derived subgroup is SL(3,2) in U(3).
pub fn sl32_generators() -> GeneratorSet {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let h = c(0.5, 0.0);
    let a = sl32_a();
    let m1 = unitary(vec![vec![l, o, o], vec![o, o, l], vec![o, l, o]]);
    let m2 = unitary(vec![vec![l, o, o], vec![o, l, o], vec![o, o, -l]]);
    let m3 = unitary(vec![
        vec![h, -h, -a * 0.5],
        vec![-h, h, -a * 0.5],
        vec![-a.conj() * 0.5, -a.conj() * 0.5, o],
    ]);
    GeneratorSet::new("sl32-ambient", vec![m1, m2, m3]).expect("consistent dims")
}

/// Generators of the group whose derived subgroup is Sp(4,3) in U(4).
pub fn sp43_generators() -> GeneratorSet {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let w = root_of_unity(3, 1);
    let w2 = root_of_unity(3, 2);
    let s3 = 3f64.sqrt();
    let i_s3 = c(0.0, s3);
    let pref = c(0.0, -1.0 / s3);
    let scaled = |rows: Vec<Vec<C64>>| -> UnitaryMatrix {
        unitary(
            rows.into_iter()
                .map(|r| r.into_iter().map(|z| z * pref).collect())
                .collect(),
        )
    };
    let m1 = unitary(vec![
        vec![l, o, o, o],
        vec![o, l, o, o],
        vec![o, o, w2, o],
        vec![o, o, o, l],
    ]);
    let m2 = scaled(vec![
        vec![w, w2, w2, o],
        vec![w2, w, w2, o],
        vec![w2, w2, w, o],
        vec![o, o, o, i_s3],
    ]);
    let m3 = unitary(vec![
        vec![l, o, o, o],
        vec![o, w2, o, o],
        vec![o, o, l, o],
        vec![o, o, o, l],
    ]);
    let m4 = scaled(vec![
        vec![w, -w2, o, -w2],
        vec![-w2, w, o, w2],
        vec![o, o, i_s3, o],
        vec![-w2, w2, o, w],
    ]);
    GeneratorSet::new("sp43-ambient", vec![m1, m2, m3, m4]).expect("consistent dims")
}

/// The order-168 subgroup SL(3,2) of U(3).
pub fn sl32_group() -> Result<FiniteMatrixGroup> {
    let ambient = close_group(&sl32_generators(), DEFAULT_MAX_ORDER)?;
    let mut g = commutator_subgroup(&ambient)?;
    g.set_label("sl32");
    Ok(g)
}

/// The order-51840 subgroup Sp(4,3) of U(4).
pub fn sp43_group() -> Result<FiniteMatrixGroup> {
    let ambient = close_group(&sp43_generators(), DEFAULT_MAX_ORDER)?;
    let mut g = commutator_subgroup(&ambient)?;
    g.set_label("sp43");
    Ok(g)
}

/// Diagonal zero of the SL(3,2) invariant, as printed (16 significant digits).
pub fn sl32_reference_zero() -> UnitaryMatrix {
    let u22 = c(0.6480674529649858, -0.7615829412529393);
    let u33 = c(-0.3307476956662597, -0.9437192176762438);
    UnitaryMatrix::nearest(&CMatrix::diagonal(&[c(1.0, 0.0), u22, u33]))
        .expect("reference point is near-unitary")
}

/// Block-diagonal zero of the Sp(4,3) invariant, printed to six digits and
/// projected back onto U(4).
pub fn sp43_reference_zero() -> UnitaryMatrix {
    let a = CMatrix::from_rows(&[
        vec![c(-0.106632, -0.973877), c(0.0621677, -0.190601)],
        vec![c(0.197341, 0.0353545), c(-0.807683, -0.554486)],
    ])
    .expect("square");
    let b = CMatrix::from_rows(&[
        vec![c(-0.596879, -0.434093), c(-0.562033, -0.373388)],
        vec![c(0.372766, -0.562445), c(-0.381284, 0.631921)],
    ])
    .expect("square");
    UnitaryMatrix::nearest(&CMatrix::block_diagonal(&[&a, &b]))
        .expect("reference point is near-unitary")
}
