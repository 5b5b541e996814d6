//! The G x G-invariant polynomial induced by a self-dual character, its
//! submanifold parametrizations, and the closed-form condition on the
//! diagonal torus of U(3).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chars::{Character, HighestWeight};
use crate::error::{Error, Result};
use crate::group::FiniteMatrixGroup;
use crate::matcore::{haar_random, mul_into, UnitaryMatrix, C64, MAX_DIM};
use crate::par::{self, Strategy};

/// Imaginary residue allowed relative to `1 + |value|`.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-8;

/// `f(U) = (1/|G|^2) sum_{g1, g2} chi_mu(g1^H U g2)` for a self-dual `mu`.
#[derive(Clone, Debug)]
pub struct InvariantPolynomial {
    group: Arc<FiniteMatrixGroup>,
    character: Character,
}

impl InvariantPolynomial {
    pub fn new(group: Arc<FiniteMatrixGroup>, mu: HighestWeight) -> Result<Self> {
        if mu.dim() != group.dim() {
            return Err(Error::DimensionMismatch {
                left: mu.dim(),
                right: group.dim(),
            });
        }
        if !mu.is_self_dual() {
            return Err(Error::InvalidInput(format!(
                "weight {mu} is not self-dual; the averaged character would not be real"
            )));
        }
        Ok(InvariantPolynomial {
            group,
            character: Character::new(mu),
        })
    }

    pub fn group(&self) -> &Arc<FiniteMatrixGroup> {
        &self.group
    }

    pub fn weight(&self) -> &HighestWeight {
        self.character.weight()
    }

    /// Double sum over `G x G`. Cost `|G|^2` character evaluations; kept as
    /// the reference for [`eval_f`](Self::eval_f).
    pub fn eval_f_naive(&self, u: &UnitaryMatrix) -> Result<f64> {
        self.check_dim(u)?;
        let d = u.dim();
        let n = d * d;
        let elems = self.group.elements();
        let order = elems.len();
        let adjoints: Vec<UnitaryMatrix> = elems.iter().map(UnitaryMatrix::adjoint).collect();
        let total = par::chunked_sum(
            Strategy::default(),
            order * order,
            par::DEFAULT_CHUNK,
            C64::new(0.0, 0.0),
            |idx| {
                let (i, j) = (idx / order, idx % order);
                let mut tmp = [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM];
                let mut prod = [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM];
                mul_into(
                    d,
                    adjoints[i].matrix().as_slice(),
                    u.matrix().as_slice(),
                    &mut tmp[..n],
                );
                mul_into(d, &tmp[..n], elems[j].matrix().as_slice(), &mut prod[..n]);
                self.character.eval_slice(d, &prod[..n])
            },
        );
        real_part(total / (order * order) as f64)
    }

    /// `(1/|G|) sum_g Re chi_mu(g U)`.
    ///
    /// Equal to the double sum because `chi(g1^H U g2) = chi(g2 g1^H U)` and
    /// every `g` arises as `g2 g1^H` exactly `|G|` times.
    pub fn eval_f(&self, u: &UnitaryMatrix) -> Result<f64> {
        self.eval_f_with(u, Strategy::default())
    }

    pub fn eval_f_with(&self, u: &UnitaryMatrix, strategy: Strategy) -> Result<f64> {
        self.check_dim(u)?;
        let d = u.dim();
        let n = d * d;
        let elems = self.group.elements();
        let total = par::chunked_sum(
            strategy,
            elems.len(),
            par::DEFAULT_CHUNK,
            C64::new(0.0, 0.0),
            |i| {
                let mut prod = [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM];
                mul_into(
                    d,
                    elems[i].matrix().as_slice(),
                    u.matrix().as_slice(),
                    &mut prod[..n],
                );
                self.character.eval_slice(d, &prod[..n])
            },
        );
        real_part(total / elems.len() as f64)
    }

    /// A scalar phase `e^{i phi} I` leaves `f` unchanged (the weights sum to
    /// zero), so it is a safe translation for escaping the log branch cut.
    pub fn central_translation(&self, phi: f64) -> UnitaryMatrix {
        UnitaryMatrix::from_phases(&vec![phi; self.group.dim()])
    }

    fn check_dim(&self, u: &UnitaryMatrix) -> Result<()> {
        if u.dim() != self.group.dim() {
            return Err(Error::DimensionMismatch {
                left: self.group.dim(),
                right: u.dim(),
            });
        }
        Ok(())
    }
}

fn real_part(z: C64) -> Result<f64> {
    let limit = IMAGINARY_RESIDUE_TOL * (1.0 + z.re.abs());
    if z.im.abs() > limit {
        return Err(Error::ImaginaryResidue {
            residue: z.im.abs(),
            limit,
        });
    }
    Ok(z.re)
}

/// Block-diagonal unitaries `U(m_1) x ... x U(m_k)` inside U(d).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submanifold {
    block_sizes: Vec<usize>,
}

impl Submanifold {
    pub fn new(block_sizes: Vec<usize>) -> Result<Self> {
        if block_sizes.is_empty() || block_sizes.contains(&0) {
            return Err(Error::InvalidInput(format!(
                "block sizes must be positive, got {block_sizes:?}"
            )));
        }
        let d: usize = block_sizes.iter().sum();
        if d > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "block sizes sum to {d} > {MAX_DIM}"
            )));
        }
        Ok(Submanifold { block_sizes })
    }

    /// Like [`new`](Self::new) but also requires the blocks to fill dimension `d`.
    pub fn for_dim(block_sizes: Vec<usize>, d: usize) -> Result<Self> {
        let s = Submanifold::new(block_sizes)?;
        if s.dim() != d {
            return Err(Error::InvalidInput(format!(
                "block sizes {:?} sum to {} but d = {d}",
                s.block_sizes,
                s.dim()
            )));
        }
        Ok(s)
    }

    pub fn full(d: usize) -> Self {
        Submanifold {
            block_sizes: vec![d],
        }
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn dim(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Block-diagonal sample with independent Haar blocks.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitaryMatrix {
        let blocks: Vec<UnitaryMatrix> = self
            .block_sizes
            .iter()
            .map(|&m| haar_random(m, rng))
            .collect();
        let refs: Vec<&UnitaryMatrix> = blocks.iter().collect();
        UnitaryMatrix::block_diagonal(&refs)
    }

    /// Largest modulus of an entry outside the diagonal blocks.
    pub fn off_block_norm(&self, u: &UnitaryMatrix) -> f64 {
        let d = self.dim();
        let mut block_of = Vec::with_capacity(d);
        for (b, &m) in self.block_sizes.iter().enumerate() {
            block_of.extend(std::iter::repeat_n(b, m));
        }
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                if block_of[i] != block_of[j] {
                    worst = worst.max(u.matrix()[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// `diag(e^{it}, e^{i(t + (u+v)/2)}, e^{i(t + (u-v)/2)})`.
pub fn diag_from_uv(u: f64, v: f64, t_phase: f64) -> UnitaryMatrix {
    UnitaryMatrix::from_phases(&[t_phase, t_phase + 0.5 * (u + v), t_phase + 0.5 * (u - v)])
}

/// Inverse of [`diag_from_uv`] on the phases: `(u, v, t)` with
/// `u = arg(u22/u11) + arg(u33/u11)`, `v = arg(u22/u11) - arg(u33/u11)`.
pub fn uv_from_diag(m: &UnitaryMatrix) -> (f64, f64, f64) {
    let z = m.matrix();
    let t = z[(0, 0)].arg();
    let a = (z[(1, 1)] / z[(0, 0)]).arg();
    let b = (z[(2, 2)] / z[(0, 0)]).arg();
    (a + b, a - b, t)
}

/// Largest coefficient of the torus condition; sets its natural scale.
pub const TORUS_LHS_SCALE: f64 = 281838.0;

/// Left-hand side of the trigonometric condition whose zero set on the
/// diagonal torus is the zero set of the SL(3,2) invariant.
pub fn torus_condition_lhs(u: f64, v: f64) -> f64 {
    let (cv, c2v, c3v) = (v.cos(), (2.0 * v).cos(), (3.0 * v).cos());
    u.cos() * (281838.0 * cv - 156.0 * c2v - 158.0)
        + 7f64.sqrt() * u.sin() * (24.0 * cv + 6.0 * c2v + 2.0)
        + (28125.0 - 181.0 * cv + 140901.0 * c2v - 65.0 * c3v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub u: f64,
    pub v: f64,
    pub lhs: f64,
}

/// Sampled torus condition plus refined points of its zero curve.
#[derive(Clone, Debug)]
pub struct TorusCurve {
    pub grid_n: usize,
    /// Row-major over `v` then `u`, both on `2 pi k / (grid_n - 1)`.
    pub grid: Vec<CurvePoint>,
    /// Zeros in `u` refined by bisection between sign changes on each `v` scanline.
    pub zeros: Vec<CurvePoint>,
}

impl TorusCurve {
    pub fn step(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.grid_n - 1) as f64
    }

    /// True if the grid cell containing `(u, v)` (reduced mod 2 pi) has a
    /// sign change among its corners.
    pub fn cell_has_sign_change(&self, u: f64, v: f64) -> bool {
        let tau = 2.0 * std::f64::consts::PI;
        let h = self.step();
        let n = self.grid_n;
        let iu = ((u.rem_euclid(tau) / h).floor() as usize).min(n - 2);
        let iv = ((v.rem_euclid(tau) / h).floor() as usize).min(n - 2);
        let at = |a: usize, b: usize| self.grid[b * n + a].lhs;
        let corners = [
            at(iu, iv),
            at(iu + 1, iv),
            at(iu, iv + 1),
            at(iu + 1, iv + 1),
        ];
        corners.iter().any(|&x| x <= 0.0) && corners.iter().any(|&x| x >= 0.0)
    }

    /// Distance (in the flat torus metric) from `(u, v)` to the nearest refined zero.
    pub fn distance_to_curve(&self, u: f64, v: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        let wrap = |x: f64| {
            let r = x.rem_euclid(tau);
            r.min(tau - r)
        };
        self.zeros
            .iter()
            .map(|z| wrap(z.u - u).hypot(wrap(z.v - v)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Bisection on a bracketing interval down to adjacent floats.
fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

/// Samples the torus condition on a `grid_n x grid_n` grid over `[0, 2 pi]^2`
/// and refines its zeros along every `v` scanline.
pub fn torus_curve(grid_n: usize) -> Result<TorusCurve> {
    if grid_n < 16 {
        return Err(Error::InvalidInput(format!("grid_n = {grid_n} < 16")));
    }
    let h = 2.0 * std::f64::consts::PI / (grid_n - 1) as f64;
    let coords: Vec<f64> = (0..grid_n).map(|k| k as f64 * h).collect();
    let mut grid = Vec::with_capacity(grid_n * grid_n);
    let mut zeros = Vec::new();
    for &v in &coords {
        let row_start = grid.len();
        for &u in &coords {
            grid.push(CurvePoint {
                u,
                v,
                lhs: torus_condition_lhs(u, v),
            });
        }
        let row = &grid[row_start..];
        for w in row.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.lhs == 0.0 {
                zeros.push(a);
            } else if (a.lhs < 0.0) != (b.lhs < 0.0) && b.lhs != 0.0 {
                let u = bisect(|x| torus_condition_lhs(x, v), a.u, b.u);
                zeros.push(CurvePoint {
                    u,
                    v,
                    lhs: torus_condition_lhs(u, v),
                });
            }
        }
    }
    if zeros.is_empty() {
        return Err(Error::InvalidInput(
            "torus condition has no zeros on the grid".into(),
        ));
    }
    Ok(TorusCurve {
        grid_n,
        grid,
        zeros,
    })
}

/// Zeros of `f` itself on the diagonal torus, refined along the same
/// scanlines as [`torus_curve`] from sign changes of `f` on the grid.
pub fn invariant_torus_zeros(f: &InvariantPolynomial, grid_n: usize) -> Result<Vec<CurvePoint>> {
    if grid_n < 16 {
        return Err(Error::InvalidInput(format!("grid_n = {grid_n} < 16")));
    }
    if f.group().dim() != 3 {
        return Err(Error::DimensionMismatch {
            left: 3,
            right: f.group().dim(),
        });
    }
    let h = 2.0 * std::f64::consts::PI / (grid_n - 1) as f64;
    let eval = |u: f64, v: f64| f.eval_f(&diag_from_uv(u, v, 0.0));
    let mut zeros = Vec::new();
    for iv in 0..grid_n {
        let v = iv as f64 * h;
        let row = (0..grid_n)
            .map(|iu| eval(iu as f64 * h, v))
            .collect::<Result<Vec<f64>>>()?;
        for iu in 0..grid_n - 1 {
            let (a, b) = (row[iu], row[iu + 1]);
            let u = if a == 0.0 {
                iu as f64 * h
            } else if (a < 0.0) != (b < 0.0) && b != 0.0 {
                let mut failed = None;
                let u = bisect(
                    |x| {
                        eval(x, v).unwrap_or_else(|e| {
                            failed = Some(e);
                            0.0
                        })
                    },
                    iu as f64 * h,
                    (iu + 1) as f64 * h,
                );
                if let Some(e) = failed {
                    return Err(e);
                }
                u
            } else {
                continue;
            };
            zeros.push(CurvePoint {
                u,
                v,
                lhs: eval(u, v)?,
            });
        }
    }
    Ok(zeros)
}

/// Path of the refined-zero file written next to a curve CSV.
pub fn zeros_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "curve".into());
    out.with_file_name(format!("{stem}.zeros.csv"))
}

/// Writes the grid to `out` and the refined zeros to `<stem>.zeros.csv`,
/// both with header `u,v,lhs`.
pub fn emit_torus_curve(grid_n: usize, out: &Path) -> Result<TorusCurve> {
    let curve = torus_curve(grid_n)?;
    write_points(out, &curve.grid)?;
    write_points(&zeros_path(out), &curve.zeros)?;
    Ok(curve)
}

fn write_points(path: &Path, points: &[CurvePoint]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "u,v,lhs")?;
        for p in points {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", p.u, p.v, p.lhs)?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{close_group, GeneratorSet};
    use crate::matcore::seeded_rng;
    use std::f64::consts::PI;

    fn z2() -> Arc<FiniteMatrixGroup> {
        let g = UnitaryMatrix::from_phases(&[0.0, PI]);
        Arc::new(close_group(&GeneratorSet::new("z2", vec![g]).unwrap(), 4).unwrap())
    }

    #[test]
    fn rejects_non_self_dual_weights() {
        let mu = HighestWeight::new(vec![2, -1]).unwrap();
        assert!(InvariantPolynomial::new(z2(), mu).is_err());
        let mu = HighestWeight::new(vec![1, 0, -1]).unwrap();
        assert!(InvariantPolynomial::new(z2(), mu).is_err());
    }

    #[test]
    fn trivial_group_at_identity_gives_dimension() {
        let one = Arc::new(
            close_group(
                &GeneratorSet::new("one", vec![UnitaryMatrix::identity(3)]).unwrap(),
                2,
            )
            .unwrap(),
        );
        let mu = HighestWeight::new(vec![2, 0, -2]).unwrap();
        let f = InvariantPolynomial::new(one, mu.clone()).unwrap();
        let v = f.eval_f_naive(&UnitaryMatrix::identity(3)).unwrap();
        assert!((v - mu.weyl_dimension() as f64).abs() < 1e-9);
    }

    #[test]
    fn reduced_sum_matches_double_sum_on_z2() {
        let f = InvariantPolynomial::new(z2(), HighestWeight::new(vec![2, -2]).unwrap()).unwrap();
        let mut rng = seeded_rng(31);
        for _ in 0..20 {
            let u = haar_random(2, &mut rng);
            let a = f.eval_f(&u).unwrap();
            let b = f.eval_f_naive(&u).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn scalar_phase_leaves_f_unchanged() {
        let f = InvariantPolynomial::new(z2(), HighestWeight::new(vec![1, -1]).unwrap()).unwrap();
        let mut rng = seeded_rng(32);
        let u = haar_random(2, &mut rng);
        let shifted = f.central_translation(0.37).mul(&u);
        assert!((f.eval_f(&u).unwrap() - f.eval_f(&shifted).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn submanifold_samples() {
        let mut rng = seeded_rng(33);
        let diag = Submanifold::new(vec![1, 1, 1]).unwrap();
        let u = diag.sample(&mut rng);
        assert!(diag.off_block_norm(&u) == 0.0);
        let full = Submanifold::full(3);
        assert_eq!(full.block_sizes(), &[3]);
        let a = Submanifold::new(vec![2, 2])
            .unwrap()
            .sample(&mut seeded_rng(5));
        let b = Submanifold::new(vec![2, 2])
            .unwrap()
            .sample(&mut seeded_rng(5));
        assert_eq!(a, b);
        assert!(Submanifold::new(vec![2, 0]).is_err());
        assert!(Submanifold::for_dim(vec![3, 2], 4).is_err());
        assert!(Submanifold::for_dim(vec![2, 2], 4).is_ok());
    }

    #[test]
    fn diag_parametrization() {
        assert_eq!(diag_from_uv(0.0, 0.0, 0.0), UnitaryMatrix::identity(3));
        let m = diag_from_uv(1.1, -0.4, 0.3);
        assert!(m.matrix().unitarity_defect() < 1e-15);
        let (u, v, t) = uv_from_diag(&m);
        assert!((u - 1.1).abs() < 1e-12 && (v + 0.4).abs() < 1e-12 && (t - 0.3).abs() < 1e-12);
    }

    #[test]
    fn torus_lhs_values() {
        assert_eq!(torus_condition_lhs(0.0, 0.0), 450304.0);
        let tau = 2.0 * PI;
        for (u, v) in [(0.3, 1.7), (2.0, -0.5), (5.5, 4.0)] {
            let base = torus_condition_lhs(u, v);
            assert!((torus_condition_lhs(u + tau, v) - base).abs() < 1e-8);
            assert!((torus_condition_lhs(u, v + tau) - base).abs() < 1e-8);
        }
    }

    #[test]
    fn curve_rejects_small_grids() {
        assert!(torus_curve(8).is_err());
        let c = torus_curve(32).unwrap();
        assert_eq!(c.grid.len(), 32 * 32);
        assert!(!c.zeros.is_empty());
        for z in &c.zeros {
            assert!(z.lhs.abs() < 1e-9 * TORUS_LHS_SCALE);
        }
    }
}
