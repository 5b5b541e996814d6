//! Bisection and false position on U(d) through the principal log/exp chart.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    frobenius_distance, matrix_exp, unitary_log_with_phases, SkewHermitian, UnitaryMatrix,
};

/// Endpoints farther apart than this (Frobenius) are split by bisection.
pub const SWITCH_DISTANCE: f64 = 1.0;
pub const DEFAULT_MAX_ITER: usize = 200;
/// Eigenphases closer than this to the cut at pi trigger the escape chart.
pub const BRANCH_MARGIN: f64 = 1e-3;
/// Below this `|f(R) - f(L)|` false position degenerates to the midpoint.
pub const FLAT_DENOMINATOR: f64 = 1e-15;
/// Iterations without a strict decrease of the width before giving up on `eps`.
pub const STALL_LIMIT: usize = 16;

/// Endpoints with `f(lower) < 0 <= f(upper)`.
#[derive(Clone, Debug)]
pub struct BracketPair {
    pub lower: UnitaryMatrix,
    pub upper: UnitaryMatrix,
    pub f_lower: f64,
    pub f_upper: f64,
}

impl BracketPair {
    pub fn new(
        lower: UnitaryMatrix,
        upper: UnitaryMatrix,
        f_lower: f64,
        f_upper: f64,
    ) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch {
                left: lower.dim(),
                right: upper.dim(),
            });
        }
        if !(f_lower < 0.0 && f_upper >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "not a bracket: f(lower) = {f_lower}, f(upper) = {f_upper}"
            )));
        }
        Ok(BracketPair {
            lower,
            upper,
            f_lower,
            f_upper,
        })
    }

    pub fn width(&self) -> f64 {
        distance(&self.lower, &self.upper)
    }
}

fn distance(a: &UnitaryMatrix, b: &UnitaryMatrix) -> f64 {
    frobenius_distance(a.matrix(), b.matrix()).expect("bracket endpoints share a dimension")
}

/// Draws from `sampler` until both signs of `f` have been seen.
pub fn find_bracket<F, S, R>(
    mut f: F,
    mut sampler: S,
    rng: &mut R,
    max_tries: usize,
) -> Result<BracketPair>
where
    F: FnMut(&UnitaryMatrix) -> Result<f64>,
    S: FnMut(&mut R) -> UnitaryMatrix,
    R: Rng + ?Sized,
{
    let mut lower: Option<(UnitaryMatrix, f64)> = None;
    let mut upper: Option<(UnitaryMatrix, f64)> = None;
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..max_tries {
        let u = sampler(rng);
        let v = f(&u)?;
        min = min.min(v);
        max = max.max(v);
        if v < 0.0 {
            lower.get_or_insert((u, v));
        } else if v > 0.0 {
            upper.get_or_insert((u, v));
        }
        if let (Some((l, fl)), Some((r, fr))) = (&lower, &upper) {
            return BracketPair::new(l.clone(), r.clone(), *fl, *fr);
        }
    }
    Err(Error::NoBracket {
        tries: max_tries,
        min,
        max,
    })
}

/// `exp((log L + log R) / 2)`.
pub fn geodesic_midpoint(l: &UnitaryMatrix, r: &UnitaryMatrix) -> Result<UnitaryMatrix> {
    if l.dim() != r.dim() {
        return Err(Error::DimensionMismatch {
            left: l.dim(),
            right: r.dim(),
        });
    }
    let (a, _) = unitary_log_with_phases(l);
    let (b, _) = unitary_log_with_phases(r);
    Ok(matrix_exp(&SkewHermitian::combine(0.5, &a, 0.5, &b)))
}

/// `exp((f(R) log L - f(L) log R) / (f(R) - f(L)))`, or the midpoint when the
/// denominator is below [`FLAT_DENOMINATOR`].
pub fn false_position_point(b: &BracketPair) -> UnitaryMatrix {
    let (x, _) = unitary_log_with_phases(&b.lower);
    let (y, _) = unitary_log_with_phases(&b.upper);
    matrix_exp(&chart_point(&x, &y, b.f_lower, b.f_upper))
}

fn chart_point(x: &SkewHermitian, y: &SkewHermitian, w_lower: f64, w_upper: f64) -> SkewHermitian {
    let den = w_upper - w_lower;
    if den.abs() < FLAT_DENOMINATOR {
        return SkewHermitian::combine(0.5, x, 0.5, y);
    }
    SkewHermitian::combine(w_upper / den, x, -w_lower / den, y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Bisection,
    FalsePosition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// `||L - R||_F <= eps`.
    Converged,
    /// `f(M)` evaluated to exactly zero.
    ExactZero,
    /// The width stopped shrinking before reaching `eps`: the endpoints are
    /// adjacent at floating-point resolution.
    ResolutionFloor,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IterationRecord {
    pub step: StepKind,
    /// `||L - R||_F` before the step.
    pub width: f64,
    /// `||log L - log R||_F` in the chart used for the step.
    pub chart_width: f64,
    pub f_mid: f64,
    /// Whether the step used the escape translation.
    pub escaped: bool,
}

#[derive(Clone, Debug)]
pub struct ZeroFindOptions {
    pub eps: f64,
    pub max_iter: usize,
    pub switch_distance: f64,
    /// Translation `T` with `f(T U) = f(U)`; steps whose endpoints have an
    /// eigenphase near the log branch cut are taken in the chart around `T^H`.
    pub escape: Option<UnitaryMatrix>,
}

impl Default for ZeroFindOptions {
    fn default() -> Self {
        ZeroFindOptions {
            eps: 1e-12,
            max_iter: DEFAULT_MAX_ITER,
            switch_distance: SWITCH_DISTANCE,
            escape: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ZeroFindReport {
    pub zero: UnitaryMatrix,
    /// `|f(zero)|`.
    pub residual: f64,
    pub iterations: usize,
    /// `||L - R||_F` at exit.
    pub final_width: f64,
    pub termination: Termination,
    pub history: Vec<IterationRecord>,
}

impl ZeroFindReport {
    pub fn method_trace(&self) -> Vec<StepKind> {
        self.history.iter().map(|r| r.step).collect()
    }

    pub fn escaped(&self) -> bool {
        self.history.iter().any(|r| r.escaped)
    }
}

fn branch_distance(phases: &[f64]) -> f64 {
    phases
        .iter()
        .map(|p| std::f64::consts::PI - p.abs())
        .fold(f64::INFINITY, f64::min)
}

struct Chart {
    lower: SkewHermitian,
    upper: SkewHermitian,
    translation: Option<UnitaryMatrix>,
}

fn chart_for(l: &UnitaryMatrix, r: &UnitaryMatrix, escape: Option<&UnitaryMatrix>) -> Chart {
    let (x, px) = unitary_log_with_phases(l);
    let (y, py) = unitary_log_with_phases(r);
    let margin = branch_distance(&px).min(branch_distance(&py));
    if margin < BRANCH_MARGIN {
        if let Some(t) = escape {
            let (tx, ptx) = unitary_log_with_phases(&t.mul(l));
            let (ty, pty) = unitary_log_with_phases(&t.mul(r));
            if branch_distance(&ptx).min(branch_distance(&pty)) > margin {
                return Chart {
                    lower: tx,
                    upper: ty,
                    translation: Some(t.adjoint()),
                };
            }
        }
    }
    Chart {
        lower: x,
        upper: y,
        translation: None,
    }
}

/// Bisection far from the zero, Illinois-weighted false position close to it.
///
/// Loops while `||L - R||_F > eps` and returns the last iterate `M`. Halting
/// at the floating-point floor is reported as [`Termination::ResolutionFloor`].
pub fn find_zero<F>(
    mut f: F,
    bracket: BracketPair,
    options: &ZeroFindOptions,
) -> Result<ZeroFindReport>
where
    F: FnMut(&UnitaryMatrix) -> Result<f64>,
{
    if options.eps.is_nan() || options.eps <= 0.0 || options.max_iter == 0 {
        return Err(Error::InvalidInput(format!(
            "need eps > 0 and max_iter > 0, got {} and {}",
            options.eps, options.max_iter
        )));
    }
    let BracketPair {
        lower: mut l,
        upper: mut r,
        f_lower: mut fl,
        f_upper: mut fr,
    } = bracket;
    let (mut wl, mut wr) = (fl, fr);
    let mut last_side: Option<bool> = None;
    let mut history = Vec::new();
    let mut current: Option<(UnitaryMatrix, f64)> = None;
    let mut best_width = f64::INFINITY;
    let mut stall = 0;

    let mut width = distance(&l, &r);
    while width > options.eps {
        if history.len() >= options.max_iter {
            return Err(Error::NotConverged {
                iterations: history.len(),
                width,
            });
        }
        let chart = chart_for(&l, &r, options.escape.as_ref());
        let step = if width > options.switch_distance {
            StepKind::Bisection
        } else {
            StepKind::FalsePosition
        };
        let h = match step {
            StepKind::Bisection => SkewHermitian::combine(0.5, &chart.lower, 0.5, &chart.upper),
            StepKind::FalsePosition => chart_point(&chart.lower, &chart.upper, wl, wr),
        };
        let chart_width = SkewHermitian::combine(1.0, &chart.lower, -1.0, &chart.upper)
            .matrix()
            .frobenius_norm();
        let mut m = matrix_exp(&h);
        if let Some(t) = &chart.translation {
            m = t.mul(&m);
        }
        let fm = f(&m)?;
        history.push(IterationRecord {
            step,
            width,
            chart_width,
            f_mid: fm,
            escaped: chart.translation.is_some(),
        });
        if fm == 0.0 {
            return Ok(ZeroFindReport {
                zero: m,
                residual: 0.0,
                iterations: history.len(),
                final_width: width,
                termination: Termination::ExactZero,
                history,
            });
        }
        let stuck = distance(&m, &l) == 0.0 || distance(&m, &r) == 0.0;
        let replaces_lower = fm < 0.0;
        if replaces_lower {
            l = m.clone();
            fl = fm;
            wl = fm;
            if last_side == Some(true) {
                wr *= 0.5;
            } else {
                wr = fr;
            }
        } else {
            r = m.clone();
            fr = fm;
            wr = fm;
            if last_side == Some(false) {
                wl *= 0.5;
            } else {
                wl = fl;
            }
        }
        last_side = Some(replaces_lower);
        current = Some((m, fm));
        width = distance(&l, &r);
        if width < best_width {
            best_width = width;
            stall = 0;
        } else {
            stall += 1;
        }
        if stuck || stall >= STALL_LIMIT {
            let (zero, fz) = current.expect("at least one iteration");
            return Ok(ZeroFindReport {
                zero,
                residual: fz.abs(),
                iterations: history.len(),
                final_width: width,
                termination: Termination::ResolutionFloor,
                history,
            });
        }
    }
    let (zero, fz) = current.unwrap_or(if fl.abs() <= fr.abs() {
        (l, fl)
    } else {
        (r, fr)
    });
    Ok(ZeroFindReport {
        zero,
        residual: fz.abs(),
        iterations: history.len(),
        final_width: width,
        termination: Termination::Converged,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::Submanifold;
    use crate::matcore::{principal_phase, seeded_rng, C64};
    use std::f64::consts::PI;

    fn phase1(u: &UnitaryMatrix) -> f64 {
        principal_phase(u.matrix()[(0, 0)])
    }

    #[test]
    fn midpoint_examples() {
        let mut rng = seeded_rng(41);
        let u = crate::matcore::haar_random(3, &mut rng);
        let m = geodesic_midpoint(&u, &u).unwrap();
        assert!(distance(&m, &u) < 1e-9);
        for theta in [-3.0, -1.0, 0.5, 3.1] {
            let m = geodesic_midpoint(
                &UnitaryMatrix::identity(2),
                &UnitaryMatrix::from_phases(&[theta, 0.0]),
            )
            .unwrap();
            assert!(distance(&m, &UnitaryMatrix::from_phases(&[theta / 2.0, 0.0])) < 1e-12);
        }
        let a = UnitaryMatrix::from_phases(&[0.3, -2.0, 1.0]);
        let b = UnitaryMatrix::from_phases(&[1.3, 2.5, -0.2]);
        let m = geodesic_midpoint(&a, &b).unwrap();
        assert_eq!(
            Submanifold::new(vec![1, 1, 1]).unwrap().off_block_norm(&m),
            0.0
        );
        assert!(geodesic_midpoint(&a, &UnitaryMatrix::identity(2)).is_err());
    }

    #[test]
    fn symmetric_values_give_the_midpoint() {
        let mut rng = seeded_rng(42);
        let l = crate::matcore::haar_random(3, &mut rng);
        let r = crate::matcore::haar_random(3, &mut rng);
        let b = BracketPair::new(l.clone(), r.clone(), -0.7, 0.7).unwrap();
        let fp = false_position_point(&b);
        assert!(distance(&fp, &geodesic_midpoint(&l, &r).unwrap()) < 1e-12);
    }

    #[test]
    fn bracket_validation() {
        let i = UnitaryMatrix::identity(2);
        assert!(BracketPair::new(i.clone(), i.clone(), 1.0, 2.0).is_err());
        assert!(BracketPair::new(i.clone(), UnitaryMatrix::identity(3), -1.0, 2.0).is_err());
    }

    #[test]
    fn linear_toy_is_solved_in_one_step() {
        let theta0 = 0.4;
        let f = |u: &UnitaryMatrix| Ok(phase1(u) - theta0);
        let l = UnitaryMatrix::from_phases(&[theta0 - 0.3]);
        let r = UnitaryMatrix::from_phases(&[theta0 + 0.35]);
        let b = BracketPair::new(l, r, -0.3, 0.35).unwrap();
        let rep = find_zero(f, b, &ZeroFindOptions::default()).unwrap();
        assert_eq!(rep.history[0].step, StepKind::FalsePosition);
        assert!(rep.history[0].f_mid.abs() <= 1e-12);
        assert!(rep.residual <= 1e-12);
    }

    #[test]
    fn find_bracket_reports_failure() {
        let mut rng = seeded_rng(43);
        let err = find_bracket(
            |_| Ok(1.0),
            |r| Submanifold::full(2).sample(r),
            &mut rng,
            10,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoBracket { tries: 10, .. }));
    }

    fn torus_f(u: &UnitaryMatrix) -> Result<f64> {
        let a = principal_phase(u.matrix()[(0, 0)]);
        let b = principal_phase(u.matrix()[(1, 1)]);
        Ok(a.cos() + (2.0 * b).cos() - 0.25)
    }

    #[test]
    fn bisection_halves_the_chart_width_on_the_torus() {
        let l = UnitaryMatrix::from_phases(&[2.5, 1.4]);
        let r = UnitaryMatrix::from_phases(&[0.1, 0.2]);
        let b = BracketPair::new(
            l.clone(),
            r.clone(),
            torus_f(&l).unwrap(),
            torus_f(&r).unwrap(),
        )
        .unwrap();
        let rep = find_zero(torus_f, b, &ZeroFindOptions::default()).unwrap();
        assert_eq!(rep.history[0].step, StepKind::Bisection);
        for w in rep.history.windows(2) {
            assert!(w[1].width <= w[0].width);
            if w[0].step == StepKind::Bisection {
                let ratio = w[1].chart_width / w[0].chart_width;
                assert!((0.5 / 1.1..=0.5 * 1.1).contains(&ratio), "ratio {ratio}");
            }
        }
        assert!(rep.residual < 1e-10);
    }

    #[test]
    fn block_diagonal_iterates_stay_block_diagonal() {
        let sub = Submanifold::new(vec![2, 2]).unwrap();
        let f = |u: &UnitaryMatrix| -> Result<f64> {
            Ok(u.trace().re - 0.5 + 0.2 * u.matrix()[(0, 1)].norm())
        };
        let mut rng = seeded_rng(44);
        let b = find_bracket(f, |r| sub.sample(r), &mut rng, 100).unwrap();
        let mut iterates = Vec::new();
        let g = |u: &UnitaryMatrix| {
            iterates.push(u.clone());
            f(u)
        };
        let rep = find_zero(
            g,
            b,
            &ZeroFindOptions {
                eps: 1e-9,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(rep.residual < 1e-8);
        for u in &iterates {
            assert_eq!(sub.off_block_norm(u), 0.0);
        }
    }

    #[test]
    fn escape_chart_near_the_branch_cut() {
        let f = |u: &UnitaryMatrix| -> Result<f64> { Ok(-u.matrix()[(0, 0)].re - 0.5) };
        let l = UnitaryMatrix::from_phases(&[PI - 1e-5]);
        let r = UnitaryMatrix::from_phases(&[-PI + 1.5]);
        let b = BracketPair::new(r.clone(), l.clone(), f(&r).unwrap(), f(&l).unwrap()).unwrap();
        let opts = ZeroFindOptions {
            eps: 1e-12,
            escape: Some(UnitaryMatrix::from_phases(&[1.0])),
            ..Default::default()
        };
        let rep = find_zero(f, b, &opts).unwrap();
        assert!(rep.escaped());
        assert!(rep.residual < 1e-10);
        let z = rep.zero.matrix()[(0, 0)];
        assert!((z - C64::from_polar(1.0, -2.0 * PI / 3.0)).norm() < 1e-9);
    }

    #[test]
    fn float_floor_is_reported() {
        let theta0 = 1.0;
        let f = |u: &UnitaryMatrix| {
            Ok((phase1(u) - theta0).signum() * (phase1(u) - theta0).abs().sqrt())
        };
        let l = UnitaryMatrix::from_phases(&[0.2]);
        let r = UnitaryMatrix::from_phases(&[1.7]);
        let b = BracketPair::new(l.clone(), r.clone(), f(&l).unwrap(), f(&r).unwrap()).unwrap();
        let rep = find_zero(
            f,
            b,
            &ZeroFindOptions {
                eps: 1e-17,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(matches!(
            rep.termination,
            Termination::ResolutionFloor | Termination::ExactZero
        ));
        assert!((phase1(&rep.zero) - theta0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_options() {
        let i = UnitaryMatrix::identity(1);
        let b = BracketPair::new(i.clone(), i, -1.0, 1.0).unwrap();
        assert!(find_zero(
            |_| Ok(0.0),
            b,
            &ZeroFindOptions {
                eps: 0.0,
                ..Default::default()
            }
        )
        .is_err());
    }
}
