//! Symmetric functions and irreducible characters of U(d).
//!
//! Characters are evaluated from power sums `Tr(U^k)` through Newton-Girard
//! (power sums to complete homogeneous polynomials) and the Jacobi-Trudi
//! determinant. No eigenvalues are computed on this path.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiniteMatrixGroup;
use crate::matcore::{det_in_place, power_sums_into, CMatrix, UnitaryMatrix, C64, MAX_DIM};
use crate::par::{self, Strategy};

/// Absolute tolerance on group averages (moments and multiplicities).
pub const MULTIPLICITY_TOL: f64 = 1e-6;

/// Integer partition: non-increasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidInput(
                "partition parts must be positive".into(),
            ));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(
                "partition parts must be non-increasing".into(),
            ));
        }
        Ok(Partition(parts))
    }

    /// Drops trailing zeros of a non-increasing sequence.
    fn from_nonincreasing(parts: impl IntoIterator<Item = u32>) -> Self {
        Partition(parts.into_iter().filter(|&p| p > 0).collect())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All partitions of `n` with at most `max_parts` parts, in reverse
    /// lexicographic order.
    pub fn all(n: u32, max_parts: usize) -> Vec<Partition> {
        fn rec(rem: u32, cap: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if rem == 0 {
                out.push(Partition(cur.clone()));
                return;
            }
            if slots == 0 {
                return;
            }
            for p in (1..=cap.min(rem)).rev() {
                cur.push(p);
                rec(rem - p, p, slots - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n, max_parts, &mut Vec::new(), &mut out);
        out
    }

    /// Highest index needed in the Jacobi-Trudi matrix, `lambda_1 + l - 1`.
    fn max_h_index(&self) -> usize {
        match self.0.first() {
            Some(&first) => first as usize + self.0.len() - 1,
            None => 0,
        }
    }
}

/// Number of standard Young tableaux of shape `lambda` (hook length formula).
pub fn specht_dimension(lambda: &Partition) -> u128 {
    let n = lambda.weight();
    let parts = lambda.parts();
    let mut hooks: u128 = 1;
    for (i, &row) in parts.iter().enumerate() {
        for j in 0..row as usize {
            let arm = row as usize - j - 1;
            let leg = parts[i + 1..].iter().filter(|&&r| r as usize > j).count();
            hooks *= (arm + leg + 1) as u128;
        }
    }
    let factorial: u128 = (1..=u128::from(n)).product();
    factorial / hooks
}

/// `int |Tr U|^{2t} dU` over U(d): the sum of `d_lambda^2` over partitions of
/// `t` with at most `d` parts.
pub fn haar_moment(t: u32, d: usize) -> u128 {
    Partition::all(t, d)
        .iter()
        .map(|p| {
            let s = specht_dimension(p);
            s * s
        })
        .sum()
}

/// Non-increasing integer sequence indexing an irreducible representation of U(d).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i32>", into = "Vec<i32>")]
pub struct HighestWeight(Vec<i32>);

impl HighestWeight {
    pub fn new(mu: Vec<i32>) -> Result<Self> {
        if mu.is_empty() || mu.len() > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "highest weight length {} outside 1..={MAX_DIM}",
                mu.len()
            )));
        }
        if mu.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(format!(
                "highest weight {mu:?} is not non-increasing"
            )));
        }
        Ok(HighestWeight(mu))
    }

    pub fn zero(d: usize) -> Self {
        HighestWeight(vec![0; d])
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Sum of the positive entries.
    pub fn plus(&self) -> i32 {
        self.0.iter().filter(|&&m| m > 0).sum()
    }

    /// Sum of the negative entries.
    pub fn minus(&self) -> i32 {
        self.0.iter().filter(|&&m| m < 0).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&m| m == 0)
    }

    /// `-reverse(mu)`, the highest weight of the dual representation.
    pub fn dual(&self) -> Self {
        HighestWeight(self.0.iter().rev().map(|&m| -m).collect())
    }

    pub fn is_self_dual(&self) -> bool {
        *self == self.dual()
    }

    /// `(mu', mu_d)` with `mu' = mu - mu_d` as a partition.
    pub fn shifted(&self) -> (Partition, i32) {
        let last = *self.0.last().expect("non-empty");
        let parts = self.0.iter().map(|&m| (m - last) as u32);
        (Partition::from_nonincreasing(parts), last)
    }

    /// Weyl dimension formula `prod_{i<j} (mu_i - mu_j + j - i) / (j - i)`.
    pub fn weyl_dimension(&self) -> u128 {
        let d = self.0.len();
        let mut num: u128 = 1;
        let mut den: u128 = 1;
        for i in 0..d {
            for j in i + 1..d {
                num *= (self.0[i] - self.0[j] + (j - i) as i32) as u128;
                den *= (j - i) as u128;
                let g = gcd(num, den);
                num /= g;
                den /= g;
            }
        }
        num / den
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl TryFrom<Vec<i32>> for HighestWeight {
    type Error = Error;
    fn try_from(v: Vec<i32>) -> Result<Self> {
        HighestWeight::new(v)
    }
}

impl From<HighestWeight> for Vec<i32> {
    fn from(h: HighestWeight) -> Self {
        h.0
    }
}

impl fmt::Display for HighestWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for HighestWeight {
    type Err = Error;

    /// Parses `"3,0,-3"` or `"(3,0,-3)"`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mu = inner
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<i32>()
                    .map_err(|e| Error::InvalidInput(format!("bad weight entry {x:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        HighestWeight::new(mu)
    }
}

/// `[h_0, h_1, ..., h_m]` from power sums `p = [p_1, ..., p_m]` via
/// `k h_k = sum_{i=1..k} h_{k-i} p_i`.
pub fn complete_homogeneous_from_power_sums(p: &[C64], m: usize) -> Vec<C64> {
    assert!(p.len() >= m, "need power sums p_1..p_{m}");
    let mut h = vec![C64::new(0.0, 0.0); m + 1];
    h[0] = C64::new(1.0, 0.0);
    for k in 1..=m {
        let mut s = C64::new(0.0, 0.0);
        for i in 1..=k {
            s += h[k - i] * p[i - 1];
        }
        h[k] = s / k as f64;
    }
    h
}

/// Jacobi-Trudi determinant `det(h_{lambda_i - i + j})` from complete
/// homogeneous values `h[0..]`.
fn jacobi_trudi(lambda: &Partition, h: &[C64]) -> C64 {
    let l = lambda.len();
    if l == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut m = [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM];
    for (i, &part) in lambda.parts().iter().enumerate() {
        for j in 0..l {
            let idx = part as i64 - i as i64 + j as i64;
            if idx >= 0 {
                m[i * l + j] = h[idx as usize];
            }
        }
    }
    det_in_place(l, &mut m[..l * l])
}

/// Schur polynomial `s_lambda` at the eigenvalues of `u`, from power sums.
pub fn schur_eval(lambda: &Partition, u: &UnitaryMatrix) -> Result<C64> {
    if lambda.len() > u.dim() {
        return Err(Error::InvalidInput(format!(
            "partition has {} parts but d = {}",
            lambda.len(),
            u.dim()
        )));
    }
    let m = lambda.max_h_index();
    let mut p = vec![C64::new(0.0, 0.0); m];
    power_sums_into(u.dim(), u.matrix().as_slice(), &mut p);
    Ok(schur_from_power_sums(lambda, &p))
}

/// `s_lambda` from power sums `p_1..p_m`, `m >= lambda_1 + l - 1`.
pub fn schur_from_power_sums(lambda: &Partition, p: &[C64]) -> C64 {
    let m = lambda.max_h_index();
    let h = complete_homogeneous_from_power_sums(p, m);
    jacobi_trudi(lambda, &h)
}

/// Irreducible character `chi_mu` of U(d), prepared for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Character {
    mu: HighestWeight,
    shifted: Partition,
    det_power: i32,
}

impl Character {
    pub fn new(mu: HighestWeight) -> Self {
        let (shifted, det_power) = mu.shifted();
        Character {
            mu,
            shifted,
            det_power,
        }
    }

    pub fn weight(&self) -> &HighestWeight {
        &self.mu
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    /// Number of power sums the evaluation needs.
    pub fn max_power(&self) -> usize {
        self.shifted.max_h_index()
    }

    /// `chi_mu` from power sums `p_1..p_m` and the determinant.
    pub fn from_power_sums(&self, p: &[C64], det: C64) -> C64 {
        let s = schur_from_power_sums(&self.shifted, p);
        s * det_power(det, self.det_power)
    }

    /// `chi_mu(U) = det(U)^{mu_d} s_{mu'}(U)`.
    pub fn eval(&self, u: &CMatrix) -> C64 {
        debug_assert_eq!(u.dim(), self.dim());
        self.eval_slice(u.dim(), u.as_slice())
    }

    /// As [`eval`](Self::eval) on a row-major `d x d` slice.
    pub(crate) fn eval_slice(&self, d: usize, a: &[C64]) -> C64 {
        let mut p = [C64::new(0.0, 0.0); 4 * MAX_DIM + 8];
        let m = self.max_power();
        if m > p.len() {
            let mut p = vec![C64::new(0.0, 0.0); m];
            power_sums_into(d, a, &mut p);
            return self.from_power_sums(&p, slice_det(d, a));
        }
        power_sums_into(d, a, &mut p[..m]);
        let det = if self.det_power == 0 {
            C64::new(1.0, 0.0)
        } else {
            slice_det(d, a)
        };
        self.from_power_sums(&p[..m], det)
    }
}

fn slice_det(d: usize, a: &[C64]) -> C64 {
    let mut buf = [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM];
    buf[..d * d].copy_from_slice(&a[..d * d]);
    det_in_place(d, &mut buf[..d * d])
}

/// `det^k`, with negative powers taken as conjugates (|det| = 1).
fn det_power(det: C64, k: i32) -> C64 {
    match k.cmp(&0) {
        std::cmp::Ordering::Equal => C64::new(1.0, 0.0),
        std::cmp::Ordering::Greater => det.powu(k as u32),
        std::cmp::Ordering::Less => det.conj().powu(k.unsigned_abs()),
    }
}

/// `chi_mu(U)`; the length of `mu` must equal the dimension of `U`.
pub fn character_eval(mu: &HighestWeight, u: &UnitaryMatrix) -> Result<C64> {
    if mu.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            left: mu.dim(),
            right: u.dim(),
        });
    }
    Ok(Character::new(mu.clone()).eval(u.matrix()))
}

fn traces_1_to_4(u: &UnitaryMatrix) -> [C64; 4] {
    let mut p = [C64::new(0.0, 0.0); 4];
    power_sums_into(u.dim(), u.matrix().as_slice(), &mut p);
    p
}

/// Closed form of `chi_(3,0,-3)` on U(3) in terms of `Tr(U^k)` and conjugates.
pub fn closed_form_303(u: &UnitaryMatrix) -> C64 {
    let [p1, p2, p3, _] = traces_1_to_4(u);
    let c = |z: C64| z.conj();
    p2 * c(p1) * c(p1) + p3 * c(p1 * p2) + p1 * p1 * c(p2) - 2.0 * p2 * c(p2) + p1 * p2 * c(p3)
        - p3 * c(p3)
        - 3.0 * p1 * c(p1)
        + 10.0
}

/// Closed form of `chi_(4,0,0,-4)` on U(4) in terms of `Tr(U^k)` and conjugates.
pub fn closed_form_4004(u: &UnitaryMatrix) -> C64 {
    let [p1, p2, p3, p4] = traces_1_to_4(u);
    let sq = |z: C64| z.norm_sqr();
    let p1s = p1 * p1;
    let total = sq(18.0 * p4 - 12.0 * p1 * p3 - 6.0 * p2 * p2 + 4.0 * p2 * p1s)
        + 48.0 * ((2.0 * p1 * p3 + p2 * p2) * (p2 * p1s).conj()).re
        - 16.0 * sq(p2 * p1s)
        + sq(24.0 * p3 - 27.0 * p2 * p1 + 3.0 * p1s * p1)
        - sq(3.0 * p1s * p1 - 27.0 * p1 * p2)
        + 360.0 * sq(p2)
        + 216.0 * sq(p1s)
        - 1296.0 * (p2.conj() * p1s).re
        + 432.0 * sq(p1 * p2)
        - 720.0 * sq(p1)
        - 5040.0;
    C64::new(total / 144.0, 0.0)
}

/// A group average checked against its Haar value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
}

impl MomentValue {
    pub fn matches(&self) -> bool {
        (self.value - self.target).abs() <= self.tolerance
    }
}

/// `(1/|G|) sum_g |Tr g|^{2t}`.
pub fn group_moment(g: &FiniteMatrixGroup, t: u32) -> f64 {
    group_moment_with(g, t, Strategy::default())
}

pub fn group_moment_with(g: &FiniteMatrixGroup, t: u32, strategy: Strategy) -> f64 {
    let elems = g.elements();
    let total = par::chunked_sum(strategy, elems.len(), par::DEFAULT_CHUNK, 0.0, |i| {
        elems[i].trace().norm_sqr().powi(t as i32)
    });
    total / elems.len() as f64
}

/// The moment `M_{2t}(G)` next to its Haar target.
pub fn moment_value(g: &FiniteMatrixGroup, t: u32) -> MomentValue {
    MomentValue {
        value: group_moment(g, t),
        target: haar_moment(t, g.dim()) as f64,
        tolerance: MULTIPLICITY_TOL,
    }
}

pub fn is_unitary_tgroup(g: &FiniteMatrixGroup, t: u32) -> bool {
    moment_value(g, t).matches()
}

/// `M_{2(t+1)}(G)`; a group satisfying the construction's hypothesis has
/// this equal to `haar_moment(t + 1, d) + 1`.
pub fn multiplicity_condition(g: &FiniteMatrixGroup, t: u32) -> f64 {
    group_moment(g, t + 1)
}

/// All `mu` of length `d` with `mu_+ = -mu_- <= n` (the weights occurring in
/// `chi^n (x) conj(chi)^n`), including the zero weight.
pub fn list_phi(n: u32, d: usize) -> Vec<HighestWeight> {
    let mut out = Vec::new();
    for k in 0..=n {
        for pos in Partition::all(k, d) {
            for neg in Partition::all(k, d - pos.len()) {
                let mut mu = vec![0i32; d];
                for (i, &p) in pos.parts().iter().enumerate() {
                    mu[i] = p as i32;
                }
                for (i, &q) in neg.parts().iter().enumerate() {
                    mu[d - 1 - i] = -(q as i32);
                }
                out.push(HighestWeight(mu));
            }
        }
    }
    out.sort_by(|a, b| b.cmp(a));
    out
}

/// Power sums and determinants of every group element, computed once.
pub(crate) struct PowerSumTable {
    width: usize,
    p: Vec<C64>,
    det: Vec<C64>,
}

impl PowerSumTable {
    pub(crate) fn new(g: &FiniteMatrixGroup, width: usize, strategy: Strategy) -> Self {
        let rows = par::map_indices(strategy, g.order(), |i| {
            let e = &g.elements()[i];
            let mut p = vec![C64::new(0.0, 0.0); width];
            power_sums_into(e.dim(), e.matrix().as_slice(), &mut p);
            (p, e.det())
        });
        let mut p = Vec::with_capacity(width * rows.len());
        let mut det = Vec::with_capacity(rows.len());
        for (row, dt) in rows {
            p.extend(row);
            det.push(dt);
        }
        PowerSumTable { width, p, det }
    }

    pub(crate) fn len(&self) -> usize {
        self.det.len()
    }

    /// `(1/|G|) sum_g chi(g)`.
    pub(crate) fn average(&self, chi: &Character, strategy: Strategy) -> C64 {
        assert!(chi.max_power() <= self.width);
        let n = self.len();
        let sum = par::chunked_sum(strategy, n, par::DEFAULT_CHUNK, C64::new(0.0, 0.0), |i| {
            chi.from_power_sums(&self.p[i * self.width..(i + 1) * self.width], self.det[i])
        });
        sum / n as f64
    }
}

/// Outcome of the search for the distinguished weight.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MuTildeSearch {
    pub mu_tilde: HighestWeight,
    /// `(mu, (1/|G|) sum_g chi_mu(g))` for every nontrivial `mu` in Phi.
    pub averages: Vec<(HighestWeight, f64)>,
}

/// The unique nontrivial `mu` in `Phi(t+1, d)` whose restriction to `G`
/// contains the trivial representation (exactly once).
pub fn find_mu_tilde(g: &FiniteMatrixGroup, t: u32) -> Result<HighestWeight> {
    search_mu_tilde(g, t).map(|s| s.mu_tilde)
}

pub fn search_mu_tilde(g: &FiniteMatrixGroup, t: u32) -> Result<MuTildeSearch> {
    search_mu_tilde_with(g, t, Strategy::default())
}

pub fn search_mu_tilde_with(
    g: &FiniteMatrixGroup,
    t: u32,
    strategy: Strategy,
) -> Result<MuTildeSearch> {
    let d = g.dim();
    if d < t as usize + 1 {
        return Err(Error::Hypothesis(format!(
            "requires d >= t + 1 (d = {d}, t = {t})"
        )));
    }
    let moment = multiplicity_condition(g, t);
    let target = haar_moment(t + 1, d) as f64 + 1.0;
    if (moment - target).abs() > MULTIPLICITY_TOL {
        return Err(Error::Hypothesis(format!(
            "M_{}(G) = {moment:.9} but the construction needs {target}",
            2 * (t + 1)
        )));
    }
    let phi: Vec<HighestWeight> = list_phi(t + 1, d)
        .into_iter()
        .filter(|m| !m.is_zero())
        .collect();
    let chars: Vec<Character> = phi.iter().cloned().map(Character::new).collect();
    let width = chars.iter().map(Character::max_power).max().unwrap_or(1);
    let table = PowerSumTable::new(g, width, strategy);
    let mut averages = Vec::with_capacity(chars.len());
    let mut candidates = Vec::new();
    for chi in &chars {
        let avg = table.average(chi, strategy);
        let nearest = avg.re.round();
        if (avg - C64::new(nearest, 0.0)).norm() > MULTIPLICITY_TOL || nearest < 0.0 {
            return Err(Error::Hypothesis(format!(
                "average of chi_{} over G is {avg}, not a multiplicity (tolerance failure)",
                chi.weight()
            )));
        }
        if nearest == 1.0 {
            candidates.push(chi.weight().clone());
        } else if nearest != 0.0 {
            return Err(Error::Hypothesis(format!(
                "chi_{} contains the trivial representation {nearest} times",
                chi.weight()
            )));
        }
        averages.push((chi.weight().clone(), avg.re));
    }
    match candidates.len() {
        1 => Ok(MuTildeSearch {
            mu_tilde: candidates.remove(0),
            averages,
        }),
        n => Err(Error::Hypothesis(format!(
            "expected exactly one weight with an invariant, found {n}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{close_group, GeneratorSet};
    use crate::matcore::{haar_random, seeded_rng};

    fn part(p: &[u32]) -> Partition {
        Partition::new(p.to_vec()).unwrap()
    }

    fn hw(m: &[i32]) -> HighestWeight {
        HighestWeight::new(m.to_vec()).unwrap()
    }

    /// Counts standard Young tableaux by removing corners recursively.
    fn count_syt(shape: &[u32]) -> u128 {
        if shape.iter().all(|&r| r == 0) {
            return 1;
        }
        let mut total = 0;
        for i in 0..shape.len() {
            let below = shape.get(i + 1).copied().unwrap_or(0);
            if shape[i] > below {
                let mut s = shape.to_vec();
                s[i] -= 1;
                total += count_syt(&s);
            }
        }
        total
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        assert_eq!(Partition::all(4, 4).len(), 5);
        assert_eq!(Partition::all(4, 2).len(), 3);
        assert_eq!(Partition::all(0, 3), vec![Partition(vec![])]);
    }

    #[test]
    fn specht_examples() {
        assert_eq!(specht_dimension(&part(&[5])), 1);
        assert_eq!(specht_dimension(&part(&[1, 1, 1])), 1);
        assert_eq!(specht_dimension(&part(&[2, 1])), 2);
        for n in 1..=8 {
            for p in Partition::all(n, n as usize) {
                assert_eq!(specht_dimension(&p), count_syt(p.parts()), "{p:?}");
            }
        }
    }

    #[test]
    fn haar_moment_examples() {
        assert_eq!(haar_moment(3, 3), 6);
        assert_eq!(haar_moment(4, 4), 24);
        assert_eq!(haar_moment(4, 3), 23);
        assert_eq!(haar_moment(2, 3), 2);
        assert_eq!(haar_moment(0, 2), 1);
        for t in 0..=8u32 {
            let fact: u128 = (1..=u128::from(t)).product();
            assert_eq!(haar_moment(t, 8), fact);
        }
    }

    #[test]
    fn newton_girard_examples() {
        let zero = vec![C64::new(0.0, 0.0); 5];
        let h = complete_homogeneous_from_power_sums(&zero, 5);
        assert_eq!(h[0], C64::new(1.0, 0.0));
        assert!(h[1..].iter().all(|z| *z == C64::new(0.0, 0.0)));

        let x = C64::new(0.3, -1.2);
        let p: Vec<C64> = (1..=6).map(|k| x.powu(k)).collect();
        let h = complete_homogeneous_from_power_sums(&p, 6);
        for (k, hk) in h.iter().enumerate() {
            assert!((hk - x.powu(k as u32)).norm() < 1e-12);
        }
    }

    #[test]
    fn newton_girard_matches_monomial_enumeration() {
        let xs = [C64::new(0.4, 0.9), C64::new(-1.1, 0.2), C64::new(0.7, -0.5)];
        let p: Vec<C64> = (1..=7)
            .map(|k| xs.iter().map(|x| x.powu(k)).sum())
            .collect();
        let h = complete_homogeneous_from_power_sums(&p, 7);
        for k in 0..=7u32 {
            let mut brute = C64::new(0.0, 0.0);
            for a in 0..=k {
                for b in 0..=k - a {
                    brute += xs[0].powu(a) * xs[1].powu(b) * xs[2].powu(k - a - b);
                }
            }
            assert!((h[k as usize] - brute).norm() < 1e-10 * (1.0 + brute.norm()));
        }
    }

    #[test]
    fn schur_small_identities() {
        let mut rng = seeded_rng(21);
        for _ in 0..10 {
            let u = haar_random(3, &mut rng);
            let p1 = u.trace();
            let p2 = crate::matcore::trace_power(&u, 2);
            assert!((schur_eval(&part(&[1]), &u).unwrap() - p1).norm() < 1e-12);
            let e2 = (p1 * p1 - p2) / 2.0;
            assert!((schur_eval(&part(&[1, 1]), &u).unwrap() - e2).norm() < 1e-12);
        }
        let u = haar_random(2, &mut rng);
        assert!(schur_eval(&part(&[1, 1, 1]), &u).is_err());
    }

    /// Bialternant formula `det(x_i^{lambda_j + n - j}) / det(x_i^{n - j})`.
    fn bialternant(lambda: &[u32], xs: &[C64]) -> C64 {
        let n = xs.len();
        let mut full = lambda.to_vec();
        full.resize(n, 0);
        let mut num = vec![C64::new(0.0, 0.0); n * n];
        let mut den = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                num[i * n + j] = xs[i].powu(full[j] + (n - 1 - j) as u32);
                den[i * n + j] = xs[i].powu((n - 1 - j) as u32);
            }
        }
        det_in_place(n, &mut num) / det_in_place(n, &mut den)
    }

    #[test]
    fn schur_matches_bialternant_on_diagonal_unitaries() {
        let mut rng = seeded_rng(22);
        use rand::Rng;
        for lambda in [
            vec![2],
            vec![3, 1],
            vec![6, 3],
            vec![4, 2, 1],
            vec![8, 4, 4],
        ] {
            for _ in 0..5 {
                let phases: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
                let u = UnitaryMatrix::from_phases(&phases);
                let xs: Vec<C64> = phases.iter().map(|&t| C64::from_polar(1.0, t)).collect();
                let got = schur_eval(&part(&lambda), &u).unwrap();
                let want = bialternant(&lambda, &xs);
                assert!(
                    (got - want).norm() <= 1e-9 * want.norm().max(1.0),
                    "{lambda:?}"
                );
            }
        }
    }

    #[test]
    fn weyl_dimensions_at_identity() {
        assert_eq!(hw(&[3, 0, -3]).weyl_dimension(), 64);
        assert_eq!(hw(&[4, 0, 0, -4]).weyl_dimension(), 825);
        assert_eq!(hw(&[1, 0, -1]).weyl_dimension(), 8);
        let c = character_eval(&hw(&[3, 0, -3]), &UnitaryMatrix::identity(3)).unwrap();
        assert!((c - C64::new(64.0, 0.0)).norm() < 1e-9);
        let c = character_eval(&hw(&[4, 0, 0, -4]), &UnitaryMatrix::identity(4)).unwrap();
        assert!((c - C64::new(825.0, 0.0)).norm() < 1e-9);
        for mu in list_phi(3, 3).into_iter().chain(list_phi(2, 4)) {
            let d = mu.dim();
            let c = character_eval(&mu, &UnitaryMatrix::identity(d)).unwrap();
            assert!((c.re - mu.weyl_dimension() as f64).abs() < 1e-6, "{mu}");
        }
    }

    #[test]
    fn closed_forms_at_identity() {
        assert!(
            (closed_form_303(&UnitaryMatrix::identity(3)) - C64::new(64.0, 0.0)).norm() < 1e-12
        );
        assert!(
            (closed_form_4004(&UnitaryMatrix::identity(4)) - C64::new(825.0, 0.0)).norm() < 1e-9
        );
    }

    #[test]
    fn character_is_a_class_function() {
        let mut rng = seeded_rng(23);
        let mu = hw(&[3, 1, -2, -2]);
        for _ in 0..20 {
            let u = haar_random(4, &mut rng);
            let v = haar_random(4, &mut rng);
            let conj = v.adjoint().mul(&u).mul(&v);
            let a = character_eval(&mu, &u).unwrap();
            let b = character_eval(&mu, &conj).unwrap();
            assert!((a - b).norm() < 1e-8 * a.norm().max(1.0));
        }
    }

    #[test]
    fn character_dimension_mismatch() {
        assert!(character_eval(&hw(&[1, 0]), &UnitaryMatrix::identity(3)).is_err());
    }

    #[test]
    fn highest_weight_parsing_and_duals() {
        let mu: HighestWeight = "3,0,-3".parse().unwrap();
        assert_eq!(mu, hw(&[3, 0, -3]));
        assert!(mu.is_self_dual());
        assert_eq!(mu.plus(), 3);
        assert_eq!(mu.minus(), -3);
        assert_eq!(
            "(2,1,-3)".parse::<HighestWeight>().unwrap().dual(),
            hw(&[3, -1, -2])
        );
        assert!("1,2".parse::<HighestWeight>().is_err());
        assert!("1,x".parse::<HighestWeight>().is_err());
        assert_eq!(mu.to_string(), "(3,0,-3)");
    }

    #[test]
    fn phi_enumeration() {
        assert_eq!(list_phi(1, 2), vec![hw(&[1, -1]), hw(&[0, 0])]);
        assert!(list_phi(3, 3).contains(&hw(&[3, 0, -3])));
        // Brute force over the box [-n, n]^d.
        for (n, d) in [(2u32, 2usize), (2, 3), (3, 3), (2, 4)] {
            let n_i = n as i32;
            let mut brute = Vec::new();
            let side = (2 * n + 1) as usize;
            for code in 0..side.pow(d as u32) {
                let mut c = code;
                let mu: Vec<i32> = (0..d)
                    .map(|_| {
                        let v = (c % side) as i32 - n_i;
                        c /= side;
                        v
                    })
                    .collect();
                if mu.windows(2).any(|w| w[0] < w[1]) {
                    continue;
                }
                let h = HighestWeight(mu);
                if h.plus() == -h.minus() && h.plus() <= n_i {
                    brute.push(h);
                }
            }
            brute.sort_by(|a, b| b.cmp(a));
            assert_eq!(list_phi(n, d), brute, "n={n} d={d}");
        }
    }

    #[test]
    fn trivial_group_moments() {
        let g = close_group(
            &GeneratorSet::new("one", vec![UnitaryMatrix::identity(3)]).unwrap(),
            2,
        )
        .unwrap();
        assert_eq!(group_moment(&g, 2), 81.0);
        assert_eq!(multiplicity_condition(&g, 1), 81.0);
        assert!(!is_unitary_tgroup(&g, 1));
        let g1 = close_group(
            &GeneratorSet::new("one", vec![UnitaryMatrix::identity(1)]).unwrap(),
            2,
        )
        .unwrap();
        assert!(is_unitary_tgroup(&g1, 1));
    }

    #[test]
    fn mu_tilde_refuses_small_dimension() {
        let g = close_group(
            &GeneratorSet::new("one", vec![UnitaryMatrix::identity(2)]).unwrap(),
            2,
        )
        .unwrap();
        assert!(matches!(find_mu_tilde(&g, 2), Err(Error::Hypothesis(_))));
        // d >= t + 1 but the moment condition fails.
        assert!(matches!(find_mu_tilde(&g, 1), Err(Error::Hypothesis(_))));
    }
}
