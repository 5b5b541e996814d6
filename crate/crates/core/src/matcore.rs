//! Dense complex matrices for small dimensions (d <= 16).
//!
//! [`CMatrix`] is the general row-major container. [`UnitaryMatrix`] and
//! [`SkewHermitian`] are checked newtypes over it: every group element,
//! design point and iterate of the zero finder is a `UnitaryMatrix`, and the
//! principal logarithm of one is a `SkewHermitian`.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Deterministic generator used for every seeded computation in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const MAX_DIM: usize = 16;

/// Per-dimension unitarity tolerance on `||U^H U - I||_F`.
pub const UNITARITY_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct CMatrix {
    d: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(d: usize) -> Self {
        CMatrix {
            d,
            data: vec![ZERO; d * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m.data[i * d + i] = ONE;
        }
        m
    }

    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                data.push(f(i, j));
            }
        }
        CMatrix { d, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                left: d,
                right: bad.len(),
            });
        }
        Ok(CMatrix {
            d,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let d = entries.len();
        let mut m = Self::zeros(d);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * d + i] = z;
        }
        m
    }

    /// Block-diagonal matrix with the given square blocks along the diagonal.
    pub fn block_diagonal(blocks: &[&CMatrix]) -> Self {
        let d = blocks.iter().map(|b| b.d).sum();
        let mut m = Self::zeros(d);
        let mut offset = 0;
        for b in blocks {
            for i in 0..b.d {
                for j in 0..b.d {
                    m.data[(offset + i) * d + offset + j] = b[(i, j)];
                }
            }
            offset += b.d;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let d = self.d;
        Self::from_fn(d, |i, j| self.data[j * d + i].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.d).map(|i| self.data[i * self.d + i]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix {
            d: self.d,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> Result<Self> {
        check_dims(self, other)?;
        Ok(CMatrix {
            d: self.d,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &CMatrix) -> Result<Self> {
        check_dims(self, other)?;
        Ok(CMatrix {
            d: self.d,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Determinant by LU factorization with partial pivoting.
    pub fn det(&self) -> C64 {
        let mut work = self.data.clone();
        det_in_place(self.d, &mut work)
    }

    /// `||self^H self - I||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.d;
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut s = ZERO;
                for k in 0..d {
                    s += self.data[k * d + i].conj() * self.data[k * d + j];
                }
                if i == j {
                    s -= ONE;
                }
                acc += s.norm_sqr();
            }
        }
        acc.sqrt()
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.d, self.d, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let d = m.nrows();
        Self::from_fn(d, |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.d + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.d + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.d, self.d)?;
        for i in 0..self.d {
            let row: Vec<String> = (0..self.d)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

fn check_dims(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.d != b.d {
        return Err(Error::DimensionMismatch {
            left: a.d,
            right: b.d,
        });
    }
    Ok(())
}

/// `out = a * b` for row-major d x d slices.
#[inline]
pub(crate) fn mul_into(d: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
    for i in 0..d {
        let row = &mut out[i * d..(i + 1) * d];
        row.fill(ZERO);
        for k in 0..d {
            let aik = a[i * d + k];
            let brow = &b[k * d..(k + 1) * d];
            for (o, &bkj) in row.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
}

/// `Tr(a * b)` without forming the product.
#[inline]
pub(crate) fn trace_of_product(d: usize, a: &[C64], b: &[C64]) -> C64 {
    let mut s = ZERO;
    for i in 0..d {
        for k in 0..d {
            s += a[i * d + k] * b[k * d + i];
        }
    }
    s
}

/// Determinant of a row-major n x n matrix, destroying `a`.
pub(crate) fn det_in_place(n: usize, a: &mut [C64]) -> C64 {
    let mut det = ONE;
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].norm_sqr();
        for r in col + 1..n {
            let v = a[r * n + col].norm_sqr();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best == 0.0 {
            return ZERO;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        let inv = p.inv();
        for r in col + 1..n {
            let factor = a[r * n + col] * inv;
            if factor == ZERO {
                continue;
            }
            for j in col + 1..n {
                let v = a[col * n + j];
                a[r * n + j] -= factor * v;
            }
        }
    }
    det
}

/// Checked matrix product.
pub fn mat_mul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_dims(a, b)?;
    let mut out = CMatrix::zeros(a.d);
    mul_into(a.d, &a.data, &b.data, &mut out.data);
    Ok(out)
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    /// Panics on dimension mismatch; use [`mat_mul`] for the checked form.
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        mat_mul(self, rhs).expect("matrix dimensions must agree")
    }
}

/// `||A - B||_F`.
pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    check_dims(a, b)?;
    Ok(frobenius_distance_slices(&a.data, &b.data))
}

#[inline]
pub(crate) fn frobenius_distance_slices(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// A d x d matrix with `||U^H U - I||_F <= 1e-9 d`.
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        validate_entries(&m)?;
        let tolerance = UNITARITY_TOL * m.d as f64;
        let defect = m.unitarity_defect();
        if defect > tolerance {
            return Err(Error::NotUnitary { defect, tolerance });
        }
        Ok(UnitaryMatrix(m))
    }

    /// Wraps a matrix already known to be unitary (products and inverses of
    /// checked unitaries, exponentials of skew-Hermitian matrices).
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        debug_assert!(m.unitarity_defect() <= 1e-8 * m.d as f64);
        UnitaryMatrix(m)
    }

    /// Nearest unitary matrix in Frobenius norm (unitary polar factor).
    ///
    /// Used to lift low-precision transcriptions (e.g. six-digit base points)
    /// onto U(d).
    pub fn nearest(m: &CMatrix) -> Result<Self> {
        validate_entries(m)?;
        let a = m.to_nalgebra();
        let svd = a.svd(true, true);
        let (u, vt) = match (svd.u, svd.v_t) {
            (Some(u), Some(vt)) => (u, vt),
            _ => return Err(Error::InvalidInput("SVD failed".into())),
        };
        if svd.singular_values.iter().any(|&s| s < 1e-12) {
            return Err(Error::InvalidInput("matrix is singular".into()));
        }
        let mut q = CMatrix::from_nalgebra(&(u * vt));
        // One Newton-Schulz sweep tightens unitarity to rounding level.
        let qhq = &q.adjoint() * &q;
        let correction = CMatrix::from_fn(q.d, |i, j| {
            let delta = if i == j { 3.0 } else { 0.0 };
            (C64::new(delta, 0.0) - qhq[(i, j)]) * 0.5
        });
        q = &q * &correction;
        UnitaryMatrix::new(q)
    }

    pub fn identity(d: usize) -> Self {
        UnitaryMatrix(CMatrix::identity(d))
    }

    /// `diag(e^{i theta_1}, ..., e^{i theta_d})`.
    pub fn from_phases(phases: &[f64]) -> Self {
        let entries: Vec<C64> = phases.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        UnitaryMatrix(CMatrix::diagonal(&entries))
    }

    pub fn block_diagonal(blocks: &[&UnitaryMatrix]) -> Self {
        let inner: Vec<&CMatrix> = blocks.iter().map(|b| &b.0).collect();
        UnitaryMatrix(CMatrix::block_diagonal(&inner))
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.d
    }

    /// Inverse, equal to the adjoint.
    pub fn adjoint(&self) -> Self {
        UnitaryMatrix(self.0.adjoint())
    }

    /// Product of two unitaries; panics on dimension mismatch.
    pub fn mul(&self, other: &UnitaryMatrix) -> Self {
        UnitaryMatrix(&self.0 * &other.0)
    }

    pub fn try_mul(&self, other: &UnitaryMatrix) -> Result<Self> {
        Ok(UnitaryMatrix(mat_mul(&self.0, &other.0)?))
    }

    pub fn det(&self) -> C64 {
        self.0.det()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Eigenvalues from the complex Schur form (normal matrix, so the
    /// triangular factor is diagonal up to rounding).
    pub fn eigenvalues(&self) -> Vec<C64> {
        let schur = nalgebra::linalg::Schur::new(self.0.to_nalgebra());
        let (_, t) = schur.unpack();
        (0..self.dim()).map(|i| t[(i, i)]).collect()
    }
}

impl fmt::Debug for UnitaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unitary{:?}", self.0)
    }
}

impl<'de> Deserialize<'de> for UnitaryMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let m = CMatrix::deserialize(de)?;
        UnitaryMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

fn validate_entries(m: &CMatrix) -> Result<()> {
    if m.d == 0 || m.d > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "dimension {} outside 1..={MAX_DIM}",
            m.d
        )));
    }
    if let Some(pos) = m
        .data
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::NonFinite {
            row: pos / m.d,
            col: pos % m.d,
        });
    }
    Ok(())
}

/// Skew-Hermitian matrix, an element of the Lie algebra u(d).
#[derive(Clone, PartialEq, Debug)]
pub struct SkewHermitian(CMatrix);

impl SkewHermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        validate_entries(&m)?;
        let defect = m.add(&m.adjoint())?.frobenius_norm();
        if defect > UNITARITY_TOL * m.d as f64 {
            return Err(Error::NotSkewHermitian { defect });
        }
        Ok(SkewHermitian(m))
    }

    pub fn zero(d: usize) -> Self {
        SkewHermitian(CMatrix::zeros(d))
    }

    /// Real-linear combination `a X + b Y`, which stays in u(d).
    pub fn combine(a: f64, x: &SkewHermitian, b: f64, y: &SkewHermitian) -> Self {
        debug_assert_eq!(x.dim(), y.dim());
        SkewHermitian(CMatrix {
            d: x.0.d,
            data: x
                .0
                .data
                .iter()
                .zip(&y.0.data)
                .map(|(p, q)| p * a + q * b)
                .collect(),
        })
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.d
    }

    /// Eigenvalues of `-i H` (real), i.e. the eigenphases of `exp(H)`.
    pub fn phases(&self) -> Vec<f64> {
        let k = hermitian_part(&self.0);
        let eig = nalgebra::linalg::SymmetricEigen::new(k.to_nalgebra());
        eig.eigenvalues.iter().copied().collect()
    }
}

/// `-i H` for skew-Hermitian `H`, symmetrized.
fn hermitian_part(h: &CMatrix) -> CMatrix {
    let d = h.d;
    let minus_i = C64::new(0.0, -1.0);
    CMatrix::from_fn(d, |r, c| {
        let a = h[(r, c)] * minus_i;
        let b = (h[(c, r)] * minus_i).conj();
        (a + b) * 0.5
    })
}

/// `Tr(U^k)`, with `Tr(U^0) = d`.
pub fn trace_power(u: &UnitaryMatrix, k: u32) -> C64 {
    if k == 0 {
        return C64::new(u.dim() as f64, 0.0);
    }
    power_sums(u.matrix(), k as usize)[k as usize - 1]
}

/// Power sums `[Tr(A), Tr(A^2), ..., Tr(A^m)]` by repeated multiplication.
pub fn power_sums(a: &CMatrix, m: usize) -> Vec<C64> {
    let mut out = vec![ZERO; m];
    power_sums_into(a.d, &a.data, &mut out);
    out
}

pub(crate) fn power_sums_into(d: usize, a: &[C64], out: &mut [C64]) {
    let m = out.len();
    if m == 0 {
        return;
    }
    out[0] = (0..d).map(|i| a[i * d + i]).sum();
    if m == 1 {
        return;
    }
    let mut cur = [ZERO; MAX_DIM * MAX_DIM];
    let mut next = [ZERO; MAX_DIM * MAX_DIM];
    let n = d * d;
    cur[..n].copy_from_slice(a);
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        if k + 1 == m {
            *slot = trace_of_product(d, &cur[..n], a);
        } else {
            mul_into(d, &cur[..n], a, &mut next[..n]);
            *slot = (0..d).map(|i| next[i * d + i]).sum();
            std::mem::swap(&mut cur, &mut next);
        }
    }
}

/// Principal matrix logarithm of a unitary matrix.
///
/// Every eigenphase of the result lies in (-pi, pi]; an eigenvalue of exactly
/// -1 maps to +pi.
pub fn unitary_log(u: &UnitaryMatrix) -> SkewHermitian {
    unitary_log_with_phases(u).0
}

/// [`unitary_log`] together with the eigenphases it assigned.
///
/// Block-diagonal inputs are handled block by block, so the result has
/// exactly the same block pattern.
pub fn unitary_log_with_phases(u: &UnitaryMatrix) -> (SkewHermitian, Vec<f64>) {
    let m = u.matrix();
    let d = m.d;
    let mut out = CMatrix::zeros(d);
    let mut all_phases = Vec::with_capacity(d);
    for (lo, hi) in diagonal_blocks(m) {
        let n = hi - lo;
        if n == 1 {
            let theta = principal_phase(m[(lo, lo)]);
            out.data[lo * d + lo] = C64::new(0.0, theta);
            all_phases.push(theta);
            continue;
        }
        let block = DMatrix::<C64>::from_fn(n, n, |i, j| m[(lo + i, lo + j)]);
        let (q, t) = nalgebra::linalg::Schur::new(block).unpack();
        let mut diag = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            let theta = principal_phase(t[(i, i)]);
            diag[(i, i)] = C64::new(0.0, theta);
            all_phases.push(theta);
        }
        let h = &q * diag * q.adjoint();
        // Project onto u(n) to remove rounding in the Hermitian part.
        for i in 0..n {
            for j in 0..n {
                out.data[(lo + i) * d + lo + j] = (h[(i, j)] - h[(j, i)].conj()) * 0.5;
            }
        }
    }
    (SkewHermitian(out), all_phases)
}

/// Finest split of `0..d` into contiguous ranges with exactly zero coupling.
pub(crate) fn diagonal_blocks(m: &CMatrix) -> Vec<(usize, usize)> {
    let d = m.d;
    let mut blocks = Vec::new();
    let mut lo = 0;
    for k in 0..d {
        let closed = (lo..=k).all(|i| (k + 1..d).all(|j| m[(i, j)] == ZERO && m[(j, i)] == ZERO));
        if closed {
            blocks.push((lo, k + 1));
            lo = k + 1;
        }
    }
    blocks
}

/// `arg(z)` in (-pi, pi] with -pi folded to +pi.
pub fn principal_phase(z: C64) -> f64 {
    let theta = z.im.atan2(z.re);
    if theta <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        theta
    }
}

/// Matrix exponential of a skew-Hermitian matrix.
///
/// Computed blockwise through the Hermitian eigendecomposition of `-iH`, so
/// the result is unitary to rounding and keeps the block pattern of `H`
/// exactly; diagonal inputs map to exactly diagonal outputs.
pub fn matrix_exp(h: &SkewHermitian) -> UnitaryMatrix {
    let m = h.matrix();
    let d = m.d;
    let mut out = CMatrix::zeros(d);
    for (lo, hi) in diagonal_blocks(m) {
        let n = hi - lo;
        if n == 1 {
            out.data[lo * d + lo] = C64::from_polar(1.0, m[(lo, lo)].im);
            continue;
        }
        let k = DMatrix::<C64>::from_fn(n, n, |i, j| {
            let a = m[(lo + i, lo + j)] * C64::new(0.0, -1.0);
            let b = (m[(lo + j, lo + i)] * C64::new(0.0, -1.0)).conj();
            (a + b) * 0.5
        });
        let eig = nalgebra::linalg::SymmetricEigen::new(k);
        let v = &eig.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
            let phase = C64::from_polar(1.0, lambda);
            for i in 0..n {
                scaled[(i, j)] *= phase;
            }
        }
        let e = scaled * v.adjoint();
        for i in 0..n {
            for j in 0..n {
                out.data[(lo + i) * d + lo + j] = e[(i, j)];
            }
        }
    }
    UnitaryMatrix::from_trusted(out)
}

/// Haar-distributed unitary: Gram-Schmidt on a complex Ginibre matrix.
///
/// Gram-Schmidt produces the QR factor whose triangular part has a positive
/// real diagonal, which is the phase convention that makes Q Haar.
pub fn haar_random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitaryMatrix {
    assert!((1..=MAX_DIM).contains(&d), "dimension out of range");
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // Column-major work array: cols[j] is column j.
    let mut cols: Vec<Vec<C64>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    C64::new(re * scale, im * scale)
                })
                .collect()
        })
        .collect();
    for j in 0..d {
        // Two passes of modified Gram-Schmidt for orthogonality at rounding level.
        for _ in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let qk = &done[k];
                let v = &mut rest[0];
                let proj: C64 = qk.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    UnitaryMatrix::from_trusted(CMatrix::from_fn(d, |i, j| cols[j][i]))
}

/// Repo-wide matrix encoding: `{"d": int, "entries": [[[re, im], ...], ...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    d: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl From<CMatrix> for MatrixJson {
    fn from(m: CMatrix) -> Self {
        MatrixJson {
            d: m.d,
            entries: (0..m.d)
                .map(|i| (0..m.d).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.entries.len() != j.d {
            return Err(Error::DimensionMismatch {
                left: j.d,
                right: j.entries.len(),
            });
        }
        let rows: Vec<Vec<C64>> = j
            .entries
            .iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        CMatrix::from_rows(&rows)
    }
}
