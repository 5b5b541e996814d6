//! Orbits `G U0 G`, frame potentials, per-irrep defects and design files.

use std::fs;
use std::ops::Add;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chars::{haar_moment, Character, HighestWeight};
use crate::error::{Error, Result};
use crate::group::{close_group, dedup, stabilizer_count_with, FiniteMatrixGroup, GeneratorSet};
use crate::matcore::{mul_into, UnitaryMatrix, C64, MAX_DIM};
use crate::par::{self, Strategy};

/// Largest orbit that is materialized as an explicit list.
pub const ORBIT_GUARD: usize = 10_000_000;
/// Relative tolerance of the frame-potential verdict.
pub const STRENGTH_TOL: f64 = 1e-4;
pub const MAX_STRENGTH_T: u32 = 6;
/// Per-irrep defect below which `X` counts as a design for that irrep.
pub const DEFECT_TOL: f64 = 1e-6;
/// Membership tolerance for `U0^H a U0` in the stabilizer count.
pub const STABILIZER_TOL: f64 = 1e-4;
pub const CHECKPOINT_EVERY: u64 = 100_000_000;
/// Orbit sums up to this many terms run without `--full-orbit`.
pub const REDUCED_SUM_BUDGET: u64 = 100_000_000;
pub const DESIGN_FILE_VERSION: u32 = 1;

/// `X = G U0 G`, held implicitly or as a deduplicated list.
#[derive(Clone, Debug)]
pub struct DesignOrbit {
    group: Arc<FiniteMatrixGroup>,
    base: UnitaryMatrix,
    elements: Option<Vec<UnitaryMatrix>>,
    size: usize,
    stabilizer: usize,
    claimed_strength: Option<u32>,
    report: Option<StrengthReport>,
}

impl DesignOrbit {
    /// Size from the stabilizer count; nothing materialized.
    pub fn implicit(group: Arc<FiniteMatrixGroup>, base: UnitaryMatrix) -> Result<Self> {
        if base.dim() != group.dim() {
            return Err(Error::DimensionMismatch {
                left: group.dim(),
                right: base.dim(),
            });
        }
        let stabilizer = stabilizer_count_with(&group, &base, STABILIZER_TOL, Strategy::default());
        let n = group.order();
        if stabilizer == 0 || !(n * n).is_multiple_of(stabilizer) {
            return Err(Error::Hypothesis(format!(
                "stabilizer count {stabilizer} does not divide |G|^2 = {}",
                n * n
            )));
        }
        Ok(DesignOrbit {
            size: n * n / stabilizer,
            group,
            base,
            elements: None,
            stabilizer,
            claimed_strength: None,
            report: None,
        })
    }

    pub fn group(&self) -> &Arc<FiniteMatrixGroup> {
        &self.group
    }

    pub fn base(&self) -> &UnitaryMatrix {
        &self.base
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn stabilizer_count(&self) -> usize {
        self.stabilizer
    }

    pub fn elements(&self) -> Option<&[UnitaryMatrix]> {
        self.elements.as_deref()
    }

    pub fn claimed_strength(&self) -> Option<u32> {
        self.claimed_strength
    }

    pub fn set_claimed_strength(&mut self, t: Option<u32>) {
        self.claimed_strength = t;
    }

    pub fn report(&self) -> Option<&StrengthReport> {
        self.report.as_ref()
    }

    pub fn set_report(&mut self, report: Option<StrengthReport>) {
        self.report = report;
    }

    /// Number of terms in the orbit-reduced double sums.
    pub fn reduced_terms(&self) -> u64 {
        let n = self.group.order() as u64;
        n * n
    }

    /// Lists every `g1 U0 g2` and checks the count against the stabilizer.
    pub fn materialize(&mut self) -> Result<&[UnitaryMatrix]> {
        if self.elements.is_none() {
            if self.size > ORBIT_GUARD {
                return Err(Error::OrbitTooLarge {
                    size: self.size,
                    limit: ORBIT_GUARD,
                });
            }
            let g = &self.group;
            let d = g.dim();
            let n = g.order();
            let left: Vec<UnitaryMatrix> = g.elements().iter().map(|a| a.mul(&self.base)).collect();
            let items = (0..n * n).map(|k| left[k / n].mul(&g.elements()[k % n]));
            let elements = dedup(d, items)?;
            if elements.len() != self.size {
                return Err(Error::Hypothesis(format!(
                    "materialized {} orbit points but the stabilizer count implies {}",
                    elements.len(),
                    self.size
                )));
            }
            self.elements = Some(elements);
        }
        Ok(self.elements.as_deref().expect("just materialized"))
    }
}

/// `G U0 G` as an explicit list; fails with [`Error::OrbitTooLarge`] past the guard.
pub fn orbit_elements(group: Arc<FiniteMatrixGroup>, base: UnitaryMatrix) -> Result<DesignOrbit> {
    let mut orbit = DesignOrbit::implicit(group, base)?;
    orbit.materialize()?;
    Ok(orbit)
}

fn check_set(x: &[UnitaryMatrix]) -> Result<usize> {
    let d = x
        .first()
        .ok_or_else(|| Error::InvalidInput("empty set".into()))?
        .dim();
    if let Some(u) = x.iter().find(|u| u.dim() != d) {
        return Err(Error::DimensionMismatch {
            left: d,
            right: u.dim(),
        });
    }
    Ok(d)
}

/// `|Tr(A^H B)|^2` on row-major slices.
#[inline]
fn overlap_sq(a: &[C64], b: &[C64]) -> f64 {
    let s: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    s.norm_sqr()
}

/// `[sum x, sum x^2, ..., sum x^MAX]` for `x = |Tr|^2`.
#[derive(Clone, Copy, Debug, Default)]
struct PowerSums([f64; MAX_STRENGTH_T as usize]);

impl PowerSums {
    fn of(x: f64, t_max: u32) -> Self {
        let mut out = [0.0; MAX_STRENGTH_T as usize];
        let mut acc = 1.0;
        for slot in out.iter_mut().take(t_max as usize) {
            acc *= x;
            *slot = acc;
        }
        PowerSums(out)
    }
}

impl Add for PowerSums {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

fn check_t(t: u32) -> Result<()> {
    if t == 0 || t > MAX_STRENGTH_T {
        return Err(Error::InvalidInput(format!(
            "t = {t} outside 1..={MAX_STRENGTH_T}"
        )));
    }
    Ok(())
}

/// `(1/|X|^2) sum_{U,V in X} |Tr(U^H V)|^{2t}`.
pub fn frame_potential(x: &[UnitaryMatrix], t: u32) -> Result<f64> {
    Ok(frame_potentials_with(x, t, Strategy::default())?[t as usize - 1])
}

/// Frame potentials for `t = 1..=t_max` in one pass.
pub fn frame_potentials_with(
    x: &[UnitaryMatrix],
    t_max: u32,
    strategy: Strategy,
) -> Result<Vec<f64>> {
    check_set(x)?;
    check_t(t_max)?;
    let n = x.len();
    let sums = par::chunked_sum(
        strategy,
        n * n,
        par::DEFAULT_CHUNK,
        PowerSums::default(),
        |k| {
            let a = x[k / n].matrix().as_slice();
            let b = x[k % n].matrix().as_slice();
            PowerSums::of(overlap_sq(a, b), t_max)
        },
    );
    let norm = (n * n) as f64;
    Ok(sums.0[..t_max as usize].iter().map(|s| s / norm).collect())
}

/// `U0^H a U0` for every `a`, transposed so that `Tr(X b)` is a plain dot
/// product with `b`'s entries.
fn conjugated_transposes(g: &FiniteMatrixGroup, u0: &UnitaryMatrix) -> Vec<C64> {
    let d = g.dim();
    let n = d * d;
    let u0h = u0.adjoint();
    let mut out = vec![C64::new(0.0, 0.0); g.order() * n];
    let mut tmp = [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM];
    let mut x = [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM];
    for (i, a) in g.elements().iter().enumerate() {
        mul_into(
            d,
            u0h.matrix().as_slice(),
            a.matrix().as_slice(),
            &mut tmp[..n],
        );
        mul_into(d, &tmp[..n], u0.matrix().as_slice(), &mut x[..n]);
        let row = &mut out[i * n..(i + 1) * n];
        for r in 0..d {
            for c in 0..d {
                row[c * d + r] = x[r * d + c];
            }
        }
    }
    out
}

/// `(1/|G|^2) sum_{a,b in G} |Tr(U0^H a U0 b)|^{2t}`, equal to the frame
/// potential of `G U0 G`.
pub fn orbit_frame_potential(g: &FiniteMatrixGroup, u0: &UnitaryMatrix, t: u32) -> Result<f64> {
    Ok(orbit_frame_potentials(g, u0, t, &SumOptions::default())?[t as usize - 1])
}

/// Execution options for the long orbit sums.
#[derive(Clone, Debug)]
pub struct SumOptions {
    pub strategy: Strategy,
    /// Resume from and write `{term_index, partial_sum}` here.
    pub checkpoint: Option<std::path::PathBuf>,
    pub checkpoint_every: u64,
}

impl Default for SumOptions {
    fn default() -> Self {
        SumOptions {
            strategy: Strategy::default(),
            checkpoint: None,
            checkpoint_every: CHECKPOINT_EVERY,
        }
    }
}

/// Partial state of an orbit frame-potential sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub term_index: u64,
    /// Unnormalized sums for `t = 1..=t_max`.
    pub partial_sum: Vec<f64>,
    pub t_max: u32,
    pub total_terms: u64,
}

fn read_checkpoint(path: &Path, t_max: u32, total: u64) -> Result<Option<Checkpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cp: Checkpoint = serde_json::from_str(&text)?;
    if cp.t_max != t_max || cp.total_terms != total || cp.partial_sum.len() != t_max as usize {
        return Err(Error::InvalidInput(format!(
            "checkpoint {} belongs to another computation",
            path.display()
        )));
    }
    Ok(Some(cp))
}

fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_string(cp)?).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Orbit frame potentials for `t = 1..=t_max`.
///
/// Terms are visited in the fixed order `k = i |G| + j` in blocks of
/// `checkpoint_every`, so a resumed run reproduces an uninterrupted one bit
/// for bit.
pub fn orbit_frame_potentials(
    g: &FiniteMatrixGroup,
    u0: &UnitaryMatrix,
    t_max: u32,
    options: &SumOptions,
) -> Result<Vec<f64>> {
    let (sums, total) = orbit_power_sums(g, u0, t_max, options, None)?;
    let norm = total as f64;
    Ok(sums.0[..t_max as usize].iter().map(|s| s / norm).collect())
}

/// Runs blocks until all terms are summed or the next block would start at
/// or past `stop`. Returns the sums and the term count reached.
fn orbit_power_sums(
    g: &FiniteMatrixGroup,
    u0: &UnitaryMatrix,
    t_max: u32,
    options: &SumOptions,
    stop: Option<u64>,
) -> Result<(PowerSums, u64)> {
    check_t(t_max)?;
    if u0.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            left: g.dim(),
            right: u0.dim(),
        });
    }
    let n = g.dim() * g.dim();
    let order = g.order() as u64;
    let total = order * order;
    let xs = conjugated_transposes(g, u0);
    let elems = g.elements();
    let block = options.checkpoint_every.max(1);
    let stop = stop.unwrap_or(total).min(total);

    let (mut start, mut sums) = (0u64, PowerSums::default());
    if let Some(path) = &options.checkpoint {
        if let Some(cp) = read_checkpoint(path, t_max, total)? {
            start = cp.term_index;
            sums.0[..t_max as usize].copy_from_slice(&cp.partial_sum);
        }
    }
    while start < stop {
        let end = (start + block).min(total);
        let part = par::chunked_sum(
            options.strategy,
            (end - start) as usize,
            par::DEFAULT_CHUNK,
            PowerSums::default(),
            |off| {
                let k = start + off as u64;
                let (i, j) = ((k / order) as usize, (k % order) as usize);
                let x = &xs[i * n..(i + 1) * n];
                let b = elems[j].matrix().as_slice();
                let s: C64 = x.iter().zip(b).map(|(p, q)| p * q).sum();
                PowerSums::of(s.norm_sqr(), t_max)
            },
        );
        sums = sums + part;
        start = end;
        if let Some(path) = &options.checkpoint {
            write_checkpoint(
                path,
                &Checkpoint {
                    term_index: start,
                    partial_sum: sums.0[..t_max as usize].to_vec(),
                    t_max,
                    total_terms: total,
                },
            )?;
        }
    }
    Ok((sums, start))
}

fn character_target(mu: &HighestWeight) -> f64 {
    if mu.is_zero() {
        1.0
    } else {
        0.0
    }
}

fn real_mean(sum: C64, count: f64) -> Result<f64> {
    let z = sum / count;
    let limit = 1e-8 * (1.0 + z.re.abs());
    if z.im.abs() > limit {
        return Err(Error::ImaginaryResidue {
            residue: z.im.abs(),
            limit,
        });
    }
    Ok(z.re)
}

/// `(1/|X|^2) sum_{U,V} chi_mu(U^H V)` minus its Haar value.
pub fn rho_design_defect(x: &[UnitaryMatrix], mu: &HighestWeight) -> Result<f64> {
    let d = check_set(x)?;
    if mu.dim() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: mu.dim(),
        });
    }
    let chi = Character::new(mu.clone());
    let n = x.len();
    let adj: Vec<UnitaryMatrix> = x.iter().map(UnitaryMatrix::adjoint).collect();
    let sum = par::chunked_sum(
        Strategy::default(),
        n * n,
        par::DEFAULT_CHUNK,
        C64::new(0.0, 0.0),
        |k| {
            let mut prod = [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM];
            let m = d * d;
            mul_into(
                d,
                adj[k / n].matrix().as_slice(),
                x[k % n].matrix().as_slice(),
                &mut prod[..m],
            );
            chi.eval_slice(d, &prod[..m])
        },
    );
    Ok(real_mean(sum, (n * n) as f64)? - character_target(mu))
}

/// Orbit-reduced [`rho_design_defect`] of `G U0 G`.
pub fn orbit_rho_design_defect(
    g: &FiniteMatrixGroup,
    u0: &UnitaryMatrix,
    mu: &HighestWeight,
) -> Result<f64> {
    let d = g.dim();
    if mu.dim() != d || u0.dim() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: if mu.dim() != d { mu.dim() } else { u0.dim() },
        });
    }
    let chi = Character::new(mu.clone());
    let order = g.order();
    let u0h = u0.adjoint();
    let xs: Vec<UnitaryMatrix> = g.elements().iter().map(|a| u0h.mul(a).mul(u0)).collect();
    let elems = g.elements();
    let sum = par::chunked_sum(
        Strategy::default(),
        order * order,
        par::DEFAULT_CHUNK,
        C64::new(0.0, 0.0),
        |k| {
            let mut prod = [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM];
            let m = d * d;
            mul_into(
                d,
                xs[k / order].matrix().as_slice(),
                elems[k % order].matrix().as_slice(),
                &mut prod[..m],
            );
            chi.eval_slice(d, &prod[..m])
        },
    );
    Ok(real_mean(sum, (order * order) as f64)? - character_target(mu))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrengthEntry {
    pub t: u32,
    pub frame_potential: f64,
    pub haar_target: f64,
    pub is_design: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrengthReport {
    pub entries: Vec<StrengthEntry>,
    /// Largest `t` such that every `t' <= t` passes (0 if none).
    pub strength: u32,
}

impl StrengthReport {
    pub fn from_potentials(potentials: &[f64], d: usize) -> Result<Self> {
        let mut entries = Vec::with_capacity(potentials.len());
        let mut strength = 0;
        let mut prefix = true;
        for (k, &fp) in potentials.iter().enumerate() {
            let t = k as u32 + 1;
            let target = haar_moment(t, d) as f64;
            let tol = STRENGTH_TOL * target;
            if fp < target - tol {
                return Err(Error::Hypothesis(format!(
                    "frame potential {fp} below the Haar value {target} at t = {t}"
                )));
            }
            let is_design = fp - target <= tol;
            prefix &= is_design;
            if prefix {
                strength = t;
            }
            entries.push(StrengthEntry {
                t,
                frame_potential: fp,
                haar_target: target,
                is_design,
            });
        }
        Ok(StrengthReport { entries, strength })
    }
}

/// Frame-potential verdicts for `t = 1..=t_max` of an explicit set.
pub fn strength_estimate(x: &[UnitaryMatrix], t_max: u32) -> Result<StrengthReport> {
    let d = check_set(x)?;
    StrengthReport::from_potentials(&frame_potentials_with(x, t_max, Strategy::default())?, d)
}

/// Frame-potential verdicts for `G U0 G` through the orbit-reduced sum.
pub fn orbit_strength_estimate(
    g: &FiniteMatrixGroup,
    u0: &UnitaryMatrix,
    t_max: u32,
    options: &SumOptions,
) -> Result<StrengthReport> {
    StrengthReport::from_potentials(&orbit_frame_potentials(g, u0, t_max, options)?, g.dim())
}

/// Group as stored in a design file: generators when known, else elements.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct GroupRecord {
    label: String,
    d: usize,
    order: usize,
    #[serde(default)]
    generators: Vec<UnitaryMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elements: Option<Vec<UnitaryMatrix>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DesignFile {
    version: u32,
    group: GroupRecord,
    base: UnitaryMatrix,
    size: usize,
    stabilizer_count: usize,
    stabilizer_tolerance: f64,
    claimed_strength: Option<u32>,
    report: Option<StrengthReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elements: Option<Vec<UnitaryMatrix>>,
}

/// Writes the orbit as versioned JSON; materialized elements are included
/// when `with_elements` is set and available.
pub fn export_design(
    orbit: &DesignOrbit,
    path: impl AsRef<Path>,
    with_elements: bool,
) -> Result<()> {
    let path = path.as_ref();
    let g = &orbit.group;
    let file = DesignFile {
        version: DESIGN_FILE_VERSION,
        group: GroupRecord {
            label: g.label().to_string(),
            d: g.dim(),
            order: g.order(),
            generators: g.generators().to_vec(),
            elements: g.generators().is_empty().then(|| g.elements().to_vec()),
        },
        base: orbit.base.clone(),
        size: orbit.size,
        stabilizer_count: orbit.stabilizer,
        stabilizer_tolerance: STABILIZER_TOL,
        claimed_strength: orbit.claimed_strength,
        report: orbit.report.clone(),
        elements: if with_elements {
            orbit.elements.clone()
        } else {
            None
        },
    };
    let text = serde_json::to_string_pretty(&file)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a design file, rebuilding the group and checking the recorded size.
pub fn import_design(path: impl AsRef<Path>) -> Result<DesignOrbit> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let probe: serde_json::Value = serde_json::from_str(&text)?;
    let found = probe
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .unwrap_or(0);
    if found != u64::from(DESIGN_FILE_VERSION) {
        return Err(Error::Version {
            found: found as u32,
            expected: DESIGN_FILE_VERSION,
        });
    }
    let file: DesignFile = serde_json::from_value(probe)?;
    let rec = file.group;
    let group = if let Some(elements) = rec.elements {
        FiniteMatrixGroup::from_elements(rec.label, elements, rec.generators)?
    } else {
        let mut g = close_group(
            &GeneratorSet::new(rec.label.clone(), rec.generators)?,
            rec.order.max(1),
        )?;
        g.set_label(rec.label);
        g
    };
    if group.order() != rec.order || group.dim() != rec.d {
        return Err(Error::InvalidInput(format!(
            "design file group rebuilds to order {} (d = {}), expected {} (d = {})",
            group.order(),
            group.dim(),
            rec.order,
            rec.d
        )));
    }
    let mut orbit = DesignOrbit::implicit(Arc::new(group), file.base)?;
    if orbit.size != file.size || orbit.stabilizer != file.stabilizer_count {
        return Err(Error::InvalidInput(format!(
            "design file records orbit size {} but the base point gives {}",
            file.size, orbit.size
        )));
    }
    orbit.claimed_strength = file.claimed_strength;
    orbit.report = file.report;
    if let Some(elements) = file.elements {
        if elements.len() != orbit.size {
            return Err(Error::InvalidInput(
                "stored element list has the wrong length".into(),
            ));
        }
        orbit.elements = Some(elements);
    }
    Ok(orbit)
}
