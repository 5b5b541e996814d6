//! Finite subgroups of U(d) built from generators.
//!
//! Elements are deduplicated with a tolerance hash: each element is projected
//! onto a few fixed unit directions of the real 2d^2-dimensional coordinate
//! space and the projections are quantized. Because every projection is
//! 1-Lipschitz in the Frobenius norm, probing the neighbouring cell of any
//! projection that lies within `tol` of a cell boundary finds every stored
//! element within Frobenius distance `tol`.

use std::collections::{HashMap, VecDeque};
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    frobenius_distance_slices, mul_into, seeded_rng, CMatrix, UnitaryMatrix, C64, MAX_DIM,
};
use crate::par::{self, Strategy};

/// Two products closer than this are the same group element.
pub const SAME_ELEMENT_TOL: f64 = 1e-6;
/// Distinct elements must be at least this far apart; anything between the
/// two thresholds aborts the closure.
pub const SEPARATION_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_ORDER: usize = 1_000_000;

const FINE_STEP: f64 = 1e-3;
const COARSE_STEP: f64 = 5e-2;
const N_PROJ: usize = 4;

#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub label: String,
    pub generators: Vec<UnitaryMatrix>,
}

impl GeneratorSet {
    pub fn new(label: impl Into<String>, generators: Vec<UnitaryMatrix>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::InvalidInput("generator set is empty".into()))?;
        let d = first.dim();
        if let Some(g) = generators.iter().find(|g| g.dim() != d) {
            return Err(Error::DimensionMismatch {
                left: d,
                right: g.dim(),
            });
        }
        Ok(GeneratorSet {
            label: label.into(),
            generators,
        })
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }
}

/// Quantized-projection hash over a slice of matrices stored elsewhere.
#[derive(Clone, Debug)]
struct ProjectionIndex {
    step: f64,
    dirs: Vec<[f64; N_PROJ]>,
    buckets: HashMap<[i64; N_PROJ], Vec<u32>>,
}

impl ProjectionIndex {
    fn new(d: usize, step: f64) -> Self {
        // Fixed seed: the directions only need to be generic, not random.
        let mut rng = seeded_rng(0x5eed_1dec);
        let n = 2 * d * d;
        let mut dirs = vec![[0.0; N_PROJ]; n];
        for p in 0..N_PROJ {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (row, x) in dirs.iter_mut().zip(&v) {
                row[p] = x / norm;
            }
        }
        ProjectionIndex {
            step,
            dirs,
            buckets: HashMap::new(),
        }
    }

    fn project(&self, m: &[C64]) -> [f64; N_PROJ] {
        let mut out = [0.0; N_PROJ];
        for (k, z) in m.iter().enumerate() {
            let re = &self.dirs[2 * k];
            let im = &self.dirs[2 * k + 1];
            for p in 0..N_PROJ {
                out[p] += z.re * re[p] + z.im * im[p];
            }
        }
        out
    }

    fn key(&self, m: &[C64]) -> [i64; N_PROJ] {
        self.project(m).map(|x| (x / self.step).floor() as i64)
    }

    fn insert(&mut self, m: &[C64], id: u32) {
        let key = self.key(m);
        self.buckets.entry(key).or_default().push(id);
    }

    /// Closest stored element within `tol` of `m`, with its distance.
    fn nearest(&self, elements: &[UnitaryMatrix], m: &[C64], tol: f64) -> Option<(usize, f64)> {
        debug_assert!(tol <= 0.5 * self.step);
        let proj = self.project(m);
        let mut options = [[0i64; 3]; N_PROJ];
        let mut counts = [0usize; N_PROJ];
        let rel = tol / self.step;
        for p in 0..N_PROJ {
            let v = proj[p] / self.step;
            let c = v.floor();
            let frac = v - c;
            let c = c as i64;
            options[p][0] = c;
            counts[p] = 1;
            if frac <= rel {
                options[p][counts[p]] = c - 1;
                counts[p] += 1;
            }
            if frac >= 1.0 - rel {
                options[p][counts[p]] = c + 1;
                counts[p] += 1;
            }
        }
        let total: usize = counts.iter().product();
        let mut best: Option<(usize, f64)> = None;
        for combo in 0..total {
            let mut key = [0i64; N_PROJ];
            let mut rest = combo;
            for p in 0..N_PROJ {
                key[p] = options[p][rest % counts[p]];
                rest /= counts[p];
            }
            let Some(ids) = self.buckets.get(&key) else {
                continue;
            };
            for &id in ids {
                let dist = frobenius_distance_slices(elements[id as usize].matrix().as_slice(), m);
                if dist <= tol && best.is_none_or(|(_, b)| dist < b) {
                    best = Some((id as usize, dist));
                }
            }
        }
        best
    }
}

/// Deduplicated element table of a finite subgroup of U(d).
#[derive(Debug)]
pub struct FiniteMatrixGroup {
    label: String,
    dim: usize,
    generators: Vec<UnitaryMatrix>,
    elements: Vec<UnitaryMatrix>,
    index: ProjectionIndex,
    coarse: OnceLock<ProjectionIndex>,
}

impl Clone for FiniteMatrixGroup {
    fn clone(&self) -> Self {
        FiniteMatrixGroup {
            label: self.label.clone(),
            dim: self.dim,
            generators: self.generators.clone(),
            elements: self.elements.clone(),
            index: self.index.clone(),
            coarse: OnceLock::new(),
        }
    }
}

/// Growing deduplicated set of matrices.
struct ElementTable {
    elements: Vec<UnitaryMatrix>,
    index: ProjectionIndex,
}

impl ElementTable {
    fn new(d: usize) -> Self {
        ElementTable {
            elements: Vec::new(),
            index: ProjectionIndex::new(d, FINE_STEP),
        }
    }

    /// Inserts `m` unless an equal element exists; returns whether it was new.
    fn insert(&mut self, m: UnitaryMatrix) -> Result<bool> {
        match self
            .index
            .nearest(&self.elements, m.matrix().as_slice(), SEPARATION_TOL)
        {
            Some((_, dist)) if dist <= SAME_ELEMENT_TOL => Ok(false),
            Some((_, distance)) => Err(Error::DedupAmbiguity { distance }),
            None => {
                let id = u32::try_from(self.elements.len())
                    .map_err(|_| Error::InvalidInput("too many elements".into()))?;
                self.index.insert(m.matrix().as_slice(), id);
                self.elements.push(m);
                Ok(true)
            }
        }
    }
}

/// Deduplicates a list of unitaries with the group tolerance regime.
pub(crate) fn dedup(
    d: usize,
    items: impl IntoIterator<Item = UnitaryMatrix>,
) -> Result<Vec<UnitaryMatrix>> {
    let mut table = ElementTable::new(d);
    for m in items {
        table.insert(m)?;
    }
    Ok(table.elements)
}

/// Breadth-first closure of `gens` under left multiplication.
pub fn close_group(gens: &GeneratorSet, max_order: usize) -> Result<FiniteMatrixGroup> {
    let d = gens.dim();
    let mut table = ElementTable::new(d);
    table.insert(UnitaryMatrix::identity(d))?;
    let mut queue = VecDeque::from([0usize]);
    let mut buf = vec![C64::new(0.0, 0.0); d * d];
    while let Some(i) = queue.pop_front() {
        for g in &gens.generators {
            mul_into(
                d,
                g.matrix().as_slice(),
                table.elements[i].matrix().as_slice(),
                &mut buf,
            );
            let candidate = CMatrix::from_fn(d, |r, c| buf[r * d + c]);
            if table.insert(UnitaryMatrix::from_trusted(candidate))? {
                let reached = table.elements.len();
                if reached > max_order {
                    return Err(Error::OrderExceeded { max_order, reached });
                }
                queue.push_back(reached - 1);
            }
        }
    }
    Ok(FiniteMatrixGroup {
        label: gens.label.clone(),
        dim: d,
        generators: gens.generators.clone(),
        elements: table.elements,
        index: table.index,
        coarse: OnceLock::new(),
    })
}

/// `a^-1 b^-1 a b`.
pub fn commutator(a: &UnitaryMatrix, b: &UnitaryMatrix) -> UnitaryMatrix {
    a.adjoint().mul(&b.adjoint()).mul(a).mul(b)
}

/// Derived subgroup: normal closure of the commutators of `m`'s generators.
pub fn commutator_subgroup(m: &FiniteMatrixGroup) -> Result<FiniteMatrixGroup> {
    commutator_subgroup_with_limit(m, DEFAULT_MAX_ORDER)
}

pub fn commutator_subgroup_with_limit(
    m: &FiniteMatrixGroup,
    max_order: usize,
) -> Result<FiniteMatrixGroup> {
    let d = m.dim;
    let label = format!("[{0},{0}]", m.label);
    let is_identity = |u: &UnitaryMatrix| {
        frobenius_distance_slices(u.matrix().as_slice(), CMatrix::identity(d).as_slice())
            <= SAME_ELEMENT_TOL
    };
    let mut gens: Vec<UnitaryMatrix> = Vec::new();
    for (i, a) in m.generators.iter().enumerate() {
        for b in &m.generators[i + 1..] {
            let c = commutator(a, b);
            if !is_identity(&c) {
                gens.push(c);
            }
        }
    }
    if gens.is_empty() {
        return close_group(
            &GeneratorSet::new(label, vec![UnitaryMatrix::identity(d)])?,
            max_order,
        );
    }
    loop {
        let h = close_group(&GeneratorSet::new(label.clone(), gens.clone())?, max_order)?;
        let mut added = false;
        for g in &m.generators {
            let gi = g.adjoint();
            let snapshot = gens.clone();
            for x in &snapshot {
                let conj = gi.mul(x).mul(g);
                if !h.contains(&conj, SAME_ELEMENT_TOL)
                    && !gens.iter().any(|y| {
                        frobenius_distance_slices(y.matrix().as_slice(), conj.matrix().as_slice())
                            <= SAME_ELEMENT_TOL
                    })
                {
                    gens.push(conj);
                    added = true;
                }
            }
        }
        if !added {
            return Ok(h);
        }
    }
}

impl FiniteMatrixGroup {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[UnitaryMatrix] {
        &self.elements
    }

    pub fn generators(&self) -> &[UnitaryMatrix] {
        &self.generators
    }

    /// Index of an element within Frobenius distance `tol` of `u`.
    pub fn find(&self, u: &UnitaryMatrix, tol: f64) -> Option<usize> {
        self.find_slice(u.matrix().as_slice(), tol)
    }

    fn find_slice(&self, m: &[C64], tol: f64) -> Option<usize> {
        if m.len() != self.dim * self.dim {
            return None;
        }
        let index = if tol <= 0.5 * FINE_STEP {
            &self.index
        } else {
            assert!(tol <= 0.5 * COARSE_STEP, "tolerance {tol} too large");
            self.coarse.get_or_init(|| {
                let mut idx = ProjectionIndex::new(self.dim, COARSE_STEP);
                for (i, e) in self.elements.iter().enumerate() {
                    idx.insert(e.matrix().as_slice(), i as u32);
                }
                idx
            })
        };
        index.nearest(&self.elements, m, tol).map(|(i, _)| i)
    }

    /// True iff some element lies within Frobenius distance `tol` of `u`.
    ///
    /// `tol` must lie in `[1e-9, 1e-2]`.
    pub fn contains(&self, u: &UnitaryMatrix, tol: f64) -> bool {
        assert!(
            (1e-9..=1e-2).contains(&tol),
            "tolerance {tol} outside [1e-9, 1e-2]"
        );
        self.find(u, tol).is_some()
    }

    /// Spot-checks closure: products and inverses of random pairs resolve to members.
    pub fn spot_check_closure(&self, samples: usize, seed: u64) -> bool {
        let mut rng = seeded_rng(seed);
        (0..samples).all(|_| {
            let a = &self.elements[rng.random_range(0..self.order())];
            let b = &self.elements[rng.random_range(0..self.order())];
            self.find(&a.mul(b), SAME_ELEMENT_TOL).is_some()
                && self.find(&a.adjoint(), SAME_ELEMENT_TOL).is_some()
        })
    }

    /// Builds a group from an explicit element list (e.g. a loaded file),
    /// re-checking separation and identity membership.
    pub fn from_elements(
        label: impl Into<String>,
        elements: Vec<UnitaryMatrix>,
        generators: Vec<UnitaryMatrix>,
    ) -> Result<Self> {
        let d = elements
            .first()
            .ok_or_else(|| Error::InvalidInput("group has no elements".into()))?
            .dim();
        let mut table = ElementTable::new(d);
        for e in elements {
            if e.dim() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: e.dim(),
                });
            }
            if !table.insert(e)? {
                return Err(Error::InvalidInput("duplicate group element".into()));
            }
        }
        if table
            .index
            .nearest(
                &table.elements,
                CMatrix::identity(d).as_slice(),
                SAME_ELEMENT_TOL,
            )
            .is_none()
        {
            return Err(Error::InvalidInput("identity is not a member".into()));
        }
        Ok(FiniteMatrixGroup {
            label: label.into(),
            dim: d,
            generators,
            elements: table.elements,
            index: table.index,
            coarse: OnceLock::new(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = GroupFile {
            label: self.label.clone(),
            d: self.dim,
            elements: self.elements.clone(),
            generators: self.generators.clone(),
        };
        let text = serde_json::to_string(&file)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: GroupFile = serde_json::from_str(&text)?;
        if file.elements.iter().any(|e| e.dim() != file.d) {
            return Err(Error::InvalidInput(format!(
                "group file declares d = {} but holds elements of another size",
                file.d
            )));
        }
        FiniteMatrixGroup::from_elements(file.label, file.elements, file.generators)
    }
}

/// On-disk group: `{"label", "d", "elements": [matrix...]}` plus the
/// generator list used to rebuild it.
#[derive(Serialize, Deserialize)]
struct GroupFile {
    label: String,
    d: usize,
    elements: Vec<UnitaryMatrix>,
    #[serde(default)]
    generators: Vec<UnitaryMatrix>,
}

/// `#{a in G : U0^H a U0 in G}`; the orbit `G U0 G` has `|G|^2 / s` points.
pub fn stabilizer_count(g: &FiniteMatrixGroup, u0: &UnitaryMatrix, tol: f64) -> usize {
    stabilizer_count_with(g, u0, tol, Strategy::default())
}

pub fn stabilizer_count_with(
    g: &FiniteMatrixGroup,
    u0: &UnitaryMatrix,
    tol: f64,
    strategy: Strategy,
) -> usize {
    assert!(
        (1e-9..=1e-2).contains(&tol),
        "tolerance {tol} outside [1e-9, 1e-2]"
    );
    let d = g.dim;
    assert_eq!(u0.dim(), d, "base point dimension");
    let u0h = u0.adjoint();
    par::chunked_sum(strategy, g.order(), par::DEFAULT_CHUNK, 0usize, |i| {
        let mut tmp = [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM];
        let mut conj = [C64::new(0.0, 0.0); MAX_DIM * MAX_DIM];
        let n = d * d;
        mul_into(
            d,
            u0h.matrix().as_slice(),
            g.elements[i].matrix().as_slice(),
            &mut tmp[..n],
        );
        mul_into(d, &tmp[..n], u0.matrix().as_slice(), &mut conj[..n]);
        usize::from(g.find_slice(&conj[..n], tol).is_some())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::haar_random;

    fn diag_sign_group() -> FiniteMatrixGroup {
        let g = UnitaryMatrix::new(CMatrix::diagonal(&[
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        ]))
        .unwrap();
        close_group(&GeneratorSet::new("z2", vec![g]).unwrap(), 100).unwrap()
    }

    #[test]
    fn trivial_group() {
        let g = close_group(
            &GeneratorSet::new("one", vec![UnitaryMatrix::identity(3)]).unwrap(),
            10,
        )
        .unwrap();
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn order_two() {
        let g = diag_sign_group();
        assert_eq!(g.order(), 2);
        assert!(g.contains(&UnitaryMatrix::identity(2), 1e-6));
        let c = commutator_subgroup(&g).unwrap();
        assert_eq!(c.order(), 1);
    }

    #[test]
    fn cyclic_group_order_and_limit() {
        let r = UnitaryMatrix::from_phases(&[2.0 * std::f64::consts::PI / 12.0]);
        let gens = GeneratorSet::new("c12", vec![r]).unwrap();
        assert_eq!(close_group(&gens, 100).unwrap().order(), 12);
        assert!(matches!(
            close_group(&gens, 5),
            Err(Error::OrderExceeded { max_order: 5, .. })
        ));
    }

    #[test]
    fn near_collision_is_reported() {
        // e^{i 2 pi / n} with huge n: successive powers are ~1e-5 apart.
        let r = UnitaryMatrix::from_phases(&[1e-5]);
        let gens = GeneratorSet::new("bad", vec![r]).unwrap();
        assert!(matches!(
            close_group(&gens, 100),
            Err(Error::DedupAmbiguity { .. })
        ));
    }

    #[test]
    fn membership_tolerances() {
        let g = diag_sign_group();
        let e = &g.elements()[1];
        let mut m = e.matrix().clone();
        m[(0, 1)] += C64::new(1e-8, 0.0);
        let perturbed = UnitaryMatrix::nearest(&m).unwrap();
        assert!(g.contains(e, 1e-6));
        assert!(g.contains(&perturbed, 1e-6));
        let mut rng = seeded_rng(3);
        assert!(!g.contains(&haar_random(2, &mut rng), 1e-6));
        assert!(!g.contains(&haar_random(2, &mut rng), 1e-2));
        assert!(!g.contains(&UnitaryMatrix::identity(3), 1e-6));
    }

    #[test]
    fn index_probing_finds_boundary_neighbours() {
        // Many random points; every point perturbed by < tol must still be found.
        let mut rng = seeded_rng(11);
        let pts: Vec<UnitaryMatrix> = (0..500).map(|_| haar_random(3, &mut rng)).collect();
        let g = FiniteMatrixGroup {
            label: "cloud".into(),
            dim: 3,
            generators: vec![],
            elements: pts.clone(),
            index: {
                let mut idx = ProjectionIndex::new(3, FINE_STEP);
                for (i, p) in pts.iter().enumerate() {
                    idx.insert(p.matrix().as_slice(), i as u32);
                }
                idx
            },
            coarse: OnceLock::new(),
        };
        for (i, p) in pts.iter().enumerate() {
            let h = crate::matcore::SkewHermitian::new(CMatrix::from_fn(3, |r, c| {
                if r == c {
                    C64::new(0.0, 2.5e-4 * ((i % 7) as f64 - 3.0) / 3.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }))
            .unwrap();
            let q = p.mul(&crate::matcore::matrix_exp(&h));
            assert_eq!(g.find(&q, 5e-4), Some(i));
            assert_eq!(g.find(&q, 8e-3), Some(i));
        }
    }

    #[test]
    fn generator_order_independence() {
        let a = UnitaryMatrix::new(
            CMatrix::from_rows(&[
                vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
                vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let b = UnitaryMatrix::from_phases(&[0.0, std::f64::consts::FRAC_PI_2]);
        let g1 = close_group(
            &GeneratorSet::new("x", vec![a.clone(), b.clone()]).unwrap(),
            1000,
        )
        .unwrap();
        let g2 = close_group(&GeneratorSet::new("x", vec![b, a]).unwrap(), 1000).unwrap();
        assert_eq!(g1.order(), g2.order());
        assert!(g1.elements().iter().all(|e| g2.contains(e, 1e-6)));
    }

    #[test]
    fn stabilizer_of_identity_is_everything() {
        let g = diag_sign_group();
        assert_eq!(stabilizer_count(&g, &UnitaryMatrix::identity(2), 1e-6), 2);
    }

    #[test]
    fn group_file_round_trip() {
        let g = diag_sign_group();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        g.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["label"], "z2");
        assert_eq!(v["d"], 2);
        assert_eq!(v["elements"].as_array().unwrap().len(), 2);
        let back = FiniteMatrixGroup::load(&path).unwrap();
        assert_eq!(back.order(), 2);
        assert_eq!(back.label(), "z2");
    }
}
