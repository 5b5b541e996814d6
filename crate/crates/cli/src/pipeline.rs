use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use design_forge::chars::{
    group_moment, haar_moment, list_phi, moment_value, search_mu_tilde, HighestWeight, MomentValue,
    MULTIPLICITY_TOL,
};
use design_forge::design::{
    export_design, orbit_rho_design_defect, orbit_strength_estimate, DesignOrbit, StrengthReport,
    SumOptions, DEFECT_TOL, REDUCED_SUM_BUDGET,
};
use design_forge::group::FiniteMatrixGroup;
use design_forge::invariant::{InvariantPolynomial, Submanifold};
use design_forge::matcore::{seeded_rng, UnitaryMatrix};
use design_forge::presets::{sl32_group, sp43_group};
use design_forge::zerofind::{find_bracket, find_zero, StepKind, Termination, ZeroFindOptions};
use serde::{Deserialize, Serialize};

use crate::config::{GroupSource, PipelineConfig, Preset};

pub const MANIFEST_SCHEMA: u32 = 1;
/// Phase of the central translation used to leave the log branch cut.
pub const ESCAPE_PHASE: f64 = 1.0;

/// A failed stage; the pipeline stops at the first one.
#[derive(Debug)]
pub struct PipelineError {
    pub stage: &'static str,
    pub source: anyhow::Error,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage `{}` failed: {:#}", self.stage, self.source)
    }
}

impl std::error::Error for PipelineError {}

trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, PipelineError>;
}

impl<T, E: Into<anyhow::Error>> StageExt<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError {
            stage,
            source: e.into(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub stage: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub d: usize,
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub t: u32,
    /// `M_{2t}` against the Haar value.
    pub design_moment: MomentValue,
    /// `M_{2(t+1)}` against the Haar value plus one.
    pub next_moment: MomentValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSummary {
    pub u0: UnitaryMatrix,
    pub f_value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub final_width: f64,
    pub termination: Termination,
    pub method_trace: Vec<StepKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub size: usize,
    pub stabilizer_count: usize,
    pub reduced_terms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: PipelineConfig,
    pub group: GroupSummary,
    pub moments: MomentSummary,
    pub mu_tilde: HighestWeight,
    /// Group averages of every nontrivial weight searched (empty when `mu` was given).
    pub mu_averages: Vec<(HighestWeight, f64)>,
    pub zero: ZeroSummary,
    pub orbit: OrbitSummary,
    pub strength: Option<StrengthReport>,
    /// Why the frame potentials were not computed, if they were not.
    pub strength_skipped: Option<String>,
    pub defects: Vec<(HighestWeight, f64)>,
    pub verdicts: Vec<Verdict>,
    /// Wall-clock seconds per stage; the only nondeterministic field.
    pub timings: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// The manifest with wall-clock fields cleared.
    pub fn without_timings(&self) -> Self {
        RunManifest {
            timings: BTreeMap::new(),
            ..self.clone()
        }
    }
}

pub fn load_group(src: &GroupSource) -> design_forge::Result<FiniteMatrixGroup> {
    match src {
        GroupSource::Preset(Preset::Sl32) => sl32_group(),
        GroupSource::Preset(Preset::Sp43) => sp43_group(),
        GroupSource::File(p) => FiniteMatrixGroup::load(p),
    }
}

struct Recorder {
    verdicts: Vec<Verdict>,
    timings: BTreeMap<String, f64>,
    clock: Instant,
}

impl Recorder {
    fn check(&mut self, stage: &str, check: &str, passed: bool, detail: String) {
        self.verdicts.push(Verdict {
            stage: stage.into(),
            check: check.into(),
            passed,
            detail,
        });
    }

    fn lap(&mut self, stage: &str) {
        self.timings
            .insert(stage.into(), self.clock.elapsed().as_secs_f64());
        self.clock = Instant::now();
    }
}

/// `group -> conditions -> mu_tilde -> find_zero -> orbit -> verify`, then
/// writes the design, base point and manifest when `out_dir` is set.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunManifest, PipelineError> {
    if let GroupSource::Preset(p) = &cfg.group {
        cfg.validate(p.dim()).stage("config")?;
    }
    let mut rec = Recorder {
        verdicts: Vec::new(),
        timings: BTreeMap::new(),
        clock: Instant::now(),
    };

    let group = load_group(&cfg.group).stage("group")?;
    cfg.validate(group.dim()).stage("config")?;
    let d = group.dim();
    if let GroupSource::Preset(p) = &cfg.group {
        let expected = p.expected_order();
        rec.check(
            "group",
            "order",
            group.order() == expected,
            format!("|G| = {}, expected {expected}", group.order()),
        );
    }
    let group = Arc::new(group);
    rec.lap("group");

    let design_moment = moment_value(&group, cfg.t);
    let next_moment = MomentValue {
        value: group_moment(&group, cfg.t + 1),
        target: haar_moment(cfg.t + 1, d) as f64 + 1.0,
        tolerance: MULTIPLICITY_TOL,
    };
    rec.check(
        "conditions",
        "t_group",
        design_moment.matches(),
        format!(
            "M_{} = {} (Haar {})",
            2 * cfg.t,
            design_moment.value,
            design_moment.target
        ),
    );
    rec.check(
        "conditions",
        "multiplicity",
        next_moment.matches(),
        format!(
            "M_{} = {} (need {})",
            2 * cfg.t + 2,
            next_moment.value,
            next_moment.target
        ),
    );
    rec.lap("conditions");

    let (mu, mu_averages) = match &cfg.mu {
        Some(mu) => (mu.clone(), Vec::new()),
        None => {
            let s = search_mu_tilde(&group, cfg.t).stage("mu_tilde")?;
            (s.mu_tilde, s.averages)
        }
    };
    rec.lap("mu_tilde");

    let f = InvariantPolynomial::new(group.clone(), mu.clone()).stage("find_zero")?;
    let sub = Submanifold::for_dim(cfg.blocks.clone(), d).stage("find_zero")?;
    let mut rng = seeded_rng(cfg.seed);
    let bracket = find_bracket(
        |u| f.eval_f(u),
        |r| sub.sample(r),
        &mut rng,
        cfg.bracket_tries,
    )
    .stage("find_zero")?;
    let options = ZeroFindOptions {
        eps: cfg.eps,
        max_iter: cfg.max_iter,
        escape: Some(f.central_translation(ESCAPE_PHASE)),
        ..Default::default()
    };
    let report = find_zero(|u| f.eval_f(u), bracket, &options).stage("find_zero")?;
    let f_value = f.eval_f(&report.zero).stage("find_zero")?;
    rec.check(
        "find_zero",
        "residual",
        f_value.abs() <= cfg.residual_tol,
        format!(
            "|f(U0)| = {:e}, bound {:e}",
            f_value.abs(),
            cfg.residual_tol
        ),
    );
    let zero = ZeroSummary {
        u0: report.zero.clone(),
        f_value,
        residual: report.residual,
        iterations: report.iterations,
        final_width: report.final_width,
        termination: report.termination,
        method_trace: report.method_trace(),
    };
    rec.lap("find_zero");

    let mut orbit = DesignOrbit::implicit(group.clone(), report.zero.clone()).stage("orbit")?;
    let orbit_summary = OrbitSummary {
        size: orbit.size(),
        stabilizer_count: orbit.stabilizer_count(),
        reduced_terms: orbit.reduced_terms(),
    };
    rec.lap("orbit");

    let target_strength = cfg.tmax.min(cfg.t + 1);
    let within_budget = orbit.reduced_terms() <= REDUCED_SUM_BUDGET;
    let (strength, strength_skipped) = if within_budget || cfg.full_orbit {
        let sum_options = SumOptions {
            checkpoint: cfg
                .checkpoint_dir
                .as_deref()
                .map(|dir| checkpoint_path(dir, &group, cfg.tmax)),
            ..Default::default()
        };
        let r = orbit_strength_estimate(&group, &report.zero, cfg.tmax, &sum_options)
            .stage("verify")?;
        rec.check(
            "verify",
            "strength",
            r.strength >= target_strength,
            format!(
                "frame potentials verify strength {}, need {target_strength}",
                r.strength
            ),
        );
        (Some(r), None)
    } else {
        let reason = format!(
            "{} orbit-sum terms exceed the budget of {REDUCED_SUM_BUDGET}; rerun with --full-orbit",
            orbit.reduced_terms()
        );
        let constructed =
            design_moment.matches() && next_moment.matches() && f_value.abs() <= cfg.residual_tol;
        rec.check(
            "verify",
            "design_by_construction",
            constructed,
            format!(
                "t-group, multiplicity and |f(U0)| checks imply a {}-design",
                cfg.t + 1
            ),
        );
        (None, Some(reason))
    };
    let mut defects = Vec::new();
    if within_budget {
        for m in list_phi(cfg.t + 1, d) {
            let v = orbit_rho_design_defect(&group, &report.zero, &m).stage("verify")?;
            defects.push((m, v));
        }
        let worst = defects.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        rec.check(
            "verify",
            "irrep_defects",
            worst <= DEFECT_TOL,
            format!("max |defect| over {} weights = {worst:e}", defects.len()),
        );
    }
    rec.lap("verify");

    let passed_residual = f_value.abs() <= cfg.residual_tol;
    orbit.set_claimed_strength(passed_residual.then_some(cfg.t + 1));
    orbit.set_report(strength.clone());

    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        group: GroupSummary {
            label: group.label().to_string(),
            d,
            order: group.order(),
        },
        moments: MomentSummary {
            t: cfg.t,
            design_moment,
            next_moment,
        },
        mu_tilde: mu,
        mu_averages,
        zero,
        orbit: orbit_summary,
        strength,
        strength_skipped,
        defects,
        verdicts: rec.verdicts,
        timings: rec.timings,
    };

    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir).stage("write")?;
        export_design(&orbit, dir.join("design.json"), false).stage("write")?;
        write_json(&dir.join("u0.json"), &manifest.zero.u0).stage("write")?;
        write_json(&dir.join("manifest.json"), &manifest).stage("write")?;
    }
    Ok(manifest)
}

/// `fp-<label>-t<tmax>.json` inside `dir`.
pub fn checkpoint_path(dir: &Path, group: &FiniteMatrixGroup, tmax: u32) -> PathBuf {
    let label: String = group
        .label()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    dir.join(format!("fp-{label}-t{tmax}.json"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))
}
