use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use design_forge::chars::{
    group_moment, haar_moment, moment_value, search_mu_tilde, HighestWeight, MomentValue,
    MULTIPLICITY_TOL,
};
use design_forge::design::{
    export_design, import_design, orbit_strength_estimate, DesignOrbit, SumOptions,
    REDUCED_SUM_BUDGET,
};
use design_forge::group::FiniteMatrixGroup;
use design_forge::invariant::{
    emit_torus_curve, invariant_torus_zeros, zeros_path, InvariantPolynomial, Submanifold,
};
use design_forge::matcore::{seeded_rng, UnitaryMatrix};
use design_forge::presets::sl32_group;
use design_forge::zerofind::{find_bracket, find_zero, ZeroFindOptions};
use serde::Serialize;
use serde_json::json;

use crate::config::{GroupSource, PipelineConfig, Preset};
use crate::pipeline::{checkpoint_path, load_group, run_pipeline, write_json, ESCAPE_PHASE};

#[derive(Debug, Parser)]
#[command(
    name = "design-forge",
    version,
    about = "Exact unitary (t+1)-designs from unitary t-groups"
)]
pub struct Cli {
    /// Worker threads for the data-parallel sums (default: available parallelism).
    #[arg(long, global = true, env = "DESIGN_FORGE_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct GroupArgs {
    /// Built-in group.
    #[arg(long, value_enum, conflicts_with = "group")]
    pub preset: Option<Preset>,
    /// Group file written by `gen-group`.
    #[arg(long)]
    pub group: Option<PathBuf>,
}

impl GroupArgs {
    fn source(&self) -> Result<GroupSource> {
        match (&self.preset, &self.group) {
            (Some(p), None) => Ok(GroupSource::Preset(*p)),
            (None, Some(path)) => Ok(GroupSource::File(path.clone())),
            _ => bail!("give exactly one of --preset or --group"),
        }
    }

    /// `t` from the flag, or the preset's own value.
    fn t(&self, t: Option<u32>) -> Result<u32> {
        match (t, self.preset) {
            (Some(t), _) => Ok(t),
            (None, Some(p)) => Ok(PipelineConfig::preset(p).t),
            (None, None) => bail!("--t is required for groups read from a file"),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a group (closure and derived subgroup) and save it as JSON.
    GenGroup {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Check the t-group and multiplicity conditions and search for the invariant weight.
    CheckConditions {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        t: Option<u32>,
        #[arg(long)]
        json: bool,
    },
    /// Find a zero of the invariant polynomial on a block-diagonal submanifold.
    FindZero {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        t: Option<u32>,
        /// Weight such as 4,0,0,-4 (default: the searched invariant weight).
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<HighestWeight>,
        #[arg(long, value_delimiter = ',')]
        blocks: Option<Vec<usize>>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        residual_tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Record the orbit of a base point as a design file.
    BuildDesign {
        #[command(flatten)]
        group: GroupArgs,
        /// Base point: a matrix file or a `find-zero` report.
        #[arg(long)]
        u0: PathBuf,
        #[arg(long)]
        t: Option<u32>,
        #[arg(long)]
        residual_tol: Option<f64>,
        /// Also store the deduplicated orbit points.
        #[arg(long)]
        materialize: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Compute frame potentials of a design file up to --tmax.
    Verify {
        #[arg(long)]
        design: PathBuf,
        #[arg(long, default_value_t = 4)]
        tmax: u32,
        /// Run the orbit sums even when they exceed the default budget.
        #[arg(long)]
        full_orbit: bool,
        #[arg(long)]
        checkpoint_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        residual_tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Write the diagonal-torus condition grid and its zero curve as CSV.
    Curve {
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also refine zeros of the SL(3,2) invariant itself.
        #[arg(long)]
        with_invariant: bool,
    },
    /// Evaluate the invariant polynomial at a point.
    EvalF {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        t: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<HighestWeight>,
        #[arg(long)]
        u0: PathBuf,
        /// Also evaluate the double sum over G x G.
        #[arg(long)]
        naive: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run every stage and write a manifest.
    Run(RunArgs),
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// Pipeline configuration JSON; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub group: GroupArgs,
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<HighestWeight>,
    #[arg(long, value_delimiter = ',')]
    pub blocks: Option<Vec<usize>>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tmax: Option<u32>,
    #[arg(long)]
    pub full_orbit: bool,
    #[arg(long)]
    pub residual_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint_dir: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

impl RunArgs {
    pub fn to_config(&self) -> Result<PipelineConfig> {
        let mut cfg = if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<PipelineConfig>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        } else {
            match self.group.source()? {
                GroupSource::Preset(p) => PipelineConfig::preset(p),
                GroupSource::File(path) => {
                    let d = FiniteMatrixGroup::load(&path)?.dim();
                    let t = self
                        .t
                        .ok_or_else(|| anyhow!("--t is required for groups read from a file"))?;
                    PipelineConfig::custom(path, d, t)
                }
            }
        };
        if self.config.is_some() && (self.group.preset.is_some() || self.group.group.is_some()) {
            cfg.group = self.group.source()?;
        }
        if let Some(t) = self.t {
            cfg.t = t;
        }
        if self.mu.is_some() {
            cfg.mu = self.mu.clone();
        }
        if let Some(b) = &self.blocks {
            cfg.blocks = b.clone();
        }
        if let Some(e) = self.eps {
            cfg.eps = e;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.tmax {
            cfg.tmax = t;
        }
        if self.full_orbit {
            cfg.full_orbit = true;
        }
        if let Some(r) = self.residual_tol {
            cfg.residual_tol = r;
        }
        if self.out.is_some() {
            cfg.out_dir = self.out.clone();
        }
        if self.checkpoint_dir.is_some() {
            cfg.checkpoint_dir = self.checkpoint_dir.clone();
        }
        Ok(cfg)
    }
}

fn configure_workers(workers: Option<usize>) -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Some(n) = workers {
        if n == 0 {
            bail!("--workers must be positive");
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    Ok(())
}

fn print<T: Serialize>(json: bool, value: &T, human: impl FnOnce() -> String) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        println!("{}", human());
    }
    Ok(())
}

/// Reads a base point from a bare matrix file or any JSON object holding it under `u0`.
pub fn read_u0(path: &Path) -> Result<UnitaryMatrix> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let m = match value.get("u0") {
        Some(inner) => inner.clone(),
        None => value,
    };
    serde_json::from_value(m).with_context(|| format!("{} holds no unitary matrix", path.display()))
}

fn invariant_for(
    group: Arc<FiniteMatrixGroup>,
    args: &GroupArgs,
    t: Option<u32>,
    mu: Option<HighestWeight>,
) -> Result<InvariantPolynomial> {
    let mu = match mu {
        Some(mu) => mu,
        None => search_mu_tilde(&group, args.t(t)?)?.mu_tilde,
    };
    Ok(InvariantPolynomial::new(group, mu)?)
}

fn default_residual_tol(args: &GroupArgs) -> f64 {
    args.preset
        .map_or(1e-8, |p| PipelineConfig::preset(p).residual_tol)
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    configure_workers(cli.workers)?;
    match cli.command {
        Command::GenGroup { group, out, json } => {
            let g = load_group(&group.source()?)?;
            if let Some(out) = &out {
                g.save(out)?;
            }
            let summary = json!({"label": g.label(), "d": g.dim(), "order": g.order()});
            print(json, &summary, || {
                format!("{}: order {} in U({})", g.label(), g.order(), g.dim())
            })?;
            Ok(0)
        }
        Command::CheckConditions { group, t, json } => {
            let t = group.t(t)?;
            let g = load_group(&group.source()?)?;
            let design = moment_value(&g, t);
            let next = MomentValue {
                value: group_moment(&g, t + 1),
                target: haar_moment(t + 1, g.dim()) as f64 + 1.0,
                tolerance: MULTIPLICITY_TOL,
            };
            let search = search_mu_tilde(&g, t);
            let ok = design.matches() && next.matches() && search.is_ok();
            let report = json!({
                "group": g.label(), "order": g.order(), "t": t,
                "design_moment": design, "next_moment": next,
                "mu_tilde": search.as_ref().ok().map(|s| s.mu_tilde.to_string()),
                "averages": search.as_ref().ok().map(|s| &s.averages),
                "error": search.as_ref().err().map(|e| e.to_string()),
                "passed": ok,
            });
            print(json, &report, || {
                let mut s = format!(
                    "M_{} = {:.12} (Haar {})\nM_{} = {:.12} (need {})\n",
                    2 * t,
                    design.value,
                    design.target,
                    2 * t + 2,
                    next.value,
                    next.target
                );
                match &search {
                    Ok(r) => s.push_str(&format!("invariant weight {}", r.mu_tilde)),
                    Err(e) => s.push_str(&format!("no invariant weight: {e}")),
                }
                s
            })?;
            Ok(if ok { 0 } else { 1 })
        }
        Command::FindZero {
            group,
            t,
            mu,
            blocks,
            eps,
            seed,
            residual_tol,
            out,
            json,
        } => {
            let g = Arc::new(load_group(&group.source()?)?);
            let d = g.dim();
            let defaults = group.preset.map(PipelineConfig::preset);
            let blocks = blocks
                .or_else(|| defaults.as_ref().map(|c| c.blocks.clone()))
                .unwrap_or_else(|| vec![d]);
            let eps = eps
                .or_else(|| defaults.as_ref().map(|c| c.eps))
                .unwrap_or(1e-10);
            let seed = seed
                .or_else(|| defaults.as_ref().map(|c| c.seed))
                .unwrap_or(1);
            let tol = residual_tol.unwrap_or_else(|| default_residual_tol(&group));
            if !(1e-15..=1e-2).contains(&eps) {
                bail!("eps must lie in [1e-15, 1e-2], got {eps:e}");
            }
            let f = invariant_for(g, &group, t, mu)?;
            let sub = Submanifold::for_dim(blocks.clone(), d)?;
            let mut rng = seeded_rng(seed);
            let bracket = find_bracket(|u| f.eval_f(u), |r| sub.sample(r), &mut rng, 1000)?;
            let options = ZeroFindOptions {
                eps,
                escape: Some(f.central_translation(ESCAPE_PHASE)),
                ..Default::default()
            };
            let rep = find_zero(|u| f.eval_f(u), bracket, &options)?;
            let f_value = f.eval_f(&rep.zero)?;
            let report = json!({
                "u0": rep.zero, "mu": f.weight(), "blocks": blocks, "eps": eps, "seed": seed,
                "f_value": f_value, "residual": rep.residual, "iterations": rep.iterations,
                "final_width": rep.final_width, "termination": rep.termination,
                "method_trace": rep.method_trace(),
            });
            if let Some(out) = &out {
                write_json(out, &report)?;
            }
            print(json, &report, || {
                format!(
                    "|f(U0)| = {:e} after {} iterations ({:?}, width {:e})",
                    f_value.abs(),
                    rep.iterations,
                    rep.termination,
                    rep.final_width
                )
            })?;
            Ok(if f_value.abs() <= tol { 0 } else { 1 })
        }
        Command::BuildDesign {
            group,
            u0,
            t,
            residual_tol,
            materialize,
            out,
            json,
        } => {
            let g = Arc::new(load_group(&group.source()?)?);
            let base = read_u0(&u0)?;
            let t = group.t(t)?;
            let f = invariant_for(g.clone(), &group, Some(t), None)?;
            let f_value = f.eval_f(&base)?;
            let tol = residual_tol.unwrap_or_else(|| default_residual_tol(&group));
            let mut orbit = DesignOrbit::implicit(g, base)?;
            if materialize {
                orbit.materialize()?;
            }
            orbit.set_claimed_strength((f_value.abs() <= tol).then_some(t + 1));
            export_design(&orbit, &out, materialize)?;
            let summary = json!({
                "size": orbit.size(), "stabilizer_count": orbit.stabilizer_count(),
                "f_value": f_value, "claimed_strength": orbit.claimed_strength(),
            });
            print(json, &summary, || {
                format!(
                    "orbit of {} points (stabilizer {}), |f(U0)| = {:e}",
                    orbit.size(),
                    orbit.stabilizer_count(),
                    f_value.abs()
                )
            })?;
            Ok(if orbit.claimed_strength().is_some() {
                0
            } else {
                1
            })
        }
        Command::Verify {
            design,
            tmax,
            full_orbit,
            checkpoint_dir,
            residual_tol,
            json,
        } => {
            let mut orbit = import_design(&design)?;
            let g = orbit.group().clone();
            let claimed = orbit.claimed_strength();
            if orbit.reduced_terms() <= REDUCED_SUM_BUDGET || full_orbit {
                let options = SumOptions {
                    checkpoint: checkpoint_dir
                        .as_deref()
                        .map(|dir| checkpoint_path(dir, &g, tmax)),
                    ..Default::default()
                };
                let report = orbit_strength_estimate(&g, orbit.base(), tmax, &options)?;
                let required = claimed.unwrap_or(0).min(tmax);
                let ok = report.strength >= required;
                orbit.set_report(Some(report.clone()));
                export_design(&orbit, &design, orbit.elements().is_some())?;
                print(
                    json,
                    &json!({"report": report, "claimed_strength": claimed, "passed": ok}),
                    || {
                        let mut s = String::new();
                        for e in &report.entries {
                            s.push_str(&format!(
                                "t = {}: frame potential {:.12} (Haar {}) {}\n",
                                e.t,
                                e.frame_potential,
                                e.haar_target,
                                if e.is_design {
                                    "design"
                                } else {
                                    "not a design"
                                }
                            ));
                        }
                        s.push_str(&format!("verified strength {}", report.strength));
                        s
                    },
                )?;
                Ok(if ok { 0 } else { 1 })
            } else {
                let t = claimed
                    .and_then(|c| c.checked_sub(1))
                    .filter(|t| *t >= 1)
                    .ok_or_else(|| {
                        anyhow!("orbit sums exceed the budget and the design claims no strength")
                    })?;
                let f = InvariantPolynomial::new(g.clone(), search_mu_tilde(&g, t)?.mu_tilde)?;
                let f_value = f.eval_f(orbit.base())?;
                let ok = f_value.abs() <= residual_tol;
                print(
                    json,
                    &json!({"f_value": f_value, "claimed_strength": claimed, "passed": ok,
                            "skipped": format!("{} orbit-sum terms exceed {REDUCED_SUM_BUDGET}; use --full-orbit", orbit.reduced_terms())}),
                    || {
                        format!(
                            "orbit sums skipped; |f(U0)| = {:e} supports strength {}",
                            f_value.abs(),
                            t + 1
                        )
                    },
                )?;
                Ok(if ok { 0 } else { 1 })
            }
        }
        Command::Curve {
            grid,
            out,
            with_invariant,
        } => {
            let curve = emit_torus_curve(grid, &out)?;
            println!(
                "{} grid points to {}, {} zero points to {}",
                curve.grid.len(),
                out.display(),
                curve.zeros.len(),
                zeros_path(&out).display()
            );
            if with_invariant {
                let f = InvariantPolynomial::new(Arc::new(sl32_group()?), "3,0,-3".parse()?)?;
                let zeros = invariant_torus_zeros(&f, grid)?;
                let path = invariant_zeros_path(&out);
                let mut text = String::from("u,v,f\n");
                for z in &zeros {
                    text.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", z.u, z.v, z.lhs));
                }
                std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
                println!(
                    "{} invariant zero points to {}",
                    zeros.len(),
                    path.display()
                );
            }
            Ok(0)
        }
        Command::EvalF {
            group,
            t,
            mu,
            u0,
            naive,
            json,
        } => {
            let g = Arc::new(load_group(&group.source()?)?);
            let f = invariant_for(g, &group, t, mu)?;
            let u = read_u0(&u0)?;
            let value = f.eval_f(&u)?;
            let naive_value = if naive {
                Some(f.eval_f_naive(&u)?)
            } else {
                None
            };
            print(
                json,
                &json!({"mu": f.weight(), "f": value, "f_naive": naive_value}),
                || match naive_value {
                    Some(n) => format!("f = {value:.17e} (double sum {n:.17e})"),
                    None => format!("f = {value:.17e}"),
                },
            )?;
            Ok(0)
        }
        Command::Run(args) => {
            let cfg = args.to_config()?;
            let manifest = run_pipeline(&cfg)?;
            print(args.json, &manifest, || {
                let mut s = String::new();
                for v in &manifest.verdicts {
                    s.push_str(&format!(
                        "[{}] {}/{}: {}\n",
                        if v.passed { "pass" } else { "FAIL" },
                        v.stage,
                        v.check,
                        v.detail
                    ));
                }
                s.push_str(&format!(
                    "orbit size {} (stabilizer {}), invariant weight {}",
                    manifest.orbit.size, manifest.orbit.stabilizer_count, manifest.mu_tilde
                ));
                s
            })?;
            Ok(manifest.exit_code())
        }
    }
}

/// `<stem>.invariant-zeros.csv` next to a curve CSV.
pub fn invariant_zeros_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "curve".into());
    out.with_file_name(format!("{stem}.invariant-zeros.csv"))
}
