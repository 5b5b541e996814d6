use std::fmt;
use std::path::PathBuf;

use design_forge::chars::HighestWeight;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Sl32,
    Sp43,
}

impl Preset {
    pub fn dim(self) -> usize {
        match self {
            Preset::Sl32 => 3,
            Preset::Sp43 => 4,
        }
    }

    pub fn expected_order(self) -> usize {
        match self {
            Preset::Sl32 => 168,
            Preset::Sp43 => 51840,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Sl32 => "sl32",
            Preset::Sp43 => "sp43",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSource {
    Preset(Preset),
    File(PathBuf),
}

/// Everything a pipeline run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub group: GroupSource,
    /// The group is a unitary `t`-group; the orbit is checked as a `(t+1)`-design.
    pub t: u32,
    /// Weight of the invariant polynomial; searched for when absent.
    #[serde(default)]
    pub mu: Option<HighestWeight>,
    pub blocks: Vec<usize>,
    pub eps: f64,
    pub seed: u64,
    pub tmax: u32,
    #[serde(default)]
    pub full_orbit: bool,
    /// Bound on `|f(U0)|` for the zero-finding verdict.
    pub residual_tol: f64,
    pub max_iter: usize,
    pub bracket_tries: usize,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub checkpoint_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl PipelineConfig {
    /// Defaults for a preset.
    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::Sl32 => PipelineConfig {
                group: GroupSource::Preset(p),
                t: 2,
                mu: None,
                blocks: vec![1, 1, 1],
                eps: 1e-15,
                seed: 1,
                tmax: 4,
                full_orbit: false,
                residual_tol: 1e-12,
                max_iter: 200,
                bracket_tries: 1000,
                out_dir: None,
                checkpoint_dir: None,
            },
            Preset::Sp43 => PipelineConfig {
                group: GroupSource::Preset(p),
                t: 3,
                mu: None,
                blocks: vec![2, 2],
                eps: 1e-6,
                seed: 7,
                tmax: 4,
                full_orbit: false,
                residual_tol: 1e-8,
                max_iter: 200,
                bracket_tries: 1000,
                out_dir: None,
                checkpoint_dir: None,
            },
        }
    }

    /// Defaults for a group read from a file of dimension `d`.
    pub fn custom(path: PathBuf, d: usize, t: u32) -> Self {
        PipelineConfig {
            group: GroupSource::File(path),
            t,
            mu: None,
            blocks: vec![d],
            eps: 1e-10,
            seed: 1,
            tmax: t + 1,
            full_orbit: false,
            residual_tol: 1e-8,
            max_iter: 200,
            bracket_tries: 1000,
            out_dir: None,
            checkpoint_dir: None,
        }
    }

    /// Checks the invariants that do not need the group itself; `d` is the
    /// group dimension.
    pub fn validate(&self, d: usize) -> Result<(), ConfigError> {
        if self.t < 1 {
            return Err(ConfigError(format!("t must be at least 1, got {}", self.t)));
        }
        if !(1e-15..=1e-2).contains(&self.eps) {
            return Err(ConfigError(format!(
                "eps must lie in [1e-15, 1e-2], got {:e}",
                self.eps
            )));
        }
        if self.blocks.is_empty() || self.blocks.contains(&0) {
            return Err(ConfigError(format!(
                "block sizes must be positive, got {:?}",
                self.blocks
            )));
        }
        let sum: usize = self.blocks.iter().sum();
        if sum != d {
            return Err(ConfigError(format!(
                "block sizes {:?} sum to {sum}, but the group acts on dimension {d}",
                self.blocks
            )));
        }
        if !(1..=design_forge::design::MAX_STRENGTH_T).contains(&self.tmax) {
            return Err(ConfigError(format!(
                "tmax must lie in 1..={}, got {}",
                design_forge::design::MAX_STRENGTH_T,
                self.tmax
            )));
        }
        if let Some(mu) = &self.mu {
            if mu.dim() != d {
                return Err(ConfigError(format!(
                    "weight {mu} has length {} but d = {d}",
                    mu.dim()
                )));
            }
            if !mu.is_self_dual() {
                return Err(ConfigError(format!("weight {mu} is not self-dual")));
            }
        }
        if self.residual_tol.is_nan() || self.residual_tol <= 0.0 {
            return Err(ConfigError("residual_tol must be positive".into()));
        }
        if self.max_iter == 0 || self.bracket_tries == 0 {
            return Err(ConfigError(
                "max_iter and bracket_tries must be positive".into(),
            ));
        }
        Ok(())
    }
}
