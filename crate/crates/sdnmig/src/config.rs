//! Experiment configuration: a JSON file whose fields command-line flags
//! may override.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sdnmig_core::{Policy, SimConfig};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SDNMIG_OUT";
const DEFAULT_OUT: &str = "sdnmig-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Count,
    Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Greedy,
    Random,
    Optimal,
}

impl From<PolicyKind> for Policy {
    fn from(p: PolicyKind) -> Self {
        match p {
            PolicyKind::Greedy => Policy::Greedy,
            PolicyKind::Random => Policy::Random,
            PolicyKind::Optimal => Policy::Optimal,
        }
    }
}

/// Simulation knobs in file form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub headroom: f64,
    pub granularities_gbps: Vec<f64>,
    pub growth: (f64, f64),
    pub sweeps: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        let d = SimConfig::default();
        SimSettings {
            headroom: d.headroom,
            granularities_gbps: d.granularities_gbps,
            growth: d.growth,
            sweeps: d.sweeps,
        }
    }
}

impl From<&SimSettings> for SimConfig {
    fn from(s: &SimSettings) -> Self {
        SimConfig {
            headroom: s.headroom,
            granularities_gbps: s.granularities_gbps.clone(),
            growth: s.growth,
            sweeps: s.sweeps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// SNDlib network file. Takes precedence over `fixture`.
    pub file: Option<PathBuf>,
    /// Built-in topology, used when no file is given.
    pub fixture: String,
    pub seed: u64,
    #[serde(rename = "T")]
    pub steps: usize,
    pub mode: ModeKind,
    /// Count-mode nodes per step; `ceil(N/T)` when absent.
    pub per_step: Option<usize>,
    pub unit_cost: f64,
    pub policy: PolicyKind,
    /// JSON array of path priorities in alternative-path id order.
    pub priorities: Option<PathBuf>,
    pub sim: SimSettings,
    pub reps: usize,
    pub out: Option<PathBuf>,
    pub path_cap: usize,
    pub search_limit: u64,
    /// Network sizes for `bench`.
    pub sizes: Vec<usize>,
    /// Timed repetitions per greedy measurement in `bench`.
    pub bench_runs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            file: None,
            fixture: "fig2".into(),
            seed: 1,
            steps: 10,
            mode: ModeKind::Count,
            per_step: None,
            unit_cost: 1.0,
            policy: PolicyKind::Greedy,
            priorities: None,
            sim: SimSettings::default(),
            reps: 10,
            out: None,
            path_cap: sdnmig_core::pathcat::DEFAULT_PATH_CAP,
            search_limit: sdnmig_core::SearchLimit::default().max_explored,
            sizes: vec![20, 40, 60, 80],
            bench_runs: 5,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.into(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Json {
            path: path.into(),
            source,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.steps == 0 {
            return bad("T must be at least 1".into());
        }
        if !(self.unit_cost.is_finite() && self.unit_cost > 0.0) {
            return bad(format!("unit cost {} must be positive", self.unit_cost));
        }
        if self.path_cap == 0 {
            return bad("path cap must be positive".into());
        }
        if self.bench_runs == 0 {
            return bad("bench runs must be at least 1".into());
        }
        for f in self.file.iter().chain(&self.priorities) {
            if !f.is_file() {
                return bad(format!("file {} does not exist", f.display()));
            }
        }
        if self.file.is_none() && sdnmig_core::fixtures::by_name(&self.fixture).is_none() {
            return bad(format!("unknown fixture `{}`", self.fixture));
        }
        SimConfig::from(&self.sim)
            .validate()
            .or_else(|e| bad(e.to_string()))
    }

    /// `out`, else `$SDNMIG_OUT`, else `./sdnmig-out`.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }
}
