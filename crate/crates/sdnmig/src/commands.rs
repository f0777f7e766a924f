//! The subcommands, as library functions that write into the output
//! directory and return a human-readable summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use sdnmig_core::exact::MAX_EXACT_NODES;
use sdnmig_core::rng::derive_seed;
use sdnmig_core::{
    build_catalog, build_ilp, generate_ospf_weights, greedy_schedule, migration_costs,
    optimal_schedule, random_schedule, savings_series, search_space_size, ExactError,
    MigrationSchedule, PathCatalog, PriorityMap, ScheduleConstraints, ScheduleError, SearchLimit,
    SimConfig, Topology, WeightedTopology,
};

use crate::config::{ConfigError, ExperimentConfig, ModeKind, PolicyKind};
use crate::export::{self, CapacityRow};
use crate::lp::export_lp;
use crate::sndlib::{parse_sndlib, ParseError};

const WEIGHT_STREAM: u64 = 1;
const TRAFFIC_STREAM: u64 = 2;
const BENCH_STREAM: u64 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("search limit reached: {0}")]
    Exhausted(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::Infeasible(_) => 4,
            CliError::Exhausted(_) => 5,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(ConfigError::Invalid(msg.into()))
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        match e {
            ScheduleError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            _ => invalid(e.to_string()),
        }
    }
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::Schedule(s) => s.into(),
            ExactError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            _ => invalid(e.to_string()),
        }
    }
}

/// Writes through a temporary sibling so readers never see partial files.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.into(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    write_atomic(path, &text)
}

fn csv_text<R: Serialize>(rows: &[R], header: &[&str]) -> String {
    export::to_csv(rows, header).expect("in-memory csv cannot fail")
}

/// Network named by the configuration: the parsed file, or the fixture.
pub enum Network {
    File {
        name: String,
        topology: Topology,
    },
    Fixture {
        name: String,
        weighted: WeightedTopology,
    },
}

impl Network {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        match &cfg.file {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                let topology = parse_sndlib(&text).map_err(|source| CliError::Parse {
                    path: path.clone(),
                    source,
                })?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                Ok(Network::File { name, topology })
            }
            None => sdnmig_core::fixtures::by_name(&cfg.fixture)
                .map(|weighted| Network::Fixture {
                    name: cfg.fixture.clone(),
                    weighted,
                })
                .ok_or_else(|| invalid(format!("unknown fixture `{}`", cfg.fixture))),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Network::File { name, .. } | Network::Fixture { name, .. } => name,
        }
    }

    pub fn topology(&self) -> &Topology {
        match self {
            Network::File { topology, .. } => topology,
            Network::Fixture { weighted, .. } => weighted.topology(),
        }
    }

    /// Fixtures keep their own weights; files get OSPF-consistent weights
    /// drawn from `seed`.
    pub fn weighted(&self, seed: u64) -> WeightedTopology {
        match self {
            Network::File { topology, .. } => {
                generate_ospf_weights(topology, derive_seed(seed, WEIGHT_STREAM))
            }
            Network::Fixture { weighted, .. } => weighted.clone(),
        }
    }
}

pub fn constraints(
    cfg: &ExperimentConfig,
    topology: &Topology,
) -> Result<ScheduleConstraints, CliError> {
    let n = topology.node_count();
    let c = match cfg.mode {
        ModeKind::Count => match cfg.per_step {
            Some(m) => ScheduleConstraints::count_with(cfg.steps, m)?,
            None => ScheduleConstraints::count(n, cfg.steps)?,
        },
        ModeKind::Budget => {
            let costs =
                migration_costs(topology, cfg.unit_cost).map_err(|e| invalid(e.to_string()))?;
            ScheduleConstraints::budget(cfg.steps, costs)?
        }
    };
    c.check(n)?;
    Ok(c)
}

pub fn priorities(cfg: &ExperimentConfig, cat: &PathCatalog) -> Result<PriorityMap, CliError> {
    let Some(path) = &cfg.priorities else {
        return Ok(PriorityMap::uniform(cat));
    };
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let weights: Vec<f64> =
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok(PriorityMap::from_weights(cat, weights)?)
}

/// A schedule plus the search statistics when it came from exact search.
pub struct PolicyRun {
    pub schedule: MigrationSchedule,
    pub search: Option<(bool, u64)>,
}

pub fn run_policy(
    cfg: &ExperimentConfig,
    policy: PolicyKind,
    cat: &PathCatalog,
    cons: &ScheduleConstraints,
    pri: &PriorityMap,
    seed: u64,
) -> Result<PolicyRun, CliError> {
    Ok(match policy {
        PolicyKind::Greedy => PolicyRun {
            schedule: greedy_schedule(cat, cons)?,
            search: None,
        },
        PolicyKind::Random => PolicyRun {
            schedule: random_schedule(cat.node_count(), cons, seed)?,
            search: None,
        },
        PolicyKind::Optimal => {
            let limit = SearchLimit {
                max_explored: cfg.search_limit,
            };
            let r = optimal_schedule(cat, cons, pri, limit)?;
            PolicyRun {
                schedule: r.schedule,
                search: Some((r.proved, r.explored)),
            }
        }
    })
}

pub fn cmd_paths(cfg: &ExperimentConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let net = Network::load(cfg)?;
    let w = net.weighted(cfg.seed);
    let cat = build_catalog(&w, cfg.path_cap);
    let path = cfg.out_dir().join("catalog.json");
    write_json(&path, &export::catalog_record(&cat))?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "network {}: {} nodes, {} links",
        net.name(),
        cat.node_count(),
        cat.link_count()
    );
    let _ = writeln!(
        s,
        "{} pairs, {} alternative paths, {} truncated pairs",
        cat.pairs().len(),
        cat.alt_count(),
        cat.truncated_pairs().count()
    );
    let _ = write!(s, "catalog written to {}", path.display());
    Ok(s)
}

pub fn cmd_schedule(cfg: &ExperimentConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let net = Network::load(cfg)?;
    let w = net.weighted(cfg.seed);
    let cat = build_catalog(&w, cfg.path_cap);
    let cons = constraints(cfg, w.topology())?;
    let pri = priorities(cfg, &cat)?;
    let run = run_policy(cfg, cfg.policy, &cat, &cons, &pri, cfg.seed)?;

    let mut record = export::schedule_record(&cat, &cons, &run.schedule, &pri);
    if let Some((proved, explored)) = run.search {
        record.proved = Some(proved);
        record.explored = Some(explored);
    }
    let tag = run.schedule.policy().as_str();
    let out = cfg.out_dir();
    let json = out.join(format!("schedule_{tag}.json"));
    let csv = out.join(format!("availability_{tag}.csv"));
    write_json(&json, &record)?;
    let rows = export::availability_rows(&cat, &run.schedule, &pri);
    write_atomic(&csv, &csv_text(&rows, export::AVAILABILITY_HEADER))?;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "policy {tag}, T={}, objective {}",
        record.steps_count, record.objective
    );
    let _ = writeln!(s, "availability {:?}", record.availability_curve);
    if let Some((proved, explored)) = run.search {
        let _ = writeln!(s, "proved={proved}, explored {explored}");
    }
    let _ = write!(s, "written {} and {}", json.display(), csv.display());
    match run.search {
        Some((false, explored)) => Err(CliError::Exhausted(format!(
            "best-found schedule after {explored} states, not proved optimal\n{s}"
        ))),
        _ => Ok(s),
    }
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let net = Network::load(cfg)?;
    let sim = SimConfig::from(&cfg.sim);
    let tag = sdnmig_core::Policy::from(cfg.policy).as_str();
    let out = cfg.out_dir();
    let mut runs = Vec::with_capacity(cfg.reps);
    for r in 0..cfg.reps {
        let rep_seed = cfg.seed.wrapping_add(r as u64);
        let w = net.weighted(rep_seed);
        let cat = build_catalog(&w, cfg.path_cap);
        let cons = constraints(cfg, w.topology())?;
        let pri = priorities(cfg, &cat)?;
        let run = run_policy(cfg, cfg.policy, &cat, &cons, &pri, rep_seed)?;
        if let Some((false, explored)) = run.search {
            return Err(CliError::Exhausted(format!(
                "repetition {r}: not proved optimal after {explored} states"
            )));
        }
        let report = savings_series(
            &w,
            &cat,
            &run.schedule,
            &sim,
            derive_seed(rep_seed, TRAFFIC_STREAM),
        )
        .map_err(|e| invalid(e.to_string()))?;
        let rows = export::capacity_rows(&report);
        let stem = out.join(format!("capacity_{tag}_rep{r}"));
        write_atomic(
            &stem.with_extension("csv"),
            &csv_text(&rows, export::CAPACITY_HEADER),
        )?;
        write_json(&stem.with_extension("json"), &rows)?;
        runs.push(rows);
    }
    let mean = export::mean_rows(&runs);
    let stem = out.join(format!("capacity_{tag}_mean"));
    write_atomic(
        &stem.with_extension("csv"),
        &csv_text(&mean, export::CAPACITY_HEADER),
    )?;
    write_json(&stem.with_extension("json"), &mean)?;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "network {}, policy {tag}, {} repetitions",
        net.name(),
        cfg.reps
    );
    for row in &mean {
        let _ = writeln!(
            s,
            "step {:>3}: ospf {:>10.1} Gbit/s, te {:>10.1} Gbit/s, savings {:>8.1} Gbit/s",
            row.step, row.ospf_gbps, row.te_gbps, row.savings_gbps
        );
    }
    let _ = write!(
        s,
        "mean written to {}",
        stem.with_extension("csv").display()
    );
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct BenchRow {
    pub policy: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub milliseconds: Option<f64>,
    pub explored: Option<u64>,
    pub proved: Option<bool>,
    pub search_space: Option<String>,
    pub note: Option<String>,
}

pub const BENCH_HEADER: &[&str] = &[
    "policy",
    "N",
    "milliseconds",
    "explored",
    "proved",
    "search_space",
    "note",
];

/// Random connected graph with about 1.66 links per node, the density of
/// the 65-node, 108-link backbone.
pub fn bench_topology(n: usize, seed: u64) -> Result<Topology, CliError> {
    let links = ((n as f64 * 108.0 / 65.0).round() as usize)
        .max(n.saturating_sub(1))
        .min(n * n.saturating_sub(1) / 2);
    Topology::random_connected(n, links, derive_seed(seed, BENCH_STREAM ^ (n as u64) << 8))
        .map_err(|e| invalid(format!("N={n}: {e}")))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

/// Greedy and exact timings over `sizes`. Exact search is skipped above
/// its node limit and reported unproved when the effort cap is hit.
pub fn bench_rows(
    cfg: &ExperimentConfig,
    sizes: &[usize],
    exact: bool,
) -> Result<Vec<BenchRow>, CliError> {
    let mut rows = Vec::new();
    for &n in sizes {
        let topo = bench_topology(n, cfg.seed)?;
        let w = generate_ospf_weights(&topo, derive_seed(cfg.seed, n as u64));
        let cat = build_catalog(&w, cfg.path_cap);
        let cons = constraints(cfg, &topo)?;
        let space = match cfg.mode {
            ModeKind::Count if cfg.per_step.is_none() => {
                search_space_size(n, cfg.steps).ok().map(|x| x.to_string())
            }
            _ => None,
        };
        let times = (0..cfg.bench_runs)
            .map(|_| {
                let start = Instant::now();
                let s = greedy_schedule(&cat, &cons);
                let ms = start.elapsed().as_secs_f64() * 1e3;
                s.map(|_| ms)
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(BenchRow {
            policy: "greedy".into(),
            n,
            milliseconds: Some(median(times)),
            explored: None,
            proved: None,
            search_space: space.clone(),
            note: None,
        });
        if !exact {
            continue;
        }
        if n > MAX_EXACT_NODES {
            rows.push(BenchRow {
                policy: "optimal".into(),
                n,
                milliseconds: None,
                explored: None,
                proved: None,
                search_space: space,
                note: Some(format!(
                    "skipped: exact search is limited to {MAX_EXACT_NODES} nodes"
                )),
            });
            continue;
        }
        let pri = PriorityMap::uniform(&cat);
        let limit = SearchLimit {
            max_explored: cfg.search_limit,
        };
        let start = Instant::now();
        let r = optimal_schedule(&cat, &cons, &pri, limit)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        rows.push(BenchRow {
            policy: "optimal".into(),
            n,
            milliseconds: Some(ms),
            explored: Some(r.explored),
            proved: Some(r.proved),
            search_space: space,
            note: (!r.proved)
                .then(|| format!("search limit of {} states reached", cfg.search_limit)),
        });
    }
    Ok(rows)
}

pub fn cmd_bench(cfg: &ExperimentConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let rows = bench_rows(cfg, &cfg.sizes, true)?;
    let path = cfg.out_dir().join("bench.csv");
    write_atomic(&path, &csv_text(&rows, BENCH_HEADER))?;
    let mut s = String::new();
    for r in &rows {
        let ms = r.milliseconds.map_or("-".into(), |m| format!("{m:.3} ms"));
        let _ = writeln!(
            s,
            "{:<8} N={:<4} {ms}{}",
            r.policy,
            r.n,
            r.note
                .as_deref()
                .map(|n| format!(" ({n})"))
                .unwrap_or_default()
        );
    }
    let _ = write!(s, "written {}", path.display());
    Ok(s)
}

pub fn cmd_ilp_export(cfg: &ExperimentConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let net = Network::load(cfg)?;
    let w = net.weighted(cfg.seed);
    let cat = build_catalog(&w, cfg.path_cap);
    let cons = constraints(cfg, w.topology())?;
    let pri = priorities(cfg, &cat)?;
    let ilp = build_ilp(&cat, &cons, &pri);
    let path = cfg.out_dir().join("model.lp");
    write_atomic(&path, &export_lp(&ilp))?;
    Ok(format!(
        "{} binary variables, {} constraints\nwritten {}",
        ilp.mu_count() + ilp.pi_count(),
        ilp.constraint_count(),
        path.display()
    ))
}

/// Reads the mean capacity CSV back, for checks on written output.
pub fn read_capacity(path: &Path) -> Result<Vec<CapacityRow>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    export::read_capacity_csv(&text).map_err(|e| invalid(e.to_string()))
}
