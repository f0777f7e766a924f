//! JSON and CSV views of catalogs, schedules and capacity reports.

use std::io;

use serde::{Deserialize, Serialize};

use sdnmig_core::tesim::StepCapacity;
use sdnmig_core::{
    availability_curve, AltPath, CapacityReport, MigrationSchedule, Mode, PathCatalog, PriorityMap,
    ScheduleConstraints,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    /// Alternative-path id; absent on the least-cost path of a pair.
    pub id: Option<usize>,
    pub nodes: Vec<String>,
    pub cost: f64,
    pub hop_len: usize,
    pub key_nodes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub src: String,
    pub dst: String,
    pub truncated: bool,
    pub paths: Vec<PathRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub nodes: Vec<String>,
    pub links: usize,
    pub alternative_paths: usize,
    pub truncated_pairs: usize,
    pub pairs: Vec<PairRecord>,
}

fn path_record(cat: &PathCatalog, p: &AltPath) -> PathRecord {
    let names =
        |v: &[sdnmig_core::NodeId]| v.iter().map(|&n| cat.node_name(n).to_string()).collect();
    PathRecord {
        id: p.id().map(|i| i.0),
        nodes: names(p.nodes()),
        cost: p.cost(),
        hop_len: p.hop_len(),
        key_nodes: names(p.key_nodes()),
    }
}

pub fn catalog_record(cat: &PathCatalog) -> CatalogRecord {
    CatalogRecord {
        nodes: cat.node_names().to_vec(),
        links: cat.link_count(),
        alternative_paths: cat.alt_count(),
        truncated_pairs: cat.truncated_pairs().count(),
        pairs: cat
            .pairs()
            .iter()
            .map(|pair| PairRecord {
                src: cat.node_name(pair.src()).to_string(),
                dst: cat.node_name(pair.dst()).to_string(),
                truncated: pair.truncated(),
                paths: pair.paths().iter().map(|p| path_record(cat, p)).collect(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpendRecord {
    pub spent: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub policy: String,
    pub mode: String,
    pub seed: Option<u64>,
    #[serde(rename = "T")]
    pub steps_count: usize,
    pub steps: Vec<Vec<String>>,
    pub objective: f64,
    pub availability_curve: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spend: Option<Vec<SpendRecord>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub proved: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub explored: Option<u64>,
}

pub fn schedule_record(
    cat: &PathCatalog,
    constraints: &ScheduleConstraints,
    schedule: &MigrationSchedule,
    priorities: &PriorityMap,
) -> ScheduleRecord {
    ScheduleRecord {
        policy: schedule.policy().as_str().to_string(),
        mode: match constraints.mode() {
            Mode::Count { .. } => "count".into(),
            Mode::Budget { .. } => "budget".into(),
        },
        seed: schedule.seed(),
        steps_count: schedule.horizon(),
        steps: schedule
            .steps()
            .iter()
            .map(|s| s.iter().map(|&n| cat.node_name(n).to_string()).collect())
            .collect(),
        objective: sdnmig_core::cumulative_objective(cat, schedule, priorities),
        availability_curve: availability_curve(cat, schedule),
        spend: schedule.spend().map(|s| {
            s.iter()
                .map(|x| SpendRecord {
                    spent: x.spent,
                    residual: x.residual,
                })
                .collect()
        }),
        proved: None,
        explored: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityRow {
    pub step: usize,
    pub cumulative_available: usize,
    pub objective_to_date: f64,
    pub spent: Option<f64>,
    pub residual: Option<f64>,
}

/// One row per step; `objective_to_date` sums the priority-weighted
/// availability of steps `1..=t`.
pub fn availability_rows(
    cat: &PathCatalog,
    schedule: &MigrationSchedule,
    priorities: &PriorityMap,
) -> Vec<AvailabilityRow> {
    let n = cat.node_count();
    let mut to_date = 0.0;
    (1..=schedule.horizon())
        .map(|t| {
            let available = cat.available_alt_paths(&schedule.migrated_by(t, n));
            to_date += available.iter().map(|&p| priorities.get(p)).sum::<f64>();
            let spend = schedule.spend().map(|s| s[t - 1]);
            AvailabilityRow {
                step: t,
                cumulative_available: available.len(),
                objective_to_date: to_date,
                spent: spend.map(|s| s.spent),
                residual: spend.map(|s| s.residual),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub step: usize,
    pub available_paths: f64,
    pub ospf_gbps: f64,
    pub te_gbps: f64,
    pub savings_gbps: f64,
    pub savings_pct: f64,
}

impl From<&StepCapacity> for CapacityRow {
    fn from(s: &StepCapacity) -> Self {
        CapacityRow {
            step: s.step,
            available_paths: s.available_paths as f64,
            ospf_gbps: s.ospf_gbps,
            te_gbps: s.te_gbps,
            savings_gbps: s.savings_gbps,
            savings_pct: s.savings_pct(),
        }
    }
}

pub fn capacity_rows(report: &CapacityReport) -> Vec<CapacityRow> {
    report.steps.iter().map(CapacityRow::from).collect()
}

/// Column-wise arithmetic mean of equally long row sets.
pub fn mean_rows(runs: &[Vec<CapacityRow>]) -> Vec<CapacityRow> {
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    let k = runs.len() as f64;
    (0..first.len())
        .map(|i| {
            let avg = |f: fn(&CapacityRow) -> f64| runs.iter().map(|r| f(&r[i])).sum::<f64>() / k;
            CapacityRow {
                step: first[i].step,
                available_paths: avg(|r| r.available_paths),
                ospf_gbps: avg(|r| r.ospf_gbps),
                te_gbps: avg(|r| r.te_gbps),
                savings_gbps: avg(|r| r.savings_gbps),
                savings_pct: avg(|r| r.savings_pct),
            }
        })
        .collect()
}

/// Serializes `rows` as comma-separated text with a header row. The header
/// is written even when `rows` is empty.
pub fn to_csv<R: Serialize>(rows: &[R], header: &[&str]) -> io::Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub const AVAILABILITY_HEADER: &[&str] = &[
    "step",
    "cumulative_available",
    "objective_to_date",
    "spent",
    "residual",
];
pub const CAPACITY_HEADER: &[&str] = &[
    "step",
    "available_paths",
    "ospf_gbps",
    "te_gbps",
    "savings_gbps",
    "savings_pct",
];

/// Reads a capacity CSV written by [`to_csv`].
pub fn read_capacity_csv(text: &str) -> Result<Vec<CapacityRow>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}
