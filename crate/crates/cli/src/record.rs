//! Run records: deterministic result payloads plus provenance metadata,
//! with CSV and JSON emission.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pass_sensing::protocols::{ProblemKind, ProtocolSolution};

/// Deterministic portion of a run: re-running the same config and seed
/// reproduces every field bit-for-bit, at any worker-thread count.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunResult {
    pub protocol: String,
    pub problem: String,
    /// Placement method: "pass", "uniform", "centered", "fpa-bcd".
    pub method: String,
    /// Per-slot PA layouts (PS) or a single shared layout (PM), meters.
    pub layouts_m: Vec<Vec<f64>>,
    /// Steering phases for FPA runs (radians); empty otherwise.
    pub phases_rad: Vec<Vec<f64>>,
    pub powers_w: Vec<f64>,
    pub bcrbs_m2: Vec<f64>,
    /// Total power (W) for power-min, worst-case BCRB (m^2) for min-max.
    pub objective: f64,
    /// Equalized min-max level, m^2.
    pub level_m2: Option<f64>,
    /// Per-iteration objective traces (omitted unless tracing is enabled).
    pub traces: Vec<Vec<f64>>,
}

/// One run: provenance plus the deterministic result. Wall time is
/// informational and excluded from reproducibility comparisons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub seed: u64,
    pub rng: String,
    pub result: RunResult,
    pub wall_time_ms: f64,
}

impl RunResult {
    pub fn from_solution(solution: &ProtocolSolution, method: &str, keep_traces: bool) -> Self {
        RunResult {
            protocol: solution.protocol.as_str().to_string(),
            problem: match solution.problem {
                ProblemKind::PowerMin => "power-min".to_string(),
                ProblemKind::MinMax => "min-max".to_string(),
            },
            method: method.to_string(),
            layouts_m: solution
                .layouts
                .iter()
                .map(|l| l.positions().to_vec())
                .collect(),
            phases_rad: solution.phases.clone(),
            powers_w: solution.powers.clone(),
            bcrbs_m2: solution.bcrbs.clone(),
            objective: solution.objective,
            level_m2: solution.level,
            traces: if keep_traces {
                solution.traces.clone()
            } else {
                Vec::new()
            },
        }
    }

    pub fn max_root_bcrb_m(&self) -> f64 {
        self.bcrbs_m2
            .iter()
            .fold(0.0f64, |a, &b| a.max(b))
            .sqrt()
    }

    pub fn total_power_w(&self) -> f64 {
        self.powers_w.iter().sum()
    }

    /// Digest of the canonical serialization; equal digests mean
    /// bit-identical results.
    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_string(self).expect("result serializes"))
    }
}

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in out {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.17e}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn join_nested(values: &[Vec<f64>]) -> String {
    values
        .iter()
        .map(|v| join_f64(v))
        .collect::<Vec<_>>()
        .join("|")
}

/// CSV header matching [`record_csv_row`]. Vector cells use `;` within a
/// slot and `|` between slots.
pub const RECORD_CSV_HEADER: &str = "config_hash,seed,rng,protocol,problem,method,\
objective,level_m2,total_power_w,max_root_bcrb_m,powers_w,bcrbs_m2,layouts_m,phases_rad,\
wall_time_ms";

pub fn record_csv_row(record: &RunRecord) -> String {
    let r = &record.result;
    format!(
        "{},{},{},{},{},{},{:.17e},{},{:.17e},{:.17e},{},{},{},{},{:.3}",
        record.config_hash,
        record.seed,
        record.rng,
        r.protocol,
        r.problem,
        r.method,
        r.objective,
        r.level_m2.map_or(String::new(), |u| format!("{u:.17e}")),
        r.total_power_w(),
        r.max_root_bcrb_m(),
        join_f64(&r.powers_w),
        join_f64(&r.bcrbs_m2),
        join_nested(&r.layouts_m),
        join_nested(&r.phases_rad),
        record.wall_time_ms,
    )
}
