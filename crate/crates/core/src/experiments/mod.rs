//! Deterministic pipelines that turn the estimators and bounds into data
//! tables.
//!
//! Every runner takes an explicit master seed; independent parts of a run
//! draw from [`child_seed`](crate::ensembles::child_seed) streams keyed by
//! fixed tags, so a table depends only on its parameters and seed.

mod coverage;
mod dynamics;
mod figures;
mod tables;

pub use coverage::{run_estimate, run_mom_coverage_study, summarize_shadow, CoverageRow, EstimateRow};
pub use dynamics::{floquet_unitary, run_time_evolution_study, Circuit, TimeEvolutionRow};
pub use figures::{
    run_hybrid_variance_scan, run_relative_error_scan, run_tfim_scan, HybridVarianceRow, RelativeErrorRow, TfimRow,
    DEFAULT_TFIM_FIELDS,
};
pub use tables::{run_overcompleteness_check, run_random_subset_table, OvercompletenessRow, SubsetFactorRow};

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Typed rows of one run plus its metadata.
#[derive(Debug, Clone)]
pub struct Experiment<R> {
    pub id: &'static str,
    pub seed: u64,
    pub parameters: Value,
    pub rows: Vec<R>,
    pub elapsed: Duration,
}

impl<R: Serialize> Experiment<R> {
    pub fn to_result(&self) -> Result<ExperimentResult> {
        let mut columns = Vec::new();
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let Value::Object(map) = serde_json::to_value(row).map_err(|e| Error::domain(e.to_string()))? else {
                return Err(Error::domain("experiment rows must serialize to objects"));
            };
            if columns.is_empty() {
                columns = map.keys().cloned().collect();
            }
            rows.push(map.into_iter().map(|(_, v)| v).collect());
        }
        let parameters = match &self.parameters {
            Value::Object(m) => m.clone(),
            Value::Null => Map::new(),
            other => return Err(Error::domain(format!("parameters must be an object, got {other}"))),
        };
        Ok(ExperimentResult {
            schema_version: SCHEMA_VERSION,
            experiment: self.id.to_string(),
            seed: self.seed,
            parameters,
            columns,
            rows,
            wall_clock_seconds: self.elapsed.as_secs_f64(),
        })
    }
}

/// Column-oriented table emitted as CSV or JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub parameters: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// Excluded from reproducibility comparisons.
    pub wall_clock_seconds: f64,
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl ExperimentResult {
    /// CSV with `#` metadata lines; wall-clock time sits on its own line.
    /// Empty cells are values that are undefined for that row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema_version: {}", self.schema_version);
        let _ = writeln!(out, "# experiment: {}", self.experiment);
        let _ = writeln!(out, "# seed: {}", self.seed);
        let _ = writeln!(out, "# parameters: {}", Value::Object(self.parameters.clone()));
        let _ = writeln!(out, "# wall_clock_seconds: {:.3}", self.wall_clock_seconds);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(csv_field).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result is plain data");
        s.push('\n');
        s
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }
}

/// Wall-clock timer for result metadata. Reads zero on targets without a
/// clock, where `Instant::now` would panic.
pub(crate) struct Stopwatch {
    #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn elapsed(&self) -> Duration {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        return self.start.elapsed();
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        Duration::ZERO
    }
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}
