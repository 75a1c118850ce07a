//! Structured run report (pretty JSON) and CSV tables.
//!
//! Wall-clock times live only under the top-level `timing` key so two reports
//! of the same run compare byte-for-byte once that key is dropped.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};
use vsg_core::field::{AccretivityReport, EllipticityReport};
use vsg_core::splitting::{ConvergenceTable, EvolutionTrace, OrderVerdict};

use crate::presets::exponent_label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Abort,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Location {
    pub point: usize,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    /// The quantity compared against `threshold` (slack, defect, ratio ...).
    pub worst: Option<f64>,
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
    pub details: Map<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn new(name: &str, pass: bool) -> Self {
        Self {
            name: name.into(),
            pass,
            worst: None,
            threshold: None,
            location: None,
            details: Map::new(),
            notes: Vec::new(),
        }
    }

    pub fn worst(mut self, worst: f64, threshold: f64) -> Self {
        self.worst = Some(worst);
        self.threshold = Some(threshold);
        self
    }

    pub fn at(mut self, point: usize, coords: Vec<f64>) -> Self {
        self.location = Some(Location { point, coords });
        self
    }

    pub fn detail(mut self, key: &str, value: impl Serialize) -> Self {
        self.details
            .insert(key.into(), serde_json::to_value(value).expect("detail serializes"));
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

impl From<&EllipticityReport> for Verdict {
    fn from(r: &EllipticityReport) -> Self {
        Verdict::new("ellipticity", r.pass)
            .worst(r.worst_violation, 0.0)
            .at(r.worst_point, r.worst_coords.clone())
            .detail("lambda_min", r.lambda_min)
            .detail("lambda_max", r.lambda_max)
    }
}

impl From<&AccretivityReport> for Verdict {
    fn from(r: &AccretivityReport) -> Self {
        Verdict::new("accretivity", r.pass)
            .worst(r.min_eigenvalue, 0.0)
            .at(r.point, r.coords.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validators {
    pub ellipticity: Verdict,
    pub accretivity: Verdict,
    /// `None` when the potential is symmetric (no sector restriction) or
    /// not accretive.
    pub sector_constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormTable {
    pub exponents: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl NormTable {
    pub fn from_trace(trace: &EvolutionTrace<f64>) -> Self {
        Self {
            exponents: trace.exponents.iter().map(|p| exponent_label(p.exponent())).collect(),
            times: trace.times.clone(),
            rows: trace.norms.clone(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("time");
        for p in &self.exponents {
            let _ = write!(s, ",p={p}");
        }
        s.push('\n');
        for (t, row) in self.times.iter().zip(&self.rows) {
            let _ = write!(s, "{t:e}");
            for v in row {
                let _ = write!(s, ",{v:e}");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub variant: String,
    pub reference_steps: usize,
    pub steps: Vec<usize>,
    pub tau: Vec<f64>,
    pub error: Vec<f64>,
    /// `"exact"` or the fitted order.
    pub verdict: String,
    pub order: Option<f64>,
}

impl From<&ConvergenceTable> for ConvergenceReport {
    fn from(t: &ConvergenceTable) -> Self {
        Self {
            variant: format!("{:?}", t.variant).to_lowercase(),
            reference_steps: t.reference_steps,
            steps: t.rows.iter().map(|r| r.steps).collect(),
            tau: t.rows.iter().map(|r| r.tau).collect(),
            error: t.rows.iter().map(|r| r.error).collect(),
            verdict: match t.verdict {
                OrderVerdict::Exact => "exact".into(),
                OrderVerdict::Order(_) => "order".into(),
            },
            order: t.verdict.order(),
        }
    }
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("steps,tau,error\n");
        for i in 0..self.steps.len() {
            let _ = writeln!(s, "{},{:e},{:e}", self.steps[i], self.tau[i], self.error[i]);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionSummary {
    pub steps: usize,
    pub tau: f64,
    pub final_norms: Vec<f64>,
    /// Largest relative per-step norm increase over all exponents.
    pub worst_increase: f64,
    pub worst_exponent: String,
    pub worst_row: usize,
    pub snapshots: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seed: u64,
    /// The effective configuration as TOML.
    pub config: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validators: Option<Validators>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceReport>,
    pub suites: Vec<Verdict>,
    /// Seconds per phase.
    pub timing: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, config: String) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            status: Status::Pass,
            error: None,
            seed,
            config,
            validators: None,
            evolution: None,
            norms: None,
            convergence: None,
            suites: Vec::new(),
            timing: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Report text with the `timing` key removed, for determinism comparisons.
pub fn strip_timing(json: &str) -> Result<String, serde_json::Error> {
    let mut v: Value = serde_json::from_str(json)?;
    if let Value::Object(map) = &mut v {
        map.remove("timing");
    }
    serde_json::to_string_pretty(&v)
}
