//! JSON reports. Every report carries `"schema": 1` and the sampling seed.

use serde::{Deserialize, Serialize};

use crate::action_angle::{ChartReport, InitialDataReport};
use crate::dynamics::{EquivalenceReport, IntegrationError, Monitor, StepStats};
use crate::integrability::VerifierVerdict;
use crate::phase_space::PhasePoint;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRun {
    pub start: PhasePoint,
    #[serde(flatten)]
    pub report: EquivalenceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceSummary {
    pub t_span: f64,
    pub tol: f64,
    pub runs: Vec<EquivalenceRun>,
    pub max_deviation: f64,
    pub max_i0_drift: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub command: String,
    /// Measured corank of the structure matrix at the first sample.
    pub k: Option<usize>,
    #[serde(flatten)]
    pub verdict: VerifierVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charts: Option<Vec<ChartReport>>,
    pub failed: Vec<String>,
}

/// A failed run, serialized in place of the trajectory summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ErrorRecord {
    BlowupDetected { s: f64, norm: f64 },
    StepLimitExceeded { steps: usize, s: f64 },
    EvaluationFailed { message: String },
}

impl ErrorRecord {
    pub fn from_error(e: &IntegrationError) -> Self {
        match e {
            IntegrationError::BlowupDetected { s, norm } => ErrorRecord::BlowupDetected { s: *s, norm: *norm },
            IntegrationError::StepLimitExceeded { steps, s } => ErrorRecord::StepLimitExceeded { steps: *steps, s: *s },
            other => ErrorRecord::EvaluationFailed { message: other.to_string() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrateReport {
    pub schema: u32,
    pub command: String,
    pub system: String,
    pub seed: u64,
    pub space: String,
    pub start: Vec<f64>,
    pub t_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last: Option<Vec<f64>>,
    /// Max-norm distance of the final `(q, p)` from the start.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub displacement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monitors: Option<Vec<Monitor>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<StepStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i0_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRow {
    pub energy: f64,
    pub dof: usize,
    pub action_loop: f64,
    pub action_closed: f64,
    pub period: f64,
    /// `2π / period`.
    pub frequency_loop: f64,
    pub frequency_fd: f64,
    pub frequency_measured: f64,
    pub pass: bool,
}

impl ActionRow {
    pub const CSV_HEADER: &'static str =
        "energy,dof,action_loop,action_closed,period,frequency_loop,frequency_fd,frequency_measured";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.energy,
            self.dof + 1,
            self.action_loop,
            self.action_closed,
            self.period,
            self.frequency_loop,
            self.frequency_fd,
            self.frequency_measured
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegaugeSummary {
    pub hprime: String,
    pub chart: ChartReport,
    pub flow: InitialDataReport,
    /// Max coordinate gap after re-gauging by ℋ' and then by −ℋ'.
    pub round_trip: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionsReport {
    pub schema: u32,
    pub command: String,
    pub system: String,
    pub seed: u64,
    pub chart: ChartReport,
    pub rows: Vec<ActionRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regauge: Option<RegaugeSummary>,
    pub pass: bool,
}
