// SPDX-License-Identifier: MIT OR Apache-2.0

//! Result documents.
//!
//! Every command writes `{"format": 1, "header": {...}, "payload": {...}}`.
//! The header holds wall-clock data (timestamp, runtime) and is the only
//! part that varies between identical runs; the payload is last and
//! byte-identical for identical inputs and flags.

use std::time::{Duration, SystemTime, UNIX_EPOCH};

use msbz_core::convergence::ConvergenceReport;
use msbz_core::{ObjectiveBreakdown, ParameterPoint, PiecewiseSolution, SegmentationResult};
use serde::{Deserialize, Serialize};

use crate::io::InputInfo;
use crate::CliError;

pub const FORMAT: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub runtime_seconds: f64,
}

impl Header {
    pub fn now(runtime: Duration) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            runtime_seconds: runtime.as_secs_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub format: u32,
    pub header: Header,
    pub payload: Payload,
}

/// Partition as real points, plus grid indices when it lives on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub points: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub indices: Option<Vec<usize>>,
}

impl PartitionSummary {
    pub fn of(solution: &PiecewiseSolution) -> Self {
        Self {
            points: solution.partition().points().to_vec(),
            indices: solution.as_discrete().map(|d| d.partition.indices().to_vec()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentPayload {
    pub input: InputInfo,
    pub model: String,
    pub partition: PartitionSummary,
    pub result: SegmentationResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvePayload {
    pub input: InputInfo,
    pub parameters: ParameterPoint,
    pub partition: PartitionSummary,
    pub objective: ObjectiveBreakdown,
    pub solution: PiecewiseSolution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedReport {
    pub name: String,
    pub report: ConvergenceReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPayload {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input: Option<InputInfo>,
    pub passed: bool,
    pub reports: Vec<NamedReport>,
}

/// One cross-checked instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleInstance {
    pub index: usize,
    pub gamma: f64,
    pub mu: f64,
    pub values: Vec<f64>,
    pub dp_breakpoints: Vec<usize>,
    pub brute_force_breakpoints: Vec<usize>,
    pub dp_objective: f64,
    pub brute_force_objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OraclePayload {
    pub seed: u64,
    pub n: usize,
    pub instances: usize,
    pub tolerance: f64,
    pub agreed: usize,
    pub failures: Vec<OracleInstance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Payload {
    Segment(SegmentPayload),
    SolvePartition(SolvePayload),
    Sweep(SweepPayload),
    Oracle(OraclePayload),
}

impl Document {
    pub fn new(payload: Payload, runtime: Duration) -> Self {
        Self {
            format: FORMAT,
            header: Header::now(runtime),
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let doc: Document =
            serde_json::from_str(text).map_err(|e| CliError::Argument(format!("result document: {e}")))?;
        if doc.format != FORMAT {
            return Err(CliError::Argument(format!(
                "unsupported result format {} (expected {FORMAT})",
                doc.format
            )));
        }
        Ok(doc)
    }
}

/// The payload part of a serialized document, byte for byte.
pub fn payload_text(json: &str) -> Option<&str> {
    json.find("\"payload\":").map(|i| &json[i..])
}
