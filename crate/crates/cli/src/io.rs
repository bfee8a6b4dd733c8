// SPDX-License-Identifier: MIT OR Apache-2.0

//! Input formats.
//!
//! Samples: one number per line, optional header line `value`, blank lines
//! ignored. Each sample is the average of the signal over its cell of the
//! `n`-grid, with `n` the number of samples; it is not a point value.
//!
//! Piecewise signals: `{"pieces": [[lo, hi, c0, c1, c2, c3], ...]}` where
//! each piece is `c0 + c1 x + c2 x^2 + c3 x^3` on `[lo, hi)`.

use std::fs;
use std::path::Path;

use msbz_core::{ContinuousSignal, DiscreteSignal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    Samples,
    Piecewise,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Signal {
    Samples(DiscreteSignal),
    Piecewise(ContinuousSignal),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDocument {
    pub pieces: ContinuousSignal,
}

/// Provenance of an input file as recorded in result documents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputInfo {
    pub path: String,
    pub kind: SignalKind,
    pub sha256: String,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Argument(format!("cannot read {}: {e}", path.display())))
}

/// `.json` files are piecewise, everything else is samples.
pub fn detect_kind(path: &Path) -> SignalKind {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => SignalKind::Piecewise,
        _ => SignalKind::Samples,
    }
}

pub fn parse_samples(text: &str, origin: &str) -> Result<DiscreteSignal, CliError> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.trim();
        if field.is_empty() || (values.is_empty() && field.eq_ignore_ascii_case("value")) {
            continue;
        }
        let v: f64 = field
            .parse()
            .map_err(|_| CliError::Argument(format!("{origin}:{}: not a number: {field:?}", i + 1)))?;
        if !v.is_finite() {
            return Err(CliError::Argument(format!("{origin}:{}: non-finite sample {field}", i + 1)));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::Argument(format!("{origin}: no samples")));
    }
    Ok(DiscreteSignal::new(values)?)
}

pub fn parse_piecewise(text: &str, origin: &str) -> Result<ContinuousSignal, CliError> {
    serde_json::from_str::<PiecewiseDocument>(text)
        .map(|d| d.pieces)
        .map_err(|e| CliError::Argument(format!("{origin}: line {}: {e}", e.line())))
}

pub fn read_signal(path: &Path, kind: Option<SignalKind>) -> Result<(Signal, InputInfo), CliError> {
    let bytes = read_bytes(path)?;
    let kind = kind.unwrap_or_else(|| detect_kind(path));
    let origin = path.display().to_string();
    let text = std::str::from_utf8(&bytes).map_err(|_| CliError::Argument(format!("{origin}: not UTF-8 text")))?;
    let signal = match kind {
        SignalKind::Samples => Signal::Samples(parse_samples(text, &origin)?),
        SignalKind::Piecewise => Signal::Piecewise(parse_piecewise(text, &origin)?),
    };
    let info = InputInfo {
        path: origin,
        kind,
        sha256: digest(&bytes),
    };
    Ok((signal, info))
}

pub fn write_samples(values: &[f64]) -> String {
    let mut out = String::from("value\n");
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    out
}
