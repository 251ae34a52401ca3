//! JSON reports. Every report carries `schema_version`, `command` and `status`
//! (`"ok"` or `"error"`); `meta` is omitted under `--no-meta`.
//!
//! Non-finite numbers (an infinite z-score) serialize as `null`.

use serde::{Deserialize, Serialize};

use crate::model::Diagnostic;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub generated_at: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub command: String,
    pub status: String,
    #[serde(flatten)]
    pub body: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub coordinates: Vec<String>,
    pub diffusor: String,
    pub has_sde: bool,
    pub fields: Vec<String>,
    pub bases: Vec<String>,
    pub transformations: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub is_symmetry: bool,
    /// `−τ'`; absent for verdicts that have no multiplier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<String>,
    pub residuals: Vec<String>,
    pub probabilistic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub field: String,
    pub candidate: String,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub tau: String,
    pub phi: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FindReport {
    pub basis: String,
    pub dimension: usize,
    pub generators: Vec<Generator>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub from: usize,
    pub to: usize,
    pub weight: String,
    pub z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionReport {
    pub function: String,
    pub codiffusor: String,
    pub checkpoints: Vec<usize>,
    pub scores: Vec<ScoreEntry>,
    pub max_abs_z: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub steps: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
    pub z_crit: f64,
    /// Flow time; absent when the candidate is a finite transformation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_parameter: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// `field:NAME` or `transformation:NAME`.
    pub candidate: String,
    pub settings: VerifySettings,
    pub pass: bool,
    pub max_abs_z: Option<f64>,
    pub reports: Vec<FunctionReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovLevel {
    pub h: String,
    pub pde_symmetry: bool,
    pub martingale_symmetry: bool,
    pub residuals: Vec<String>,
    pub probabilistic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub transformation: String,
    pub martingale: Verdict,
    /// Present when the candidate gives `c`, i.e. when the SDE comparison is requested.
    pub sde: Option<Verdict>,
    pub kolmogorov: KolmogorovLevel,
    /// SDE symmetry implies martingale symmetry; `null` without the SDE comparison.
    pub bridge_consistent: Option<bool>,
}

pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
