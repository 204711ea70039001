//! JSON report envelope shared by the subcommands.
//!
//! Reports are schema-versioned, echo the fully-resolved configuration, and
//! carry a timestamp.  The timestamp is the only field excluded from the
//! determinism guarantee; everything else depends solely on the
//! configuration.

use serde::Serialize;

use ribbonlab::report::{ComparisonReport, MatrixQuantity, Quantity};

use crate::config::RunConfig;

/// Schema identifier written into every JSON report.
pub const REPORT_SCHEMA: &str = "ribbonlab-report/1";

/// Envelope around a command-specific body.
#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub timestamp_utc: String,
    pub config: RunConfig,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &'static str, config: RunConfig, body: T) -> Self {
        Report {
            schema_version: REPORT_SCHEMA,
            command,
            timestamp_utc: chrono::Utc::now()
                .to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            body,
        }
    }
}

/// Plate-model constants of one derivation route.
#[derive(Debug, Serialize)]
pub struct ModelBlock {
    pub alpha_coeff: Quantity,
    pub target_curvature: MatrixQuantity,
    pub residual: Quantity,
}

/// Body of a `derive` report: closed form, quadrature oracle, their gaps,
/// and the comparison against the printed reference constants.
#[derive(Debug, Serialize)]
pub struct DeriveBody {
    pub closed_form: ModelBlock,
    pub oracle: ModelBlock,
    pub alpha_coeff: Quantity,
    pub target_curvature: MatrixQuantity,
    pub residual: Quantity,
    pub oracle_alpha_gap: Quantity,
    pub oracle_target_gap: Quantity,
    pub oracle_residual_gap: Quantity,
    pub reference_comparison: ComparisonReport,
}

/// One verification check in a `verify` report.
#[derive(Debug, Serialize)]
pub struct CheckEntry {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub details: String,
    pub runtime: Quantity,
}

/// Body of a `verify` report.
#[derive(Debug, Serialize)]
pub struct VerifyBody {
    pub checks: Vec<CheckEntry>,
    pub negative_control: CheckEntry,
    pub all_passed: bool,
}
