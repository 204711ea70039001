//! Serializable building blocks for machine-readable reports.
//!
//! Every numeric entry carries a unit string expressed in the nondimensional
//! base quantities `mu` (energy density) and `h0` (length), so physical
//! rescaling is a post-processing multiplication.

use serde::{Deserialize, Serialize};

/// A scalar with its unit string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub units: String,
}

impl Quantity {
    pub fn new(value: f64, units: impl Into<String>) -> Self {
        Quantity {
            value,
            units: units.into(),
        }
    }

    pub fn dimensionless(value: f64) -> Self {
        Quantity::new(value, "dimensionless")
    }
}

/// A 2x2 matrix quantity stored row major with its unit string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixQuantity {
    pub value: [[f64; 2]; 2],
    pub units: String,
}

impl MatrixQuantity {
    pub fn from_matrix(m: &nalgebra::Matrix2<f64>, units: impl Into<String>) -> Self {
        MatrixQuantity {
            value: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
            units: units.into(),
        }
    }
}

/// One compared quantity: the closed-form value recomputed here against the
/// constant printed in the reference derivation.
///
/// `values` holds one entry for scalars and four (row major) for 2x2
/// matrices; `rel_gap` is the Frobenius gap over the larger norm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub quantity: String,
    pub units: String,
    pub reference_expression: String,
    pub reference_values: Vec<f64>,
    pub computed_values: Vec<f64>,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub discrepancy: bool,
}

/// Comparison block for one derived plate model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub texture: crate::material::TextureTag,
    pub entries: Vec<ComparisonEntry>,
    pub any_discrepancy: bool,
}

impl ComparisonReport {
    pub fn recompute_summary(&mut self) {
        self.any_discrepancy = self.entries.iter().any(|e| e.discrepancy);
    }
}

/// Relative gap threshold above which a comparison entry is flagged.
pub const DISCREPANCY_TOL: f64 = 1e-6;

/// Absolute gap floor for discrepancy flags.  When both compared values sit
/// at machine zero their relative gap is meaningless (0 vs 1e-33 reads as
/// 100%), so gaps below this floor never count as discrepancies.
pub const DISCREPANCY_ABS_FLOOR: f64 = 1e-12;

pub(crate) fn comparison_entry(
    quantity: impl Into<String>,
    units: impl Into<String>,
    reference_expression: impl Into<String>,
    reference_values: Vec<f64>,
    computed_values: Vec<f64>,
) -> ComparisonEntry {
    assert_eq!(reference_values.len(), computed_values.len());
    let abs_gap = reference_values
        .iter()
        .zip(&computed_values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = norm(&reference_values).max(norm(&computed_values));
    let rel_gap = if scale > 0.0 { abs_gap / scale } else { 0.0 };
    ComparisonEntry {
        quantity: quantity.into(),
        units: units.into(),
        reference_expression: reference_expression.into(),
        reference_values,
        computed_values,
        abs_gap,
        rel_gap,
        discrepancy: rel_gap > DISCREPANCY_TOL && abs_gap > DISCREPANCY_ABS_FLOOR,
    }
}
