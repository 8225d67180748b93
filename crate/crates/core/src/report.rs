//! Reporting types shared by the estimators and the experiment harness:
//! per-condition measured constants with their extremizers, serialized as
//! JSON objects and flat CSV tables.

use crate::grid::{Cube, GridDomain};
use serde::{Deserialize, Serialize};

/// Which weight condition a report measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "reverse_holder")]
    ReverseHolder,
    #[serde(rename = "cp")]
    Cp,
    #[serde(rename = "scp")]
    SCp,
    #[serde(rename = "cond_ii")]
    CondII,
    #[serde(rename = "cond_iii")]
    CondIII,
    #[serde(rename = "cond_iv")]
    CondIV,
    #[serde(rename = "cond_v")]
    CondV,
}

/// A cube in report form (real coordinates plus the dyadic level when the
/// cube belongs to the lattice).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeRef {
    pub left: f64,
    pub length: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
}

impl CubeRef {
    pub fn new(dom: &GridDomain, q: &Cube) -> Self {
        CubeRef {
            left: q.left(dom),
            length: q.length(dom),
            level: q.dyadic_level(),
        }
    }
}

/// What achieved a measured constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Extremizer {
    Cube { cube: CubeRef },
    Family { cubes: Vec<CubeRef> },
    Cells { cells: Vec<usize> },
    None,
}

/// One sampled point of a `lambda -> value` curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub lambda: f64,
    pub value: f64,
}

/// A measured weight-condition constant with its extremizer and any
/// per-condition auxiliary data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub p: f64,
    pub r: f64,
    pub constant: f64,
    pub extremizer: Extremizer,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub samples: Vec<CurveSample>,
    /// Fitted exponent of `C lambda^delta` through the samples, when computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_coefficient: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_residual: Option<f64>,
    /// Exponent the iteration argument derives from the single-level ratio.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived_delta: Option<f64>,
    /// Knee level used by the single-level ratio.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    /// The single-level comparison ratio evaluated at the knee.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level_ratio_at_knee: Option<f64>,
    /// The sampled level at which `constant` was attained.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_at_constant: Option<f64>,
    /// Unweighted mass of the truncated right-side integrand outside the
    /// domain (infinite for p <= 1); reported so truncation error is visible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
}

impl ConditionReport {
    pub fn new(
        condition: Condition,
        p: f64,
        r: f64,
        constant: f64,
        extremizer: Extremizer,
    ) -> Self {
        ConditionReport {
            condition,
            p,
            r,
            constant,
            extremizer,
            samples: Vec::new(),
            fitted_delta: None,
            fitted_coefficient: None,
            fit_residual: None,
            derived_delta: None,
            lambda0: None,
            level_ratio_at_knee: None,
            lambda_at_constant: None,
            tail_bound: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat CSV rows `lambda,value` for the sampled curve.
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("lambda,value\n");
        for s in &self.samples {
            out.push_str(&format!("{:.17e},{:.17e}\n", s.lambda, s.value));
        }
        out
    }
}

/// Writes one CSV table deterministically (caller supplies rows in order).
pub fn csv_table(header: &str, rows: &[Vec<String>]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Fixed-format float for CSV cells (17 significant digits, reproducible).
pub fn csv_f64(v: f64) -> String {
    format!("{v:.17e}")
}
