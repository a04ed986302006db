use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsBundle;

/// Summary of one iterative solve, serialized into run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_update_sup: f64,
    pub residual_sup: f64,
    /// Every iterate pair satisfied `v_{n+1} ≤ v_n + 1e−12`.
    pub monotone: bool,
    /// `v < 0` at every interior node.
    pub negativity: bool,
    /// Lower barrier held: `v ≥ v0` (vortex) or `v ≥ v_δ` (string).
    pub sandwich: bool,
    pub max_increase: f64,
    /// Shift `k` of the first and last sweep.
    pub shift_first: f64,
    pub shift_last: f64,
    /// Sup-norm of each update.
    pub update_trace: Vec<f64>,
    pub decay_exponent_fit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsBundle>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub delta_schedule: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gaps: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}
