//! Order parameters: per-axis and mean quantum Fisher information, purity,
//! and closed-form reference values for standard state families.

use serde::{Deserialize, Serialize};

use crate::operators::{Axis, CollectiveOps, SpinQuantum};
use crate::state::{DensityState, SpinState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiSummary {
    /// Axis-averaged QFI, `(4/3)[J(J+1) - ||<J>||²]`.
    pub mean_qfi: f64,
    /// Squared magnetization length `||<J>||²`.
    pub mag_len_sq: f64,
    /// `(F_Q[J_x], F_Q[J_y], F_Q[J_z])` when requested.
    pub per_axis: Option<[f64; 3]>,
}

impl QfiSummary {
    fn from_moments(quantum: SpinQuantum, moments: [f64; 3]) -> Self {
        let j = quantum.spin();
        let mag_len_sq: f64 = moments.iter().map(|v| v * v).sum();
        Self { mean_qfi: mean_qfi_from_length(j, mag_len_sq), mag_len_sq, per_axis: None }
    }
}

/// `(4/3)[J(J+1) - ||<J>||²]`.
pub fn mean_qfi_from_length(j: f64, mag_len_sq: f64) -> f64 {
    4.0 / 3.0 * (j * (j + 1.0) - mag_len_sq)
}

/// `F_Q[J_a] = 4 (<J_a²> - <J_a>²)`.
pub fn qfi_axis(state: &SpinState, ops: &CollectiveOps, axis: Axis) -> f64 {
    let psi = state.as_slice();
    let mean = ops.first_moments(psi)[axis as usize];
    let second = match axis {
        Axis::Z => psi.iter().zip(ops.jz().iter()).map(|(c, m)| c.norm_sqr() * m * m).sum(),
        _ => ops.apply(axis, psi).iter().map(|c| c.norm_sqr()).sum::<f64>(),
    };
    (4.0 * (second - mean * mean)).max(0.0)
}

/// Mean QFI from first moments only (O(d)).
pub fn mean_qfi(state: &SpinState, ops: &CollectiveOps) -> QfiSummary {
    QfiSummary::from_moments(ops.quantum(), ops.first_moments(state.as_slice()))
}

/// Mean QFI together with the three per-axis variances.
pub fn mean_qfi_with_axes(state: &SpinState, ops: &CollectiveOps) -> QfiSummary {
    let mut summary = mean_qfi(state, ops);
    summary.per_axis = Some(Axis::ALL.map(|a| qfi_axis(state, ops, a)));
    summary
}

/// Magnetization-length diagnostic for a mixed state: the mean-QFI formula
/// evaluated on `tr(ρ J_a)`. This is not the quantum Fisher information of a
/// mixed state; purity is the order parameter for mixed runs.
pub fn mean_qfi_density(rho: &DensityState, ops: &CollectiveOps) -> QfiSummary {
    QfiSummary::from_moments(ops.quantum(), ops.first_moments_density(rho.matrix()))
}

/// `tr ρ²`.
pub fn purity(rho: &DensityState) -> f64 {
    rho.matrix().iter().map(|c| c.norm_sqr()).sum()
}

/// Mean-QFI reference values for standard state families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    pub j: f64,
    pub squeezing: f64,
    /// Spin coherent states: `4J/3`.
    pub coherent: f64,
    /// Gaussian spin-squeezed states: `(4/3) J cosh r`.
    pub squeezed: f64,
    /// Haar average: `(4/3)(J² + J/2)`.
    pub haar: f64,
    /// Uniform average over Dicke states: `(8/9)(J² + J)`.
    pub dicke_average: f64,
}

impl ReferenceValues {
    /// `(label, value)` rows in table order.
    pub fn rows(&self) -> [(&'static str, f64); 4] {
        [
            ("spin_coherent", self.coherent),
            ("spin_squeezed", self.squeezed),
            ("haar_average", self.haar),
            ("dicke_average", self.dicke_average),
        ]
    }
}

/// Reference mean-QFI table for `quantum`, squeezing `r` defaults to 0.
pub fn reference_values(quantum: SpinQuantum, r: Option<f64>) -> ReferenceValues {
    let j = quantum.spin();
    let r = r.unwrap_or(0.0);
    // ||<J>||² per family: J², J² - J(cosh r - 1), J/2, J(J+1)/3.
    ReferenceValues {
        j,
        squeezing: r,
        coherent: mean_qfi_from_length(j, j * j),
        squeezed: mean_qfi_from_length(j, j * j - j * (r.cosh() - 1.0)),
        haar: mean_qfi_from_length(j, j / 2.0),
        dicke_average: mean_qfi_from_length(j, j * (j + 1.0) / 3.0),
    }
}
