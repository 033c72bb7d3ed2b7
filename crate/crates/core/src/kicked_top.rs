//! Kicked-top Floquet map `U_KT = U_z U_y U_x` with
//! `U_a = exp[-i(α_a J_a + k_a/(2J) J_a^2)]`.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{adjoint, spectral_synthesis};
use crate::operators::{Axis, CollectiveOps, SpinQuantum};
use crate::state::{DensityState, SpinState};

/// Default rotation angles `(α_x, α_y, α_z)`.
pub const DEFAULT_ALPHA: [f64; 3] = [1.7, 1.0, 0.8];
/// Default twist ratios `k_a / k` for `(x, y, z)`.
pub const DEFAULT_TWIST_RATIO: [f64; 3] = [0.85, 0.9, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickedTopParams {
    /// Scalar chaoticity knob the twists were derived from.
    pub k: f64,
    /// Rotation angles `(α_x, α_y, α_z)` in radians.
    pub alpha: [f64; 3],
    /// Twisting strengths `(k_x, k_y, k_z)`.
    pub twist: [f64; 3],
}

impl KickedTopParams {
    /// Default family: `α = (1.7, 1.0, 0.8)`, `(k_x, k_y, k_z) = (0.85k, 0.9k, k)`.
    pub fn from_k(k: f64) -> Self {
        Self { k, alpha: DEFAULT_ALPHA, twist: DEFAULT_TWIST_RATIO.map(|r| r * k) }
    }

    /// Explicit angles and twists; `k` is recorded as `k_z`.
    pub fn custom(alpha: [f64; 3], twist: [f64; 3]) -> Self {
        Self { k: twist[2], alpha, twist }
    }

    pub fn identity() -> Self {
        Self::custom([0.0; 3], [0.0; 3])
    }

    fn validate(&self) -> Result<()> {
        if self.alpha.iter().chain(self.twist.iter()).chain([self.k].iter()).all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidConfig("kicked-top parameters must be finite".into()))
        }
    }

    /// Stable key for caching propagators.
    pub fn cache_key(&self) -> [u64; 7] {
        let mut key = [0u64; 7];
        key[0] = self.k.to_bits();
        for i in 0..3 {
            key[1 + i] = self.alpha[i].to_bits();
            key[4 + i] = self.twist[i].to_bits();
        }
        key
    }
}

/// Phase `exp(-i(α λ + k/(2J) λ^2))` of one factor on eigenvalue `λ`.
fn factor_phase(alpha: f64, twist: f64, j: f64, lambda: f64) -> C64 {
    C64::from_polar(1.0, -(alpha * lambda + twist / (2.0 * j) * lambda * lambda))
}

/// Dense Floquet unitary for fixed `(N, params)`, built once and shared
/// read-only between trajectory workers.
#[derive(Debug, Clone)]
pub struct FloquetPropagator {
    quantum: SpinQuantum,
    params: KickedTopParams,
    matrix: Array2<C64>,
}

/// Builds operators for `quantum` and the propagator from them.
pub fn build_propagator(quantum: SpinQuantum, params: KickedTopParams) -> Result<FloquetPropagator> {
    let ops = CollectiveOps::new(quantum)?;
    FloquetPropagator::build(&ops, params)
}

impl FloquetPropagator {
    pub fn build(ops: &CollectiveOps, params: KickedTopParams) -> Result<Self> {
        params.validate()?;
        let quantum = ops.quantum();
        let factors = [Axis::X, Axis::Y].map(|axis| Self::transverse_factor(ops, &params, axis));
        let [ux, uy] = factors;
        let mut matrix = uy.dot(&ux);
        let j = quantum.spin();
        for (mut row, &m) in matrix.rows_mut().into_iter().zip(ops.jz().iter()) {
            let phase = factor_phase(params.alpha[2], params.twist[2], j, m);
            row.mapv_inplace(|v| v * phase);
        }
        Ok(Self { quantum, params, matrix })
    }

    /// A single rotation-plus-twist factor `U_a` as a dense matrix.
    pub fn factor(ops: &CollectiveOps, params: &KickedTopParams, axis: Axis) -> Array2<C64> {
        match axis {
            Axis::Z => {
                let j = ops.quantum().spin();
                let diag: Array1<C64> = ops.jz().mapv(|m| factor_phase(params.alpha[2], params.twist[2], j, m));
                Array2::from_diag(&diag)
            }
            _ => Self::transverse_factor(ops, params, axis),
        }
    }

    fn transverse_factor(ops: &CollectiveOps, params: &KickedTopParams, axis: Axis) -> Array2<C64> {
        let idx = match axis {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        };
        let eig = ops.eigen(axis).expect("transverse axis has an eigendecomposition");
        let j = ops.quantum().spin();
        let phases = eig.values.mapv(|l| factor_phase(params.alpha[idx], params.twist[idx], j, l));
        spectral_synthesis(eig.vectors.view(), phases.view())
    }

    pub fn quantum(&self) -> SpinQuantum {
        self.quantum
    }

    pub fn params(&self) -> &KickedTopParams {
        &self.params
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    fn check_dim(&self, actual: usize) -> Result<()> {
        let expected = self.quantum.dim();
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, actual })
        }
    }

    /// `U_KT |psi>`.
    pub fn apply(&self, state: &SpinState) -> Result<SpinState> {
        self.check_dim(state.amplitudes().len())?;
        Ok(SpinState::from_normalized(self.quantum, self.matrix.dot(state.amplitudes())))
    }

    /// `U_KT rho U_KT^H`.
    pub fn apply_density(&self, rho: &DensityState) -> Result<DensityState> {
        self.check_dim(rho.matrix().nrows())?;
        let out = self.matrix.dot(rho.matrix()).dot(&adjoint(&self.matrix));
        Ok(DensityState::from_matrix_unchecked(self.quantum, out))
    }
}
