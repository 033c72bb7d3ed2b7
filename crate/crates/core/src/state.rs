//! Pure and mixed states over the Dicke basis, plus the standard reference
//! states used as initial conditions.

use std::f64::consts::TAU;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::operators::SpinQuantum;

/// Normalized amplitude vector indexed by basis order (`m_z` descending).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    quantum: SpinQuantum,
    amplitudes: Array1<C64>,
}

impl SpinState {
    /// Wraps and normalizes `amplitudes`.
    pub fn from_amplitudes(quantum: SpinQuantum, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != quantum.dim() {
            return Err(Error::DimensionMismatch { expected: quantum.dim(), actual: amplitudes.len() });
        }
        let mut state = Self { quantum, amplitudes };
        let norm = state.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidConfig("state vector has zero or non-finite norm".into()));
        }
        state.amplitudes.mapv_inplace(|c| c / norm);
        Ok(state)
    }

    /// Wraps amplitudes that are already normalized (caller's responsibility).
    pub(crate) fn from_normalized(quantum: SpinQuantum, amplitudes: Array1<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), quantum.dim());
        Self { quantum, amplitudes }
    }

    pub fn quantum(&self) -> SpinQuantum {
        self.quantum
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amplitudes.as_slice().expect("amplitudes are contiguous")
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Born weights `|c_m|^2` in basis order.
    pub fn populations(&self) -> Array1<f64> {
        self.amplitudes.mapv(|c| c.norm_sqr())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SpinState) -> C64 {
        self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &SpinState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `|psi><psi|`.
    pub fn to_density(&self) -> DensityState {
        let col = self.amplitudes.view().insert_axis(ndarray::Axis(1));
        let row = self.amplitudes.mapv(|c| c.conj()).insert_axis(ndarray::Axis(0));
        DensityState { quantum: self.quantum, matrix: col.dot(&row) }
    }
}

/// Hermitian, unit-trace density matrix over the Dicke basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    quantum: SpinQuantum,
    matrix: Array2<C64>,
}

impl DensityState {
    /// Validates shape, Hermiticity (to 1e-10) and unit trace (to 1e-10).
    pub fn from_matrix(quantum: SpinQuantum, matrix: Array2<C64>) -> Result<Self> {
        let d = quantum.dim();
        if matrix.dim() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, actual: matrix.nrows() });
        }
        let herm = matrix.indexed_iter().map(|((i, j), v)| (v - matrix[[j, i]].conj()).norm()).fold(0.0, f64::max);
        if herm > 1e-10 {
            return Err(Error::InvalidConfig(format!("density matrix is not Hermitian (defect {herm:e})")));
        }
        let tr: f64 = (0..d).map(|i| matrix[[i, i]].re).sum();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidConfig(format!("density matrix trace is {tr}, expected 1")));
        }
        Ok(Self { quantum, matrix })
    }

    pub(crate) fn from_matrix_unchecked(quantum: SpinQuantum, matrix: Array2<C64>) -> Self {
        Self { quantum, matrix }
    }

    /// `I / d`.
    pub fn maximally_mixed(quantum: SpinQuantum) -> Self {
        let d = quantum.dim();
        let matrix = Array2::<C64>::eye(d).mapv(|v| v / d as f64);
        Self { quantum, matrix }
    }

    /// Diagonal density matrix from non-negative weights (normalized here).
    pub fn diagonal(quantum: SpinQuantum, weights: &[f64]) -> Result<Self> {
        let d = quantum.dim();
        if weights.len() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: weights.len() });
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) || total <= 0.0 {
            return Err(Error::InvalidConfig("diagonal weights must be non-negative with positive sum".into()));
        }
        let mut matrix = Array2::<C64>::zeros((d, d));
        for (i, w) in weights.iter().enumerate() {
            matrix[[i, i]] = C64::new(w / total, 0.0);
        }
        Ok(Self { quantum, matrix })
    }

    pub fn quantum(&self) -> SpinQuantum {
        self.quantum
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diag().iter().map(|c| c.re).sum()
    }

    /// Real diagonal (populations) in basis order.
    pub fn populations(&self) -> Array1<f64> {
        self.matrix.diag().mapv(|c| c.re)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix.indexed_iter().map(|((i, j), v)| (v - self.matrix[[j, i]].conj()).norm()).fold(0.0, f64::max)
    }
}

/// Spin coherent state `|θ, φ> = e^{-iφJ_z} e^{-iθJ_y} |J, J>`, with mean spin
/// direction `(sinθ cosφ, sinθ sinφ, cosθ)`.
pub fn spin_coherent(quantum: SpinQuantum, theta: f64, phi: f64) -> SpinState {
    let theta = theta.rem_euclid(TAU);
    let phi = phi.rem_euclid(TAU);
    let n = quantum.particles() as u64;
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    // Powers of exact zeros are handled separately so 0^0 = 1.
    let log_abs = |x: f64, p: u64| -> Option<f64> {
        if p == 0 {
            Some(0.0)
        } else if x == 0.0 {
            None
        } else {
            Some(p as f64 * x.abs().ln())
        }
    };
    let sign = |x: f64, p: u64| if x < 0.0 && p % 2 == 1 { -1.0 } else { 1.0 };
    let amps = Array1::from_iter((0..quantum.dim()).map(|i| {
        // index i: m = J - i, so J + m = N - i and J - m = i.
        let up = n - i as u64;
        let down = i as u64;
        let m = quantum.m_at(i);
        match (log_abs(c, up), log_abs(s, down)) {
            (Some(a), Some(b)) => {
                let mag = (0.5 * ln_binomial(n, down) + a + b).exp();
                C64::from_polar(mag * sign(c, up) * sign(s, down), -m * phi)
            }
            _ => C64::new(0.0, 0.0),
        }
    }));
    let mut state = SpinState::from_normalized(quantum, amps);
    // The product form is already normalized; this only removes rounding.
    let norm = state.norm();
    state.amplitudes.mapv_inplace(|c| c / norm);
    state
}

/// Dicke state `|J, m>`.
pub fn dicke_state(quantum: SpinQuantum, m: f64) -> Result<SpinState> {
    let idx = quantum.index_of(m)?;
    let mut amps = Array1::<C64>::zeros(quantum.dim());
    amps[idx] = C64::new(1.0, 0.0);
    Ok(SpinState::from_normalized(quantum, amps))
}

/// Haar-random state of the symmetric subspace: i.i.d. standard complex
/// Gaussian amplitudes, normalized.
pub fn haar_random_state<R: Rng + ?Sized>(quantum: SpinQuantum, rng: &mut R) -> SpinState {
    loop {
        let amps = Array1::from_iter((0..quantum.dim()).map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        }));
        if let Ok(state) = SpinState::from_amplitudes(quantum, amps) {
            return state;
        }
    }
}

/// Direction drawn uniformly on the unit sphere, returned as `(θ, φ)`.
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    (cos_theta.clamp(-1.0, 1.0).acos(), phi)
}
