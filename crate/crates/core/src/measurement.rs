//! Finite-resolution collective `J_z` measurement.
//!
//! Kraus operators `K_m = (2πσ²)^{-1/4} exp(-(J_z - m)² / 4σ²)` for real
//! outcomes `m`. Outcomes are sampled ancestrally (Born weight for `m_z`,
//! then a Gaussian of width `σ` around it), which realizes the outcome
//! density `P(m) = <ψ|K_m² |ψ>` exactly.

use std::f64::consts::PI;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operators::SpinQuantum;
use crate::quadrature::adaptive_gk;
use crate::state::{DensityState, SpinState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMeasurement {
    sigma: f64,
    quantum: SpinQuantum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    pub m: f64,
    /// `ln P(m)` of the sampled outcome (diagnostic).
    pub log_density: f64,
}

impl GaussianMeasurement {
    pub fn new(quantum: SpinQuantum, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidResolution(sigma));
        }
        Ok(Self { sigma, quantum })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Measurement strength `κ = 1/σ`.
    pub fn strength(&self) -> f64 {
        1.0 / self.sigma
    }

    pub fn quantum(&self) -> SpinQuantum {
        self.quantum
    }

    fn check_dim(&self, actual: usize) -> Result<()> {
        let expected = self.quantum.dim();
        if actual == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, actual })
        }
    }

    /// Log of the un-normalized Kraus diagonal, `-(m_z - m)² / 4σ²`.
    fn log_kraus(&self, m: f64) -> Array1<f64> {
        let inv = 1.0 / (4.0 * self.sigma * self.sigma);
        self.quantum.m_values().mapv(|mz| -(mz - m) * (mz - m) * inv)
    }

    /// Diagonal of the POVM element `K_m^† K_m` (with normalization).
    pub fn povm_diagonal(&self, m: f64) -> Array1<f64> {
        let s = self.sigma;
        let norm = 1.0 / ((2.0 * PI).sqrt() * s);
        self.quantum.m_values().mapv(|mz| norm * (-(mz - m) * (mz - m) / (2.0 * s * s)).exp())
    }

    /// `ln P(m)` for Born weights `populations` (log-sum-exp).
    pub fn log_density(&self, populations: &[f64], m: f64) -> f64 {
        let s = self.sigma;
        let log_norm = -0.5 * (2.0 * PI * s * s).ln();
        let terms: Vec<f64> = populations
            .iter()
            .zip(self.quantum.m_values().iter())
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, mz)| p.ln() - (mz - m) * (mz - m) / (2.0 * s * s))
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return f64::NEG_INFINITY;
        }
        log_norm + max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }

    fn sample_from_populations<R: Rng + ?Sized>(&self, populations: &[f64], rng: &mut R) -> MeasurementOutcome {
        let total: f64 = populations.iter().sum();
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut idx = populations.len() - 1;
        for (i, p) in populations.iter().enumerate() {
            acc += p;
            if u < acc {
                idx = i;
                break;
            }
        }
        // Never land on an index with zero weight through rounding at the tail.
        while populations[idx] <= 0.0 && idx > 0 {
            idx -= 1;
        }
        let z: f64 = rng.sample(StandardNormal);
        let m = self.quantum.m_at(idx) + self.sigma * z;
        MeasurementOutcome { m, log_density: self.log_density(populations, m) }
    }

    /// Draws an outcome from `P(m) = Σ |c_{m_z}|² N(m; m_z, σ²)`.
    pub fn sample_outcome<R: Rng + ?Sized>(&self, state: &SpinState, rng: &mut R) -> Result<MeasurementOutcome> {
        self.check_dim(state.amplitudes().len())?;
        let pops = state.populations();
        Ok(self.sample_from_populations(pops.as_slice().expect("contiguous"), rng))
    }

    /// Draws an outcome from `P(m) = Σ ρ_{m_z m_z} N(m; m_z, σ²)`.
    pub fn sample_outcome_density<R: Rng + ?Sized>(
        &self,
        rho: &DensityState,
        rng: &mut R,
    ) -> Result<MeasurementOutcome> {
        self.check_dim(rho.matrix().nrows())?;
        let pops = rho.populations().mapv(|p| p.max(0.0));
        Ok(self.sample_from_populations(pops.as_slice().expect("contiguous"), rng))
    }

    /// Post-measurement state `K_m|ψ> / ||K_m|ψ>||`.
    ///
    /// Works in the log domain: the largest `ln|c_i| + ln K_i` is subtracted
    /// before exponentiating, so very sharp measurements never underflow to
    /// the zero vector.
    pub fn posterior_update(&self, state: &SpinState, m: f64) -> Result<SpinState> {
        self.check_dim(state.amplitudes().len())?;
        if !m.is_finite() {
            return Err(Error::InvalidOutcome(m));
        }
        let logk = self.log_kraus(m);
        let shift = state
            .amplitudes()
            .iter()
            .zip(logk.iter())
            .filter(|(c, _)| c.norm_sqr() > 0.0)
            .map(|(c, lk)| c.norm().ln() + lk)
            .fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::InvalidOutcome(m));
        }
        let mut out: Array1<C64> = state
            .amplitudes()
            .iter()
            .zip(logk.iter())
            .map(|(c, lk)| if c.norm_sqr() > 0.0 { c * (lk - shift).exp() } else { C64::new(0.0, 0.0) })
            .collect();
        let norm = out.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidOutcome(m));
        }
        out.mapv_inplace(|c| c / norm);
        Ok(SpinState::from_normalized(self.quantum, out))
    }

    /// `K_m ρ K_m / tr(K_m ρ K_m)`, with the same log-domain shift as the
    /// pure-state update.
    pub fn posterior_update_density(&self, rho: &DensityState, m: f64) -> Result<DensityState> {
        self.check_dim(rho.matrix().nrows())?;
        if !m.is_finite() {
            return Err(Error::InvalidOutcome(m));
        }
        let logk = self.log_kraus(m);
        let pops = rho.populations();
        let shift = pops
            .iter()
            .zip(logk.iter())
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, lk)| 0.5 * p.ln() + lk)
            .fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::InvalidOutcome(m));
        }
        let w = logk.mapv(|lk| (lk - shift).exp());
        let mut out = rho.matrix().clone();
        for ((i, k), v) in out.indexed_iter_mut() {
            *v *= w[i] * w[k];
        }
        let tr: f64 = out.diag().iter().map(|c| c.re).sum();
        if !(tr > 0.0 && tr.is_finite()) {
            return Err(Error::InvalidOutcome(m));
        }
        let d = out.nrows();
        for i in 0..d {
            for k in 0..d {
                out[[i, k]] /= tr;
            }
        }
        // Symmetrize away rounding so Hermiticity holds to machine precision.
        for i in 0..d {
            out[[i, i]].im = 0.0;
            for k in (i + 1)..d {
                let avg = 0.5 * (out[[i, k]] + out[[k, i]].conj());
                out[[i, k]] = avg;
                out[[k, i]] = avg.conj();
            }
        }
        Ok(DensityState::from_matrix_unchecked(self.quantum, out))
    }

    /// `max_{m_z} |∫ g(m; m_z, σ) dm - 1|` over `[-J - 8σ, J + 8σ]` by
    /// adaptive quadrature.
    pub fn povm_completeness_check(&self) -> f64 {
        let j = self.quantum.spin();
        let s = self.sigma;
        let (a, b) = (-j - 8.0 * s, j + 8.0 * s);
        let norm = 1.0 / ((2.0 * PI).sqrt() * s);
        self.quantum
            .m_values()
            .iter()
            .map(|&mz| {
                let g = |m: f64| norm * (-(m - mz) * (m - mz) / (2.0 * s * s)).exp();
                let breaks: Vec<f64> =
                    [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0].iter().map(|k| mz + k * s).collect();
                let (v, _) = adaptive_gk(g, a, b, &breaks, 1e-15, 1e-14);
                (v - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}
