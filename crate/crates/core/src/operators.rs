//! Collective spin operators in the Dicke basis of the symmetric subspace.
//!
//! Basis ordering is fixed project-wide: index `i` carries `m_z = J - i`, so
//! index 0 is the stretched state `|J, +J>` and index `N` is `|J, -J>`.

use std::fmt;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_tridiagonal_eigen, TridiagonalEigen};

/// Particle number `N`, total spin `J = N/2` and Hilbert dimension `N + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct SpinQuantum {
    n: u32,
}

impl SpinQuantum {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySystem);
        }
        Ok(Self { n })
    }

    pub fn particles(self) -> u32 {
        self.n
    }

    pub fn spin(self) -> f64 {
        f64::from(self.n) / 2.0
    }

    pub fn dim(self) -> usize {
        self.n as usize + 1
    }

    /// `m_z` value carried by basis index `i`.
    pub fn m_at(self, i: usize) -> f64 {
        self.spin() - i as f64
    }

    /// Basis index of `m_z = m`, if `m` lies on the lattice `{-J, ..., J}`.
    pub fn index_of(self, m: f64) -> Result<usize> {
        let j = self.spin();
        let offset = j - m;
        let rounded = offset.round();
        if !m.is_finite() || (offset - rounded).abs() > 1e-9 || rounded < 0.0 || rounded > f64::from(self.n) {
            return Err(Error::MagneticNumberOutOfRange { m, j });
        }
        Ok(rounded as usize)
    }

    /// All `m_z` values in basis order (descending).
    pub fn m_values(self) -> Array1<f64> {
        Array1::from_iter((0..self.dim()).map(|i| self.m_at(i)))
    }
}

impl TryFrom<u32> for SpinQuantum {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

impl From<SpinQuantum> for u32 {
    fn from(q: SpinQuantum) -> u32 {
        q.n
    }
}

impl fmt::Display for SpinQuantum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} (J={})", self.n, self.spin())
    }
}

/// Cartesian spin component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// Eigendecomposition of a transverse spin component, `J_a = V diag(λ) V^H`.
#[derive(Debug, Clone)]
pub struct SpinEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<C64>,
}

/// Precomputed `J_x`, `J_y`, `J_z` for fixed `J`.
///
/// `J_z` is diagonal and `J_x`, `J_y` are tridiagonal with couplings
/// `<m+1|J_x|m> = C_m^+ / 2`, `(C_m^±)^2 = (J ∓ m)(J ± m + 1)`. Immutable after
/// construction and cheap to share between threads.
#[derive(Debug, Clone)]
pub struct CollectiveOps {
    quantum: SpinQuantum,
    jz: Array1<f64>,
    /// `ladder[i] = <m_i|J_+|m_{i+1}> = C^+_{m_{i+1}}`, length `d - 1`.
    ladder: Array1<f64>,
    jx_eigen: SpinEigen,
    jy_eigen: SpinEigen,
}

/// Raising coefficient `C_m^+ = sqrt((J - m)(J + m + 1))`.
pub fn ladder_plus(j: f64, m: f64) -> f64 {
    ((j - m) * (j + m + 1.0)).max(0.0).sqrt()
}

/// Lowering coefficient `C_m^- = sqrt((J + m)(J - m + 1))`.
pub fn ladder_minus(j: f64, m: f64) -> f64 {
    ((j + m) * (j - m + 1.0)).max(0.0).sqrt()
}

pub fn make_ops(quantum: SpinQuantum) -> Result<CollectiveOps> {
    CollectiveOps::new(quantum)
}

impl CollectiveOps {
    pub fn new(quantum: SpinQuantum) -> Result<Self> {
        let j = quantum.spin();
        let d = quantum.dim();
        let jz = quantum.m_values();
        let ladder = Array1::from_iter((0..d - 1).map(|i| ladder_plus(j, quantum.m_at(i + 1))));

        // J_x is real symmetric tridiagonal with zero diagonal.
        let half: Vec<f64> = ladder.iter().map(|c| 0.5 * c).collect();
        let TridiagonalEigen { values, vectors } = symmetric_tridiagonal_eigen(&vec![0.0; d], &half)?;
        let jx_vectors = vectors.mapv(|x| C64::new(x, 0.0));

        // J_y = P J_x P^H with P = diag(i^k), so its eigenvectors are P V_x.
        let phase = |k: usize| match k % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let mut jy_vectors = jx_vectors.clone();
        for (k, mut row) in jy_vectors.rows_mut().into_iter().enumerate() {
            let p = phase(k);
            row.mapv_inplace(|x| x * p);
        }

        Ok(Self {
            quantum,
            jz,
            ladder,
            jx_eigen: SpinEigen { values: values.clone(), vectors: jx_vectors },
            jy_eigen: SpinEigen { values, vectors: jy_vectors },
        })
    }

    pub fn quantum(&self) -> SpinQuantum {
        self.quantum
    }

    pub fn dim(&self) -> usize {
        self.quantum.dim()
    }

    /// Diagonal of `J_z` in basis order.
    pub fn jz(&self) -> &Array1<f64> {
        &self.jz
    }

    /// `<m_i|J_+|m_{i+1}>` for consecutive basis indices.
    pub fn ladder(&self) -> &Array1<f64> {
        &self.ladder
    }

    /// Eigendecomposition of `J_x` or `J_y`; `None` for `J_z`, which is diagonal.
    pub fn eigen(&self, axis: Axis) -> Option<&SpinEigen> {
        match axis {
            Axis::X => Some(&self.jx_eigen),
            Axis::Y => Some(&self.jy_eigen),
            Axis::Z => None,
        }
    }

    /// Dense matrix of a spin component.
    pub fn dense(&self, axis: Axis) -> Array2<C64> {
        let d = self.dim();
        let mut out = Array2::<C64>::zeros((d, d));
        match axis {
            Axis::Z => {
                for (i, &m) in self.jz.iter().enumerate() {
                    out[[i, i]] = C64::new(m, 0.0);
                }
            }
            Axis::X | Axis::Y => {
                for (i, &c) in self.ladder.iter().enumerate() {
                    let (upper, lower) = self.coupling(axis, c);
                    out[[i, i + 1]] = upper;
                    out[[i + 1, i]] = lower;
                }
            }
        }
        out
    }

    /// Entries `(J_a)_{i,i+1}` and `(J_a)_{i+1,i}` for a ladder coefficient.
    fn coupling(&self, axis: Axis, c: f64) -> (C64, C64) {
        match axis {
            Axis::X => (C64::new(0.5 * c, 0.0), C64::new(0.5 * c, 0.0)),
            // J_y = (J_+ - J_-) / 2i
            Axis::Y => (C64::new(0.0, -0.5 * c), C64::new(0.0, 0.5 * c)),
            Axis::Z => unreachable!("J_z has no off-diagonal couplings"),
        }
    }

    /// `J_a |psi>` in O(d).
    pub fn apply(&self, axis: Axis, psi: &[C64]) -> Array1<C64> {
        let d = self.dim();
        assert_eq!(psi.len(), d, "state dimension mismatch");
        match axis {
            Axis::Z => Array1::from_iter(psi.iter().zip(self.jz.iter()).map(|(c, &m)| c * m)),
            Axis::X | Axis::Y => {
                let mut out = Array1::<C64>::zeros(d);
                for (i, &c) in self.ladder.iter().enumerate() {
                    let (upper, lower) = self.coupling(axis, c);
                    out[i] += upper * psi[i + 1];
                    out[i + 1] += lower * psi[i];
                }
                out
            }
        }
    }

    /// `(<J_x>, <J_y>, <J_z>)` for a normalized amplitude vector, O(d).
    pub fn first_moments(&self, psi: &[C64]) -> [f64; 3] {
        let mut jx = 0.0;
        let mut jy = 0.0;
        for (i, &c) in self.ladder.iter().enumerate() {
            let z = psi[i].conj() * psi[i + 1];
            jx += c * z.re;
            jy += c * z.im;
        }
        let jz = psi.iter().zip(self.jz.iter()).map(|(c, &m)| c.norm_sqr() * m).sum();
        [jx, jy, jz]
    }

    /// `(tr ρJ_x, tr ρJ_y, tr ρJ_z)` for a density matrix, O(d).
    pub fn first_moments_density(&self, rho: &Array2<C64>) -> [f64; 3] {
        let mut jx = 0.0;
        let mut jy = 0.0;
        for (i, &c) in self.ladder.iter().enumerate() {
            let r = rho[[i, i + 1]];
            jx += c * r.re;
            jy -= c * r.im;
        }
        let jz = self.jz.iter().enumerate().map(|(i, &m)| rho[[i, i]].re * m).sum();
        [jx, jy, jz]
    }
}
