//! Small dense linear-algebra kernels: a symmetric tridiagonal eigensolver
//! and complex matrix helpers used by the propagator and density updates.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Eigenpairs of a real symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    /// Ascending eigenvalues.
    pub values: Array1<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: Array2<f64>,
}

/// Implicit QL with Wilkinson shifts (the classic `tql2`) on a symmetric
/// tridiagonal matrix with diagonal `diag` and sub-diagonal `offdiag`
/// (`offdiag.len() == diag.len() - 1`).
pub fn symmetric_tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<TridiagonalEigen> {
    let n = diag.len();
    assert!(n == 0 || offdiag.len() + 1 == n, "off-diagonal length must be n - 1");
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(offdiag);
    let mut z = Array2::<f64>::eye(n);

    let mut f = 0.0_f64;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iter = 0;
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m >= n {
            m = n - 1;
        }
        if m > l {
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::EigenNoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zk1 = z[[k, i + 1]];
                        let zk = z[[k, i]];
                        z[[k, i + 1]] = s * zk + c * zk1;
                        z[[k, i]] = c * zk - s * zk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = Array1::from_iter(order.iter().map(|&i| d[i]));
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        vectors.column_mut(col).assign(&z.column(src));
    }
    Ok(TridiagonalEigen { values, vectors })
}

/// `V diag(phases) V^H` for a complex eigenvector matrix `v`.
pub fn spectral_synthesis(v: ArrayView2<C64>, phases: ArrayView1<C64>) -> Array2<C64> {
    let scaled = &v * &phases.broadcast(v.raw_dim()).expect("phase length matches columns");
    let vh = v.t().mapv(|x| x.conj());
    scaled.dot(&vh)
}

/// Hermitian conjugate of a square matrix.
pub fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|x| x.conj())
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: ArrayView2<C64>, b: ArrayView2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Entrywise distance of `m^H m` from the identity.
pub fn unitarity_defect(m: &Array2<C64>) -> f64 {
    let prod = adjoint(m).dot(m);
    let eye = Array2::<C64>::eye(m.nrows());
    max_abs_diff(prod.view(), eye.view())
}
