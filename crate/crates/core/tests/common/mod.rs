//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Dense spin matrices built straight from the angular-momentum matrix
/// elements, indexed by `i ↔ m = J - i`.
pub fn spin_matrices(n: u32) -> [Array2<C64>; 3] {
    let d = n as usize + 1;
    let j = n as f64 / 2.0;
    let mut jx = Array2::zeros((d, d));
    let mut jy = Array2::zeros((d, d));
    let mut jz = Array2::zeros((d, d));
    for i in 0..d {
        let m = j - i as f64;
        jz[[i, i]] = C64::new(m, 0.0);
        if i + 1 < d {
            // <m|J+|m-1> = sqrt(j(j+1) - m(m-1))
            let c = (j * (j + 1.0) - m * (m - 1.0)).sqrt();
            jx[[i, i + 1]] = C64::new(c / 2.0, 0.0);
            jx[[i + 1, i]] = C64::new(c / 2.0, 0.0);
            jy[[i, i + 1]] = C64::new(0.0, -c / 2.0);
            jy[[i + 1, i]] = C64::new(0.0, c / 2.0);
        }
    }
    [jx, jy, jz]
}

fn one_norm(a: &Array2<C64>) -> f64 {
    (0..a.ncols()).map(|c| a.column(c).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(a)` by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    let d = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.mapv(|z| z / 2f64.powi(squarings as i32));
    let mut result = Array2::<C64>::eye(d);
    let mut term = Array2::<C64>::eye(d);
    for k in 1..=30 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        result += &term;
        if one_norm(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// `exp(-i t H)`.
pub fn expm_i(h: &Array2<C64>, t: f64) -> Array2<C64> {
    expm(&h.mapv(|z| z * C64::new(0.0, -t)))
}

pub fn matvec(a: &Array2<C64>, v: &[C64]) -> Array1<C64> {
    a.dot(&Array1::from(v.to_vec()))
}

pub fn expectation(op: &Array2<C64>, v: &[C64]) -> C64 {
    let w = matvec(op, v);
    v.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Mean QFI from dense operators: (4/3) Σ_a Var(J_a).
pub fn mean_qfi_dense(n: u32, v: &[C64]) -> f64 {
    let ops = spin_matrices(n);
    let mut total = 0.0;
    for op in &ops {
        let first = expectation(op, v).re;
        let second = expectation(&op.dot(op), v).re;
        total += second - first * first;
    }
    4.0 / 3.0 * total
}

/// Haar-random vector from normalized complex Gaussians.
pub fn haar_vector<R: Rng>(d: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> =
        (0..d).map(|_| C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Exact finite-J Haar traces by brute-force summation over the Dicke basis:
/// `[tr K², tr K⁴, tr K²J_z, tr K²J_zK²J_z, tr K²J_xK²J_x]`.
pub fn discrete_traces(j: f64, sigma: f64, m0: f64) -> [f64; 5] {
    let n = (2.0 * j).round() as u32;
    let d = n as usize + 1;
    let g: Vec<f64> = (0..d)
        .map(|i| {
            let m = j - i as f64;
            (-(m - m0) * (m - m0) / (2.0 * sigma * sigma)).exp() / (2.0 * std::f64::consts::PI * sigma * sigma).sqrt()
        })
        .collect();
    let mut out = [0.0; 5];
    for (i, &gi) in g.iter().enumerate() {
        let m = j - i as f64;
        out[0] += gi;
        out[1] += gi * gi;
        out[2] += gi * m;
        out[3] += gi * gi * m * m;
    }
    // Σ_{l,m} g(l) g(m) |<l|J_x|m>|² with <m|J_x|m-1> = C⁻_m / 2.
    for i in 0..d - 1 {
        let m = j - i as f64;
        let c_minus = ((j + m) * (j - m + 1.0)).sqrt();
        out[4] += 2.0 * g[i] * g[i + 1] * c_minus * c_minus / 4.0;
    }
    out
}

/// One-sample Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// KS critical value at significance 1e-3.
pub fn ks_critical(n: usize) -> f64 {
    1.95 / (n as f64).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
