//! Analytical model of the fully chaotic regime: a Haar-random state hit by
//! one Gaussian Kraus operator `K_{m0}`.
//!
//! The Haar average of `<Ψ_m|J_a|Ψ_m>²` is estimated by the ratio
//!
//! ```text
//! (tr{K²J_a}² + tr{K²J_a K²J_a}) / (tr{K²}² + tr{K⁴})
//! ```
//!
//! whose five traces are evaluated in closed form. Two forms are provided:
//!
//! * [`TraceForm::Printed`] – continuum integrals over `m ∈ [-J, J]` with the
//!   large-`J` simplification `J + 1 ≈ J` in the transverse term.
//! * [`TraceForm::Lattice`] – the finite-`J` discrete sums with exact ladder
//!   weights. Wide Gaussians are handled by erf/Gaussian integrals over the
//!   midpoint cells `[-J - 1/2, J + 1/2]` with Euler–Maclaurin endpoint terms;
//!   narrow ones are summed over their support. This is the default.

use std::f64::consts::{PI, SQRT_2, TAU};

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};

use crate::error::{Error, Result};
use crate::observables::mean_qfi_from_length;
use crate::operators::Axis;
use crate::quadrature::{GaussLegendre, KahanSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaarModelInput {
    /// Total spin, a positive multiple of 1/2.
    pub j: f64,
    pub sigma: f64,
    /// Measurement outcome.
    pub m0: f64,
}

impl HaarModelInput {
    pub fn new(j: f64, sigma: f64, m0: f64) -> Result<Self> {
        if !(j >= 1.0 && j.is_finite() && ((2.0 * j).round() - 2.0 * j).abs() < 1e-9) {
            return Err(Error::InvalidConfig(format!("J must be a half-integer >= 1, got {j}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidResolution(sigma));
        }
        if !m0.is_finite() {
            return Err(Error::InvalidOutcome(m0));
        }
        Ok(Self { j, sigma, m0 })
    }
}

/// The five traces entering the Haar estimate for one `(J, σ, m0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaarTraces {
    pub tr_k2: f64,
    pub tr_k4: f64,
    pub tr_k2jz: f64,
    pub tr_k2jz_k2jz: f64,
    /// Also used for `tr{K²J_y K²J_y}`; `tr{K²J_x} = tr{K²J_y} = 0`.
    pub tr_k2jx_k2jx: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceForm {
    Printed,
    #[default]
    Lattice,
}

pub fn closed_form_traces(input: &HaarModelInput, form: TraceForm) -> HaarTraces {
    match form {
        TraceForm::Printed => printed_traces(input),
        TraceForm::Lattice => lattice_traces(input),
    }
}

/// Continuum closed forms transcribed term by term.
fn printed_traces(input: &HaarModelInput) -> HaarTraces {
    let HaarModelInput { j, sigma: s, m0 } = *input;
    let s2 = s * s;
    let tr_k2 = 0.5 * (erf((j - m0) / (SQRT_2 * s)) + erf((j + m0) / (SQRT_2 * s)));
    let erf_pair = erf((j - m0) / s) + erf((j + m0) / s);
    let tr_k4 = erf_pair / (4.0 * (PI * s2).sqrt());
    let tr_k2jz =
        s / TAU.sqrt() * ((-(j + m0).powi(2) / (2.0 * s2)).exp() - (-(j - m0).powi(2) / (2.0 * s2)).exp()) + m0 * tr_k2;
    let tr_k2jz_k2jz = ((m0 - j) * (-(j + m0).powi(2) / s2).exp() - (m0 + j) * (-(j - m0).powi(2) / s2).exp())
        / (4.0 * PI)
        + (m0 * m0 + 0.5 * s2) * tr_k4;
    // Exponents combined before exponentiating.
    let e1 = (-(j * j + m0 * m0) - m0 * (1.0 - 2.0 * j) + j) / s2;
    let e2 = (-(j * j + m0 * m0) - m0 * (1.0 + 2.0 * j) - j) / s2;
    let tr_k2jx_k2jx = ((j + m0) * e1.exp() + (j - m0) * e2.exp()) / (8.0 * PI)
        - (-1.0 / (4.0 * s2)).exp() / (32.0 * PI.sqrt() * s)
            * (-4.0 * j * j + 2.0 * s2 + (1.0 + 2.0 * m0).powi(2))
            * erf_pair;
    HaarTraces { tr_k2, tr_k4, tr_k2jz, tr_k2jz_k2jz, tr_k2jx_k2jx }
}

fn lattice_traces(input: &HaarModelInput) -> HaarTraces {
    lattice_traces_scaled(input, 0.0)
}

/// `(m0 - n*)² / 2σ²` for the Dicke value `n*` nearest to `m0`.
fn nearest_level_exponent(input: &HaarModelInput) -> f64 {
    let j = input.j;
    let nearest = -j + (input.m0.clamp(-j, j) + j).round();
    let d = input.m0 - nearest;
    d * d / (2.0 * input.sigma * input.sigma)
}

/// Lattice traces with every `K²` factor multiplied by `e^{shift}`. All five
/// ratios entering the Haar estimate are unchanged by this rescaling, which
/// keeps sharp measurements between lattice points from underflowing.
fn lattice_traces_scaled(input: &HaarModelInput, shift: f64) -> HaarTraces {
    let HaarModelInput { j, sigma: s, m0 } = *input;
    let s2 = s * s;
    let narrow = s / SQRT_2;
    let g_norm = 1.0 / (TAU.sqrt() * s);
    let g2_norm = 1.0 / (TAU * s2);
    let wide = |poly| scaled_gauss_sum(-j, j, m0, s, poly, shift);
    let sharp = |poly| scaled_gauss_sum(-j, j, m0, narrow, poly, 2.0 * shift);
    // Transverse term: sum over u = m - 1/2 in {-J + 1/2, ..., J - 1/2} of
    // ((J + 1/2)² - u²) g(u + 1/2 - 1) g(u + 1/2).
    let l = j + 0.5;
    let transverse =
        scaled_gauss_sum(-j + 0.5, j - 0.5, m0, narrow, [l * l, 0.0, -1.0], 2.0 * shift - 1.0 / (4.0 * s2));
    HaarTraces {
        tr_k2: g_norm * wide([1.0, 0.0, 0.0]),
        tr_k4: g2_norm * sharp([1.0, 0.0, 0.0]),
        tr_k2jz: g_norm * wide([0.0, 1.0, 0.0]),
        tr_k2jz_k2jz: g2_norm * sharp([0.0, 0.0, 1.0]),
        tr_k2jx_k2jx: 0.5 * g2_norm * transverse,
    }
}

/// `∫_a^b (c + u)^p`-type Gaussian moments: returns `∫_a^b x^p G(x) dx`
/// for `p = 0, 1, 2`, `G(x) = exp(-(x - c)²/(2s²))`.
fn gaussian_moments(a: f64, b: f64, c: f64, s: f64) -> [f64; 3] {
    let (lo, hi) = (a - c, b - c);
    let r = SQRT_2 * s;
    // Difference of erfs computed on the tail side to avoid cancellation.
    let erf_diff = if lo >= 0.0 {
        erfc(lo / r) - erfc(hi / r)
    } else if hi <= 0.0 {
        erfc(-hi / r) - erfc(-lo / r)
    } else {
        erf(hi / r) - erf(lo / r)
    };
    let m0 = s * (PI / 2.0).sqrt() * erf_diff;
    let (glo, ghi) = ((-lo * lo / (2.0 * s * s)).exp(), (-hi * hi / (2.0 * s * s)).exp());
    let s2 = s * s;
    let m1 = s2 * (glo - ghi);
    let m2 = s2 * (lo * glo - hi * ghi) + s2 * m0;
    [m0, m1 + c * m0, m2 + 2.0 * c * m1 + c * c * m0]
}

/// `k`-th derivative of `P(x) G(x)` with `P = p0 + p1 x + p2 x²`.
fn poly_gauss_derivative(poly: [f64; 3], c: f64, s: f64, x: f64, k: usize) -> f64 {
    let u = (x - c) / s;
    // He_0..He_k at u.
    let mut he = vec![1.0, u];
    for n in 1..k {
        he.push(u * he[n] - n as f64 * he[n - 1]);
    }
    let g = (-0.5 * u * u).exp();
    let gderiv = |order: usize| (-1.0 / s).powi(order as i32) * he[order] * g;
    let pderiv = [poly[0] + poly[1] * x + poly[2] * x * x, poly[1] + 2.0 * poly[2] * x, 2.0 * poly[2]];
    let binom = |n: usize, r: usize| -> f64 { (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
    (0..=k.min(2)).map(|jj| binom(k, jj) * pderiv[jj] * gderiv(k - jj)).sum()
}

/// Gaussians narrower than this are summed term by term over their support.
const NARROW_WIDTH: f64 = 4.0;

/// `Σ_{n = lo, lo+1, ..., hi} P(n) exp(-(n - c)²/(2s²))`.
///
/// Wide Gaussians use the midpoint integral plus the Euler–Maclaurin endpoint
/// series and the Poisson (aliasing) series. Narrow ones, where the endpoint
/// series is no longer asymptotic, are summed directly within 9s of the nearest point.
pub fn lattice_gauss_sum(lo: f64, hi: f64, c: f64, s: f64, poly: [f64; 3]) -> f64 {
    scaled_gauss_sum(lo, hi, c, s, poly, 0.0)
}

/// `lattice_gauss_sum` times `e^{log_scale}`, with the factor folded into
/// each exponent.
fn scaled_gauss_sum(lo: f64, hi: f64, c: f64, s: f64, poly: [f64; 3], log_scale: f64) -> f64 {
    if hi < lo {
        return 0.0;
    }
    if s >= NARROW_WIDTH {
        return log_scale.exp() * asymptotic_gauss_sum(lo, hi, c, s, poly);
    }
    let nearest = lo + (c.clamp(lo, hi) - lo).round();
    let reach = (nearest - c).abs() + 9.0 * s;
    let first = ((c - reach - lo).ceil()).max(0.0);
    let last = ((c + reach - lo).floor()).min(hi - lo);
    let mut acc = KahanSum::default();
    let mut i = first;
    while i <= last {
        let n = lo + i;
        let d = (n - c) / s;
        acc.add((poly[0] + poly[1] * n + poly[2] * n * n) * (log_scale - 0.5 * d * d).exp());
        i += 1.0;
    }
    acc.total()
}

/// Midpoint integral, Euler–Maclaurin endpoint series and Poisson series.
fn asymptotic_gauss_sum(lo: f64, hi: f64, c: f64, s: f64, poly: [f64; 3]) -> f64 {
    let (a, b) = (lo - 0.5, hi + 0.5);
    let mom = gaussian_moments(a, b, c, s);
    let integral = poly[0] * mom[0] + poly[1] * mom[1] + poly[2] * mom[2];

    let delta = |k: usize| poly_gauss_derivative(poly, c, s, b, k) - poly_gauss_derivative(poly, c, s, a, k);
    let endpoint = -delta(1) / 24.0 + 7.0 * delta(3) / 5760.0 - 31.0 * delta(5) / 967_680.0;

    // Poisson series: Σ_{k≥1} 2 Re[e^{2πik(δ - c)} F̂(k)], δ the lattice offset.
    let offset = lo - lo.floor();
    let p0 = poly[0] + poly[1] * c + poly[2] * c * c;
    let p1 = poly[1] + 2.0 * poly[2] * c;
    let p2 = poly[2];
    let s2 = s * s;
    let mut alias = 0.0;
    for k in 1..64 {
        let w = TAU * k as f64;
        let damp = (-0.5 * w * w * s2).exp();
        if damp < 1e-20 {
            break;
        }
        let phi = TAU.sqrt() * s * damp;
        let theta = w * (offset - c);
        let alpha = p0 + p2 * (s2 - w * w * s2 * s2);
        let beta = w * s2 * p1;
        alias += 2.0 * phi * (alpha * theta.cos() + beta * theta.sin());
    }
    integral + endpoint + alias
}

/// Haar estimate of `E[<Ψ_m|J_a|Ψ_m>²]` (clamped at 0).
pub fn haar_expectation_sq(input: &HaarModelInput, axis: Axis, form: TraceForm) -> f64 {
    let t = match form {
        TraceForm::Printed => printed_traces(input),
        TraceForm::Lattice => lattice_traces_scaled(input, nearest_level_exponent(input)),
    };
    expectation_from_traces(&t, axis)
}

pub fn expectation_from_traces(t: &HaarTraces, axis: Axis) -> f64 {
    let denom = t.tr_k2 * t.tr_k2 + t.tr_k4;
    let numer = match axis {
        Axis::Z => t.tr_k2jz * t.tr_k2jz + t.tr_k2jz_k2jz,
        Axis::X | Axis::Y => t.tr_k2jx_k2jx,
    };
    (numer / denom).max(0.0)
}

/// `Σ_a E[<J_a>²]` for one outcome.
fn magnetization_sq(input: &HaarModelInput, form: TraceForm) -> (f64, f64) {
    let (t, weight) = match form {
        TraceForm::Printed => {
            let t = printed_traces(input);
            (t, t.tr_k2)
        }
        TraceForm::Lattice => {
            let shift = nearest_level_exponent(input);
            let t = lattice_traces_scaled(input, shift);
            (t, t.tr_k2 * (-shift).exp())
        }
    };
    let total = Axis::ALL.iter().map(|&a| expectation_from_traces(&t, a)).sum();
    (weight, total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveOptions {
    pub form: TraceForm,
    /// Total Gauss–Legendre nodes for smooth integrands.
    pub nodes: usize,
    /// Nodes per panel.
    pub order: usize,
    /// Allowed relative change when the panel order is doubled.
    pub tolerance: f64,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self { form: TraceForm::Lattice, nodes: 2048, order: 16, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub j: f64,
    pub sigma: f64,
    pub sigma_over_sqrt_j: f64,
    pub sigma_over_j: f64,
    /// Outcome-averaged `E[||<J>||²]`.
    pub mag_len_sq: f64,
    pub mean_qfi: f64,
    pub mean_qfi_over_j2: f64,
    /// Relative change under panel-order doubling.
    pub relative_change: f64,
    pub converged: bool,
}

/// Below this resolution the traces carry structure on the unit lattice:
/// bumps of width ~σ around every integer and half-integer outcome offset.
const LATTICE_SIGMA: f64 = 1.5;

/// Panel boundaries over the outcome window `[-J - 8σ, J + 8σ]`.
fn outcome_panels(j: f64, sigma: f64, opts: &CurveOptions) -> Vec<f64> {
    let lo = -j - 8.0 * sigma;
    let hi = j + 8.0 * sigma;
    if sigma >= LATTICE_SIGMA {
        let n = ((hi - lo) / sigma).ceil().max((opts.nodes / opts.order).max(1) as f64) as usize;
        return (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    }
    // Half-cells between consecutive bump centres, each refined to width σ
    // within 8σ of its ends.
    let start = -j - (8.0 * sigma / 0.5).ceil() * 0.5;
    let cells = ((hi - start) / 0.5).ceil() as usize;
    let reach = (8.0 * sigma).min(0.25);
    let steps = (reach / sigma).ceil() as usize;
    let mut edges = Vec::with_capacity(cells * (2 * steps + 1) + 1);
    for c in 0..cells {
        let x = start + 0.5 * c as f64;
        edges.push(x);
        for i in 1..=steps {
            edges.push(x + reach * i as f64 / steps as f64);
        }
        for i in (1..=steps).rev() {
            let y = x + 0.5 - reach * i as f64 / steps as f64;
            if y > *edges.last().unwrap() + 1e-12 {
                edges.push(y);
            }
        }
    }
    edges.push(start + 0.5 * cells as f64);
    edges
}

/// `(∫ p, ∫ p·E)` over outcomes with an `order`-point rule per panel.
fn outcome_average(j: f64, sigma: f64, opts: &CurveOptions, order: usize) -> (f64, f64) {
    let rule = GaussLegendre::new(order);
    let mut weight = KahanSum::default();
    let mut moment = KahanSum::default();
    for pair in outcome_panels(j, sigma, opts).windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[0] + pair[1]);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let m0 = mid + half * x;
            let (p_m0, e) = magnetization_sq(&HaarModelInput { j, sigma, m0 }, opts.form);
            weight.add(half * w * p_m0);
            moment.add(half * w * p_m0 * e);
        }
    }
    (weight.total(), moment.total())
}

/// Outcome-averaged mean QFI of the one-shot Haar model for each `σ`.
///
/// Outcomes are weighted by the Haar-averaged outcome density
/// `p(m0) ∝ tr K²_{m0}`. Convergence is checked by doubling the per-panel
/// order; points that move by more than `opts.tolerance` are flagged.
pub fn haar_mean_qfi_curve(j: f64, sigmas: &[f64], opts: &CurveOptions) -> Result<Vec<CurvePoint>> {
    if sigmas.is_empty() {
        return Err(Error::InvalidConfig("sigma grid is empty".into()));
    }
    HaarModelInput::new(j, 1.0, 0.0)?;
    for &s in sigmas {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidResolution(s));
        }
    }
    Ok(crate::par::map_slice(sigmas, crate::par::Execution::default(), |&sigma| {
        let (w1, m1) = outcome_average(j, sigma, opts, opts.order);
        let (w2, m2) = outcome_average(j, sigma, opts, 2 * opts.order);
        let coarse = m1 / w1;
        let fine = m2 / w2;
        let relative_change = ((fine - coarse) / fine).abs();
        let mean_qfi = mean_qfi_from_length(j, fine);
        CurvePoint {
            j,
            sigma,
            sigma_over_sqrt_j: sigma / j.sqrt(),
            sigma_over_j: sigma / j,
            mag_len_sq: fine,
            mean_qfi,
            mean_qfi_over_j2: mean_qfi / (j * j),
            relative_change,
            converged: relative_change <= opts.tolerance,
        }
    }))
}
