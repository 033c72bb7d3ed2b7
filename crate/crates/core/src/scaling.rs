//! Power-law scaling fits `F̄_Q = c N^β` by weighted least squares in
//! log-log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{SweepResult, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: f64,
    pub mean: f64,
    pub sem: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub beta: f64,
    pub c: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Covariance of `(ln c, β)`.
    pub covariance: [[f64; 2]; 2],
}

impl ScalingFit {
    pub fn beta_stderr(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }
}

/// Weighted least squares of `ln mean` on `ln N`.
///
/// Weights are `1 / (sem/mean)²`, the delta-method variance of `ln mean`,
/// and the covariance is `(XᵀWX)⁻¹`. When any point lacks a positive sem the
/// fit falls back to equal weights with a residual-variance covariance.
pub fn fit_power_law(points: &[ScalingPoint]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::InvalidFit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.mean > 0.0 && p.mean.is_finite())) {
        return Err(Error::InvalidFit(format!("non-positive mean {} at N = {}", p.mean, p.n)));
    }
    if let Some(p) = points.iter().find(|p| !(p.n > 0.0 && p.n.is_finite())) {
        return Err(Error::InvalidFit(format!("invalid system size {}", p.n)));
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.n).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InvalidFit("singular design: fewer than 2 distinct system sizes".into()));
    }

    let known_variance = points.iter().all(|p| p.sem > 0.0 && p.sem.is_finite());
    // Sort so the result does not depend on input order.
    let mut pts: Vec<ScalingPoint> = points.to_vec();
    pts.sort_by(|a, b| a.n.total_cmp(&b.n).then(a.mean.total_cmp(&b.mean)).then(a.sem.total_cmp(&b.sem)));
    let data: Vec<(f64, f64, f64)> = pts
        .iter()
        .map(|p| {
            let w = if known_variance { (p.mean / p.sem).powi(2) } else { 1.0 };
            (p.n.ln(), p.mean.ln(), w)
        })
        .collect();

    let sw: f64 = data.iter().map(|d| d.2).sum();
    let xbar = data.iter().map(|d| d.2 * d.0).sum::<f64>() / sw;
    let ybar = data.iter().map(|d| d.2 * d.1).sum::<f64>() / sw;
    let sxx: f64 = data.iter().map(|d| d.2 * (d.0 - xbar).powi(2)).sum();
    let sxy: f64 = data.iter().map(|d| d.2 * (d.0 - xbar) * (d.1 - ybar)).sum();
    let syy: f64 = data.iter().map(|d| d.2 * (d.1 - ybar).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidFit("singular design".into()));
    }
    let beta = sxy / sxx;
    let intercept = ybar - beta * xbar;
    let rss: f64 = data.iter().map(|d| d.2 * (d.1 - intercept - beta * d.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - rss / syy).clamp(0.0, 1.0) } else { 1.0 };

    let scale = if known_variance {
        1.0
    } else if data.len() > 2 {
        rss / (data.len() as f64 - 2.0)
    } else {
        0.0
    };
    let var_beta = scale / sxx;
    let var_intercept = scale * (1.0 / sw + xbar * xbar / sxx);
    let cov = -scale * xbar / sxx;
    Ok(ScalingFit {
        beta,
        c: intercept.exp(),
        r_squared,
        n_points: data.len(),
        covariance: [[var_intercept, cov], [cov, var_beta]],
    })
}

/// One `β` estimate on a rescaled-resolution grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaPoint {
    pub k: f64,
    pub sigma_over_sqrt_j: f64,
    pub fit: Option<ScalingFit>,
    /// Why the point was not fitted.
    pub flag: Option<String>,
    pub sizes: Vec<u32>,
}

fn matches_grid(row: &SweepRow, target: f64) -> bool {
    (row.sigma_over_sqrt_j - target).abs() <= 1e-9 * target.abs().max(1e-300)
}

/// Fits `β` for every `(k, σ/√J)` pair. Rows are matched exactly on the
/// rescaled resolution (they are generated from it), never interpolated.
pub fn beta_curve(sweep: &SweepResult, grid: &[f64]) -> Vec<BetaPoint> {
    let mut ks: Vec<f64> = sweep.rows.iter().map(|r| r.k).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let mut out = Vec::new();
    for &k in &ks {
        for &g in grid {
            let rows: Vec<&SweepRow> =
                sweep.rows.iter().filter(|r| r.k == k && r.is_ok() && matches_grid(r, g)).collect();
            let mut sizes: Vec<u32> = rows.iter().map(|r| r.n).collect();
            sizes.sort_unstable();
            sizes.dedup();
            let (fit, flag) = if sizes.len() < 3 {
                (None, Some(format!("only {} system sizes available", sizes.len())))
            } else {
                let pts: Vec<ScalingPoint> =
                    rows.iter().map(|r| ScalingPoint { n: f64::from(r.n), mean: r.mean, sem: r.sem }).collect();
                match fit_power_law(&pts) {
                    Ok(f) => (Some(f), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            };
            out.push(BetaPoint { k, sigma_over_sqrt_j: g, fit, flag, sizes });
        }
    }
    out
}
