use statrs::distribution::{ContinuousCDF, Normal};

use crate::diffops::{apply_dx, apply_dy, gradient_cost, DiffMatrix, GradientField, Surface};
use crate::error::{Error, Result};

/// Per-trial quality measures of one reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrialMetrics {
    /// Least-squares gradient cost of the reconstruction against the
    /// measured field.
    pub cost_residual: f64,
    /// `‖Z − Z_true‖_F / ‖Z_true‖_F` with both surfaces mean-free.
    pub rel_error: f64,
    /// Kolmogorov–Smirnov distance of the standardized gradient residuals
    /// from N(0, 1).
    pub ks_statistic: f64,
    /// Number of residual samples behind `ks_statistic`.
    pub ks_samples: usize,
}

impl TrialMetrics {
    /// Asymptotic p-value of `ks_statistic`.
    pub fn ks_p_value(&self) -> f64 {
        ks_p_value(self.ks_statistic, self.ks_samples)
    }
}

/// Computes [`TrialMetrics`] for `z` against `truth` and the measured field.
pub fn evaluate(
    z: &Surface,
    truth: &Surface,
    g: &GradientField,
    dx: &DiffMatrix,
    dy: &DiffMatrix,
) -> Result<TrialMetrics> {
    if z.heights.shape() != truth.heights.shape() || z.heights.shape() != g.zx.shape() {
        return Err(Error::dim(format!(
            "surface {:?}, truth {:?} and gradient {:?} must agree",
            z.heights.shape(),
            truth.heights.shape(),
            g.zx.shape()
        )));
    }
    let cost_residual = gradient_cost(&z.heights, g, dx, dy)?;
    let reference = truth.mean_free().heights;
    let diff = (z.mean_free().heights - &reference).norm();
    let scale = reference.norm();
    let rel_error = if scale > 0.0 { diff / scale } else { diff };

    let rx = apply_dx(&z.heights, dx)? - &g.zx;
    let ry = apply_dy(&z.heights, dy)? - &g.zy;
    let mut pooled = standardize(rx.as_slice());
    pooled.extend(standardize(ry.as_slice()));
    let ks_samples = pooled.len();
    let ks_statistic = ks_normal(&mut pooled);

    Ok(TrialMetrics {
        cost_residual,
        rel_error,
        ks_statistic,
        ks_samples,
    })
}

/// `(x − mean)/sd` with the sample standard deviation; all zeros when the
/// sample has no spread.
pub fn standardize(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd <= f64::EPSILON * mean.abs().max(1.0) * 1e3 {
        return vec![0.0; n];
    }
    x.iter().map(|v| (v - mean) / sd).collect()
}

/// One-sample KS distance of `x` from the standard normal. A sample with no
/// spread (all zeros after [`standardize`]) scores 0. Sorts `x` in place.
pub fn ks_normal(x: &mut [f64]) -> f64 {
    let n = x.len();
    if n == 0 || x.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    x.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let nf = n as f64;
    x.iter().enumerate().fold(0.0f64, |d, (i, v)| {
        let f = normal.cdf(*v);
        d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f)
    })
}

/// Asymptotic Kolmogorov p-value with the small-sample correction
/// `λ = (√n + 0.12 + 0.11/√n)·D`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    if n == 0 || d <= 0.0 {
        return 1.0;
    }
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64 * lambda).powi(2)).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
