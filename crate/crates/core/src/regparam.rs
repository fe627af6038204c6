//! Standard-form Tikhonov regularization in the singular bases of the
//! differentiation operators.
//!
//! With `Dx = Ux·Sx·Vxᵀ` and `Dy = Uy·Sy·Vyᵀ`, the regularized normal
//! equations decouple entrywise once `Z = Vy·M·Vxᵀ`:
//!
//! ```text
//! mᵢⱼ(λ) = (βᵢ pᵢⱼ + αⱼ qᵢⱼ) / (αⱼ² + βᵢ² + 2λ²)
//! ```
//!
//! where `P = Uyᵀ·Ẑy·Vx` and `Q = Vyᵀ·Ẑx·Ux`. After the two SVDs every
//! further λ costs `O(mn)`, which makes L-curve sweeps cheap.

use rayon::prelude::*;

use crate::diffops::{DiffMatrix, GradientField, Surface};
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Singular values below this fraction of the largest are the null direction.
const NULL_SV_TOL: f64 = 1e-10;

/// Decomposition of the x- and y-operators plus the transformed gradient.
#[derive(Debug, Clone)]
pub struct SpectralCache {
    /// Singular values of `Dx`, descending; the last one is exactly zero.
    pub alpha: Vector,
    /// Singular values of `Dy`, descending; the last one is exactly zero.
    pub beta: Vector,
    pub vx: Matrix,
    pub vy: Matrix,
    pub ux: Matrix,
    pub uy: Matrix,
    /// `Uyᵀ·Ẑy·Vx`
    pub p: Matrix,
    /// `Vyᵀ·Ẑx·Ux`
    pub q: Matrix,
    hx: f64,
    hy: f64,
}

/// One point of the L-curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LCurvePoint {
    pub lambda: f64,
    /// `ρ(λ)`, the square root of the gradient residual.
    pub rho: f64,
    /// `η(λ) = ‖Z(λ)‖_F`.
    pub eta: f64,
}

/// SVD of a square operator with singular values sorted descending and the
/// null value snapped to 0.
///
/// Built from the symmetric eigendecompositions of `DᵀD` (for `V` and the
/// singular values) and `DDᵀ` (for the left null vector), with
/// `uᵢ = D·vᵢ/σᵢ` elsewhere. nalgebra's bidiagonal SVD occasionally returns
/// singular vectors that do not reproduce these operators.
fn sorted_svd(d: &DiffMatrix, name: &str) -> Result<(Vector, Matrix, Matrix)> {
    let dm = d.matrix();
    let k = dm.nrows();
    let eig = dm.tr_mul(dm).symmetric_eigen();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut s = Vector::zeros(k);
    let mut vs = Matrix::zeros(k, k);
    for (dst, &src) in order.iter().enumerate() {
        s[dst] = eig.eigenvalues[src].max(0.0).sqrt();
        vs.set_column(dst, &eig.eigenvectors.column(src));
    }
    let smax = s[0];
    // eigenvalues of DᵀD carry an absolute error near eps·smax², so the null
    // value shows up around sqrt(eps)·smax
    let null = s
        .iter()
        .filter(|&&v| v <= NULL_SV_TOL.sqrt() * smax)
        .count();
    if null != 1 {
        return Err(Error::Singular(format!(
            "{name} has {null} null singular values, expected exactly one"
        )));
    }
    s[k - 1] = 0.0;

    let mut us = Matrix::zeros(k, k);
    for j in 0..k - 1 {
        us.set_column(j, &((dm * vs.column(j)) / s[j]));
    }
    let left = (dm * dm.transpose()).symmetric_eigen();
    let imin = left.eigenvalues.imin();
    us.set_column(k - 1, &left.eigenvectors.column(imin));
    Ok((s, us, vs))
}

impl SpectralCache {
    /// Two SVDs plus the transformed gradient components.
    pub fn build(g: &GradientField, dx: &DiffMatrix, dy: &DiffMatrix) -> Result<Self> {
        let (m, n) = (g.rows(), g.cols());
        if dx.n() != n || dy.n() != m {
            return Err(Error::dim(format!(
                "operators are Dx {0}×{0}, Dy {1}×{1} but the gradient grid is {m}×{n}",
                dx.n(),
                dy.n()
            )));
        }
        let (x, y) = rayon::join(|| sorted_svd(dx, "Dx"), || sorted_svd(dy, "Dy"));
        let (alpha, ux, vx) = x?;
        let (beta, uy, vy) = y?;
        let p = uy.tr_mul(&g.zy) * &vx;
        let q = vy.tr_mul(&g.zx) * &ux;
        Ok(SpectralCache {
            alpha,
            beta,
            vx,
            vy,
            ux,
            uy,
            p,
            q,
            hx: g.hx,
            hy: g.hy,
        })
    }

    pub fn rows(&self) -> usize {
        self.beta.len()
    }

    pub fn cols(&self) -> usize {
        self.alpha.len()
    }

    /// `μᵢⱼ² = αⱼ² + βᵢ²`, the eigenvalues of the Sylvester operator.
    pub fn operator_eigenvalues(&self) -> Matrix {
        Matrix::from_fn(self.rows(), self.cols(), |i, j| {
            self.alpha[j].powi(2) + self.beta[i].powi(2)
        })
    }

    /// The coefficient matrix `M(λ)`. The doubly-null entry (αⱼ = βᵢ = 0) is
    /// the constant of integration and is always 0.
    pub fn tikhonov_coefficients(&self, lambda: f64) -> Result<Matrix> {
        check_lambda(lambda)?;
        let two_l2 = 2.0 * lambda * lambda;
        Ok(Matrix::from_fn(self.rows(), self.cols(), |i, j| {
            let (a, b) = (self.alpha[j], self.beta[i]);
            let denom = a * a + b * b + two_l2;
            if a == 0.0 && b == 0.0 {
                0.0
            } else {
                (b * self.p[(i, j)] + a * self.q[(i, j)]) / denom
            }
        }))
    }

    /// `fᵢⱼ(λ) = μᵢⱼ²/(μᵢⱼ² + 2λ²)`; the doubly-null entry is reported as 0.
    pub fn filter_factors(&self, lambda: f64) -> Result<Matrix> {
        check_lambda(lambda)?;
        let two_l2 = 2.0 * lambda * lambda;
        Ok(self.operator_eigenvalues().map(|mu2| {
            if mu2 == 0.0 {
                0.0
            } else {
                mu2 / (mu2 + two_l2)
            }
        }))
    }

    /// `(ρ², η²)` at the given coefficients, evaluated in the singular bases.
    fn residual_and_penalty(&self, coeffs: &Matrix) -> (f64, f64) {
        let mut rho2 = 0.0;
        for j in 0..self.cols() {
            for i in 0..self.rows() {
                let mij = coeffs[(i, j)];
                rho2 += (mij * self.alpha[j] - self.q[(i, j)]).powi(2);
                rho2 += (self.beta[i] * mij - self.p[(i, j)]).powi(2);
            }
        }
        (rho2, coeffs.norm_squared())
    }

    /// `ρ²(λ)` computed in transformed coordinates.
    pub fn residual_squared(&self, lambda: f64) -> Result<f64> {
        Ok(self
            .residual_and_penalty(&self.tikhonov_coefficients(lambda)?)
            .0)
    }

    /// Points `(λ, ρ(λ), η(λ))` on an ascending grid of positive λ.
    pub fn l_curve(&self, grid: &[f64]) -> Result<Vec<LCurvePoint>> {
        if grid.is_empty() {
            return Err(Error::arg("L-curve grid is empty"));
        }
        if grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::arg(
                "L-curve grid values must be positive and finite",
            ));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::arg("L-curve grid must be strictly ascending"));
        }
        grid.par_iter()
            .map(|&lambda| {
                let coeffs = self.tikhonov_coefficients(lambda)?;
                let (rho2, eta2) = self.residual_and_penalty(&coeffs);
                Ok(LCurvePoint {
                    lambda,
                    rho: rho2.sqrt(),
                    eta: eta2.sqrt(),
                })
            })
            .collect()
    }

    /// `count` logarithmically spaced values spanning
    /// `[1e-4, 1e1]·median(μᵢⱼ)` over the non-null `μᵢⱼ`.
    pub fn default_grid(&self, count: usize) -> Vec<f64> {
        let mut mus: Vec<f64> = self
            .operator_eigenvalues()
            .iter()
            .filter(|v| **v > 0.0)
            .map(|v| v.sqrt())
            .collect();
        mus.sort_by(f64::total_cmp);
        let median = if mus.is_empty() {
            1.0
        } else {
            mus[mus.len() / 2]
        };
        log_grid(1e-4 * median, 1e1 * median, count)
    }

    /// `Z(λ) = Vy·M(λ)·Vxᵀ`.
    pub fn reconstruct(&self, lambda: f64) -> Result<Surface> {
        let coeffs = self.tikhonov_coefficients(lambda)?;
        Surface::new(&self.vy * coeffs * self.vx.transpose(), self.hx, self.hy)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::arg(format!(
            "regularization parameter must be non-negative, got {lambda}"
        )));
    }
    Ok(())
}

/// `count` points spaced evenly in `log10` between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64))
                .collect()
        }
    }
}

pub fn build_cache(g: &GradientField, dx: &DiffMatrix, dy: &DiffMatrix) -> Result<SpectralCache> {
    SpectralCache::build(g, dx, dy)
}

pub fn tikhonov_coefficients(cache: &SpectralCache, lambda: f64) -> Result<Matrix> {
    cache.tikhonov_coefficients(lambda)
}

pub fn filter_factors(cache: &SpectralCache, lambda: f64) -> Result<Matrix> {
    cache.filter_factors(lambda)
}

pub fn l_curve(cache: &SpectralCache, grid: &[f64]) -> Result<Vec<LCurvePoint>> {
    cache.l_curve(grid)
}

pub fn reconstruct_from_cache(cache: &SpectralCache, lambda: f64) -> Result<Surface> {
    cache.reconstruct(lambda)
}

/// Curvature below which a polyline counts as straight.
const STRAIGHT_TOL: f64 = 1e-9;

/// Picks the λ at the L-curve corner: the point of largest signed
/// three-point (Menger) curvature of `(log ρ, log η)`. Ties go to the smaller
/// λ. When no point bends towards the corner (e.g. a straight line in
/// log-log) the smallest λ of the grid is returned.
pub fn corner(points: &[LCurvePoint]) -> Result<f64> {
    if points.len() < 5 {
        return Err(Error::arg(format!(
            "corner detection needs at least 5 points, got {}",
            points.len()
        )));
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            (
                p.rho.max(f64::MIN_POSITIVE).ln(),
                p.eta.max(f64::MIN_POSITIVE).ln(),
            )
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for i in 1..xy.len() - 1 {
        let (p0, p1, p2) = (xy[i - 1], xy[i], xy[i + 1]);
        let a = (p1.0 - p0.0, p1.1 - p0.1);
        let b = (p2.0 - p1.0, p2.1 - p1.1);
        let c = (p2.0 - p0.0, p2.1 - p0.1);
        let lengths = (a.0.hypot(a.1)) * (b.0.hypot(b.1)) * (c.0.hypot(c.1));
        if lengths == 0.0 {
            continue;
        }
        let kappa = 2.0 * (a.0 * b.1 - a.1 * b.0) / lengths;
        if kappa > STRAIGHT_TOL && best.is_none_or(|(_, k)| kappa > k) {
            best = Some((i, kappa));
        }
    }
    Ok(match best {
        Some((i, _)) => points[i].lambda,
        None => points[0].lambda,
    })
}
