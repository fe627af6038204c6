//! Assembly of the Sylvester system for each reconstruction method and the
//! map from the solved parameter matrix `Φ` back to a surface.
//!
//! | method    | A              | B              | F                   | G                    | Z from Φ               | null      |
//! |-----------|----------------|----------------|---------------------|----------------------|------------------------|-----------|
//! | GLS       | Dy             | Dx             | Ẑy                  | Ẑx                   | Φ                      | 1, 1      |
//! | spectral  | Dy·By          | Dx·Bx          | Ẑy·Bx               | Byᵀ·Ẑx               | By·Φ·Bxᵀ               | Byᵀ1, Bxᵀ1|
//! | Tikhonov  | [Dy; μLy]      | [Dx; λLx]      | [Ẑy; μLy·Z0]        | [Ẑx, λZ0·Lxᵀ]        | Φ                      | 1, 1 if k ≥ 1 |
//! | Dirichlet | Dy·Pm          | Dx·Pn          | (Ẑy − Dy·Zb)·Pn     | Pmᵀ(Ẑx − Zb·Dxᵀ)     | Pm·Φ·Pnᵀ + Zb          | none      |
//! | weighted  | Λyy^-½·Dy·Λxy^½| Λxx^-½·Dx·Λyx^½| Λyy^-½·Ẑy·Λyx^-½    | Λxy^-½·Ẑx·Λxx^-½     | Λxy^½·Φ·Λyx^½          | Λxy^-½1, Λyx^-½1 |
//!
//! `Pm`, `Pn` select the interior rows/columns; they are realized by slicing.

use std::fmt;

use crate::basis::{BasisFamily, BasisSet};
use crate::diffops::{DiffMatrix, GradientField, Surface};
use crate::error::{Error, Result};
use crate::sylvester::{sym_sqrt, SylvesterSystem};
use crate::{Matrix, Vector};

/// Covariances of the gradient measurement errors: `Λuv` is the covariance of
/// the u-derivative along the v-direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSet {
    /// `n×n`
    pub xx: Matrix,
    /// `m×m`
    pub xy: Matrix,
    /// `n×n`
    pub yx: Matrix,
    /// `m×m`
    pub yy: Matrix,
}

impl CovarianceSet {
    pub fn new(xx: Matrix, xy: Matrix, yx: Matrix, yy: Matrix) -> Result<Self> {
        let set = CovarianceSet { xx, xy, yx, yy };
        for (name, c) in set.named() {
            // symmetric square root doubles as the SPD check
            sym_sqrt(c).map_err(|e| match e {
                Error::NotSymmetric(msg) => Error::NotSymmetric(format!("Λ{name}: {msg}")),
                Error::NotPositiveDefinite(msg) => {
                    Error::NotPositiveDefinite(format!("Λ{name}: {msg}"))
                }
                other => other,
            })?;
        }
        Ok(set)
    }

    pub fn identity(m: usize, n: usize) -> Self {
        CovarianceSet {
            xx: Matrix::identity(n, n),
            xy: Matrix::identity(m, m),
            yx: Matrix::identity(n, n),
            yy: Matrix::identity(m, m),
        }
    }

    /// Diagonal covariances from per-row and per-column variance profiles.
    pub fn from_diagonals(xx: &[f64], xy: &[f64], yx: &[f64], yy: &[f64]) -> Result<Self> {
        let diag = |d: &[f64]| Matrix::from_diagonal(&Vector::from_column_slice(d));
        CovarianceSet::new(diag(xx), diag(xy), diag(yx), diag(yy))
    }

    fn named(&self) -> [(&'static str, &Matrix); 4] {
        [
            ("xx", &self.xx),
            ("xy", &self.xy),
            ("yx", &self.yx),
            ("yy", &self.yy),
        ]
    }

    fn check_shape(&self, m: usize, n: usize) -> Result<()> {
        let expected = [("xx", n), ("xy", m), ("yx", n), ("yy", m)];
        for ((name, c), (_, k)) in self.named().into_iter().zip(expected) {
            if c.shape() != (k, k) {
                return Err(Error::dim(format!(
                    "Λ{name} is {:?}, expected ({k}, {k})",
                    c.shape()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TikhonovSpec {
    pub lambda: f64,
    /// Defaults to `lambda`.
    pub mu: Option<f64>,
    /// 0 (magnitude), 1 (steepness) or 2 (curvature).
    pub degree: usize,
    /// A-priori surface; zero when absent.
    pub prior: Option<Matrix>,
}

impl TikhonovSpec {
    pub fn mu(&self) -> f64 {
        self.mu.unwrap_or(self.lambda)
    }
}

/// A reconstruction method and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    Gls,
    /// Band-limited reconstruction `Z = By·C·Bxᵀ`. Column subsets are expressed
    /// by passing sliced bases (see [`BasisSet::select`]).
    Spectral {
        basis_y: BasisSet,
        basis_x: BasisSet,
    },
    Tikhonov(TikhonovSpec),
    /// Heights fixed on the boundary frame of `boundary`; its interior is an
    /// offset surface the solution deviates from.
    Dirichlet {
        boundary: Matrix,
    },
    Weighted(CovarianceSet),
}

impl MethodSpec {
    pub fn tikhonov(lambda: f64, degree: usize) -> Self {
        MethodSpec::Tikhonov(TikhonovSpec {
            lambda,
            mu: None,
            degree,
            prior: None,
        })
    }

    /// Spectral reconstruction keeping the lowest `⌈m/2⌉ × ⌈n/2⌉` functions.
    pub fn spectral_half(family: BasisFamily, m: usize, n: usize) -> Result<Self> {
        Ok(MethodSpec::Spectral {
            basis_y: BasisSet::new(family, m, m.div_ceil(2))?,
            basis_x: BasisSet::new(family, n, n.div_ceil(2))?,
        })
    }

    pub fn dirichlet(boundary: Matrix) -> Self {
        MethodSpec::Dirichlet { boundary }
    }

    /// Short label used in tables and file names.
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Gls => "gls".into(),
            MethodSpec::Spectral { basis_y, .. } => format!("spectral-{}", basis_y.family()),
            MethodSpec::Tikhonov(t) => format!("tikhonov-k{}", t.degree),
            MethodSpec::Dirichlet { .. } => "dirichlet".into(),
            MethodSpec::Weighted(_) => "weighted".into(),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// How a solved `Φ` maps back onto the height grid.
#[derive(Debug, Clone)]
enum SurfaceMap {
    Identity,
    Spectral { by: Matrix, bx: Matrix },
    Dirichlet { boundary: Matrix },
    Weighted { sqrt_xy: Matrix, sqrt_yx: Matrix },
}

/// An assembled system together with its `Φ → Z` map.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub system: SylvesterSystem,
    map: SurfaceMap,
    hx: f64,
    hy: f64,
}

impl Assembled {
    pub fn solve(&self) -> Result<Matrix> {
        self.system.solve()
    }

    /// `Z = f(Φ)` for the assembled method.
    pub fn surface(&self, phi: &Matrix) -> Result<Surface> {
        let heights = match &self.map {
            SurfaceMap::Identity => phi.clone(),
            SurfaceMap::Spectral { by, bx } => by * phi * bx.transpose(),
            SurfaceMap::Dirichlet { boundary } => {
                let (m, n) = boundary.shape();
                let mut z = boundary.clone();
                let mut interior = z.view_mut((1, 1), (m - 2, n - 2));
                interior += phi;
                z
            }
            SurfaceMap::Weighted { sqrt_xy, sqrt_yx } => sqrt_xy * phi * sqrt_yx,
        };
        Surface::new(heights, self.hx, self.hy)
    }
}

fn check_operators(g: &GradientField, dx: &DiffMatrix, dy: &DiffMatrix) -> Result<(usize, usize)> {
    let (m, n) = (g.rows(), g.cols());
    if dx.n() != n || dy.n() != m {
        return Err(Error::dim(format!(
            "operators are Dx {0}×{0}, Dy {1}×{1} but the gradient grid is {m}×{n}",
            dx.n(),
            dy.n()
        )));
    }
    Ok((m, n))
}

fn vstack(top: &Matrix, bottom: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.rows_mut(0, top.nrows()).copy_from(top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    out
}

fn hstack(left: &Matrix, right: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.columns_mut(0, left.ncols()).copy_from(left);
    out.columns_mut(left.ncols(), right.ncols())
        .copy_from(right);
    out
}

/// `Bᵀ1` when the constant function lies in the span of `B`.
fn constant_coefficients(b: &Matrix) -> Option<Vector> {
    let k = b.nrows();
    let ones = Vector::repeat(k, 1.0);
    let c = b.tr_mul(&ones);
    let back = b * &c;
    ((back - ones).amax() <= 1e-8).then_some(c)
}

/// Builds the Sylvester system and `Φ → Z` map for `spec`.
pub fn prepare(
    g: &GradientField,
    dx: &DiffMatrix,
    dy: &DiffMatrix,
    spec: &MethodSpec,
) -> Result<Assembled> {
    let (m, n) = check_operators(g, dx, dy)?;
    let (dxm, dym) = (dx.matrix(), dy.matrix());

    let (system, map) = match spec {
        MethodSpec::Gls => (
            SylvesterSystem::new(
                dym.clone(),
                dxm.clone(),
                g.zy.clone(),
                g.zx.clone(),
                Some((Vector::repeat(m, 1.0), Vector::repeat(n, 1.0))),
            )?,
            SurfaceMap::Identity,
        ),

        MethodSpec::Spectral { basis_y, basis_x } => {
            if basis_y.nodes() != m || basis_x.nodes() != n {
                return Err(Error::dim(format!(
                    "spectral bases have {}×{} nodes but the grid is {m}×{n}",
                    basis_y.nodes(),
                    basis_x.nodes()
                )));
            }
            let by = basis_y.matrix();
            let bx = basis_x.matrix();
            let null = match (constant_coefficients(by), constant_coefficients(bx)) {
                (Some(u), Some(v)) => Some((u, v)),
                _ => None,
            };
            (
                SylvesterSystem::new(dym * by, dxm * bx, &g.zy * bx, by.tr_mul(&g.zx), null)?,
                SurfaceMap::Spectral {
                    by: by.clone(),
                    bx: bx.clone(),
                },
            )
        }

        MethodSpec::Tikhonov(t) => {
            let (lambda, mu) = (t.lambda, t.mu());
            if !(lambda.is_finite() && lambda >= 0.0 && mu.is_finite() && mu >= 0.0) {
                return Err(Error::arg(format!(
                    "regularization parameters must be non-negative, got λ={lambda}, μ={mu}"
                )));
            }
            if t.degree > 2 {
                return Err(Error::arg(format!(
                    "Tikhonov degree must be 0, 1 or 2, got {}",
                    t.degree
                )));
            }
            if let Some(z0) = &t.prior {
                if z0.shape() != (m, n) {
                    return Err(Error::dim(format!(
                        "prior surface is {:?}, expected ({m}, {n})",
                        z0.shape()
                    )));
                }
            }
            let ly = dy.power(t.degree);
            let lx = dx.power(t.degree);
            let a = vstack(dym, &(&ly * mu));
            let b = vstack(dxm, &(&lx * lambda));
            let (f_low, g_right) = match &t.prior {
                Some(z0) => (&ly * z0 * mu, z0 * lx.transpose() * lambda),
                None => (Matrix::zeros(m, n), Matrix::zeros(m, n)),
            };
            let f = vstack(&g.zy, &f_low);
            let gm = hstack(&g.zx, &g_right);
            let a_null = t.degree >= 1 || mu == 0.0;
            let b_null = t.degree >= 1 || lambda == 0.0;
            let null = (a_null && b_null).then(|| (Vector::repeat(m, 1.0), Vector::repeat(n, 1.0)));
            (
                SylvesterSystem::new(a, b, f, gm, null)?,
                SurfaceMap::Identity,
            )
        }

        MethodSpec::Dirichlet { boundary } => {
            if boundary.shape() != (m, n) {
                return Err(Error::dim(format!(
                    "boundary grid is {:?}, expected ({m}, {n})",
                    boundary.shape()
                )));
            }
            if m < 3 || n < 3 {
                return Err(Error::dim(
                    "Dirichlet reconstruction needs at least 3×3 nodes",
                ));
            }
            let a = dym.columns(1, m - 2).into_owned();
            let b = dxm.columns(1, n - 2).into_owned();
            let f = (&g.zy - dym * boundary).columns(1, n - 2).into_owned();
            let gm = (&g.zx - boundary * dxm.transpose())
                .rows(1, m - 2)
                .into_owned();
            (
                SylvesterSystem::new(a, b, f, gm, None)?,
                SurfaceMap::Dirichlet {
                    boundary: boundary.clone(),
                },
            )
        }

        MethodSpec::Weighted(cov) => {
            cov.check_shape(m, n)?;
            let (sqrt_xy, isqrt_xy) = sym_sqrt(&cov.xy)?;
            let (sqrt_yx, isqrt_yx) = sym_sqrt(&cov.yx)?;
            let (_, isqrt_xx) = sym_sqrt(&cov.xx)?;
            let (_, isqrt_yy) = sym_sqrt(&cov.yy)?;
            let a = &isqrt_yy * dym * &sqrt_xy;
            let b = &isqrt_xx * dxm * &sqrt_yx;
            let f = &isqrt_yy * &g.zy * &isqrt_yx;
            let gm = &isqrt_xy * &g.zx * &isqrt_xx;
            let u = &isqrt_xy * Vector::repeat(m, 1.0);
            let v = &isqrt_yx * Vector::repeat(n, 1.0);
            (
                SylvesterSystem::new(a, b, f, gm, Some((u, v)))?,
                SurfaceMap::Weighted { sqrt_xy, sqrt_yx },
            )
        }
    };

    Ok(Assembled {
        system,
        map,
        hx: g.hx,
        hy: g.hy,
    })
}

/// The Sylvester system for `spec` on the given gradient field.
pub fn assemble(
    g: &GradientField,
    dx: &DiffMatrix,
    dy: &DiffMatrix,
    spec: &MethodSpec,
) -> Result<SylvesterSystem> {
    Ok(prepare(g, dx, dy, spec)?.system)
}

/// Reconstructs a surface from `g` with the given method.
pub fn reconstruct(
    g: &GradientField,
    dx: &DiffMatrix,
    dy: &DiffMatrix,
    spec: &MethodSpec,
) -> Result<Surface> {
    let assembled = prepare(g, dx, dy, spec)?;
    let phi = assembled.solve()?;
    assembled.surface(&phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisFamily;
    use crate::diffops::{diff_matrix, gradient_cost};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ops(m: usize, n: usize, order: usize) -> (DiffMatrix, DiffMatrix) {
        (
            diff_matrix(n, 0.1, order).unwrap(),
            diff_matrix(m, 0.2, order).unwrap(),
        )
    }

    fn random_field(seed: u64, m: usize, n: usize) -> GradientField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zx = Matrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let zy = Matrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        GradientField::new(zx, zy, 0.1, 0.2).unwrap()
    }

    fn mean_free(z: &Matrix) -> Matrix {
        let mean = z.mean();
        z.map(|v| v - mean)
    }

    #[test]
    fn gls_row() {
        let g = random_field(1, 5, 6);
        let (dx, dy) = ops(5, 6, 2);
        let sys = assemble(&g, &dx, &dy, &MethodSpec::Gls).unwrap();
        assert_eq!(&sys.a, dy.matrix());
        assert_eq!(&sys.b, dx.matrix());
        assert_eq!(sys.u.unwrap(), Vector::repeat(5, 1.0));
        assert_eq!(sys.v.unwrap(), Vector::repeat(6, 1.0));
    }

    #[test]
    fn identity_weights_give_the_gls_system() {
        let g = random_field(2, 6, 7);
        let (dx, dy) = ops(6, 7, 4);
        let gls = assemble(&g, &dx, &dy, &MethodSpec::Gls).unwrap();
        let w = assemble(
            &g,
            &dx,
            &dy,
            &MethodSpec::Weighted(CovarianceSet::identity(6, 7)),
        )
        .unwrap();
        assert!((gls.a - w.a).amax() < 1e-14);
        assert!((gls.b - w.b).amax() < 1e-14);
        assert!((gls.f - w.f).amax() < 1e-14);
        assert!((gls.g - w.g).amax() < 1e-14);
        assert!((gls.u.unwrap() - w.u.unwrap()).amax() < 1e-14);
    }

    #[test]
    fn zero_parameter_tikhonov_is_padded_gls() {
        let g = random_field(3, 7, 6);
        let (dx, dy) = ops(7, 6, 2);
        let gls = reconstruct(&g, &dx, &dy, &MethodSpec::Gls).unwrap();
        for degree in 0..=2 {
            let spec = MethodSpec::tikhonov(0.0, degree);
            let sys = assemble(&g, &dx, &dy, &spec).unwrap();
            assert_eq!(sys.a.rows(0, 7), dy.matrix().rows(0, 7));
            assert!(sys.a.rows(7, 7).amax() == 0.0);
            assert!(sys.is_rank_deficient());
            let z = reconstruct(&g, &dx, &dy, &spec).unwrap();
            assert!((z.heights - &gls.heights).amax() <= 1e-9);
        }
    }

    #[test]
    fn plane_is_recovered_mean_free() {
        let (m, n) = (9, 11);
        let truth =
            Surface::sample(m, n, (0.0, 0.0), (0.1, 0.2), |x, y| 2.0 * x + 3.0 * y).unwrap();
        let g = GradientField::new(
            Matrix::repeat(m, n, 2.0),
            Matrix::repeat(m, n, 3.0),
            0.1,
            0.2,
        )
        .unwrap();
        let (dx, dy) = ops(m, n, 2);
        let z = reconstruct(&g, &dx, &dy, &MethodSpec::Gls).unwrap();
        assert!(z.mean().abs() < 1e-12);
        assert!((z.heights - mean_free(&truth.heights)).amax() <= 1e-10);
    }

    #[test]
    fn paraboloid_is_recovered() {
        let (m, n) = (11, 11);
        let h = 0.1;
        let truth = Surface::sample(m, n, (-0.5, -0.5), (h, h), |x, y| x * x + y * y).unwrap();
        let zx = Matrix::from_fn(m, n, |_, j| 2.0 * (-0.5 + j as f64 * h));
        let zy = Matrix::from_fn(m, n, |i, _| 2.0 * (-0.5 + i as f64 * h));
        let g = GradientField::new(zx, zy, h, h).unwrap();
        let dx = diff_matrix(n, h, 2).unwrap();
        let dy = diff_matrix(m, h, 2).unwrap();
        let z = reconstruct(&g, &dx, &dy, &MethodSpec::Gls).unwrap();
        assert!((z.heights - mean_free(&truth.heights)).amax() <= 1e-8);

        let dir = reconstruct(&g, &dx, &dy, &MethodSpec::dirichlet(truth.heights.clone())).unwrap();
        assert!((dir.heights - &truth.heights).amax() <= 1e-8);
    }

    #[test]
    fn complete_cosine_basis_matches_gls() {
        let g = random_field(4, 8, 10);
        let (dx, dy) = ops(8, 10, 4);
        let gls = reconstruct(&g, &dx, &dy, &MethodSpec::Gls).unwrap();
        let spec = MethodSpec::Spectral {
            basis_y: BasisSet::new(BasisFamily::Cosine, 8, 8).unwrap(),
            basis_x: BasisSet::new(BasisFamily::Cosine, 10, 10).unwrap(),
        };
        let z = reconstruct(&g, &dx, &dy, &spec).unwrap();
        assert!((z.heights - gls.heights).amax() <= 1e-8);
    }

    #[test]
    fn spectral_without_constant_is_full_rank() {
        let g = random_field(5, 8, 8);
        let (dx, dy) = ops(8, 8, 2);
        let by = BasisSet::new(BasisFamily::Gram, 8, 5)
            .unwrap()
            .without(&[0, 1])
            .unwrap();
        let bx = BasisSet::new(BasisFamily::Gram, 8, 5).unwrap();
        let spec = MethodSpec::Spectral {
            basis_y: by,
            basis_x: bx,
        };
        let sys = assemble(&g, &dx, &dy, &spec).unwrap();
        assert!(!sys.is_rank_deficient());
        assert!(reconstruct(&g, &dx, &dy, &spec).is_ok());
    }

    #[test]
    fn spectral_coefficients_are_idempotent() {
        let g = random_field(6, 12, 9);
        let (dx, dy) = ops(12, 9, 2);
        let spec = MethodSpec::spectral_half(BasisFamily::Gram, 12, 9).unwrap();
        let prep = prepare(&g, &dx, &dy, &spec).unwrap();
        let c = prep.solve().unwrap();
        let z = prep.surface(&c).unwrap();
        let MethodSpec::Spectral { basis_y, basis_x } = &spec else {
            unreachable!()
        };
        let back = basis_y.matrix().tr_mul(&z.heights) * basis_x.matrix();
        assert!((back - c).amax() <= 1e-10);
    }

    #[test]
    fn dirichlet_keeps_boundary_frame() {
        let g = random_field(7, 7, 9);
        let (dx, dy) = ops(7, 9, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let zb = Matrix::from_fn(7, 9, |_, _| rng.random_range(-2.0..2.0));
        let z = reconstruct(&g, &dx, &dy, &MethodSpec::dirichlet(zb.clone())).unwrap();
        for j in 0..9 {
            assert_eq!(z.heights[(0, j)], zb[(0, j)]);
            assert_eq!(z.heights[(6, j)], zb[(6, j)]);
        }
        for i in 0..7 {
            assert_eq!(z.heights[(i, 0)], zb[(i, 0)]);
            assert_eq!(z.heights[(i, 8)], zb[(i, 8)]);
        }
    }

    #[test]
    fn weighted_mean_is_zero() {
        let (m, n) = (6, 7);
        let g = random_field(8, m, n);
        let (dx, dy) = ops(m, n, 2);
        let cov = CovarianceSet::from_diagonals(
            &(0..n).map(|j| 1.0 + j as f64 * 0.3).collect::<Vec<_>>(),
            &(0..m).map(|i| 0.5 + i as f64 * 0.2).collect::<Vec<_>>(),
            &(0..n).map(|j| 2.0 - j as f64 * 0.1).collect::<Vec<_>>(),
            &(0..m).map(|i| 1.0 + (i % 3) as f64).collect::<Vec<_>>(),
        )
        .unwrap();
        let z = reconstruct(&g, &dx, &dy, &MethodSpec::Weighted(cov.clone())).unwrap();
        let inv_xy = cov.xy.clone().try_inverse().unwrap();
        let inv_yx = cov.yx.clone().try_inverse().unwrap();
        let wmean = (Vector::repeat(m, 1.0).transpose()
            * inv_xy
            * &z.heights
            * inv_yx
            * Vector::repeat(n, 1.0))[(0, 0)];
        assert!(wmean.abs() <= 1e-9 * z.heights.amax() * (m * n) as f64);
    }

    #[test]
    fn gls_cost_is_a_lower_bound() {
        let (m, n) = (10, 12);
        let g = random_field(9, m, n);
        let (dx, dy) = ops(m, n, 2);
        let gls = reconstruct(&g, &dx, &dy, &MethodSpec::Gls).unwrap();
        let base = gradient_cost(&gls.heights, &g, &dx, &dy).unwrap();
        let others = [
            MethodSpec::spectral_half(BasisFamily::Cosine, m, n).unwrap(),
            MethodSpec::tikhonov(0.5, 0),
            MethodSpec::tikhonov(0.5, 2),
            MethodSpec::dirichlet(Matrix::zeros(m, n)),
        ];
        for spec in &others {
            let z = reconstruct(&g, &dx, &dy, spec).unwrap();
            let c = gradient_cost(&z.heights, &g, &dx, &dy).unwrap();
            assert!(base <= c + 1e-9, "{spec}: {base} > {c}");
        }
    }

    #[test]
    fn tikhonov_residual_and_penalty_are_monotone() {
        let (m, n) = (9, 9);
        let g = random_field(10, m, n);
        let (dx, dy) = ops(m, n, 2);
        let mut last: Option<(f64, f64)> = None;
        for lambda in [1e-3, 1e-2, 0.1, 0.3, 1.0, 3.0, 10.0] {
            let z = reconstruct(&g, &dx, &dy, &MethodSpec::tikhonov(lambda, 0)).unwrap();
            let rho = gradient_cost(&z.heights, &g, &dx, &dy).unwrap();
            let eta = z.heights.norm_squared();
            if let Some((r0, e0)) = last {
                assert!(rho >= r0 - 1e-12 && eta <= e0 + 1e-12);
            }
            last = Some((rho, eta));
        }
    }

    #[test]
    fn constant_shift_of_truth_changes_nothing() {
        let (m, n) = (8, 8);
        let h = 0.25;
        let (dx, dy) = (diff_matrix(n, h, 4).unwrap(), diff_matrix(m, h, 4).unwrap());
        let a = Surface::sample(m, n, (0.0, 0.0), (h, h), |x, y| (x * y).sin()).unwrap();
        let b = Surface::sample(m, n, (0.0, 0.0), (h, h), |x, y| (x * y).sin() + 17.0).unwrap();
        let za = reconstruct(&a.gradient(&dx, &dy).unwrap(), &dx, &dy, &MethodSpec::Gls).unwrap();
        let zb = reconstruct(&b.gradient(&dx, &dy).unwrap(), &dx, &dy, &MethodSpec::Gls).unwrap();
        assert!((za.heights - zb.heights).amax() <= 1e-10);
    }

    #[test]
    fn invalid_specs_rejected() {
        let g = random_field(11, 6, 6);
        let (dx, dy) = ops(6, 6, 2);
        assert!(reconstruct(&g, &dx, &dy, &MethodSpec::tikhonov(-1.0, 0)).is_err());
        assert!(reconstruct(&g, &dx, &dy, &MethodSpec::tikhonov(1.0, 3)).is_err());
        assert!(matches!(
            reconstruct(&g, &dx, &dy, &MethodSpec::dirichlet(Matrix::zeros(5, 6))),
            Err(Error::Dimension(_))
        ));
        let (dx7, _) = ops(6, 7, 2);
        assert!(matches!(
            reconstruct(&g, &dx7, &dy, &MethodSpec::Gls),
            Err(Error::Dimension(_))
        ));
        let mut bad = CovarianceSet::identity(6, 6);
        bad.yy[(0, 0)] = -1.0;
        assert!(matches!(
            reconstruct(&g, &dx, &dy, &MethodSpec::Weighted(bad)),
            Err(Error::NotPositiveDefinite(_))
        ));
        let spec = MethodSpec::spectral_half(BasisFamily::Cosine, 8, 6).unwrap();
        assert!(matches!(
            reconstruct(&g, &dx, &dy, &spec),
            Err(Error::Dimension(_))
        ));
    }
}
