use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::diffops::GradientField;
use crate::error::{Error, Result};
use crate::reconstruct::CovarianceSet;
use crate::Matrix;

/// Variance floor, relative to the largest, used when building the
/// separable covariance approximation of the radial noise model.
const RADIAL_VARIANCE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    /// Gaussian with σ = level·max|component|, identical at every node.
    Iid,
    /// Gaussian whose σ grows linearly from 0 at the grid centre to
    /// level·max|component| at the farthest corner.
    HeteroscedasticRadial,
    /// A fraction `level` of the nodes of each component, drawn without
    /// replacement, is overwritten with that component's maximum value.
    Outliers,
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Iid => "iid",
            NoiseKind::HeteroscedasticRadial => "radial",
            NoiseKind::Outliers => "outliers",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iid" | "gaussian" => Ok(NoiseKind::Iid),
            "radial" | "heteroscedastic" | "heteroscedastic_radial" => {
                Ok(NoiseKind::HeteroscedasticRadial)
            }
            "outliers" | "outlier" => Ok(NoiseKind::Outliers),
            other => Err(Error::arg(format!("unknown noise kind '{other}'"))),
        }
    }
}

/// A noise model instance. All randomness comes from a ChaCha8 generator
/// seeded with `seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub level: f64,
    pub seed: u64,
}

impl NoiseSpec {
    fn validate(&self) -> Result<()> {
        if !(self.level.is_finite() && self.level >= 0.0) {
            return Err(Error::arg(format!(
                "noise level must be non-negative, got {}",
                self.level
            )));
        }
        if self.kind == NoiseKind::Outliers && self.level > 1.0 {
            return Err(Error::arg(format!(
                "outlier fraction must lie in [0, 1], got {}",
                self.level
            )));
        }
        Ok(())
    }
}

/// `r/r_max` at every node, measured from the grid centre in physical units.
pub fn radial_profile(rows: usize, cols: usize, hx: f64, hy: f64) -> Matrix {
    let xc = (cols.saturating_sub(1)) as f64 * hx / 2.0;
    let yc = (rows.saturating_sub(1)) as f64 * hy / 2.0;
    let rmax = xc.hypot(yc);
    Matrix::from_fn(rows, cols, |i, j| {
        if rmax == 0.0 {
            0.0
        } else {
            (j as f64 * hx - xc).hypot(i as f64 * hy - yc) / rmax
        }
    })
}

fn amplitude(m: &Matrix) -> f64 {
    m.amax()
}

/// Returns a noisy copy of `g`. Deterministic in `spec.seed`.
pub fn add_noise(g: &GradientField, spec: &NoiseSpec) -> Result<GradientField> {
    spec.validate()?;
    if spec.level == 0.0 {
        return Ok(g.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (m, n) = (g.rows(), g.cols());
    let mut zx = g.zx.clone();
    let mut zy = g.zy.clone();

    match spec.kind {
        NoiseKind::Iid => {
            for comp in [&mut zx, &mut zy] {
                let sigma = spec.level * amplitude(comp);
                for v in comp.iter_mut() {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    *v += sigma * e;
                }
            }
        }
        NoiseKind::HeteroscedasticRadial => {
            let profile = radial_profile(m, n, g.hx, g.hy);
            for comp in [&mut zx, &mut zy] {
                let sigma = spec.level * amplitude(comp);
                for (v, r) in comp.iter_mut().zip(profile.iter()) {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    *v += sigma * r * e;
                }
            }
        }
        NoiseKind::Outliers => {
            let count = (spec.level * (m * n) as f64).floor() as usize;
            for comp in [&mut zx, &mut zy] {
                let max = comp.max();
                for pos in index::sample(&mut rng, m * n, count) {
                    comp.as_mut_slice()[pos] = max;
                }
            }
        }
    }
    GradientField::new(zx, zy, g.hx, g.hy)
}

/// Covariances matching i.i.d. noise whose σ is proportional to each
/// component's amplitude.
pub fn iid_covariance(g: &GradientField) -> Result<CovarianceSet> {
    let (m, n) = (g.rows(), g.cols());
    let ax = amplitude(&g.zx).max(f64::MIN_POSITIVE).powi(2);
    let ay = amplitude(&g.zy).max(f64::MIN_POSITIVE).powi(2);
    CovarianceSet::new(
        Matrix::identity(n, n) * ax,
        Matrix::identity(m, m),
        Matrix::identity(n, n) * ay,
        Matrix::identity(m, m),
    )
}

/// Diagonal separable approximation of the radial noise covariance.
///
/// The per-node variance `r²/r_max²` is not a product of a row and a column
/// factor, so it is replaced by the product of its row and column marginal
/// means (normalized so the product has the right overall level), with a
/// small floor keeping every factor positive definite.
pub fn radial_covariance(g: &GradientField) -> Result<CovarianceSet> {
    let (m, n) = (g.rows(), g.cols());
    let var = radial_profile(m, n, g.hx, g.hy).map(|r| r * r + RADIAL_VARIANCE_FLOOR);
    let total = var.mean();
    let rows: Vec<f64> = (0..m).map(|i| var.row(i).mean()).collect();
    let cols: Vec<f64> = (0..n).map(|j| var.column(j).mean() / total).collect();
    let ax = amplitude(&g.zx).max(f64::MIN_POSITIVE).powi(2);
    let ay = amplitude(&g.zy).max(f64::MIN_POSITIVE).powi(2);
    let xx: Vec<f64> = cols.iter().map(|c| c * ax).collect();
    let yx: Vec<f64> = cols.iter().map(|c| c * ay).collect();
    CovarianceSet::from_diagonals(&xx, &rows, &yx, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::bump::{bump_surface, BumpSurfaceSpec};

    fn field() -> GradientField {
        bump_surface(&BumpSurfaceSpec::standard(150, 150))
            .unwrap()
            .1
    }

    #[test]
    fn zero_level_is_identity() {
        let g = field();
        for kind in [
            NoiseKind::Iid,
            NoiseKind::HeteroscedasticRadial,
            NoiseKind::Outliers,
        ] {
            let out = add_noise(
                &g,
                &NoiseSpec {
                    kind,
                    level: 0.0,
                    seed: 9,
                },
            )
            .unwrap();
            assert_eq!(out, g);
        }
    }

    #[test]
    fn iid_standard_deviation() {
        let g = field();
        let out = add_noise(
            &g,
            &NoiseSpec {
                kind: NoiseKind::Iid,
                level: 0.1,
                seed: 1,
            },
        )
        .unwrap();
        for (noisy, clean) in [(&out.zx, &g.zx), (&out.zy, &g.zy)] {
            let d = noisy - clean;
            let n = d.len() as f64;
            let mean = d.mean();
            let sd = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let target = 0.1 * clean.amax();
            assert!((sd - target).abs() <= 0.05 * target, "{sd} vs {target}");
            // unbiased within 3σ/√N
            assert!(mean.abs() <= 3.0 * target / n.sqrt());
        }
    }

    #[test]
    fn outlier_count_and_value() {
        let g = field();
        let out = add_noise(
            &g,
            &NoiseSpec {
                kind: NoiseKind::Outliers,
                level: 0.05,
                seed: 2,
            },
        )
        .unwrap();
        let expected = (0.05 * 150.0 * 150.0f64).floor() as usize;
        for (noisy, clean) in [(&out.zx, &g.zx), (&out.zy, &g.zy)] {
            let max = clean.max();
            let changed: Vec<f64> = noisy
                .iter()
                .zip(clean.iter())
                .filter(|(a, b)| a != b)
                .map(|(a, _)| *a)
                .collect();
            // nodes already at the maximum cannot show a change
            let at_max = clean.iter().filter(|v| **v == max).count();
            assert!(changed.len() <= expected && changed.len() + at_max >= expected);
            assert!(changed.iter().all(|v| *v == max));
        }
    }

    #[test]
    fn radial_noise_grows_outwards() {
        let g = field();
        let out = add_noise(
            &g,
            &NoiseSpec {
                kind: NoiseKind::HeteroscedasticRadial,
                level: 0.2,
                seed: 3,
            },
        )
        .unwrap();
        let d = &out.zx - &g.zx;
        let inner: f64 = (60..90)
            .flat_map(|i| (60..90).map(move |j| (i, j)))
            .map(|p| d[p].powi(2))
            .sum();
        let outer: f64 = (0..30)
            .flat_map(|i| (0..30).map(move |j| (i, j)))
            .map(|p| d[p].powi(2))
            .sum();
        assert!(outer > 10.0 * inner);
        let p = radial_profile(5, 5, 1.0, 1.0);
        assert_eq!(p[(2, 2)], 0.0);
        assert!((p[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_in_seed() {
        let g = field();
        let spec = NoiseSpec {
            kind: NoiseKind::Iid,
            level: 0.1,
            seed: 77,
        };
        assert_eq!(add_noise(&g, &spec).unwrap(), add_noise(&g, &spec).unwrap());
        let other = NoiseSpec { seed: 78, ..spec };
        assert_ne!(
            add_noise(&g, &spec).unwrap(),
            add_noise(&g, &other).unwrap()
        );
    }

    #[test]
    fn invalid_levels() {
        let g = field();
        assert!(add_noise(
            &g,
            &NoiseSpec {
                kind: NoiseKind::Outliers,
                level: 1.5,
                seed: 0
            }
        )
        .is_err());
        assert!(add_noise(
            &g,
            &NoiseSpec {
                kind: NoiseKind::Iid,
                level: -0.1,
                seed: 0
            }
        )
        .is_err());
    }

    #[test]
    fn covariance_models_are_spd() {
        let g = field();
        assert!(iid_covariance(&g).is_ok());
        let c = radial_covariance(&g).unwrap();
        assert_eq!(c.xy.shape(), (150, 150));
        assert!(c.xx[(0, 0)] > c.xx[(75, 75)]);
    }
}
