use crate::diffops::{GradientField, Surface};
use crate::error::{Error, Result};
use crate::Matrix;

/// One anisotropic Gaussian term `A·exp(−½ dᵀΛ⁻¹d)` with `d = (x − cx, y − cy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub amplitude: f64,
    pub center: (f64, f64),
    /// Symmetric positive definite 2×2 shape matrix `Λ`.
    pub shape: [[f64; 2]; 2],
}

impl Bump {
    fn precision(&self) -> Result<[[f64; 2]; 2]> {
        let [[a, b], [c, d]] = self.shape;
        let det = a * d - b * c;
        let finite = [a, b, c, d, self.amplitude, self.center.0, self.center.1]
            .iter()
            .all(|v| v.is_finite());
        if !finite || (b - c).abs() > 1e-12 * (a.abs() + d.abs()) || a <= 0.0 || det <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "bump shape matrix {:?} is not symmetric positive definite",
                self.shape
            )));
        }
        Ok([[d / det, -b / det], [-c / det, a / det]])
    }
}

/// A sum of Gaussian bumps sampled on a uniform `rows×cols` grid covering
/// `x_range × y_range`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpSurfaceSpec {
    pub bumps: Vec<Bump>,
    pub rows: usize,
    pub cols: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl BumpSurfaceSpec {
    /// Three-bump test surface on `[-3, 3]²`: one tall elongated peak, one
    /// tilted pit and one narrower secondary peak.
    pub fn standard(rows: usize, cols: usize) -> Self {
        BumpSurfaceSpec {
            bumps: vec![
                Bump {
                    amplitude: 3.0,
                    center: (0.0, 1.0),
                    shape: [[0.5, 0.15], [0.15, 0.35]],
                },
                Bump {
                    amplitude: -2.2,
                    center: (1.2, -0.9),
                    shape: [[0.4, -0.1], [-0.1, 0.6]],
                },
                Bump {
                    amplitude: 1.5,
                    center: (-1.4, -0.6),
                    shape: [[0.25, 0.0], [0.0, 0.45]],
                },
            ],
            rows,
            cols,
            x_range: (-3.0, 3.0),
            y_range: (-3.0, 3.0),
        }
    }

    pub fn spacing(&self) -> (f64, f64) {
        (
            (self.x_range.1 - self.x_range.0) / (self.cols.max(2) - 1) as f64,
            (self.y_range.1 - self.y_range.0) / (self.rows.max(2) - 1) as f64,
        )
    }
}

/// Samples the bump surface and its analytic gradient on the grid.
pub fn bump_surface(spec: &BumpSurfaceSpec) -> Result<(Surface, GradientField)> {
    if spec.rows < 2 || spec.cols < 2 {
        return Err(Error::arg("bump surface needs at least 2×2 nodes"));
    }
    if !(spec.x_range.1 > spec.x_range.0 && spec.y_range.1 > spec.y_range.0) {
        return Err(Error::arg("bump surface domain must have positive extent"));
    }
    let precisions = spec
        .bumps
        .iter()
        .map(Bump::precision)
        .collect::<Result<Vec<_>>>()?;
    let (hx, hy) = spec.spacing();
    let (m, n) = (spec.rows, spec.cols);

    let mut z = Matrix::zeros(m, n);
    let mut zx = Matrix::zeros(m, n);
    let mut zy = Matrix::zeros(m, n);
    for i in 0..m {
        let y = spec.y_range.0 + i as f64 * hy;
        for j in 0..n {
            let x = spec.x_range.0 + j as f64 * hx;
            for (bump, w) in spec.bumps.iter().zip(&precisions) {
                let (dx, dy) = (x - bump.center.0, y - bump.center.1);
                let wx = w[0][0] * dx + w[0][1] * dy;
                let wy = w[1][0] * dx + w[1][1] * dy;
                let e = bump.amplitude * (-0.5 * (dx * wx + dy * wy)).exp();
                z[(i, j)] += e;
                zx[(i, j)] -= e * wx;
                zy[(i, j)] -= e * wy;
            }
        }
    }
    Ok((
        Surface::new(z, hx, hy)?,
        GradientField::new(zx, zy, hx, hy)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::diff_matrix;

    #[test]
    fn gradient_vanishes_at_isolated_peak() {
        let spec = BumpSurfaceSpec {
            bumps: vec![Bump {
                amplitude: 2.0,
                center: (0.0, 0.0),
                shape: [[0.3, 0.0], [0.0, 0.3]],
            }],
            rows: 11,
            cols: 11,
            x_range: (-1.0, 1.0),
            y_range: (-1.0, 1.0),
        };
        let (z, g) = bump_surface(&spec).unwrap();
        assert!((z.heights[(5, 5)] - 2.0).abs() < 1e-15);
        assert!(g.zx[(5, 5)].abs() < 1e-15 && g.zy[(5, 5)].abs() < 1e-15);
    }

    #[test]
    fn standard_surface_dimensions() {
        let (z, g) = bump_surface(&BumpSurfaceSpec::standard(150, 150)).unwrap();
        assert_eq!(z.heights.shape(), (150, 150));
        assert_eq!(g.zx.shape(), (150, 150));
    }

    #[test]
    fn analytic_gradient_matches_fourth_order_differences() {
        let (z, g) = bump_surface(&BumpSurfaceSpec::standard(64, 64)).unwrap();
        let dx = diff_matrix(64, z.hx, 4).unwrap();
        let dy = diff_matrix(64, z.hy, 4).unwrap();
        let num = z.gradient(&dx, &dy).unwrap();
        let rel_x = (&num.zx - &g.zx).amax() / g.zx.amax();
        let rel_y = (&num.zy - &g.zy).amax() / g.zy.amax();
        assert!(rel_x <= 1e-3 && rel_y <= 1e-3, "{rel_x} {rel_y}");
    }

    #[test]
    fn non_spd_shape_rejected() {
        let mut spec = BumpSurfaceSpec::standard(8, 8);
        spec.bumps[0].shape = [[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(
            bump_surface(&spec),
            Err(Error::NotPositiveDefinite(_))
        ));
    }
}
