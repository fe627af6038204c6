//! Dense finite-difference differentiation matrices and the grid types they
//! act on.
//!
//! A [`DiffMatrix`] of order `o` differentiates every polynomial of degree
//! `≤ o` exactly on uniformly spaced nodes. Interior rows use the centred
//! stencil; rows close to the ends use one-sided stencils of the same order,
//! so accuracy is uniform across the whole grid. The null space is exactly
//! the constant vector.
//!
//! Grids are stored with the row index running along `y` and the column index
//! along `x`, so `∂Z/∂x = Z·Dxᵀ` and `∂Z/∂y = Dy·Z`.

use crate::error::{Error, Result};
use crate::Matrix;

/// Second order stencils (numerators over `2h`).
const O2_FIRST: [f64; 3] = [-3.0, 4.0, -1.0];
const O2_CENTRE: [f64; 3] = [-1.0, 0.0, 1.0];
const O2_LAST: [f64; 3] = [1.0, -4.0, 3.0];

/// Fourth order stencils (numerators over `12h`), one per row of the 5-point
/// operator. Rows 0, 1, 3, 4 are the end closures; row 2 is the centred
/// stencil used everywhere else.
const O4_ROWS: [[f64; 5]; 5] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
    [-1.0, 6.0, -18.0, 10.0, 3.0],
    [3.0, -16.0, 36.0, -48.0, 25.0],
];

/// A dense square differentiation operator on `n` uniformly spaced nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrix {
    h: f64,
    order: usize,
    entries: Matrix,
}

impl DiffMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    /// `D^k`, the k-fold application of the operator (`D⁰ = I`).
    pub fn power(&self, k: usize) -> Matrix {
        let n = self.n();
        let mut out = Matrix::identity(n, n);
        for _ in 0..k {
            out = &self.entries * out;
        }
        out
    }

    /// Applies the operator to a vector of samples.
    pub fn apply(&self, samples: &[f64]) -> Result<Vec<f64>> {
        if samples.len() != self.n() {
            return Err(Error::dim(format!(
                "operator has {} nodes, got {} samples",
                self.n(),
                samples.len()
            )));
        }
        let v = crate::Vector::from_column_slice(samples);
        Ok((&self.entries * v).as_slice().to_vec())
    }
}

/// Builds the order-2 or order-4 differentiation matrix on `n` nodes with
/// spacing `h`.
pub fn diff_matrix(n: usize, h: f64, order: usize) -> Result<DiffMatrix> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::arg(format!(
            "node spacing must be positive, got {h}"
        )));
    }
    if order != 2 && order != 4 {
        return Err(Error::arg(format!("unsupported accuracy order {order}")));
    }
    if n < order + 1 {
        return Err(Error::arg(format!(
            "order {order} needs at least {} nodes, got {n}",
            order + 1
        )));
    }

    let mut d = Matrix::zeros(n, n);
    match order {
        2 => {
            let scale = 1.0 / (2.0 * h);
            for (j, c) in O2_FIRST.iter().enumerate() {
                d[(0, j)] = c * scale;
                d[(n - 1, n - 3 + j)] = O2_LAST[j] * scale;
            }
            for i in 1..n - 1 {
                for (j, c) in O2_CENTRE.iter().enumerate() {
                    d[(i, i - 1 + j)] = c * scale;
                }
            }
        }
        _ => {
            let scale = 1.0 / (12.0 * h);
            for j in 0..5 {
                d[(0, j)] = O4_ROWS[0][j] * scale;
                d[(1, j)] = O4_ROWS[1][j] * scale;
                d[(n - 2, n - 5 + j)] = O4_ROWS[3][j] * scale;
                d[(n - 1, n - 5 + j)] = O4_ROWS[4][j] * scale;
            }
            for i in 2..n - 2 {
                for j in 0..5 {
                    d[(i, i - 2 + j)] = O4_ROWS[2][j] * scale;
                }
            }
        }
    }

    Ok(DiffMatrix {
        h,
        order,
        entries: d,
    })
}

/// `∂Z/∂x = Z·Dxᵀ`.
pub fn apply_dx(z: &Matrix, dx: &DiffMatrix) -> Result<Matrix> {
    if dx.n() != z.ncols() {
        return Err(Error::dim(format!(
            "Dx has {} nodes but the grid has {} columns",
            dx.n(),
            z.ncols()
        )));
    }
    Ok(z * dx.matrix().transpose())
}

/// `∂Z/∂y = Dy·Z`.
pub fn apply_dy(z: &Matrix, dy: &DiffMatrix) -> Result<Matrix> {
    if dy.n() != z.nrows() {
        return Err(Error::dim(format!(
            "Dy has {} nodes but the grid has {} rows",
            dy.n(),
            z.nrows()
        )));
    }
    Ok(dy.matrix() * z)
}

fn check_finite(name: &str, m: &Matrix) -> Result<()> {
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        return Err(Error::arg(format!(
            "{name} has a non-finite entry at row {}, column {}",
            pos % m.nrows(),
            pos / m.nrows()
        )));
    }
    Ok(())
}

fn check_spacing(hx: f64, hy: f64) -> Result<()> {
    if !(hx.is_finite() && hx > 0.0 && hy.is_finite() && hy > 0.0) {
        return Err(Error::arg(format!(
            "node spacings must be positive, got hx={hx}, hy={hy}"
        )));
    }
    Ok(())
}

/// An `m×n` height grid with uniform node spacings.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub hx: f64,
    pub hy: f64,
    pub heights: Matrix,
}

impl Surface {
    pub fn new(heights: Matrix, hx: f64, hy: f64) -> Result<Self> {
        check_spacing(hx, hy)?;
        check_finite("surface", &heights)?;
        Ok(Surface { hx, hy, heights })
    }

    /// Samples `f(x, y)` on the nodes `x = x0 + j·hx`, `y = y0 + i·hy`.
    pub fn sample(
        m: usize,
        n: usize,
        (x0, y0): (f64, f64),
        (hx, hy): (f64, f64),
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let heights = Matrix::from_fn(m, n, |i, j| f(x0 + j as f64 * hx, y0 + i as f64 * hy));
        Surface::new(heights, hx, hy)
    }

    pub fn rows(&self) -> usize {
        self.heights.nrows()
    }

    pub fn cols(&self) -> usize {
        self.heights.ncols()
    }

    pub fn mean(&self) -> f64 {
        self.heights.mean()
    }

    /// Copy with the grid mean subtracted.
    pub fn mean_free(&self) -> Surface {
        let mean = self.mean();
        Surface {
            hx: self.hx,
            hy: self.hy,
            heights: self.heights.map(|v| v - mean),
        }
    }

    /// Numerical gradient of this surface under the given operators.
    pub fn gradient(&self, dx: &DiffMatrix, dy: &DiffMatrix) -> Result<GradientField> {
        GradientField::new(
            apply_dx(&self.heights, dx)?,
            apply_dy(&self.heights, dy)?,
            self.hx,
            self.hy,
        )
    }
}

/// A measured gradient field: paired `m×n` grids of x- and y-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub hx: f64,
    pub hy: f64,
    pub zx: Matrix,
    pub zy: Matrix,
}

impl GradientField {
    pub fn new(zx: Matrix, zy: Matrix, hx: f64, hy: f64) -> Result<Self> {
        check_spacing(hx, hy)?;
        if zx.shape() != zy.shape() {
            return Err(Error::dim(format!(
                "gradient components differ in shape: {:?} vs {:?}",
                zx.shape(),
                zy.shape()
            )));
        }
        check_finite("x-gradient", &zx)?;
        check_finite("y-gradient", &zy)?;
        Ok(GradientField { hx, hy, zx, zy })
    }

    pub fn rows(&self) -> usize {
        self.zx.nrows()
    }

    pub fn cols(&self) -> usize {
        self.zx.ncols()
    }

    /// The operators `(Dx, Dy)` matching this field's grid and spacings.
    pub fn operators(&self, order: usize) -> Result<(DiffMatrix, DiffMatrix)> {
        Ok((
            diff_matrix(self.cols(), self.hx, order)?,
            diff_matrix(self.rows(), self.hy, order)?,
        ))
    }
}

/// The least-squares gradient cost `‖Z·Dxᵀ − Ẑx‖²_F + ‖Dy·Z − Ẑy‖²_F`.
pub fn gradient_cost(
    z: &Matrix,
    g: &GradientField,
    dx: &DiffMatrix,
    dy: &DiffMatrix,
) -> Result<f64> {
    if z.shape() != g.zx.shape() {
        return Err(Error::dim(format!(
            "surface {:?} does not match gradient {:?}",
            z.shape(),
            g.zx.shape()
        )));
    }
    let rx = apply_dx(z, dx)? - &g.zx;
    let ry = apply_dy(z, dy)? - &g.zy;
    Ok(rx.norm_squared() + ry.norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).amax() <= tol
    }

    #[test]
    fn three_point_operator() {
        let d = diff_matrix(3, 1.0, 2).unwrap();
        let expected =
            Matrix::from_row_slice(3, 3, &[-3., 4., -1., -1., 0., 1., 1., -4., 3.]) * 0.5;
        assert!(close(d.matrix(), &expected, 1e-15));
    }

    #[test]
    fn five_point_operator_rows() {
        let d = diff_matrix(5, 1.0, 4).unwrap();
        let first: Vec<f64> = [-25., 48., -36., 16., -3.]
            .iter()
            .map(|v| v / 12.0)
            .collect();
        let mid: Vec<f64> = [1., -8., 0., 8., -1.].iter().map(|v| v / 12.0).collect();
        for j in 0..5 {
            assert!((d.matrix()[(0, j)] - first[j]).abs() < 1e-15);
            assert!((d.matrix()[(2, j)] - mid[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn too_few_nodes_or_bad_spacing() {
        assert!(diff_matrix(2, 1.0, 2).is_err());
        assert!(diff_matrix(4, 1.0, 4).is_err());
        assert!(diff_matrix(5, 0.0, 2).is_err());
        assert!(diff_matrix(5, -1.0, 2).is_err());
        assert!(diff_matrix(5, 1.0, 3).is_err());
    }

    #[test]
    fn quadratic_derivative_is_exact() {
        let h = 0.5;
        let d = diff_matrix(7, h, 2).unwrap();
        let x: Vec<f64> = (0..7).map(|i| i as f64 * h).collect();
        let f: Vec<f64> = x.iter().map(|x| x * x).collect();
        let df = d.apply(&f).unwrap();
        for (xi, dfi) in x.iter().zip(df) {
            assert!((dfi - 2.0 * xi).abs() <= 1e-12);
        }
    }

    #[test]
    fn polynomial_exactness_across_sizes_and_spacings() {
        for order in [2usize, 4] {
            for n in [order + 1, 9, 17, 64] {
                for h in [0.1, 1.0, 10.0] {
                    let d = diff_matrix(n, h, order).unwrap();
                    // centre the abscissae so monomials stay well scaled
                    let x: Vec<f64> = (0..n)
                        .map(|i| (i as f64 - (n - 1) as f64 / 2.0) * h)
                        .collect();
                    let scale = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
                    for k in 0..=order as i32 {
                        let f: Vec<f64> = x.iter().map(|v| (v / scale).powi(k)).collect();
                        let df = d.apply(&f).unwrap();
                        for (xi, dfi) in x.iter().zip(df) {
                            let exact = if k == 0 {
                                0.0
                            } else {
                                k as f64 * (xi / scale).powi(k - 1) / scale
                            };
                            assert!(
                                (dfi - exact).abs() <= 1e-9,
                                "order {order} n {n} h {h} k {k}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn null_space_is_one_dimensional() {
        for order in [2usize, 4] {
            for n in [order + 1, 8, 33] {
                let d = diff_matrix(n, 0.3, order).unwrap();
                let sv = d.matrix().clone().singular_values();
                let smax = sv.max();
                let zeros = sv.iter().filter(|s| **s < 1e-10 * smax).count();
                assert_eq!(zeros, 1, "order {order} n {n}");
                let ones = crate::Vector::repeat(n, 1.0);
                let amax = d.matrix().amax();
                assert!((d.matrix() * ones).amax() <= 1e-12 * amax);
            }
        }
    }

    #[test]
    fn spacing_scales_inversely() {
        for order in [2usize, 4] {
            let unit = diff_matrix(11, 1.0, order).unwrap();
            let scaled = diff_matrix(11, 0.25, order).unwrap();
            assert!(close(scaled.matrix(), &(unit.matrix() / 0.25), 1e-13));
        }
    }

    #[test]
    fn apply_to_planes() {
        let d = diff_matrix(5, 1.0, 2).unwrap();
        let zx = Matrix::from_fn(5, 5, |_, j| j as f64);
        let zy = Matrix::from_fn(5, 5, |i, _| i as f64);
        assert!(close(
            &apply_dx(&zx, &d).unwrap(),
            &Matrix::repeat(5, 5, 1.0),
            1e-14
        ));
        assert!(close(
            &apply_dy(&zy, &d).unwrap(),
            &Matrix::repeat(5, 5, 1.0),
            1e-14
        ));
        let c = Matrix::repeat(5, 5, 3.7);
        assert!(apply_dx(&c, &d).unwrap().amax() < 1e-14);
        assert!(apply_dy(&c, &d).unwrap().amax() < 1e-14);
    }

    #[test]
    fn apply_matches_triple_loop() {
        let z = Matrix::from_fn(4, 6, |i, j| ((i * 31 + j * 17) % 11) as f64 * 0.37 - 1.5);
        let dx = diff_matrix(6, 0.7, 4).unwrap();
        let got = apply_dx(&z, &dx).unwrap();
        for i in 0..4 {
            for j in 0..6 {
                let mut acc = 0.0;
                for k in 0..6 {
                    acc += z[(i, k)] * dx.matrix()[(j, k)];
                }
                assert!((got[(i, j)] - acc).abs() < 1e-13);
            }
        }

        let z = Matrix::from_fn(6, 4, |i, j| ((i * 13 + j * 7) % 5) as f64 - 2.0);
        let dy = diff_matrix(6, 1.3, 2).unwrap();
        let got = apply_dy(&z, &dy).unwrap();
        for i in 0..6 {
            for j in 0..4 {
                let mut acc = 0.0;
                for k in 0..6 {
                    acc += dy.matrix()[(i, k)] * z[(k, j)];
                }
                assert!((got[(i, j)] - acc).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let d = diff_matrix(5, 1.0, 2).unwrap();
        assert!(matches!(
            apply_dx(&Matrix::zeros(5, 4), &d),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            apply_dy(&Matrix::zeros(4, 5), &d),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn grid_constructors_reject_bad_input() {
        assert!(GradientField::new(Matrix::zeros(3, 4), Matrix::zeros(4, 3), 1.0, 1.0).is_err());
        let mut bad = Matrix::zeros(3, 3);
        bad[(1, 2)] = f64::NAN;
        assert!(Surface::new(bad, 1.0, 1.0).is_err());
        assert!(Surface::new(Matrix::zeros(3, 3), 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn mixed_partials_commute(seed in 0u64..1000, m in 5usize..12, n in 5usize..12) {
            let z = Matrix::from_fn(m, n, |i, j| (((i as u64 + 3) * (j as u64 + 7) * (seed + 1)) % 97) as f64 / 97.0);
            let dx = diff_matrix(n, 0.4, 4).unwrap();
            let dy = diff_matrix(m, 1.1, 2).unwrap();
            let a = apply_dy(&apply_dx(&z, &dx).unwrap(), &dy).unwrap();
            let b = apply_dx(&apply_dy(&z, &dy).unwrap(), &dx).unwrap();
            prop_assert!((a - b).amax() <= 1e-12);
        }

        #[test]
        fn rows_sum_to_zero(n in 5usize..40, h in 0.01f64..50.0, order4 in any::<bool>()) {
            let order = if order4 { 4 } else { 2 };
            let d = diff_matrix(n, h, order).unwrap();
            let amax = d.matrix().amax();
            for row in d.matrix().row_iter() {
                prop_assert!(row.sum().abs() <= 1e-12 * amax);
            }
        }
    }
}
