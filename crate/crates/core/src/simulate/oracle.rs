use crate::diffops::{DiffMatrix, GradientField, Surface};
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Largest `m·n` the dense oracle accepts. The stacked system has `2mn×mn`
/// entries and its SVD costs O((mn)³).
pub const ORACLE_MAX_NODES: usize = 4096;

/// Eigenvalues of `KᵀK` below this fraction of the largest are treated as
/// null directions.
const ORACLE_RCOND: f64 = 1e-12;

/// The stacked operator `[Dx ⊗ Im; In ⊗ Dy]` acting on column-major `vec(Z)`.
pub fn stacked_operator(dx: &DiffMatrix, dy: &DiffMatrix) -> Matrix {
    let (m, n) = (dy.n(), dx.n());
    let top = dx.matrix().kronecker(&Matrix::identity(m, m));
    let bottom = Matrix::identity(n, n).kronecker(dy.matrix());
    let mut k = Matrix::zeros(2 * m * n, m * n);
    k.rows_mut(0, m * n).copy_from(&top);
    k.rows_mut(m * n, m * n).copy_from(&bottom);
    k
}

/// Minimum-norm least-squares reconstruction through the dense vectorized
/// system, mean-aligned. Desk-scale only.
pub fn oracle_gls(g: &GradientField, dx: &DiffMatrix, dy: &DiffMatrix) -> Result<Surface> {
    let (m, n) = (g.rows(), g.cols());
    if dx.n() != n || dy.n() != m {
        return Err(Error::dim(format!(
            "operators {}×{} / {}×{} do not match a {m}×{n} gradient",
            dy.n(),
            dy.n(),
            dx.n(),
            dx.n()
        )));
    }
    if m * n > ORACLE_MAX_NODES {
        return Err(Error::Guard(format!(
            "dense oracle limited to {ORACLE_MAX_NODES} nodes, got {m}×{n} = {}",
            m * n
        )));
    }
    let k = stacked_operator(dx, dy);
    let mut rhs = Vector::zeros(2 * m * n);
    rhs.rows_mut(0, m * n).copy_from_slice(g.zx.as_slice());
    rhs.rows_mut(m * n, m * n).copy_from_slice(g.zy.as_slice());

    // min-norm pseudo-inverse through the normal equations; nalgebra's SVD is
    // not reliable enough on these operators
    let ktb = k.tr_mul(&rhs);
    let eig = k.tr_mul(&k).symmetric_eigen();
    let lmax = eig.eigenvalues.max();
    let mut z = Vector::zeros(m * n);
    if lmax > 0.0 {
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            if l > ORACLE_RCOND * lmax {
                let v = eig.eigenvectors.column(i);
                z.axpy(v.dot(&ktb) / l, &v, 1.0);
            }
        }
    }
    let heights = Matrix::from_column_slice(m, n, z.as_slice());
    Ok(Surface::new(heights, g.hx, g.hy)?.mean_free())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::diff_matrix;
    use crate::reconstruct::{reconstruct, MethodSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plane_is_recovered() {
        let (m, n, hx, hy) = (7, 9, 0.3, 0.2);
        let dx = diff_matrix(n, hx, 2).unwrap();
        let dy = diff_matrix(m, hy, 2).unwrap();
        let truth =
            Surface::sample(m, n, (0.0, 0.0), (hx, hy), |x, y| 2.0 * x - 0.5 * y + 4.0).unwrap();
        let g = GradientField::new(
            Matrix::repeat(m, n, 2.0),
            Matrix::repeat(m, n, -0.5),
            hx,
            hy,
        )
        .unwrap();
        let z = oracle_gls(&g, &dx, &dy).unwrap();
        assert!((z.heights - truth.mean_free().heights).amax() <= 1e-9);
    }

    #[test]
    fn matches_sylvester_gls() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (m, n) = (8, 10);
        let zx = Matrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let zy = Matrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let g = GradientField::new(zx, zy, 0.5, 0.25).unwrap();
        let (dx, dy) = g.operators(2).unwrap();
        let a = oracle_gls(&g, &dx, &dy).unwrap();
        let b = reconstruct(&g, &dx, &dy, &MethodSpec::Gls)
            .unwrap()
            .mean_free();
        assert!((a.heights - b.heights).amax() <= 1e-7);
    }

    #[test]
    fn zero_gradient_gives_zero_surface() {
        let g = GradientField::new(Matrix::zeros(4, 5), Matrix::zeros(4, 5), 1.0, 1.0).unwrap();
        let (dx, dy) = g.operators(2).unwrap();
        assert_eq!(
            oracle_gls(&g, &dx, &dy).unwrap().heights,
            Matrix::zeros(4, 5)
        );
    }

    #[test]
    fn size_guard() {
        let g = GradientField::new(Matrix::zeros(65, 64), Matrix::zeros(65, 64), 1.0, 1.0).unwrap();
        let (dx, dy) = g.operators(2).unwrap();
        assert!(matches!(oracle_gls(&g, &dx, &dy), Err(Error::Guard(_))));
    }
}
