//! Symmetric semi-definite Sylvester equations
//!
//! ```text
//! AᵀA Φ + Φ BᵀB = AᵀF + G B
//! ```
//!
//! When both `A` and `B` have a known one-dimensional null space (`A·u = 0`,
//! `B·v = 0`) the operator is singular along `u·vᵀ`. [`solve_deflated`] removes
//! that direction with two implicit Householder reflections, solves the two
//! rank-one side problems by QR least squares and the remaining block as a
//! full-rank Sylvester equation, and returns the unique solution with
//! `uᵀΦv = 0`.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Relative threshold below which an eigenvalue sum `λᵢ + μⱼ` is treated as zero.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Relative asymmetry tolerated in the coefficient matrices.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Relative tolerance for `‖A·u‖ ≤ tol·‖A‖·‖u‖`.
pub const NULL_TOL: f64 = 1e-8;

/// Coefficient blocks of `AᵀAΦ + ΦBᵀB − AᵀF − GB = 0` plus optional null
/// vectors of `A` and `B`.
#[derive(Debug, Clone)]
pub struct SylvesterSystem {
    /// `r×m`
    pub a: Matrix,
    /// `s×n`
    pub b: Matrix,
    /// `r×n`
    pub f: Matrix,
    /// `m×s`
    pub g: Matrix,
    pub u: Option<Vector>,
    pub v: Option<Vector>,
}

impl SylvesterSystem {
    pub fn new(
        a: Matrix,
        b: Matrix,
        f: Matrix,
        g: Matrix,
        null: Option<(Vector, Vector)>,
    ) -> Result<Self> {
        let (r, m) = a.shape();
        let (s, n) = b.shape();
        if f.shape() != (r, n) {
            return Err(Error::dim(format!(
                "F is {:?}, expected ({r}, {n})",
                f.shape()
            )));
        }
        if g.shape() != (m, s) {
            return Err(Error::dim(format!(
                "G is {:?}, expected ({m}, {s})",
                g.shape()
            )));
        }
        let (u, v) = match null {
            Some((u, v)) => {
                check_null("A", &a, &u)?;
                check_null("B", &b, &v)?;
                (Some(u), Some(v))
            }
            None => (None, None),
        };
        Ok(SylvesterSystem { a, b, f, g, u, v })
    }

    /// `(m, n)`, the shape of the unknown `Φ`.
    pub fn unknown_shape(&self) -> (usize, usize) {
        (self.a.ncols(), self.b.ncols())
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.u.is_some()
    }

    pub fn lhs_operators(&self) -> (Matrix, Matrix) {
        (self.a.tr_mul(&self.a), self.b.tr_mul(&self.b))
    }

    /// `AᵀF + GB`.
    pub fn rhs(&self) -> Matrix {
        self.a.tr_mul(&self.f) + &self.g * &self.b
    }

    /// `AᵀAΦ + ΦBᵀB − AᵀF − GB`.
    pub fn residual(&self, phi: &Matrix) -> Matrix {
        let (p, q) = self.lhs_operators();
        &p * phi + phi * &q - self.rhs()
    }

    /// The cost whose stationarity condition is this equation,
    /// `‖AΦ − F‖²_F + ‖ΦBᵀ − G‖²_F`.
    pub fn cost(&self, phi: &Matrix) -> f64 {
        (&self.a * phi - &self.f).norm_squared()
            + (phi * self.b.transpose() - &self.g).norm_squared()
    }

    /// Solves the system, deflating the null direction when present.
    pub fn solve(&self) -> Result<Matrix> {
        if self.is_rank_deficient() {
            solve_deflated(self)
        } else {
            let (p, q) = self.lhs_operators();
            solve_full_rank(&p, &q, &self.rhs())
        }
    }
}

fn check_null(name: &str, op: &Matrix, null: &Vector) -> Result<()> {
    if null.len() != op.ncols() {
        return Err(Error::dim(format!(
            "null vector of {name} has length {}, expected {}",
            null.len(),
            op.ncols()
        )));
    }
    let scale = op.norm() * null.norm();
    if scale == 0.0 || (op * null).norm() > NULL_TOL * scale {
        return Err(Error::arg(format!(
            "supplied vector is not a null vector of {name}"
        )));
    }
    Ok(())
}

fn check_symmetric(name: &str, m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::dim(format!(
            "{name} is {:?}, expected square",
            m.shape()
        )));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(format!(
            "{name}: max |M − Mᵀ| = {asym:e}"
        )));
    }
    Ok(())
}

fn symmetrized(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Solves `P·X + X·Q = C` for symmetric positive semi-definite `P` (`m×m`) and
/// `Q` (`n×n`) by diagonalizing both: `Xᵢⱼ = C'ᵢⱼ/(λᵢ + μⱼ)` in the eigenbases.
pub fn solve_full_rank(p: &Matrix, q: &Matrix, c: &Matrix) -> Result<Matrix> {
    check_symmetric("P", p)?;
    check_symmetric("Q", q)?;
    if c.shape() != (p.nrows(), q.nrows()) {
        return Err(Error::dim(format!(
            "C is {:?}, expected ({}, {})",
            c.shape(),
            p.nrows(),
            q.nrows()
        )));
    }

    let (ep, eq) = rayon::join(
        || SymmetricEigen::new(symmetrized(p)),
        || SymmetricEigen::new(symmetrized(q)),
    );
    let lmax = ep.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mmax = eq.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = SINGULAR_TOL * (lmax + mmax);

    let mut x = ep.eigenvectors.tr_mul(c) * &eq.eigenvectors;
    for j in 0..x.ncols() {
        let mu = eq.eigenvalues[j];
        for i in 0..x.nrows() {
            let denom = ep.eigenvalues[i] + mu;
            if denom <= floor {
                return Err(Error::Singular(format!(
                    "eigenvalue pair sums to {denom:e} (threshold {floor:e})"
                )));
            }
            x[(i, j)] /= denom;
        }
    }
    Ok(&ep.eigenvectors * x * eq.eigenvectors.transpose())
}

/// An implicit Householder reflector `P = I − β·w·wᵀ` with `β = 2/(wᵀw)`.
///
/// Only `w` is stored; the reflector is applied as a rank-one update.
#[derive(Debug, Clone)]
pub struct Reflector {
    w: Vector,
    beta: f64,
}

impl Reflector {
    pub fn vector(&self) -> &Vector {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// `P·x`
    pub fn apply(&self, x: &Vector) -> Vector {
        x - &self.w * (self.beta * self.w.dot(x))
    }

    /// `P·M`
    pub fn apply_left(&self, m: &Matrix) -> Matrix {
        let wt_m = self.w.tr_mul(m) * self.beta;
        m - &self.w * wt_m
    }

    /// `M·P`
    pub fn apply_right(&self, m: &Matrix) -> Matrix {
        let m_w = (m * &self.w) * self.beta;
        m - m_w * self.w.transpose()
    }

    /// Dense `P`, for testing at small sizes only.
    pub fn materialize(&self) -> Matrix {
        let k = self.w.len();
        Matrix::identity(k, k) - &self.w * self.w.transpose() * self.beta
    }
}

/// Householder vector `ũ = u + sign(u₁)‖u‖₂·e₁`, whose reflector maps `u` onto
/// the first coordinate axis (to `−‖u‖e₁` when `u₁ ≥ 0`).
pub fn householder_vector(u: &Vector) -> Result<Reflector> {
    let norm = u.norm();
    if u.is_empty() || norm == 0.0 || !norm.is_finite() {
        return Err(Error::arg("Householder vector of a zero or empty vector"));
    }
    let mut w = u.clone();
    let sign = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    w[0] += sign * norm;
    let beta = 2.0 / w.norm_squared();
    Ok(Reflector { w, beta })
}

/// Least-squares solution of an overdetermined `M·x ≈ b` via Householder QR.
fn qr_least_squares(name: &str, m: Matrix, b: &Vector) -> Result<Vector> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(Vector::zeros(0));
    }
    if rows < cols {
        return Err(Error::Singular(format!(
            "deflated block {name} is {rows}×{cols}, cannot have full column rank"
        )));
    }
    let scale = m.amax();
    let qr = m.qr();
    let r = qr.r();
    let diag_min = (0..cols)
        .map(|i| r[(i, i)].abs())
        .fold(f64::INFINITY, f64::min);
    if diag_min.is_nan() || diag_min <= SINGULAR_TOL * scale * (rows as f64).sqrt() {
        return Err(Error::Singular(format!(
            "deflated block {name} is rank deficient (|r_ii| ≥ {diag_min:e})"
        )));
    }
    let mut qtb = b.clone();
    qr.q_tr_mul(&mut qtb);
    r.solve_upper_triangular(&qtb.rows(0, cols).into_owned())
        .ok_or_else(|| Error::Singular(format!("triangular solve failed for block {name}")))
}

/// Solves a rank-one deficient system by Householder deflation.
///
/// Returns `Φ = Pa·Ψ·Pb` where `ψ₀₀ = 0`, the first row and column of `Ψ` are
/// QR least-squares solutions and the trailing block solves a full-rank
/// Sylvester equation in `RᵀR`, `SᵀS`.
pub fn solve_deflated(sys: &SylvesterSystem) -> Result<Matrix> {
    let (u, v) = match (&sys.u, &sys.v) {
        (Some(u), Some(v)) => (u, v),
        _ => return Err(Error::arg("deflated solve needs both null vectors")),
    };
    let (m, n) = sys.unknown_shape();
    let pa = householder_vector(u)?;
    let pb = householder_vector(v)?;

    // Â = A·Pa = [0 R], B̂ = B·Pb = [0 S]
    let a_hat = pa.apply_right(&sys.a);
    let b_hat = pb.apply_right(&sys.b);
    let r = a_hat.columns(1, m - 1).into_owned();
    let s = b_hat.columns(1, n - 1).into_owned();

    // F̂ = F·Pb, Ĝ = Pa·G
    let f_hat = pb.apply_right(&sys.f);
    let g_hat = pa.apply_left(&sys.g);
    let f1 = f_hat.column(0).into_owned();
    let f2 = f_hat.columns(1, n - 1).into_owned();
    let g1 = g_hat.row(0).transpose();
    let g2 = g_hat.rows(1, m - 1).into_owned();

    let psi10 = qr_least_squares("R", r.clone(), &f1)?;
    let psi01 = qr_least_squares("S", s.clone(), &g1)?;

    let rtr = r.tr_mul(&r);
    let sts = s.tr_mul(&s);
    let rhs = r.tr_mul(&f2) + &g2 * &s;
    let psi11 = solve_full_rank(&rtr, &sts, &rhs)?;

    let mut psi = Matrix::zeros(m, n);
    psi.view_mut((0, 1), (1, n - 1))
        .copy_from(&psi01.transpose());
    psi.view_mut((1, 0), (m - 1, 1)).copy_from(&psi10);
    psi.view_mut((1, 1), (m - 1, n - 1)).copy_from(&psi11);

    Ok(pb.apply_right(&pa.apply_left(&psi)))
}

/// Symmetric square root and inverse square root of a symmetric positive
/// definite matrix.
pub fn sym_sqrt(m: &Matrix) -> Result<(Matrix, Matrix)> {
    check_symmetric("M", m)?;
    let eig = SymmetricEigen::new(symmetrized(m));
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(max > 0.0 && min > SINGULAR_TOL * max) {
        return Err(Error::NotPositiveDefinite(format!(
            "eigenvalues span [{min:e}, {max:e}]"
        )));
    }
    let v = &eig.eigenvectors;
    let root = Matrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inv_root = Matrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let sqrt = symmetrized(&(v * root * v.transpose()));
    let inv_sqrt = symmetrized(&(v * inv_root * v.transpose()));
    Ok((sqrt, inv_sqrt))
}

/// Which flop model [`work_estimate`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkModel {
    /// Hessenberg–Schur Sylvester solve.
    Sylvester,
    /// Dense pseudo-inverse of the `2mn×mn` vectorized system.
    Vectorized,
    /// Sylvester solve after truncating to `m/2ᵏ × n/2ᵏ` basis functions.
    Spectral { k: u32 },
}

fn work_hs(m: f64, n: f64) -> f64 {
    5.0 / 3.0 * m.powi(3) + 10.0 * n.powi(3) + 5.0 * m * m * n + 2.5 * m * n * n
}

/// Flop counts of the dense solution strategies.
pub fn work_estimate(m: usize, n: usize, model: WorkModel) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    match model {
        WorkModel::Sylvester => work_hs(mf, nf),
        WorkModel::Vectorized => 41.0 * mf.powi(3) * nf.powi(3),
        WorkModel::Spectral { k } => {
            let shrink = 0.5f64.powi(k as i32);
            work_hs(mf * shrink, nf * shrink)
        }
    }
}
