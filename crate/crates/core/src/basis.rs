//! Discrete orthonormal basis sets for spectral (band-limited) reconstruction.
//!
//! A [`BasisSet`] stores `p` basis functions sampled on `n` nodes as the
//! columns of an `n×p` matrix `B` with `BᵀB = I`. Column 0 of every family is
//! the constant `1/√n`, so the coefficient vector of a constant function is a
//! multiple of `e₁`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Threshold on `max |BᵀB − I|` above which a Gram column is re-orthogonalized.
const GRAM_REORTH_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisFamily {
    Cosine,
    Gram,
    Haar,
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisFamily::Cosine => "cosine",
            BasisFamily::Gram => "gram",
            BasisFamily::Haar => "haar",
        })
    }
}

impl FromStr for BasisFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" | "dct" => Ok(BasisFamily::Cosine),
            "gram" => Ok(BasisFamily::Gram),
            "haar" => Ok(BasisFamily::Haar),
            other => Err(Error::arg(format!("unknown basis family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    family: BasisFamily,
    /// Original column index (degree / wavenumber / Haar index) of each column.
    indices: Vec<usize>,
    entries: Matrix,
}

impl BasisSet {
    /// Builds `p` functions of the given family on `n` nodes.
    pub fn new(family: BasisFamily, n: usize, p: usize) -> Result<Self> {
        match family {
            BasisFamily::Cosine => cosine_basis(n, p),
            BasisFamily::Gram => gram_basis(n, p),
            BasisFamily::Haar => haar_basis(n, p),
        }
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    /// Number of nodes.
    pub fn nodes(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.ncols() == 0
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    /// Index of each retained column in the complete family.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Keeps only the listed columns (positions in this set), in the given
    /// order. Used for band-pass selections such as dropping linear terms.
    pub fn select(&self, columns: &[usize]) -> Result<BasisSet> {
        if columns.is_empty() {
            return Err(Error::arg("column selection is empty"));
        }
        let mut seen = vec![false; self.len()];
        for &c in columns {
            if c >= self.len() {
                return Err(Error::arg(format!(
                    "column {c} out of range for a basis of {} functions",
                    self.len()
                )));
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::arg(format!("column {c} selected twice")));
            }
        }
        Ok(BasisSet {
            family: self.family,
            indices: columns.iter().map(|&c| self.indices[c]).collect(),
            entries: self.entries.select_columns(columns),
        })
    }

    /// Drops the listed columns and keeps the rest in order.
    pub fn without(&self, drop: &[usize]) -> Result<BasisSet> {
        let keep: Vec<usize> = (0..self.len()).filter(|c| !drop.contains(c)).collect();
        self.select(&keep)
    }

    /// Coefficients `Bᵀf`.
    pub fn analyze(&self, f: &Vector) -> Result<Vector> {
        if f.len() != self.nodes() {
            return Err(Error::dim(format!(
                "basis has {} nodes, vector has {}",
                self.nodes(),
                f.len()
            )));
        }
        Ok(self.entries.tr_mul(f))
    }

    /// Samples `B·c`.
    pub fn synthesize(&self, c: &Vector) -> Result<Vector> {
        if c.len() != self.len() {
            return Err(Error::dim(format!(
                "basis has {} functions, coefficient vector has {}",
                self.len(),
                c.len()
            )));
        }
        Ok(&self.entries * c)
    }
}

fn check_count(n: usize, p: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::arg("basis needs at least one node"));
    }
    if p == 0 || p > n {
        return Err(Error::arg(format!("basis count {p} out of range 1..={n}")));
    }
    Ok(())
}

/// Orthonormal DCT-II functions `c_k cos(πk(2i+1)/(2n))`.
pub fn cosine_basis(n: usize, p: usize) -> Result<BasisSet> {
    check_count(n, p)?;
    let nf = n as f64;
    let c0 = (1.0 / nf).sqrt();
    let ck = (2.0 / nf).sqrt();
    let entries = Matrix::from_fn(n, p, |i, k| {
        if k == 0 {
            c0
        } else {
            ck * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * nf)).cos()
        }
    });
    Ok(BasisSet {
        family: BasisFamily::Cosine,
        indices: (0..p).collect(),
        entries,
    })
}

/// Discrete orthonormal (Gram) polynomials of degree `0..p` on uniform nodes.
///
/// Built with the Stieltjes three-term recurrence on nodes mapped to
/// `[-1, 1]`; a column is re-orthogonalized against its predecessors when
/// its orthogonality error exceeds `1e-11`.
pub fn gram_basis(n: usize, p: usize) -> Result<BasisSet> {
    check_count(n, p)?;
    let x: Vec<f64> = if n == 1 {
        vec![0.0]
    } else {
        (0..n)
            .map(|i| (2 * i) as f64 / (n - 1) as f64 - 1.0)
            .collect()
    };
    let x = Vector::from_vec(x);

    let mut b = Matrix::zeros(n, p);
    b.column_mut(0).fill(1.0 / (n as f64).sqrt());

    let mut prev_norm = 0.0;
    for k in 1..p {
        let pk = b.column(k - 1).into_owned();
        let xpk = x.component_mul(&pk);
        let a = xpk.dot(&pk);
        let mut q = xpk - &pk * a;
        if k >= 2 {
            q -= b.column(k - 2) * prev_norm;
        }

        let worst = (0..k)
            .map(|j| b.column(j).dot(&q).abs())
            .fold(0.0, f64::max)
            / q.norm();
        if worst > GRAM_REORTH_TOL {
            for _ in 0..2 {
                for j in 0..k {
                    let c = b.column(j).dot(&q);
                    q -= b.column(j) * c;
                }
            }
        }

        let norm = q.norm();
        if norm <= f64::EPSILON * (n as f64) {
            return Err(Error::Singular(format!(
                "Gram recurrence collapsed at degree {k} on {n} nodes"
            )));
        }
        b.column_mut(k).copy_from(&(q / norm));
        prev_norm = norm;
    }

    Ok(BasisSet {
        family: BasisFamily::Gram,
        indices: (0..p).collect(),
        entries: b,
    })
}

/// The normalized Haar system ordered coarse to fine: the constant, then
/// wavelets level by level, left to right within a level.
pub fn haar_basis(n: usize, p: usize) -> Result<BasisSet> {
    if !n.is_power_of_two() {
        return Err(Error::arg(format!(
            "Haar basis needs a power-of-two node count, got {n}"
        )));
    }
    check_count(n, p)?;

    let mut b = Matrix::zeros(n, p);
    b.column_mut(0).fill(1.0 / (n as f64).sqrt());
    let mut col = 1;
    let mut support = n;
    'levels: while support >= 2 {
        let half = support / 2;
        let amp = 1.0 / (support as f64).sqrt();
        for start in (0..n).step_by(support) {
            if col == p {
                break 'levels;
            }
            for i in start..start + half {
                b[(i, col)] = amp;
            }
            for i in start + half..start + support {
                b[(i, col)] = -amp;
            }
            col += 1;
        }
        support = half;
    }

    Ok(BasisSet {
        family: BasisFamily::Haar,
        indices: (0..p).collect(),
        entries: b,
    })
}
