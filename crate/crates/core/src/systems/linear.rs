//! Linear isomorphisms of R^n, classified analytically.
//!
//! For `A` invertible, `Gamma_delta(0) = { y : sup_n |A^n y| <= delta }` and
//! `Gamma_delta(x) = Gamma_delta(0) + x`. The set lies in the sum of the
//! generalized eigenspaces with modulus one, so it has positive volume
//! exactly when every eigenvalue has modulus one and the powers of `A` stay
//! bounded.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

const MODULUS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearMapSpec {
    matrix: DMatrix<f64>,
    eigen_moduli: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum GammaZeroClass {
    /// The zero-dimensional space.
    Trivial,
    PositiveVolume,
    /// `Gamma_delta(0)` lies in a proper subspace. `jordan_caveat` is set
    /// when every eigenvalue has modulus one but a nontrivial Jordan block
    /// makes the powers grow.
    LowerDimensional { jordan_caveat: bool },
}

impl LinearMapSpec {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidArgument(format!(
                "matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        let mut eigen_moduli: Vec<f64> = if matrix.nrows() == 0 {
            Vec::new()
        } else {
            matrix
                .clone()
                .complex_eigenvalues()
                .iter()
                .map(|z| z.norm())
                .collect()
        };
        eigen_moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self {
            matrix,
            eigen_moduli,
        })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("rows must form a square matrix".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_rows(&[&[c, -s], &[s, c]]).expect("2x2")
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalue moduli in increasing order.
    pub fn eigen_moduli(&self) -> &[f64] {
        &self.eigen_moduli
    }

    pub fn determinant(&self) -> f64 {
        if self.dim() == 0 {
            1.0
        } else {
            self.matrix.determinant()
        }
    }

    /// `|A^(2^20)| / |A^(2^10)|`: about 1 for power-bounded matrices and
    /// about `2^10` per Jordan level otherwise.
    fn power_growth(&self) -> f64 {
        let mut p = self.matrix.clone();
        let mut early = 0.0;
        for i in 1..=20 {
            p = &p * &p;
            if i == 10 {
                early = p.norm();
            }
        }
        p.norm() / early.max(f64::MIN_POSITIVE)
    }
}

/// Classify `Gamma_delta(0)` for the linear map `m`. The answer does not
/// depend on `delta > 0` because `Gamma_delta(0) = delta Gamma_1(0)`.
pub fn linear_gamma_zero(m: &LinearMapSpec, delta: f64) -> Result<GammaZeroClass> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    if m.dim() == 0 {
        return Ok(GammaZeroClass::Trivial);
    }
    if m.determinant().abs() <= f64::EPSILON * m.matrix.norm().powi(m.dim() as i32) {
        return Err(Error::Domain("matrix is singular".into()));
    }
    let off_unit = m
        .eigen_moduli
        .iter()
        .any(|&r| (r - 1.0).abs() > MODULUS_TOL);
    if off_unit {
        return Ok(GammaZeroClass::LowerDimensional {
            jordan_caveat: false,
        });
    }
    if m.power_growth() > 16.0 {
        Ok(GammaZeroClass::LowerDimensional {
            jordan_caveat: true,
        })
    } else {
        Ok(GammaZeroClass::PositiveVolume)
    }
}
