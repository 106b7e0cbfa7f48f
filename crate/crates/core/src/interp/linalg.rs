//! Dense LU solves with a conditioning guard.

use nalgebra::{DMatrix, Dyn, LU};

use crate::error::{Error, Result};

/// Systems whose 1-norm condition estimate exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e14;

/// LU factorization (partial pivoting) of a square matrix that passed the
/// condition check.
pub struct DenseSolver {
    lu: LU<f64, Dyn, Dyn>,
    condition: f64,
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl DenseSolver {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::ShapeMismatch(format!("matrix is {}x{}, not square", n, a.ncols())));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("system matrix contains non-finite entries".into()));
        }
        let a_norm = norm1(&a);
        let lu = a.lu();
        let inv = lu.try_inverse().ok_or_else(|| Error::SingularMatrix(format!("{n}x{n} system matrix is not invertible")))?;
        let condition = a_norm * norm1(&inv);
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(Error::SingularMatrix(format!(
                "condition estimate {condition:.3e} exceeds {MAX_CONDITION:.0e}"
            )));
        }
        Ok(DenseSolver { lu, condition })
    }

    /// 1-norm condition number of the factored matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Solves for every column of `b`.
    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.lu.solve(b).expect("factor was checked to be invertible")
    }
}
