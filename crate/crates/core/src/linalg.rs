//! Dense linear-algebra helpers on top of nalgebra's LU factorisation.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Largest system size the dense solvers accept.
pub const DENSE_LIMIT: usize = 8000;

pub(crate) struct DenseLu {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    matrix: DMatrix<f64>,
    pub condition: f64,
}

impl DenseLu {
    /// Factorise `matrix`. Fails when a pivot vanishes; the condition
    /// estimate is the ratio of the extreme pivot magnitudes.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n > DENSE_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "dense solve of size {n} exceeds the limit {DENSE_LIMIT}"
            )));
        }
        let lu = matrix.clone().lu();
        let u = lu.u();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            let p = u[(i, i)].abs();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !condition.is_finite() || condition > 1e15 {
            return Err(Error::Singular { condition });
        }
        Ok(Self {
            lu,
            matrix,
            condition,
        })
    }

    /// Solve with one round of iterative refinement.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b = DVector::from_column_slice(rhs);
        let mut x = self.lu.solve(&b).ok_or(Error::Singular {
            condition: self.condition,
        })?;
        let r = &b - &self.matrix * &x;
        if let Some(dx) = self.lu.solve(&r) {
            x += dx;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular {
                condition: self.condition,
            });
        }
        Ok(x.as_slice().to_vec())
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.lu.try_inverse().ok_or(Error::Singular {
            condition: self.condition,
        })
    }
}

pub(crate) fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
