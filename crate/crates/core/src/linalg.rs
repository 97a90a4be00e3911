//! Dense complex linear algebra on the 15-dimensional Bloch space.

use nalgebra::{SMatrix, SVector, Schur, LU, U15};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DIM: usize = 15;

pub type CMatrix = SMatrix<Complex64, DIM, DIM>;
pub type CVector = SVector<Complex64, DIM>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Max absolute column sum.
pub fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU factorisation with partial pivoting, reusable for several right-hand sides.
pub struct Factorized {
    lu: LU<Complex64, U15, U15>,
}

impl Factorized {
    pub fn new(m: CMatrix) -> Result<Self> {
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::SingularSystem("zero pivot in LU factorisation".into()));
        }
        Ok(Self { lu })
    }

    pub fn solve(&self, rhs: &CVector) -> Result<CVector> {
        let x = self
            .lu
            .solve(rhs)
            .ok_or_else(|| Error::SingularSystem("LU solve failed".into()))?;
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SingularSystem("non-finite solution".into()));
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.lu
            .try_inverse()
            .ok_or_else(|| Error::SingularSystem("matrix is not invertible".into()))
    }
}

/// One-norm condition number `‖A‖₁‖A⁻¹‖₁`; the inverse is cheap at this size.
pub fn condition_estimate(m: &CMatrix) -> Result<f64> {
    let inv = Factorized::new(*m)?.inverse()?;
    Ok(norm1(m) * norm1(&inv))
}

/// `m = V diag(values) V⁻¹`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: CVector,
    pub vectors: CMatrix,
    pub inverse: CMatrix,
    /// One-norm condition number of `vectors`.
    pub condition: f64,
}

impl Eigen {
    /// Eigendecomposition through the complex Schur form. Eigenvectors of the
    /// triangular factor come from back-substitution.
    pub fn new(m: &CMatrix) -> Result<Self> {
        let scale = norm1(m).max(f64::MIN_POSITIVE);
        let schur = Schur::try_new(*m, f64::EPSILON, 100_000)
            .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
        let (q, t) = schur.unpack();
        let small = f64::EPSILON * scale;

        let mut tv = CMatrix::zeros();
        for k in 0..DIM {
            let lambda = t[(k, k)];
            tv[(k, k)] = ONE;
            for i in (0..k).rev() {
                let mut acc = ZERO;
                for j in (i + 1)..=k {
                    acc += t[(i, j)] * tv[(j, k)];
                }
                let mut denom = t[(i, i)] - lambda;
                if denom.norm() < small {
                    denom = Complex64::new(small, 0.0);
                }
                tv[(i, k)] = -acc / denom;
            }
            let n = tv.column(k).norm();
            tv.column_mut(k).unscale_mut(n);
        }
        let vectors = q * tv;
        let values = CVector::from_fn(|k, _| t[(k, k)]);
        let inverse = Factorized::new(vectors)?.inverse()?;
        let condition = norm1(&vectors) * norm1(&inverse);
        Ok(Self {
            values,
            vectors,
            inverse,
            condition,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix() -> CMatrix {
        CMatrix::from_fn(|i, j| {
            let x = (i * 7 + j * 3) as f64;
            Complex64::new((x * 0.37).sin(), (x * 0.11).cos()) + if i == j { ONE * 4.0 } else { ZERO }
        })
    }

    #[test]
    fn lu_solves() {
        let m = test_matrix();
        let b = CVector::from_fn(|i, _| Complex64::new(i as f64, 1.0));
        let x = Factorized::new(m).unwrap().solve(&b).unwrap();
        assert!((m * x - b).norm() < 1e-12 * b.norm());
        assert!(condition_estimate(&m).unwrap() >= 1.0);
    }

    #[test]
    fn singular_rejected() {
        assert!(Factorized::new(CMatrix::zeros()).is_err());
    }

    #[test]
    fn eigen_reconstructs() {
        let m = test_matrix();
        let e = Eigen::new(&m).unwrap();
        let rebuilt = e.vectors * CMatrix::from_diagonal(&e.values) * e.inverse;
        assert!((rebuilt - m).norm() < 1e-10 * m.norm());
        for k in 0..DIM {
            let v = e.vectors.column(k);
            let r = m * v - v * e.values[k];
            assert!(r.norm() < 1e-10 * m.norm());
        }
    }
}
