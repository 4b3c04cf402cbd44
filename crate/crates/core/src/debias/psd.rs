use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Decomposition("symmetric eigendecomposition did not converge".into()))
}

/// Rebuilds `Q f(Λ) Qᵀ`.
pub(crate) fn spectral_map(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let mut scaled = eig.eigenvectors.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        scaled.column_mut(j).scale_mut(f(l));
    }
    symmetrize(&(scaled * eig.eigenvectors.transpose()))
}

/// Euclidean projection onto the PSD cone: clip negative eigenvalues.
pub fn project_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = symmetrize(m);
    // positive definite matrices are their own projection
    if Cholesky::new(s.clone()).is_some() {
        return Ok(s);
    }
    Ok(spectral_map(&eigen(&s)?, |l| l.max(0.0)))
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigen(&symmetrize(m))?.eigenvalues.min())
}
