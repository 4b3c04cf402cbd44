//! Reduction of the background term to an `r x r` problem.
//!
//! With `A = UΣVᵀ`, `||A(X − I)Aᵀ||_F = ||ΣVᵀ(X − I)VΣ||_F`, so only `Σ` and
//! `V` are needed. They come either from a thin SVD of `A` or from the
//! eigendecomposition of `AᵀA = VΣ²Vᵀ`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SvdReduction {
    /// Singular values, non-increasing, zero-padded to length `r`.
    pub sigma: DVector<f64>,
    /// `r x r` matrix with orthonormal columns.
    pub v: DMatrix<f64>,
}

impl SvdReduction {
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    /// `VΣ`, so that the reduced matrix is `(VΣ)ᵀ (X − I) (VΣ)`.
    pub fn scaled_basis(&self) -> DMatrix<f64> {
        let mut w = self.v.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            w.column_mut(j).scale_mut(*s);
        }
        w
    }

    /// `VΣ²Vᵀ`, equal to `AᵀA`.
    pub fn gram(&self) -> DMatrix<f64> {
        let w = self.scaled_basis();
        &w * w.transpose()
    }

    /// `ΣVᵀ(X − I)VΣ`.
    pub fn reduced(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let w = self.scaled_basis();
        let d = x - DMatrix::identity(self.dim(), self.dim());
        w.transpose() * d * w
    }
}

pub fn reduce_via_svd(a: &DMatrix<f64>) -> Result<SvdReduction> {
    let r = a.ncols();
    if a.nrows() == 0 || r == 0 {
        return Err(Error::Empty("background matrix".into()));
    }
    // zero rows leave AᵀA unchanged; padding gives a full r x r V
    let padded;
    let a = if a.nrows() < r {
        padded = a.clone().resize_vertically(r, 0.0);
        &padded
    } else {
        a
    };
    let svd = SVD::try_new(a.clone(), false, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Decomposition("SVD did not converge".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Decomposition("SVD returned no right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma = DVector::from_iterator(r, order.iter().map(|&i| svd.singular_values[i].max(0.0)));
    let v = DMatrix::from_fn(r, r, |row, col| v_t[(order[col], row)]);
    Ok(SvdReduction { sigma, v })
}

/// Same reduction from `AᵀA`; tiny negative eigenvalues are clipped to 0.
pub fn reduce_via_gram(gram: &DMatrix<f64>) -> Result<SvdReduction> {
    let r = gram.nrows();
    if r == 0 || gram.ncols() != r {
        return Err(Error::InvalidArgument("Gram matrix must be square and non-empty".into()));
    }
    let eig = SymmetricEigen::try_new(gram.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Decomposition("eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let sigma = DVector::from_iterator(r, order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()));
    let v = DMatrix::from_fn(r, r, |row, col| eig.eigenvectors[(row, order[col])]);
    Ok(SvdReduction { sigma, v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, n: usize, r: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, r, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_sym(rng: &mut ChaCha8Rng, r: usize) -> DMatrix<f64> {
        let m = random(rng, r, r);
        (&m + m.transpose()) * 0.5
    }

    fn direct(a: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
        (a * x * a.transpose() - a * a.transpose()).norm_squared()
    }

    fn check_invariants(red: &SvdReduction) {
        let r = red.dim();
        assert!((red.v.transpose() * &red.v - DMatrix::identity(r, r)).norm() < 1e-10);
        for w in red.sigma.as_slice().windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(red.sigma.iter().all(|s| *s >= 0.0));
    }

    #[test]
    fn identity_background() {
        let red = reduce_via_svd(&DMatrix::identity(4, 4)).unwrap();
        check_invariants(&red);
        assert!(red.sigma.iter().all(|s| (s - 1.0).abs() < 1e-14));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_sym(&mut rng, 4);
        let lhs = red.reduced(&x).norm_squared();
        let rhs = (&x - DMatrix::identity(4, 4)).norm_squared();
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
    }

    #[test]
    fn zero_row_does_not_change_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random(&mut rng, 12, 4);
        let with_zero = a.clone().insert_row(5, 0.0);
        let x = random_sym(&mut rng, 4);
        let r1 = reduce_via_svd(&a).unwrap();
        let r2 = reduce_via_svd(&with_zero).unwrap();
        assert!((&r1.sigma - &r2.sigma).norm() < 1e-12);
        let (f1, f2) = (r1.reduced(&x).norm_squared(), r2.reduced(&x).norm_squared());
        assert!((f1 - f2).abs() < 1e-10 * f1);
    }

    #[test]
    fn identity_holds_for_random_tall_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(&mut rng, 40, 5);
        let red = reduce_via_svd(&a).unwrap();
        check_invariants(&red);
        for _ in 0..10 {
            let x = random_sym(&mut rng, 5);
            let lhs = direct(&a, &x);
            let rhs = red.reduced(&x).norm_squared();
            assert!((lhs - rhs).abs() <= 1e-10 * lhs);
        }
    }

    #[test]
    fn wide_matrix_is_padded() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(&mut rng, 3, 6);
        let red = reduce_via_svd(&a).unwrap();
        check_invariants(&red);
        assert_eq!(red.dim(), 6);
        assert!(red.sigma.iter().skip(3).all(|s| s.abs() < 1e-12));
        let x = random_sym(&mut rng, 6);
        let lhs = direct(&a, &x);
        assert!((lhs - red.reduced(&x).norm_squared()).abs() <= 1e-10 * lhs);
    }

    #[test]
    fn gram_route_agrees_with_svd_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(&mut rng, 60, 7);
        let via_svd = reduce_via_svd(&a).unwrap();
        let via_gram = reduce_via_gram(&(a.transpose() * &a)).unwrap();
        check_invariants(&via_gram);
        assert!((&via_svd.sigma - &via_gram.sigma).norm() < 1e-10 * via_svd.sigma[0]);
        let x = random_sym(&mut rng, 7);
        let (f1, f2) = (via_svd.reduced(&x).norm_squared(), via_gram.reduced(&x).norm_squared());
        assert!((f1 - f2).abs() < 1e-9 * f1);
    }
}
