//! Random draws used by the builders and the property suites.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{norm, Matrix, Subspace};
use crate::Scalar;

pub fn gaussian_vector<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    (0..n)
        .map(|_| T::of(rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

/// Uniform draw from the unit sphere of `s`; `None` for the zero subspace.
pub fn unit_vector_in<T: Scalar, R: Rng + ?Sized>(s: &Subspace<T>, rng: &mut R) -> Option<Vec<T>> {
    if s.dim() == 0 {
        return None;
    }
    loop {
        let c = gaussian_vector::<T, R>(s.dim(), rng);
        let x = s.basis().mul_vec(&c);
        let nx = norm(&x);
        if nx > T::of(1e-3) {
            return Some(x.iter().map(|&v| v / nx).collect());
        }
    }
}

pub fn gaussian_matrix<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix<T> {
    Matrix::from_fn(rows, cols, |_, _| T::of(rng.sample::<f64, _>(StandardNormal)))
}

/// `I + s·G` with Gaussian `G`, rescaled so that `‖s·G‖₂ ≤ 1/2`; the
/// condition number is therefore at most 3.
pub fn well_conditioned<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix<T> {
    let g = gaussian_matrix::<T, R>(n, n, rng);
    let f = g.frobenius_norm();
    if f == T::zero() {
        return Matrix::identity(n);
    }
    &Matrix::identity(n) + &g.scale(T::of(0.5) / f)
}

/// Span of `k` Gaussian vectors in `ℝⁿ`.
pub fn random_subspace<T: Scalar, R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Subspace<T> {
    let cols: Vec<Vec<T>> = (0..k).map(|_| gaussian_vector(n, rng)).collect();
    let m = Matrix::from_columns(n, &cols).expect("finite draws");
    Subspace::span(&m, &Default::default()).expect("svd of a small gaussian matrix")
}
