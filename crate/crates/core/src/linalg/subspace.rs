use crate::error::{mismatch, Result};
use crate::linalg::{kernel, norm, range, svd, Matrix, Tolerance};
use crate::Scalar;

/// A linear subspace of `ℝⁿ`, stored by an orthonormal basis.
///
/// The zero subspace is an ordinary value with an `n x 0` basis. Equality is
/// decided by mutual containment, never by comparing bases.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<T> {
    basis: Matrix<T>,
}

impl<T: Scalar> Subspace<T> {
    pub(crate) fn from_orthonormal(basis: Matrix<T>) -> Self {
        Self { basis }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            basis: Matrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            basis: Matrix::identity(n),
        }
    }

    /// Span of the columns of `m`.
    pub fn span(m: &Matrix<T>, tol: &Tolerance<T>) -> Result<Self> {
        range(m, tol)
    }

    pub fn from_vectors(n: usize, vectors: &[Vec<T>], tol: &Tolerance<T>) -> Result<Self> {
        Self::span(&Matrix::from_columns(n, vectors)?, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim() - self.dim()
    }

    /// Orthonormal basis, one vector per column.
    pub fn basis(&self) -> &Matrix<T> {
        &self.basis
    }

    pub fn vectors(&self) -> Vec<Vec<T>> {
        self.basis.columns()
    }

    pub fn project(&self, x: &[T]) -> Vec<T> {
        let coeffs = self.basis.transpose().mul_vec(x);
        self.basis.mul_vec(&coeffs)
    }

    pub fn distance_to(&self, x: &[T]) -> T {
        let p = self.project(x);
        let r: Vec<T> = x.iter().zip(&p).map(|(&a, &b)| a - b).collect();
        norm(&r)
    }

    pub fn contains_vector(&self, x: &[T], tol: &Tolerance<T>) -> bool {
        self.distance_to(x) <= tol.agreement() * norm(x) + tol.abs_eps
    }

    /// `other ⊆ self` within tolerance.
    pub fn contains(&self, other: &Subspace<T>, tol: &Tolerance<T>) -> bool {
        other.vectors().iter().all(|v| self.contains_vector(v, tol))
    }

    /// Sine of the largest principal angle; 1 when the dimensions differ.
    pub fn distance(&self, other: &Subspace<T>) -> T {
        if self.dim() != other.dim() || self.ambient_dim() != other.ambient_dim() {
            return T::one();
        }
        if self.dim() == 0 {
            return T::zero();
        }
        let proj = &self.basis * &(&self.basis.transpose() * &other.basis);
        let resid = &other.basis - &proj;
        svd(&resid).map(|d| d.sigma_max()).unwrap_or_else(|_| T::one())
    }

    pub fn same_as(&self, other: &Subspace<T>, tol: &Tolerance<T>) -> bool {
        self.dim() == other.dim() && self.distance(other) <= tol.agreement()
    }

    fn check_ambient(&self, other: &Subspace<T>) -> Result<()> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(mismatch(format!(
                "subspaces of R^{} and R^{}",
                self.ambient_dim(),
                other.ambient_dim()
            )));
        }
        Ok(())
    }

    pub fn sum(&self, other: &Subspace<T>, tol: &Tolerance<T>) -> Result<Self> {
        self.check_ambient(other)?;
        Self::span(&self.basis.hstack(&other.basis)?, tol)
    }

    pub fn intersect(&self, other: &Subspace<T>, tol: &Tolerance<T>) -> Result<Self> {
        self.check_ambient(other)?;
        let n = self.ambient_dim();
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Self::zero(n));
        }
        // (a, b) with B_V a = B_W b
        let stacked = self.basis.hstack(&other.basis.scale(-T::one()))?;
        let ker = kernel(&stacked, tol)?;
        if ker.dim() == 0 {
            return Ok(Self::zero(n));
        }
        let k = self.dim();
        let coeffs = Matrix::from_fn(k, ker.dim(), |i, j| ker.basis[(i, j)]);
        Self::span(&(&self.basis * &coeffs), tol)
    }

    /// Image under the linear map `a`.
    pub fn image(&self, a: &Matrix<T>, tol: &Tolerance<T>) -> Result<Self> {
        if a.cols() != self.ambient_dim() {
            return Err(mismatch(format!(
                "map with {} columns applied in R^{}",
                a.cols(),
                self.ambient_dim()
            )));
        }
        Self::span(&a.try_mul(&self.basis)?, tol)
    }

    /// Euclidean orthogonal complement.
    pub fn orthogonal_complement(&self, tol: &Tolerance<T>) -> Result<Self> {
        if self.dim() == 0 {
            return Ok(Self::full(self.ambient_dim()));
        }
        kernel(&self.basis.transpose(), tol)
    }

    /// Euclidean complement of `inner` inside `self`: `self ∩ inner^⊥`.
    pub fn complement_within(&self, inner: &Subspace<T>, tol: &Tolerance<T>) -> Result<Self> {
        self.intersect(&inner.orthogonal_complement(tol)?, tol)
    }

    /// Coordinates of the vector in this subspace's orthonormal basis.
    pub fn coordinates(&self, x: &[T]) -> Vec<T> {
        self.basis.transpose().mul_vec(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit;

    fn tol() -> Tolerance<f64> {
        Tolerance::default()
    }

    #[test]
    fn sum_and_intersection_examples() {
        let t = tol();
        let e1 = Subspace::from_vectors(4, &[unit(4, 0)], &t).unwrap();
        let e2 = Subspace::from_vectors(4, &[unit(4, 1)], &t).unwrap();
        assert_eq!(e1.sum(&e2, &t).unwrap().dim(), 2);

        let v = Subspace::from_vectors(4, &[unit(4, 0), unit(4, 1)], &t).unwrap();
        let w = Subspace::from_vectors(4, &[unit(4, 1), unit(4, 2)], &t).unwrap();
        let i = v.intersect(&w, &t).unwrap();
        assert!(i.same_as(&e2, &t));
    }

    #[test]
    fn ambient_mismatch_is_an_error() {
        let t = tol();
        let a = Subspace::<f64>::full(3);
        let b = Subspace::<f64>::full(4);
        assert!(a.sum(&b, &t).is_err());
        assert!(a.intersect(&b, &t).is_err());
    }

    #[test]
    fn zero_subspace_is_first_class() {
        let t = tol();
        let z = Subspace::<f64>::zero(5);
        let f = Subspace::<f64>::full(5);
        assert_eq!(z.sum(&f, &t).unwrap().dim(), 5);
        assert_eq!(z.intersect(&f, &t).unwrap().dim(), 0);
        assert_eq!(z.orthogonal_complement(&t).unwrap().dim(), 5);
        assert!(f.contains(&z, &t));
        assert_eq!(z.distance(&Subspace::zero(5)), 0.0);
    }

    #[test]
    fn distance_detects_tilt() {
        let t = tol();
        let a = Subspace::from_vectors(2, &[vec![1.0, 0.0]], &t).unwrap();
        let b = Subspace::from_vectors(2, &[vec![1.0, 1e-3]], &t).unwrap();
        let d = a.distance(&b);
        assert!((d - 1e-3 / (1.0f64 + 1e-6).sqrt()).abs() < 1e-12);
    }
}
