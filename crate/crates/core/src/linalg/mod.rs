//! Tolerance-aware dense linear algebra shared by every higher module.

mod decomp;
mod matrix;
mod subspace;

pub use decomp::{eigenvalues, lu_solve, svd, symmetric_eigen, Svd};
pub use matrix::{axpy, dot, norm, unit, Matrix};
pub use subspace::Subspace;

use crate::error::{mismatch, Error, Result};
use crate::Scalar;

/// Rank decisions keep singular values `σ > rel_eps·σ_max + abs_eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub rel_eps: T,
    pub abs_eps: T,
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            rel_eps: T::of(T::DEFAULT_REL_EPS),
            abs_eps: T::of(T::DEFAULT_ABS_EPS),
        }
    }
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(rel_eps: T, abs_eps: T) -> Result<Self> {
        if !(rel_eps > T::zero() && abs_eps > T::zero()) || !rel_eps.is_finite() || !abs_eps.is_finite()
        {
            return Err(Error::Precondition(format!(
                "tolerances must be positive, got rel_eps={rel_eps}, abs_eps={abs_eps}"
            )));
        }
        Ok(Self { rel_eps, abs_eps })
    }

    pub fn threshold(&self, scale: T) -> T {
        self.rel_eps * scale + self.abs_eps
    }

    pub fn is_negligible(&self, x: T, scale: T) -> bool {
        x.abs() <= self.threshold(scale)
    }

    /// Looser bound for comparing two independently computed results
    /// (subspace distances, cross-checked residuals).
    pub fn agreement(&self) -> T {
        self.rel_eps.sqrt()
    }
}

pub fn rank<T: Scalar>(m: &Matrix<T>, tol: &Tolerance<T>) -> Result<usize> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0);
    }
    let d = svd(m)?;
    Ok(numerical_rank(&d.s, tol))
}

fn numerical_rank<T: Scalar>(s: &[T], tol: &Tolerance<T>) -> usize {
    let smax = s.first().copied().unwrap_or_else(T::zero);
    let cut = tol.threshold(smax);
    s.iter().filter(|&&x| x > cut).count()
}

/// Orthonormal basis of the null space.
pub fn kernel<T: Scalar>(m: &Matrix<T>, tol: &Tolerance<T>) -> Result<Subspace<T>> {
    let n = m.cols();
    if m.rows() == 0 {
        return Ok(Subspace::full(n));
    }
    if n == 0 {
        return Ok(Subspace::zero(0));
    }
    let d = svd(m)?;
    let r = numerical_rank(&d.s, tol);
    let idx: Vec<usize> = (r..n).collect();
    Ok(Subspace::from_orthonormal(d.v.select_columns(&idx)))
}

/// Orthonormal basis of the column space.
pub fn range<T: Scalar>(m: &Matrix<T>, tol: &Tolerance<T>) -> Result<Subspace<T>> {
    let n = m.rows();
    if m.cols() == 0 || n == 0 {
        return Ok(Subspace::zero(n));
    }
    let d = svd(m)?;
    let r = numerical_rank(&d.s, tol);
    let idx: Vec<usize> = (0..r).collect();
    Ok(Subspace::from_orthonormal(d.u.select_columns(&idx)))
}

/// Minimum-norm least-squares solution of `A x = b`.
pub fn min_norm_solve<T: Scalar>(a: &Matrix<T>, b: &[T], tol: &Tolerance<T>) -> Result<Vec<T>> {
    if b.len() != a.rows() {
        return Err(mismatch(format!(
            "right-hand side of length {} for {} equations",
            b.len(),
            a.rows()
        )));
    }
    let n = a.cols();
    if a.rows() == 0 {
        return Ok(vec![T::zero(); n]);
    }
    let d = svd(a)?;
    let r = numerical_rank(&d.s, tol);
    let mut x = vec![T::zero(); n];
    for k in 0..r {
        let uk = d.u.column(k);
        let coef = dot(&uk, b) / d.s[k];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += coef * d.v[(i, k)];
        }
    }
    Ok(x)
}

pub(crate) fn check_skew<T: Scalar>(omega: &Matrix<T>, tol: &Tolerance<T>, what: &str) -> Result<()> {
    if !omega.is_square() {
        return Err(Error::InvalidForm(format!(
            "{what} is {}x{}, not square",
            omega.rows(),
            omega.cols()
        )));
    }
    let defect = omega.skew_defect();
    if defect > tol.threshold(omega.max_abs()) {
        return Err(Error::InvalidForm(format!(
            "{what} is not skew-symmetric (asymmetry {defect:e})"
        )));
    }
    Ok(())
}

/// `V^⊥ = {w | ω(v, w) = 0 for all v ∈ V}` with `ω(u, w) = uᵀ Ω w`.
pub fn form_perp<T: Scalar>(
    v: &Subspace<T>,
    omega: &Matrix<T>,
    tol: &Tolerance<T>,
) -> Result<Subspace<T>> {
    check_skew(omega, tol, "form")?;
    if omega.rows() != v.ambient_dim() {
        return Err(mismatch(format!(
            "form of size {} on ambient dimension {}",
            omega.rows(),
            v.ambient_dim()
        )));
    }
    if v.dim() == 0 {
        return Ok(Subspace::full(v.ambient_dim()));
    }
    let rows = v.basis().transpose().try_mul(omega)?;
    kernel(&rows, tol)
}

/// Degree of the minimal polynomial: the dimension of `span{I, A, A², …}`.
///
/// Each power is normalized by its Frobenius norm before the dependence
/// test; a power that vanishes is dependent by definition.
pub fn minpoly_degree<T: Scalar>(a: &Matrix<T>, tol: &Tolerance<T>) -> Result<usize> {
    if !a.is_square() {
        return Err(mismatch(format!("minpoly of a {}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(0);
    }
    let nn = n * n;
    let mut stacked: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    let mut power = Matrix::identity(n);
    for d in 0..=n {
        let f = power.frobenius_norm();
        if f <= tol.abs_eps {
            return Ok(d);
        }
        stacked.push(power.as_slice().iter().map(|&x| x / f).collect());
        let m = Matrix::from_columns(nn, &stacked)?;
        if rank(&m, tol)? < stacked.len() {
            return Ok(d);
        }
        // keep the running power normalized so large spectra do not overflow
        power = (&power * a).scale(T::one() / f);
    }
    Ok(n)
}

/// True iff some eigenvalue has `|Im λ| ≤ rel_eps·ρ + abs_eps`, where `ρ` is
/// the spectral scale `max |λ|`.
///
/// Defective real eigenvalues (Jordan blocks) are perturbed by rounding into
/// complex pairs with `|Im λ| ~ sqrt(ε)`; a near-real pair is therefore also
/// accepted as real when `A - Re(λ) I` is numerically singular.
pub fn has_real_eigenvalue<T: Scalar>(a: &Matrix<T>, tol: &Tolerance<T>) -> Result<bool> {
    if !a.is_square() {
        return Err(mismatch(format!("eigenvalues of a {}x{} matrix", a.rows(), a.cols())));
    }
    let ev = eigenvalues(a)?;
    let scale = ev
        .iter()
        .fold(T::zero(), |acc, &(re, im)| acc.max((re * re + im * im).sqrt()));
    let cut = tol.threshold(scale);
    if ev.iter().any(|&(_, im)| im.abs() <= cut) {
        return Ok(true);
    }
    let loose = tol.agreement() * scale + tol.abs_eps;
    for &(re, im) in &ev {
        if im.abs() <= loose {
            let shifted = a - &Matrix::identity(a.rows()).scale(re);
            let d = svd(&shifted)?;
            let smin = d.s.last().copied().unwrap_or_else(T::zero);
            if smin <= tol.threshold(a.frobenius_norm()) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}
