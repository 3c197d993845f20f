//! Local coordinate models with affine coefficients: distributions cut out
//! by affine coframes, with exact brackets and exterior derivatives.
//!
//! Curvature convention: `Ω(X, Y) = −λ([X, Y])`. For horizontal `X, Y` the
//! Cartan formula `dλ(X,Y) = Xλ(Y) − Yλ(X) − λ([X,Y])` reduces to the same
//! value, so `eval_curvature_coframe` and `eval_curvature_bracket` agree
//! without any sign correction.

mod affine;
mod liouville;
mod presets;

pub use affine::{bracket, AffineCovector, AffineVectorField};
pub use liouville::{
    formal_lift, lift_exact_lagrangian, make_liouville_model, sample_curve, Grid, LiftedGrid,
    LiouvilleModel,
};
pub use presets::{
    holomorphic_complex_structure, make_holomorphic_contact_model,
    make_quaternionic_heisenberg_model,
};

use crate::error::{mismatch, precondition, Error, Result};
use crate::fat2::FatTuple2;
use crate::linalg::{kernel, min_norm_solve, norm, rank, unit, Matrix, Subspace, Tolerance};
use crate::qcont::QContTriple;
use crate::Scalar;

/// Basis of `D_x` used to express pointwise data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// The model's frame fields evaluated at the point.
    Frame,
    /// An orthonormal basis of `∩ ker λ^s` computed numerically.
    Orthonormal,
}

#[derive(Debug, Clone)]
pub struct AffineCoframeModel<T> {
    dim: usize,
    lambdas: Vec<AffineCovector<T>>,
    frame: Option<Vec<AffineVectorField<T>>>,
    tol: Tolerance<T>,
}

impl<T: Scalar> AffineCoframeModel<T> {
    pub fn new(
        lambdas: Vec<AffineCovector<T>>,
        frame: Option<Vec<AffineVectorField<T>>>,
        tol: Tolerance<T>,
    ) -> Result<Self> {
        let dim = lambdas.first().map(|l| l.dim()).ok_or_else(|| precondition("no 1-forms"))?;
        if let Some(l) = lambdas.iter().find(|l| l.dim() != dim) {
            return Err(mismatch(format!("1-form on R^{} in a model on R^{dim}", l.dim())));
        }
        let m = Self {
            dim,
            lambdas,
            frame,
            tol,
        };
        let p = m.p();
        for x in m.probe_points() {
            let rows = m.coframe_at(&x);
            if rank(&rows, &m.tol)? != p {
                return Err(precondition(format!("1-forms dependent at probe point {x:?}")));
            }
        }
        if let Some(frame) = &m.frame {
            if frame.len() != dim - p {
                return Err(mismatch(format!(
                    "{} frame fields for a distribution of rank {}",
                    frame.len(),
                    dim - p
                )));
            }
            for (i, f) in frame.iter().enumerate() {
                if f.dim() != dim {
                    return Err(mismatch(format!("frame field {i} lives on R^{}", f.dim())));
                }
                for (s, l) in m.lambdas.iter().enumerate() {
                    let scale = f.max_abs() * (l.linear.max_abs() + norm(&l.constant));
                    let d = l.annihilation_defect(f);
                    if d > m.tol.threshold(scale) {
                        return Err(precondition(format!(
                            "lambda{} does not annihilate frame field {i} (defect {d:e})",
                            s + 1
                        )));
                    }
                }
            }
            for x in m.probe_points() {
                if rank(&m.frame_at(&x)?, &m.tol)? != dim - p {
                    return Err(precondition(format!("frame degenerate at probe point {x:?}")));
                }
            }
        }
        Ok(m)
    }

    /// Origin, coordinate vectors and a fixed diagonal point.
    fn probe_points(&self) -> Vec<Vec<T>> {
        let n = self.dim;
        let mut pts = vec![vec![T::zero(); n]];
        pts.extend((0..n).map(|i| unit(n, i)));
        pts.push((0..n).map(|i| T::of(0.5 - 0.1 * i as f64)).collect());
        pts
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> usize {
        self.lambdas.len()
    }

    pub fn rank(&self) -> usize {
        self.dim - self.p()
    }

    pub fn lambdas(&self) -> &[AffineCovector<T>] {
        &self.lambdas
    }

    pub fn frame(&self) -> Option<&[AffineVectorField<T>]> {
        self.frame.as_deref()
    }

    pub fn tol(&self) -> &Tolerance<T> {
        &self.tol
    }

    pub fn with_tol(mut self, tol: Tolerance<T>) -> Self {
        self.tol = tol;
        self
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(mismatch(format!("point in R^{} for a model on R^{}", x.len(), self.dim)));
        }
        Ok(())
    }

    /// `p x n` matrix whose rows are the coefficient vectors at `x`.
    pub fn coframe_at(&self, x: &[T]) -> Matrix<T> {
        Matrix::from_rows(&self.lambdas.iter().map(|l| l.at(x)).collect::<Vec<_>>())
            .expect("equal lengths")
    }

    /// Constant matrices of `dλ^s`.
    pub fn curvature_forms(&self) -> Vec<Matrix<T>> {
        self.lambdas.iter().map(|l| l.differential()).collect()
    }

    pub fn distribution_at(&self, x: &[T]) -> Result<Subspace<T>> {
        self.check_point(x)?;
        kernel(&self.coframe_at(x), &self.tol)
    }

    /// Frame fields at `x`, one per column.
    pub fn frame_at(&self, x: &[T]) -> Result<Matrix<T>> {
        self.check_point(x)?;
        let frame = self.frame.as_ref().ok_or_else(|| precondition("model has no frame"))?;
        Matrix::from_columns(self.dim, &frame.iter().map(|f| f.at(x)).collect::<Vec<_>>())
    }

    fn basis_at(&self, x: &[T], basis: Basis) -> Result<Matrix<T>> {
        match basis {
            Basis::Frame => self.frame_at(x),
            Basis::Orthonormal => Ok(self.distribution_at(x)?.basis().clone()),
        }
    }

    /// `(dλ^s|_D)` in the chosen basis of `D_x`.
    pub fn pointwise_forms(&self, x: &[T], basis: Basis) -> Result<Vec<Matrix<T>>> {
        let b = self.basis_at(x, basis)?;
        self.curvature_forms().iter().map(|w| w.congruence(&b)).collect()
    }

    pub fn fat_pair_at(&self, x: &[T], basis: Basis) -> Result<FatTuple2<T>> {
        if self.p() != 2 {
            return Err(precondition(format!("corank {} model has no fat pair", self.p())));
        }
        let mut w = self.pointwise_forms(x, basis)?;
        let w2 = w.pop().expect("two forms");
        let w1 = w.pop().expect("two forms");
        FatTuple2::new(w1, w2, self.tol)
    }

    /// Coordinates of a horizontal vector in the frame basis at `x`.
    pub fn frame_coordinates(&self, x: &[T], w: &[T]) -> Result<Vec<T>> {
        let f = self.frame_at(x)?;
        let c = min_norm_solve(&f, w, &self.tol)?;
        let back = f.mul_vec(&c);
        let resid = norm(&back.iter().zip(w).map(|(&a, &b)| a - b).collect::<Vec<_>>());
        if resid > self.tol.agreement() * (T::one() + norm(w)) {
            return Err(precondition(format!("vector is not horizontal (residual {resid:e})")));
        }
        Ok(c)
    }

    fn check_horizontal(&self, x: &[T], u: &[T]) -> Result<()> {
        for (s, l) in self.lambdas.iter().enumerate() {
            let c = l.at(x);
            let v = crate::linalg::dot(&c, u);
            if v.abs() > self.tol.threshold(norm(&c) * norm(u)) {
                return Err(precondition(format!(
                    "vector is not horizontal: lambda{}(u) = {v:e}",
                    s + 1
                )));
            }
        }
        Ok(())
    }

    /// `(dλ^s(u, v))_s` for horizontal `u, v` at `point`.
    pub fn eval_curvature_coframe(&self, point: &[T], u: &[T], v: &[T]) -> Result<Vec<T>> {
        self.check_point(point)?;
        if u.len() != self.dim || v.len() != self.dim {
            return Err(mismatch("tangent vectors of the wrong length"));
        }
        self.check_horizontal(point, u)?;
        self.check_horizontal(point, v)?;
        Ok(self.curvature_forms().iter().map(|w| w.bilinear(u, v)).collect())
    }

    /// `−λ_point([F_i, F_j])`.
    pub fn eval_curvature_bracket(&self, fi: usize, fj: usize, point: &[T]) -> Result<Vec<T>> {
        self.check_point(point)?;
        let frame = self.frame.as_ref().ok_or_else(|| precondition("model has no frame"))?;
        let (a, b) = match (frame.get(fi), frame.get(fj)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Precondition(format!(
                    "frame index out of range ({fi}, {fj}) for {} fields",
                    frame.len()
                )))
            }
        };
        let br = bracket(a, b)?.at(point);
        Ok(self.lambdas.iter().map(|l| -l.eval(point, &br)).collect())
    }
}

impl<T: Scalar> AffineCoframeModel<T> {
    /// Pointwise triple of a corank-3 model given the metric and complex
    /// structures in the frame basis; the forms come from the model.
    pub fn qcont_at(&self, x: &[T], g: &Matrix<T>, j: &[Matrix<T>; 3]) -> Result<QContTriple<T>> {
        if self.p() != 3 {
            return Err(precondition(format!("corank {} model has no triple", self.p())));
        }
        let w = self.pointwise_forms(x, Basis::Frame)?;
        let omega = [w[0].clone(), w[1].clone(), w[2].clone()];
        QContTriple::from_parts(g.clone(), j.clone(), omega, self.tol)
    }
}
