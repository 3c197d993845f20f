use crate::error::{mismatch, Result};
use crate::linalg::{dot, Matrix};
use crate::Scalar;

/// Vector field `x ↦ c + L x` on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineVectorField<T> {
    pub constant: Vec<T>,
    pub linear: Matrix<T>,
}

/// 1-form `x ↦ Σ_j (a + B x)_j dx_j` on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCovector<T> {
    pub constant: Vec<T>,
    pub linear: Matrix<T>,
}

impl<T: Scalar> AffineVectorField<T> {
    pub fn new(constant: Vec<T>, linear: Matrix<T>) -> Result<Self> {
        let n = constant.len();
        if linear.shape() != (n, n) {
            return Err(mismatch(format!(
                "linear part {:?} for a field on R^{n}",
                linear.shape()
            )));
        }
        Matrix::new(1, n, constant.clone())?;
        Ok(Self { constant, linear })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            constant: vec![T::zero(); n],
            linear: Matrix::zeros(n, n),
        }
    }

    /// The constant field `∂_i`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n);
        f.constant[i] = T::one();
        f
    }

    pub fn dim(&self) -> usize {
        self.constant.len()
    }

    pub fn at(&self, x: &[T]) -> Vec<T> {
        let mut v = self.linear.mul_vec(x);
        for (vi, &ci) in v.iter_mut().zip(&self.constant) {
            *vi += ci;
        }
        v
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            constant: self.constant.iter().zip(&other.constant).map(|(&a, &b)| a + b).collect(),
            linear: &self.linear + &other.linear,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            constant: self.constant.iter().map(|&a| a * s).collect(),
            linear: self.linear.scale(s),
        }
    }

    pub fn max_abs(&self) -> T {
        self.constant
            .iter()
            .fold(self.linear.max_abs(), |acc, &c| acc.max(c.abs()))
    }
}

/// Exact Lie bracket `[X, Y] = DY·X − DX·Y`; affine fields are closed
/// under it.
pub fn bracket<T: Scalar>(x: &AffineVectorField<T>, y: &AffineVectorField<T>) -> Result<AffineVectorField<T>> {
    if x.dim() != y.dim() {
        return Err(mismatch(format!("bracket of fields on R^{} and R^{}", x.dim(), y.dim())));
    }
    let ly_cx = y.linear.mul_vec(&x.constant);
    let lx_cy = x.linear.mul_vec(&y.constant);
    Ok(AffineVectorField {
        constant: ly_cx.iter().zip(&lx_cy).map(|(&a, &b)| a - b).collect(),
        linear: &(&y.linear * &x.linear) - &(&x.linear * &y.linear),
    })
}

impl<T: Scalar> AffineCovector<T> {
    pub fn new(constant: Vec<T>, linear: Matrix<T>) -> Result<Self> {
        let n = constant.len();
        if linear.shape() != (n, n) {
            return Err(mismatch(format!(
                "linear part {:?} for a 1-form on R^{n}",
                linear.shape()
            )));
        }
        Matrix::new(1, n, constant.clone())?;
        Ok(Self { constant, linear })
    }

    pub fn dim(&self) -> usize {
        self.constant.len()
    }

    /// Coefficient vector at `x`.
    pub fn at(&self, x: &[T]) -> Vec<T> {
        let mut c = self.linear.mul_vec(x);
        for (ci, &ai) in c.iter_mut().zip(&self.constant) {
            *ci += ai;
        }
        c
    }

    pub fn eval(&self, x: &[T], v: &[T]) -> T {
        dot(&self.at(x), v)
    }

    /// Matrix of the constant 2-form `dλ`: `dλ(u, v) = uᵀ (Bᵀ − B) v`.
    pub fn differential(&self) -> Matrix<T> {
        &self.linear.transpose() - &self.linear
    }

    /// Residual of `λ(X) ≡ 0` as an identity in `x`: the constant, linear
    /// and quadratic coefficients of `(a + Bx)·(c + Lx)`.
    pub fn annihilation_defect(&self, x: &AffineVectorField<T>) -> T {
        let a = &self.constant;
        let b = &self.linear;
        let c0 = dot(a, &x.constant).abs();
        let lin: Vec<T> = {
            let mut l = x.linear.transpose().mul_vec(a);
            for (li, bi) in l.iter_mut().zip(b.transpose().mul_vec(&x.constant)) {
                *li += bi;
            }
            l
        };
        let c1 = lin.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
        let quad = &b.transpose() * &x.linear;
        let sym = &quad + &quad.transpose();
        c0.max(c1).max(sym.max_abs())
    }
}
