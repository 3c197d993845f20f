//! Distributions `λ^i = dz_i − π*μ^i` on `N × ℝ^p` built from Liouville
//! forms on `N = ℝⁿ`, and lifts of exact Lagrangian data.
//!
//! Note `dλ^i = −π*dμ^i`; the pointwise curvature is `−dμ^i` restricted to
//! `D`, which has the same regular and isotropic subspaces as `dμ^i`.

use super::{AffineCoframeModel, AffineCovector, AffineVectorField};
use crate::error::{mismatch, precondition, Error, Result};
use crate::fat2::restricted_defect;
use crate::frames::{Frame, Regime};
use crate::linalg::{dot, norm, rank, Matrix, Tolerance};
use crate::qcont::quaternion_units;
use crate::Scalar;

/// `p` Liouville forms on `ℝⁿ`, each with constant nondegenerate `dμ`.
#[derive(Debug, Clone)]
pub struct LiouvilleModel<T> {
    n_dim: usize,
    mus: Vec<AffineCovector<T>>,
    tol: Tolerance<T>,
}

/// Sample points on `N` with the edges along which data is compared.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub points: Vec<Vec<T>>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedGrid<T> {
    pub points: Vec<Vec<T>>,
    pub edges: Vec<(usize, usize)>,
    /// `max_i |λ^i_mid(Δ)| / |Δ|` per edge.
    pub edge_residuals: Vec<T>,
    pub max_residual: T,
}

fn linear_coefficient<T: Scalar>(n: usize, entries: &[(usize, usize, f64)]) -> AffineCovector<T> {
    let mut b = Matrix::zeros(n, n);
    for &(i, j, v) in entries {
        b[(i, j)] = T::of(v);
    }
    AffineCovector {
        constant: vec![T::zero(); n],
        linear: b,
    }
}

impl<T: Scalar> LiouvilleModel<T> {
    pub fn new(mus: Vec<AffineCovector<T>>, tol: Tolerance<T>) -> Result<Self> {
        let n_dim = mus.first().map(|m| m.dim()).ok_or_else(|| precondition("no Liouville forms"))?;
        for (i, m) in mus.iter().enumerate() {
            if m.dim() != n_dim {
                return Err(mismatch(format!("mu{} lives on R^{}, not R^{n_dim}", i + 1, m.dim())));
            }
            let d = m.differential();
            if rank(&d, &tol)? != n_dim {
                return Err(precondition(format!("d mu{} is degenerate", i + 1)));
            }
        }
        Ok(Self { n_dim, mus, tol })
    }

    /// Forms `μ = −½ M x` with prescribed constant `dμ = M`.
    pub fn from_differentials(dmus: &[Matrix<T>], tol: Tolerance<T>) -> Result<Self> {
        let mus = dmus
            .iter()
            .map(|m| {
                if !m.is_square() {
                    return Err(mismatch(format!("d mu of shape {:?}", m.shape())));
                }
                Ok(AffineCovector {
                    constant: vec![T::zero(); m.rows()],
                    linear: m.scale(-T::of(0.5)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(mus, tol)
    }

    /// `μ = x dy` on `ℝ²`: the standard contact structure on `ℝ³`.
    pub fn standard_contact() -> Self {
        Self::new(vec![linear_coefficient(2, &[(1, 0, 1.0)])], Tolerance::default())
            .expect("nondegenerate")
    }

    /// `μ¹ = x₁dy₁ − x₂dy₂`, `μ² = x₁dy₂ + x₂dy₁` on `ℝ⁴ = (x₁, x₂, y₁, y₂)`,
    /// the real and imaginary parts of the holomorphic Liouville form.
    pub fn holomorphic_pair() -> Self {
        Self::new(
            vec![
                linear_coefficient(4, &[(2, 0, 1.0), (3, 1, -1.0)]),
                linear_coefficient(4, &[(3, 0, 1.0), (2, 1, 1.0)]),
            ],
            Tolerance::default(),
        )
        .expect("nondegenerate")
    }

    /// `μ¹ = x₁dy₁ + x₂dy₂`, `μ² = x₂dy₁ + x₁dy₂`: both symplectic, but the
    /// pair is not fat (its connecting automorphism has eigenvalues ±1).
    pub fn symmetric_pair() -> Self {
        Self::new(
            vec![
                linear_coefficient(4, &[(2, 0, 1.0), (3, 1, 1.0)]),
                linear_coefficient(4, &[(2, 1, 1.0), (3, 0, 1.0)]),
            ],
            Tolerance::default(),
        )
        .expect("nondegenerate")
    }

    /// Flat hyperkähler triple on `ℝ⁴` with `dμ^i = J_i`, so the induced
    /// curvature is `J_iᵀ = g(J_i·, ·)` for `g = I`.
    pub fn quaternionic_triple() -> Self {
        Self::from_differentials(&quaternion_units::<T>(), Tolerance::default())
            .expect("nondegenerate")
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn p(&self) -> usize {
        self.mus.len()
    }

    pub fn mus(&self) -> &[AffineCovector<T>] {
        &self.mus
    }

    pub fn tol(&self) -> &Tolerance<T> {
        &self.tol
    }

    pub fn differentials(&self) -> Vec<Matrix<T>> {
        self.mus.iter().map(|m| m.differential()).collect()
    }
}

/// The corank-`p` model on `ℝ^{n+p}` with coordinates `(x, z)` and frame
/// `H_a = ∂_{x_a} + Σ_i μ^i(∂_{x_a}) ∂_{z_i}`.
pub fn make_liouville_model<T: Scalar>(l: &LiouvilleModel<T>) -> AffineCoframeModel<T> {
    let n = l.n_dim;
    let p = l.p();
    let dim = n + p;
    let lambdas = l
        .mus
        .iter()
        .enumerate()
        .map(|(i, mu)| {
            let mut c = vec![T::zero(); dim];
            c[n + i] = T::one();
            for (ca, &m) in c.iter_mut().zip(&mu.constant[..n]) {
                *ca = -m;
            }
            let linear = Matrix::from_fn(dim, dim, |r, s| {
                if r < n && s < n {
                    -mu.linear[(r, s)]
                } else {
                    T::zero()
                }
            });
            AffineCovector { constant: c, linear }
        })
        .collect();
    let frame = (0..n)
        .map(|a| {
            let mut f = AffineVectorField::coordinate(dim, a);
            for (i, mu) in l.mus.iter().enumerate() {
                f.constant[n + i] = mu.constant[a];
                for b in 0..n {
                    f.linear[(n + i, b)] = mu.linear[(a, b)];
                }
            }
            f
        })
        .collect();
    AffineCoframeModel::new(lambdas, Some(frame), l.tol).expect("Liouville model is well formed")
}

fn midpoint<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| (x + y) * T::of(0.5)).collect()
}

fn delta<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| y - x).collect()
}

/// Lifts `(f, φ¹, …, φ^p)` after checking `Δφ_i ≈ μ^i(mid)·Δx` on every
/// edge to within `mesh_tol` (relative to `|Δx|`).
pub fn lift_exact_lagrangian<T: Scalar>(
    l: &LiouvilleModel<T>,
    grid: &Grid<T>,
    primitives: &[Vec<T>],
    mesh_tol: T,
) -> Result<LiftedGrid<T>> {
    let n = l.n_dim;
    let p = l.p();
    if primitives.len() != grid.points.len() {
        return Err(mismatch(format!(
            "{} primitive samples for {} points",
            primitives.len(),
            grid.points.len()
        )));
    }
    for (i, (x, phi)) in grid.points.iter().zip(primitives).enumerate() {
        if x.len() != n || phi.len() != p {
            return Err(mismatch(format!(
                "sample {i} has a point in R^{} and {} primitives",
                x.len(),
                phi.len()
            )));
        }
    }
    let mut worst: Option<(usize, T)> = None;
    for (e, &(i, j)) in grid.edges.iter().enumerate() {
        if i >= grid.points.len() || j >= grid.points.len() {
            return Err(mismatch(format!("edge ({i}, {j}) out of range")));
        }
        let (xi, xj) = (&grid.points[i], &grid.points[j]);
        let dx = delta(xi, xj);
        let len = norm(&dx);
        if len == T::zero() {
            return Err(precondition(format!("edge {e} ({i}, {j}) has zero length")));
        }
        let mid = midpoint(xi, xj);
        let r = l.mus.iter().enumerate().fold(T::zero(), |acc, (s, mu)| {
            let dphi = primitives[j][s] - primitives[i][s];
            acc.max((dphi - mu.eval(&mid, &dx)).abs() / len)
        });
        if worst.is_none_or(|(_, w)| r > w) {
            worst = Some((e, r));
        }
    }
    if let Some((e, r)) = worst {
        if r > mesh_tol {
            let (i, j) = grid.edges[e];
            return Err(Error::NotExact(format!(
                "edge {e} ({i}, {j}) has residual {r:e} > {mesh_tol:e}"
            )));
        }
    }

    let model = make_liouville_model(l);
    let points: Vec<Vec<T>> = grid
        .points
        .iter()
        .zip(primitives)
        .map(|(x, phi)| x.iter().chain(phi).copied().collect())
        .collect();
    let edge_residuals: Vec<T> = grid
        .edges
        .iter()
        .map(|&(i, j)| {
            let d = delta(&points[i], &points[j]);
            let mid = midpoint(&points[i], &points[j]);
            let len = norm(&d[..n]);
            model
                .lambdas()
                .iter()
                .fold(T::zero(), |acc, lam| acc.max(lam.eval(&mid, &d).abs() / len))
        })
        .collect();
    let max_residual = edge_residuals.iter().fold(T::zero(), |a, &b| a.max(b));
    Ok(LiftedGrid {
        points,
        edges: grid.edges.clone(),
        edge_residuals,
        max_residual,
    })
}

/// Canonical horizontal lift `v ↦ (v, μ¹_x(v), …, μ^p_x(v))` of a
/// `(dμ^i)`-regular, `(dμ^i)`-isotropic frame at `point ∈ ℝⁿ`.
pub fn formal_lift<T: Scalar>(
    l: &LiouvilleModel<T>,
    point: &[T],
    tangent_frame: &[Vec<T>],
) -> Result<Frame<T>> {
    let n = l.n_dim;
    let p = l.p();
    let regime = match p {
        2 => Regime::HorizontalDeg2,
        3 => Regime::HorizontalQcont,
        _ => return Err(precondition(format!("no frame regime for corank {p}"))),
    };
    if point.len() != n {
        return Err(mismatch(format!("point in R^{} for forms on R^{n}", point.len())));
    }
    let k = tangent_frame.len();
    let f = Matrix::from_columns(n, tangent_frame)?;
    let tol = &l.tol;
    if k > 0 {
        let forms = l.differentials();
        let ft = f.transpose();
        let mut stacked = &ft * &forms[0];
        for w in &forms[1..] {
            stacked = stacked.vstack(&(&ft * w))?;
        }
        if rank(&stacked, tol)? != p * k {
            return Err(precondition("tangent frame is not regular for (d mu^i)"));
        }
        let scale = forms.iter().fold(T::zero(), |a, w| a.max(w.max_abs())) * f.max_abs() * f.max_abs();
        let defect = forms.iter().fold(T::zero(), |a, w| a.max(restricted_defect(w, &f)));
        if defect > tol.threshold(scale * T::of(n as f64)) {
            return Err(Error::Precondition(format!(
                "tangent frame is not isotropic for (d mu^i) (defect {defect:e})"
            )));
        }
    }
    let vectors = tangent_frame
        .iter()
        .map(|v| {
            let mut h = v.clone();
            h.extend(l.mus.iter().map(|mu| dot(&mu.at(point), v)));
            h
        })
        .collect();
    Frame::new(n + p, vectors, regime)
}

/// Substeps of the composite Simpson rule per grid edge.
const SIMPSON_SUBSTEPS: usize = 16;

/// Samples `t ↦ f(t)` at `samples` equally spaced parameters of `[t0, t1]`
/// as an open polyline, with primitives `φ_i(t) = ∫ μ^i_{f(s)}(f′(s)) ds`
/// integrated numerically from `t0`.
pub fn sample_curve<T: Scalar>(
    l: &LiouvilleModel<T>,
    curve: impl Fn(T) -> (Vec<T>, Vec<T>),
    t0: T,
    t1: T,
    samples: usize,
) -> Result<(Grid<T>, Vec<Vec<T>>)> {
    if samples < 2 {
        return Err(precondition("a curve needs at least two samples"));
    }
    let pullback = |t: T| -> Result<Vec<T>> {
        let (x, dx) = curve(t);
        if x.len() != l.n_dim || dx.len() != l.n_dim {
            return Err(mismatch(format!("curve lives in R^{}, not R^{}", x.len(), l.n_dim)));
        }
        Ok(l.mus.iter().map(|mu| mu.eval(&x, &dx)).collect())
    };
    let h = (t1 - t0) / T::of((samples - 1) as f64);
    let mut points = Vec::with_capacity(samples);
    let mut primitives = Vec::with_capacity(samples);
    let mut phi = vec![T::zero(); l.p()];
    for s in 0..samples {
        let t = t0 + h * T::of(s as f64);
        if s > 0 {
            let a = t - h;
            let sub = h / T::of(SIMPSON_SUBSTEPS as f64);
            for q in 0..SIMPSON_SUBSTEPS {
                let lo = a + sub * T::of(q as f64);
                let (f0, fm, f1) = (pullback(lo)?, pullback(lo + sub * T::of(0.5))?, pullback(lo + sub)?);
                for i in 0..phi.len() {
                    phi[i] += sub / T::of(6.0) * (f0[i] + T::of(4.0) * fm[i] + f1[i]);
                }
            }
        }
        points.push(curve(t).0);
        primitives.push(phi.clone());
    }
    let edges = (0..samples - 1).map(|i| (i, i + 1)).collect();
    Ok((Grid { points, edges }, primitives))
}
