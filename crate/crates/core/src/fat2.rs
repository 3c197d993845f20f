//! Corank-2 pointwise models: a vector space with two symplectic forms.
//!
//! Forms are stored as matrices with `ω(u, v) = uᵀ Ω v`. The connecting
//! automorphism `A` is fixed by the identity `ω¹(u, Av) = ω²(u, v)`, i.e.
//! `Ω₁ A = Ω₂`.

use rand::Rng;

use crate::error::{mismatch, precondition, Error, Result};
use crate::linalg::{
    check_skew, form_perp, has_real_eigenvalue, lu_solve, minpoly_degree, rank, svd,
    symmetric_eigen, Matrix, Subspace, Tolerance,
};
use crate::report::Report;
use crate::sampling::unit_vector_in;
use crate::Scalar;

/// Retries allowed against tolerance-degenerate random draws.
pub const MAX_RETRIES: usize = 16;

#[derive(Debug, Clone)]
pub struct FatTuple2<T> {
    dim: usize,
    omega1: Matrix<T>,
    omega2: Matrix<T>,
    tol: Tolerance<T>,
}

/// The map `A` with `ω¹(u, Av) = ω²(u, v)`.
#[derive(Debug, Clone)]
pub struct ConnectingAutomorphism<T> {
    pub a: Matrix<T>,
}

/// Pointwise data of a formal isocontact map from a contact domain.
#[derive(Debug, Clone)]
pub struct FormalIsocontactJet<T> {
    /// `F|_K`, one column per basis vector of `K`.
    pub f: Matrix<T>,
    /// Curvature of the domain contact structure on `K`.
    pub eta: Matrix<T>,
    /// Induced map on the quotients, `2 x 1`.
    pub g_tilde: Matrix<T>,
}

/// Symplectic frame `(X_i, Y_i)` of a symplectic vector space.
#[derive(Debug, Clone)]
pub struct SymplecticFrame<T> {
    pub x: Vec<Vec<T>>,
    pub y: Vec<Vec<T>>,
}

fn nondegenerate<T: Scalar>(omega: &Matrix<T>, tol: &Tolerance<T>, what: &str) -> Result<()> {
    check_skew(omega, tol, what)?;
    let r = rank(omega, tol)?;
    if r < omega.rows() {
        return Err(Error::InvalidForm(format!(
            "{what} is degenerate (rank {r} of {})",
            omega.rows()
        )));
    }
    Ok(())
}

/// Largest entry of `Bᵀ Ω B`.
pub(crate) fn restricted_defect<T: Scalar>(omega: &Matrix<T>, basis: &Matrix<T>) -> T {
    if basis.cols() == 0 {
        return T::zero();
    }
    omega.congruence(basis).map(|m| m.max_abs()).unwrap_or_else(|_| T::infinity())
}

fn condition_limit<T: Scalar>() -> T {
    T::of(1e12).min(T::of(0.01) / T::epsilon())
}

impl<T: Scalar> FatTuple2<T> {
    pub fn new(omega1: Matrix<T>, omega2: Matrix<T>, tol: Tolerance<T>) -> Result<Self> {
        if omega1.shape() != omega2.shape() {
            return Err(mismatch(format!(
                "forms of shapes {:?} and {:?}",
                omega1.shape(),
                omega2.shape()
            )));
        }
        nondegenerate(&omega1, &tol, "omega1")?;
        nondegenerate(&omega2, &tol, "omega2")?;
        let dim = omega1.rows();
        if !dim.is_multiple_of(2) {
            return Err(Error::InvalidForm(format!("odd dimension {dim}")));
        }
        Ok(Self {
            dim,
            omega1,
            omega2,
            tol,
        })
    }

    /// The pointwise tuple of the holomorphic contact model with `n` complex
    /// pairs, in the frame basis `(X_{j1}, X_{j2}, Y_{j1}, Y_{j2})_j`.
    pub fn holomorphic(n: usize) -> Self {
        let (w1, w2) = holomorphic_forms(n);
        Self::new(w1, w2, Tolerance::default()).expect("holomorphic forms are symplectic")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega1(&self) -> &Matrix<T> {
        &self.omega1
    }

    pub fn omega2(&self) -> &Matrix<T> {
        &self.omega2
    }

    pub fn tol(&self) -> &Tolerance<T> {
        &self.tol
    }

    pub fn with_tol(mut self, tol: Tolerance<T>) -> Self {
        self.tol = tol;
        self
    }

    /// The tuple `(pω¹ + qω², rω¹ + sω²)` defining the same distribution.
    pub fn recombine(&self, p: T, q: T, r: T, s: T) -> Result<Self> {
        let w1 = &self.omega1.scale(p) + &self.omega2.scale(q);
        let w2 = &self.omega1.scale(r) + &self.omega2.scale(s);
        Self::new(w1, w2, self.tol)
    }

    /// The tuple `(Pᵀ Ω₁ P, Pᵀ Ω₂ P)`, i.e. the same structure in new coordinates.
    pub fn congruent(&self, p: &Matrix<T>) -> Result<Self> {
        Self::new(self.omega1.congruence(p)?, self.omega2.congruence(p)?, self.tol)
    }

    pub fn connecting_automorphism(&self) -> Result<ConnectingAutomorphism<T>> {
        let d = svd(&self.omega1)?;
        let smin = d.s.last().copied().unwrap_or_else(T::zero);
        if smin == T::zero() || d.sigma_max() / smin > condition_limit() {
            return Err(Error::NumericFailure(format!(
                "omega1 is ill-conditioned (condition {:.3e})",
                d.sigma_max() / smin
            )));
        }
        let a = lu_solve(&self.omega1, &self.omega2)?;
        let ca = ConnectingAutomorphism { a };
        let resid = ca.identity_residual(self);
        let scale = self.omega1.max_abs() * ca.a.max_abs() * T::of(self.dim as f64)
            + self.omega2.max_abs();
        if resid > self.tol.threshold(scale) {
            return Err(Error::InternalInconsistency(format!(
                "defining identity residual {resid:e} after solve"
            )));
        }
        let skew = self.omega1.try_mul(&ca.a)?.skew_defect();
        if skew > self.tol.agreement() * scale {
            return Err(Error::InternalInconsistency(format!(
                "omega1*A is not skew (defect {skew:e})"
            )));
        }
        Ok(ca)
    }

    pub fn is_fat(&self) -> Result<bool> {
        let a = self.connecting_automorphism()?;
        Ok(!has_real_eigenvalue(&a.a, &self.tol)?)
    }

    pub fn degree(&self) -> Result<usize> {
        let a = self.connecting_automorphism()?;
        if has_real_eigenvalue(&a.a, &self.tol)? {
            return Err(precondition("degree is defined for fat tuples only"));
        }
        minpoly_degree(&a.a, &self.tol)
    }

    fn check_ambient(&self, v: &Subspace<T>) -> Result<()> {
        if v.ambient_dim() != self.dim {
            return Err(mismatch(format!(
                "subspace of R^{} in a tuple of dimension {}",
                v.ambient_dim(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn perp1(&self, v: &Subspace<T>) -> Result<Subspace<T>> {
        form_perp(v, &self.omega1, &self.tol)
    }

    pub fn perp2(&self, v: &Subspace<T>) -> Result<Subspace<T>> {
        form_perp(v, &self.omega2, &self.tol)
    }

    /// `V + AV`.
    pub fn v_plus_av(&self, v: &Subspace<T>) -> Result<Subspace<T>> {
        let a = self.connecting_automorphism()?;
        v.sum(&v.image(&a.a, &self.tol)?, &self.tol)
    }

    /// `V^Ω = V^{⊥₁} ∩ V^{⊥₂}`, cross-checked against `(V + AV)^{⊥₁}`.
    pub fn omega_perp(&self, v: &Subspace<T>) -> Result<Subspace<T>> {
        self.check_ambient(v)?;
        let direct = self.perp1(v)?.intersect(&self.perp2(v)?, &self.tol)?;
        let via_a = self.perp1(&self.v_plus_av(v)?)?;
        let d = direct.distance(&via_a);
        if d > self.tol.agreement() {
            return Err(Error::InternalInconsistency(format!(
                "V^Omega disagrees with (V+AV)^perp1: dims {} vs {}, distance {d:e}",
                direct.dim(),
                via_a.dim()
            )));
        }
        Ok(direct)
    }

    /// Regularity decided by the evaluation-map rank and by `V ∩ AV = 0`;
    /// the two must agree.
    pub fn is_regular(&self, v: &Subspace<T>) -> Result<bool> {
        self.check_ambient(v)?;
        let k = v.dim();
        if k == 0 {
            return Ok(true);
        }
        let bt = v.basis().transpose();
        let map = bt.try_mul(&self.omega1)?.vstack(&bt.try_mul(&self.omega2)?)?;
        let by_rank = rank(&map, &self.tol)? == 2 * k;

        let a = self.connecting_automorphism()?;
        let av = v.image(&a.a, &self.tol)?;
        let by_intersection = av.dim() == k && v.intersect(&av, &self.tol)?.dim() == 0;

        if by_rank != by_intersection {
            return Err(Error::InternalInconsistency(format!(
                "regularity criteria disagree on a {k}-dimensional subspace \
                 (map rank says {by_rank}, V∩AV says {by_intersection})"
            )));
        }
        Ok(by_rank)
    }

    pub fn isotropy_defect(&self, v: &Subspace<T>) -> T {
        restricted_defect(&self.omega1, v.basis()).max(restricted_defect(&self.omega2, v.basis()))
    }

    pub fn is_isotropic(&self, v: &Subspace<T>) -> bool {
        let scale = self.omega1.max_abs().max(self.omega2.max_abs());
        self.isotropy_defect(v) <= self.tol.threshold(scale)
    }

    fn require_degree2(&self) -> Result<()> {
        let d = self.degree()?;
        if d != 2 {
            return Err(precondition(format!("degree 2 required, tuple has degree {d}")));
        }
        Ok(())
    }

    /// Residuals of the degree-2 subspace identities for `V`.
    pub fn deg2_identities(&self, v: &Subspace<T>) -> Result<Report<T>> {
        self.check_ambient(v)?;
        self.require_degree2()?;
        let tol = &self.tol;
        let a = self.connecting_automorphism()?;
        let a_inv = lu_solve(&a.a, &Matrix::identity(self.dim))?;

        let vav = v.sum(&v.image(&a.a, tol)?, tol)?;
        let vainv = v.sum(&v.image(&a_inv, tol)?, tol)?;
        let vo = self.omega_perp(v)?;
        let voo = self.omega_perp(&vo)?;
        let lim = tol.agreement();

        let mut r = Report::new();
        r.bound("V+AV = V+A^-1 V", vav.distance(&vainv), lim);
        r.bound("V^Omega = (V+AV)^perp1", vo.distance(&self.perp1(&vav)?), lim);
        r.bound("V^Omega = (V+AV)^perp2", vo.distance(&self.perp2(&vav)?), lim);
        r.bound("(V^Omega)^Omega = V+AV", voo.distance(&vav), lim);
        if self.is_isotropic(v) {
            let scale = self.omega1.max_abs().max(self.omega2.max_abs());
            r.bound(
                "(V^Omega)^Omega isotropic",
                self.isotropy_defect(&voo),
                lim * scale,
            );
        }
        Ok(r)
    }

    /// `V + ⟨τ⟩` with `τ` drawn from the unit sphere of the Euclidean
    /// complement of `(V^Ω)^Ω`.
    pub fn extend_regular<R: Rng + ?Sized>(&self, v: &Subspace<T>, rng: &mut R) -> Result<Subspace<T>> {
        self.check_ambient(v)?;
        self.require_degree2()?;
        if !self.is_regular(v)? {
            return Err(precondition("extend_regular needs a regular subspace"));
        }
        let voo = self.omega_perp(&self.omega_perp(v)?)?;
        if voo.dim() == self.dim {
            return Err(Error::NoRoom(format!(
                "(V^Omega)^Omega is all of R^{}",
                self.dim
            )));
        }
        let comp = voo.orthogonal_complement(&self.tol)?;
        for _ in 0..MAX_RETRIES {
            let tau = unit_vector_in(&comp, rng).expect("nonzero complement");
            let ext = v.sum(&Subspace::from_vectors(self.dim, &[tau], &self.tol)?, &self.tol)?;
            if ext.dim() == v.dim() + 1 && self.is_regular(&ext)? {
                return Ok(ext);
            }
        }
        Err(Error::ConstructionFailure(format!(
            "no regular extension of a {}-dimensional subspace in {MAX_RETRIES} draws",
            v.dim()
        )))
    }

    /// `V′ = V^{⊥₂} ∩ J((V^Ω)^Ω)` for `J` compatible with `ω²`.
    ///
    /// `V` must be Ω-isotropic and regular; then `V^{⊥₂} = V^Ω ⊕ V′` and
    /// `V ⊕ V′` is ω²-isotropic.
    pub fn isotropic_complement(&self, v: &Subspace<T>) -> Result<Subspace<T>> {
        self.check_ambient(v)?;
        self.require_degree2()?;
        if !self.is_isotropic(v) {
            return Err(precondition("isotropic_complement needs an isotropic subspace"));
        }
        if !self.is_regular(v)? {
            return Err(precondition("isotropic_complement needs a regular subspace"));
        }
        let tol = &self.tol;
        let j = compatible_complex_structure(&self.omega2, tol)?;
        let vo = self.omega_perp(v)?;
        let voo = self.omega_perp(&vo)?;
        let v2 = self.perp2(v)?;
        let vp = v2.intersect(&voo.image(&j, tol)?, tol)?;

        let direct = vo.dim() + vp.dim() == v2.dim() && vo.intersect(&vp, tol)?.dim() == 0;
        let s = v.sum(&vp, tol)?;
        let scale = self.omega2.max_abs();
        let iso = restricted_defect(&self.omega2, s.basis()) <= tol.agreement() * scale;
        if !direct || !iso || vp.dim() != v.dim() {
            return Err(Error::InternalInconsistency(format!(
                "isotropic complement of dimension {} for V of dimension {} \
                 (direct sum: {direct}, isotropic: {iso})",
                vp.dim(),
                v.dim()
            )));
        }
        Ok(vp)
    }

    /// Checks `F*ω^s|_K = g̃_s η`; when it holds the image must be regular.
    pub fn check_isocontact_jet(&self, jet: &FormalIsocontactJet<T>) -> Result<Report<T>> {
        let (n, m) = jet.f.shape();
        if n != self.dim {
            return Err(mismatch(format!("F maps into R^{n}, tuple has dimension {}", self.dim)));
        }
        if jet.eta.shape() != (m, m) || jet.g_tilde.shape() != (2, 1) {
            return Err(mismatch(format!(
                "eta {:?} and g_tilde {:?} for K of dimension {m}",
                jet.eta.shape(),
                jet.g_tilde.shape()
            )));
        }
        nondegenerate(&jet.eta, &self.tol, "eta").map_err(|e| precondition(e.to_string()))?;
        if jet.g_tilde.max_abs() == T::zero() {
            return Err(precondition("g_tilde vanishes"));
        }
        let tol = &self.tol;
        let mut r = Report::new();
        r.flag("F injective", rank(&jet.f, tol)? == m, T::zero());

        let scale = self.omega1.max_abs().max(self.omega2.max_abs()) * jet.f.max_abs() * jet.f.max_abs()
            * T::of(n as f64)
            + jet.eta.max_abs();
        for (s, omega) in [&self.omega1, &self.omega2].into_iter().enumerate() {
            let pulled = omega.congruence(&jet.f)?;
            let target = jet.eta.scale(jet.g_tilde[(s, 0)]);
            let resid = (&pulled - &target).max_abs();
            r.bound(format!("curvature condition omega{}", s + 1), resid, tol.threshold(scale));
        }
        if r.pass() {
            let im = Subspace::span(&jet.f, tol)?;
            let regular = self.is_regular(&im)?;
            if !regular {
                return Err(Error::InternalInconsistency(
                    "jet satisfies the curvature condition but its image is not regular".into(),
                ));
            }
            r.flag("image regular", regular, T::zero());
        }
        Ok(r)
    }
}

impl<T: Scalar> ConnectingAutomorphism<T> {
    /// Largest entry of `Ω₁ A − Ω₂`.
    pub fn identity_residual(&self, t: &FatTuple2<T>) -> T {
        (&(&t.omega1 * &self.a) - &t.omega2).max_abs()
    }
}

/// Standard symplectic matrix pairing coordinates `(2i, 2i+1)`.
pub fn standard_symplectic<T: Scalar>(pairs: usize) -> Matrix<T> {
    let mut m = Matrix::zeros(2 * pairs, 2 * pairs);
    for i in 0..pairs {
        m[(2 * i, 2 * i + 1)] = T::one();
        m[(2 * i + 1, 2 * i)] = -T::one();
    }
    m
}

/// `(Ω₁, Ω₂)` of the holomorphic contact model, one 4x4 block per pair
/// `j`, in the basis `(X_{j1}, X_{j2}, Y_{j1}, Y_{j2})`.
pub fn holomorphic_forms<T: Scalar>(n: usize) -> (Matrix<T>, Matrix<T>) {
    let mut w1 = Matrix::zeros(4, 4);
    let mut w2 = Matrix::zeros(4, 4);
    let one = T::one();
    w1[(0, 2)] = one;
    w1[(2, 0)] = -one;
    w1[(1, 3)] = -one;
    w1[(3, 1)] = one;
    w2[(0, 3)] = one;
    w2[(3, 0)] = -one;
    w2[(1, 2)] = one;
    w2[(2, 1)] = -one;
    (
        Matrix::block_diag(&vec![w1; n]),
        Matrix::block_diag(&vec![w2; n]),
    )
}

/// A complex structure `J` with `ω(u, Jv)` symmetric positive definite and
/// `ω` `J`-invariant: `J = −P⁻¹W` with `P = (WᵀW)^{1/2}`.
pub fn compatible_complex_structure<T: Scalar>(omega: &Matrix<T>, tol: &Tolerance<T>) -> Result<Matrix<T>> {
    nondegenerate(omega, tol, "omega")?;
    let wtw = &omega.transpose() * omega;
    let (vals, q) = symmetric_eigen(&wtw)?;
    let floor = tol.threshold(vals.last().copied().unwrap_or_else(T::one));
    if vals.iter().any(|&l| l <= floor) {
        return Err(Error::NumericFailure(
            "nonpositive eigenvalue in the square root of WᵀW".into(),
        ));
    }
    let n = omega.rows();
    let inv_sqrt = Matrix::from_fn(n, n, |i, j| {
        (0..n).fold(T::zero(), |acc, k| acc + q[(i, k)] * q[(j, k)] / vals[k].sqrt())
    });
    Ok((&inv_sqrt * omega).scale(-T::one()))
}

/// Completes a Lagrangian frame `X` of `(ℝ^{2k}, ω)` to a symplectic frame.
pub fn symplectic_complete<T: Scalar>(
    s_omega: &Matrix<T>,
    lagr: &[Vec<T>],
    tol: &Tolerance<T>,
) -> Result<SymplecticFrame<T>> {
    let n = s_omega.rows();
    let k = lagr.len();
    if 2 * k != n {
        return Err(precondition(format!(
            "{k} vectors cannot span a Lagrangian subspace of R^{n}"
        )));
    }
    let x = Matrix::from_columns(n, lagr)?;
    if rank(&x, tol)? != k {
        return Err(precondition("Lagrangian frame is not independent"));
    }
    let scale = s_omega.max_abs() * x.max_abs() * x.max_abs() * T::of(n as f64);
    if restricted_defect(s_omega, &x) > tol.threshold(scale) {
        return Err(precondition("frame does not span an isotropic subspace"));
    }
    let j = compatible_complex_structure(s_omega, tol)?;
    let jx = &j * &x;
    // G_ij = g(X_i, X_j) = ω(X_i, J X_j)
    let gram = &x.transpose() * &(s_omega * &jx);
    let g_inv = lu_solve(&gram, &Matrix::identity(k))?;
    let y = &jx * &g_inv;
    Ok(SymplecticFrame {
        x: lagr.to_vec(),
        y: y.columns(),
    })
}
