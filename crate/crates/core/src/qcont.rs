//! Quaternionic contact pointwise models.
//!
//! A triple carries a metric `g`, complex structures `J₁, J₂, J₃` with the
//! quaternion relations and the forms `ω^i(u, v) = g(J_i u, v)`, stored as
//! `Ω_i = J_iᵀ G`.

use rand::Rng;

use crate::error::{mismatch, precondition, Error, Result};
use crate::fat2::{restricted_defect, FatTuple2, MAX_RETRIES};
use crate::linalg::{
    dot, form_perp, norm, rank, svd, symmetric_eigen, Matrix, Subspace, Tolerance,
};
use crate::report::Report;
use crate::sampling::{gaussian_vector, unit_vector_in};
use crate::Scalar;

#[derive(Debug, Clone)]
pub struct QContTriple<T> {
    dim: usize,
    g: Matrix<T>,
    j: [Matrix<T>; 3],
    omega: [Matrix<T>; 3],
    tol: Tolerance<T>,
}

/// Left multiplication by `i`, `j`, `k` on `ℍ = ℝ⁴` with basis `(1, i, j, k)`.
pub fn quaternion_units<T: Scalar>() -> [Matrix<T>; 3] {
    let z = T::zero();
    let o = T::one();
    let m = |rows: [[T; 4]; 4]| Matrix::from_rows(&rows.map(|r| r.to_vec())).expect("finite");
    [
        m([[z, -o, z, z], [o, z, z, z], [z, z, z, -o], [z, z, o, z]]),
        m([[z, z, -o, z], [z, z, z, o], [o, z, z, z], [z, -o, z, z]]),
        m([[z, z, z, -o], [z, z, -o, z], [z, o, z, z], [o, z, z, z]]),
    ]
}

impl<T: Scalar> QContTriple<T> {
    /// Builds the triple and derives `Ω_i = J_iᵀ G`. Only shapes are
    /// enforced here; [`QContTriple::validate`] reports on the relations.
    pub fn new(g: Matrix<T>, j: [Matrix<T>; 3], tol: Tolerance<T>) -> Result<Self> {
        let omega = [
            &j[0].transpose() * &g,
            &j[1].transpose() * &g,
            &j[2].transpose() * &g,
        ];
        Self::from_parts(g, j, omega, tol)
    }

    /// Builds the triple from independently computed forms; the relation
    /// `ω^i = g(J_i·, ·)` is then a reported invariant.
    pub fn from_parts(
        g: Matrix<T>,
        j: [Matrix<T>; 3],
        omega: [Matrix<T>; 3],
        tol: Tolerance<T>,
    ) -> Result<Self> {
        let dim = g.rows();
        if !dim.is_multiple_of(4) {
            return Err(mismatch(format!("dimension {dim} is not divisible by 4")));
        }
        for m in std::iter::once(&g).chain(&j).chain(&omega) {
            if m.shape() != (dim, dim) {
                return Err(mismatch(format!(
                    "matrix of shape {:?} in a triple of dimension {dim}",
                    m.shape()
                )));
            }
        }
        Ok(Self {
            dim,
            g,
            j,
            omega,
            tol,
        })
    }

    /// `n` quaternionic blocks with `g = I`.
    pub fn standard(n: usize) -> Self {
        let [a, b, c] = quaternion_units::<T>();
        let j = [
            Matrix::block_diag(&vec![a; n]),
            Matrix::block_diag(&vec![b; n]),
            Matrix::block_diag(&vec![c; n]),
        ];
        Self::new(Matrix::identity(4 * n), j, Tolerance::default()).expect("shapes agree")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn g(&self) -> &Matrix<T> {
        &self.g
    }

    pub fn j(&self, i: usize) -> &Matrix<T> {
        &self.j[i]
    }

    pub fn omega(&self, i: usize) -> &Matrix<T> {
        &self.omega[i]
    }

    pub fn tol(&self) -> &Tolerance<T> {
        &self.tol
    }

    pub fn with_tol(mut self, tol: Tolerance<T>) -> Self {
        self.tol = tol;
        self
    }

    /// Residuals of every defining relation.
    pub fn validate(&self) -> Report<T> {
        let n = self.dim;
        let id = Matrix::<T>::identity(n);
        let tol = &self.tol;
        let scale = self
            .j
            .iter()
            .fold(T::one(), |acc, m| acc.max(m.max_abs()));
        let lim = tol.threshold(scale * scale * scale * T::of(n as f64));
        let mut r = Report::new();

        for (i, j) in self.j.iter().enumerate() {
            r.bound(format!("J{}^2 = -1", i + 1), (&(j * j) + &id).max_abs(), lim);
        }
        let prod = &(&self.j[0] * &self.j[1]) * &self.j[2];
        r.bound("J1 J2 J3 = -1", (&prod + &id).max_abs(), lim);

        r.bound("g symmetric", self.g.symmetry_defect(), tol.threshold(self.g.max_abs()));
        let min_eig = symmetric_eigen(&self.g)
            .ok()
            .and_then(|(v, _)| v.first().copied())
            .unwrap_or_else(T::zero);
        r.flag("g positive definite", min_eig > tol.threshold(self.g.max_abs()), min_eig);

        for (i, w) in self.omega.iter().enumerate() {
            let lim_w = tol.threshold(w.max_abs());
            r.bound(format!("omega{} skew", i + 1), w.skew_defect(), lim_w);
            let smin = svd(w)
                .ok()
                .and_then(|d| d.s.last().copied())
                .unwrap_or_else(T::zero);
            r.flag(
                format!("omega{} nondegenerate", i + 1),
                smin > tol.threshold(w.max_abs()),
                smin,
            );
            let compat = &self.j[i].transpose() * &self.g;
            r.bound(
                format!("omega{} = g(J{}., .)", i + 1, i + 1),
                (w - &compat).max_abs(),
                tol.threshold(w.max_abs().max(compat.max_abs())),
            );
        }
        r
    }

    /// The corank-2 pair `(ω², ω³)`, whose connecting automorphism is `−J₁`.
    pub fn induced_fat_pair(&self) -> Result<FatTuple2<T>> {
        FatTuple2::new(self.omega[1].clone(), self.omega[2].clone(), self.tol)
    }

    fn check_ambient(&self, v: &Subspace<T>) -> Result<()> {
        if v.ambient_dim() != self.dim {
            return Err(mismatch(format!(
                "subspace of R^{} in a triple of dimension {}",
                v.ambient_dim(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn perp(&self, i: usize, v: &Subspace<T>) -> Result<Subspace<T>> {
        form_perp(v, &self.omega[i], &self.tol)
    }

    /// `V^Ω = V^{⊥₁} ∩ V^{⊥₂} ∩ V^{⊥₃}`.
    pub fn omega_perp3(&self, v: &Subspace<T>) -> Result<Subspace<T>> {
        self.check_ambient(v)?;
        let tol = &self.tol;
        self.perp(0, v)?
            .intersect(&self.perp(1, v)?, tol)?
            .intersect(&self.perp(2, v)?, tol)
    }

    pub fn isotropy_defect3(&self, v: &Subspace<T>) -> T {
        self.omega
            .iter()
            .fold(T::zero(), |acc, w| acc.max(restricted_defect(w, v.basis())))
    }

    pub fn is_isotropic3(&self, v: &Subspace<T>) -> bool {
        let scale = self.omega.iter().fold(T::zero(), |acc, w| acc.max(w.max_abs()));
        self.isotropy_defect3(v) <= self.tol.threshold(scale)
    }

    /// Rank of `ξ ↦ (ι_ξ ω^i|_V)_i` equals `3 dim V`.
    pub fn is_regular3(&self, v: &Subspace<T>) -> Result<bool> {
        self.check_ambient(v)?;
        let k = v.dim();
        if k == 0 {
            return Ok(true);
        }
        let bt = v.basis().transpose();
        let map = (&bt * &self.omega[0])
            .vstack(&(&bt * &self.omega[1]))?
            .vstack(&(&bt * &self.omega[2]))?;
        Ok(rank(&map, &self.tol)? == 3 * k)
    }

    /// Isotropic subspaces are regular; returns the regularity verdict.
    pub fn pansu_check(&self, v: &Subspace<T>) -> Result<bool> {
        self.check_ambient(v)?;
        if !self.is_isotropic3(v) {
            return Err(precondition("pansu_check needs an isotropic subspace"));
        }
        self.is_regular3(v)
    }

    /// `Σ J_i W`.
    pub fn j_sum(&self, w: &Subspace<T>) -> Result<Subspace<T>> {
        let tol = &self.tol;
        w.image(&self.j[0], tol)?
            .sum(&w.image(&self.j[1], tol)?, tol)?
            .sum(&w.image(&self.j[2], tol)?, tol)
    }

    /// Checks `D = W^Ω ⊕_g Σ J_i W`.
    pub fn decomposition_check(&self, w: &Subspace<T>) -> Result<Report<T>> {
        self.check_ambient(w)?;
        let wo = self.omega_perp3(w)?;
        let js = self.j_sum(w)?;
        let cross = if wo.dim() == 0 || js.dim() == 0 {
            T::zero()
        } else {
            (&(&wo.basis().transpose() * &self.g) * js.basis()).max_abs()
        };
        let regular = self.is_regular3(w)?;
        let direct = js.dim() == 3 * w.dim();
        let mut r = Report::new();
        r.bound("g-orthogonal", cross, self.tol.threshold(self.g.max_abs()));
        r.flag(
            "dimensions complementary",
            wo.dim() + js.dim() == self.dim,
            T::of((wo.dim() + js.dim()) as f64),
        );
        r.flag("sum J_i W direct iff regular", direct == regular, T::of(js.dim() as f64));
        Ok(r)
    }

    /// `τ ∈ V^Ω` outside `V + Σ J_i V`, with `V + ⟨τ⟩` regular.
    pub fn pick_tau<R: Rng + ?Sized>(&self, v: &Subspace<T>, rng: &mut R) -> Result<Vec<T>> {
        self.check_ambient(v)?;
        let tol = &self.tol;
        let vo = self.omega_perp3(v)?;
        let s = v.sum(&self.j_sum(v)?, tol)?;
        let inter = vo.intersect(&s, tol)?;
        if inter.dim() >= vo.dim() {
            return Err(Error::NoRoom(format!(
                "V^Omega (dimension {}) lies inside V + sum J_i V",
                vo.dim()
            )));
        }
        let room = vo.complement_within(&inter, tol)?;
        for _ in 0..MAX_RETRIES {
            let Some(tau) = unit_vector_in(&room, rng) else {
                break;
            };
            if s.distance_to(&tau) <= tol.agreement() {
                continue;
            }
            let ext = v.sum(&Subspace::from_vectors(self.dim, std::slice::from_ref(&tau), tol)?, tol)?;
            if ext.dim() == v.dim() + 1 && self.is_regular3(&ext)? {
                return Ok(tau);
            }
        }
        Err(Error::NoRoom(format!(
            "no admissible tau for a {}-dimensional subspace in {MAX_RETRIES} draws",
            v.dim()
        )))
    }

    /// `η ∈ V_τ^{⊥₂} ∩ V_τ^{⊥₃}` with `ω¹(τ, η) = 1` and `η ∉ V_τ + J₁V_τ`.
    pub fn pick_eta<R: Rng + ?Sized>(
        &self,
        v_tau: &Subspace<T>,
        tau: &[T],
        rng: &mut R,
    ) -> Result<Vec<T>> {
        self.check_ambient(v_tau)?;
        let tol = &self.tol;
        let c = self.perp(1, v_tau)?.intersect(&self.perp(2, v_tau)?, tol)?;
        let e = v_tau.sum(&v_tau.image(&self.j[0], tol)?, tol)?;
        // η = B x with ℓ·x = 1, ℓ = τᵀ Ω₁ B
        let b = c.basis();
        let row = self.omega[0].transpose().mul_vec(tau);
        let ell = b.transpose().mul_vec(&row);
        let ln = norm(&ell);
        if ln <= tol.threshold(norm(&row)) {
            return Err(Error::NoRoom("omega1(tau, .) vanishes on the slice".into()));
        }
        let x0: Vec<T> = ell.iter().map(|&l| l / (ln * ln)).collect();
        for _ in 0..MAX_RETRIES {
            let mut x = gaussian_vector::<T, R>(c.dim(), rng);
            let along = dot(&x, &ell) / (ln * ln);
            for (xi, (&li, &pi)) in x.iter_mut().zip(ell.iter().zip(&x0)) {
                *xi = *xi - along * li + pi;
            }
            let eta = b.mul_vec(&x);
            let pairing = dot(tau, &self.omega[0].mul_vec(&eta));
            if pairing.abs() <= tol.abs_eps {
                continue;
            }
            let eta: Vec<T> = eta.iter().map(|&y| y / pairing).collect();
            if e.distance_to(&eta) > tol.agreement() * norm(&eta) {
                return Ok(eta);
            }
        }
        Err(Error::NoRoom(format!(
            "eta slice lies inside V_tau + J1 V_tau (slice dimension {}, excluded dimension {})",
            c.dim(),
            e.dim()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_model_validates() {
        for n in 1..=3 {
            let q = QContTriple::<f64>::standard(n);
            let r = q.validate();
            assert!(r.pass(), "{r}");
        }
    }

    #[test]
    fn flipped_j3_breaks_the_quaternion_relation() {
        let q = QContTriple::<f64>::standard(1);
        let j = [q.j(0).clone(), q.j(1).clone(), q.j(2).scale(-1.0)];
        let bad = QContTriple::new(q.g().clone(), j, Tolerance::default()).unwrap();
        let r = bad.validate();
        assert!(!r.get("J1 J2 J3 = -1").unwrap().pass);
        assert!(r.get("J3^2 = -1").unwrap().pass);
    }

    #[test]
    fn dimension_must_be_divisible_by_four() {
        let j = [Matrix::<f64>::identity(6), Matrix::identity(6), Matrix::identity(6)];
        assert!(QContTriple::new(Matrix::identity(6), j, Tolerance::default()).is_err());
    }

    #[test]
    fn induced_pair_has_a_equal_minus_j1() {
        for n in 1..=2 {
            let q = QContTriple::<f64>::standard(n);
            let t = q.induced_fat_pair().unwrap();
            let a = t.connecting_automorphism().unwrap().a;
            assert!((&a + q.j(0)).max_abs() < 1e-12);
            assert_eq!(t.degree().unwrap(), 2);
        }
    }

    #[test]
    fn line_and_its_j1_image() {
        let q = QContTriple::<f64>::standard(2);
        let tol = Tolerance::default();
        let u = vec![0.2, 1.0, -0.5, 0.0, 0.3, 0.0, 0.7, -1.1];
        let line = Subspace::from_vectors(8, std::slice::from_ref(&u), &tol).unwrap();
        assert!(q.is_isotropic3(&line));
        assert!(q.is_regular3(&line).unwrap());
        assert_eq!(q.omega_perp3(&line).unwrap().codim(), 3);
        let ju = q.j(0).mul_vec(&u);
        let plane = Subspace::from_vectors(8, &[u, ju], &tol).unwrap();
        assert!(!q.is_isotropic3(&plane));
        assert!(matches!(q.pansu_check(&plane), Err(Error::Precondition(_))));
    }

    #[test]
    fn eta_pairings_in_dimension_eight() {
        let q = QContTriple::<f64>::standard(2);
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tau = unit(8, 0);
        let v_tau = Subspace::from_vectors(8, std::slice::from_ref(&tau), &tol).unwrap();
        let eta = q.pick_eta(&v_tau, &tau, &mut rng).unwrap();
        assert!((q.omega(0).bilinear(&tau, &eta) - 1.0).abs() < 1e-14);
        assert!(q.omega(1).bilinear(&tau, &eta).abs() < 1e-12);
        assert!(q.omega(2).bilinear(&tau, &eta).abs() < 1e-12);
    }

    #[test]
    fn eta_has_no_room_in_dimension_four() {
        let q = QContTriple::<f64>::standard(1);
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tau = unit(4, 0);
        let v_tau = Subspace::from_vectors(4, std::slice::from_ref(&tau), &tol).unwrap();
        assert!(matches!(q.pick_eta(&v_tau, &tau, &mut rng), Err(Error::NoRoom(_))));
    }

    #[test]
    fn tau_for_zero_subspace_is_a_unit_vector() {
        let q = QContTriple::<f64>::standard(1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tau = q.pick_tau(&Subspace::zero(4), &mut rng).unwrap();
        assert!((norm(&tau) - 1.0).abs() < 1e-14);
    }
}
