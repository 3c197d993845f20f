use rand::Rng;

use super::{Frame, Regime};
use crate::error::{precondition, Error, Result};
use crate::fat2::{restricted_defect, FatTuple2, MAX_RETRIES};
use crate::linalg::{dot, kernel, min_norm_solve, Matrix, Subspace};
use crate::qcont::QContTriple;
use crate::sampling::{gaussian_vector, unit_vector_in};
use crate::Scalar;

fn require_degree2<T: Scalar>(t: &FatTuple2<T>) -> Result<()> {
    match t.degree()? {
        2 => Ok(()),
        d => Err(precondition(format!("degree 2 tuple required, got degree {d}"))),
    }
}

fn exhausted(regime: Regime, step: usize, why: impl std::fmt::Display) -> Error {
    Error::ConstructionFailure(format!("{regime} step {step}: {why}"))
}

fn no_room_is_failure<X>(r: Result<X>, regime: Regime, step: usize) -> Result<X> {
    r.map_err(|e| match e {
        Error::NoRoom(msg) => exhausted(regime, step, msg),
        e => e,
    })
}

fn span_of<T: Scalar>(n: usize, vectors: &[Vec<T>], t: &crate::linalg::Tolerance<T>) -> Result<Subspace<T>> {
    if vectors.is_empty() {
        return Ok(Subspace::zero(n));
    }
    Subspace::from_vectors(n, vectors, t)
}

/// `k` vectors spanning an Ω-regular, Ω-isotropic subspace; each step draws
/// `τ ∈ V^Ω \ (V^Ω)^Ω`.
pub fn build_horizontal_deg2<T: Scalar, R: Rng + ?Sized>(
    t: &FatTuple2<T>,
    k: usize,
    rng: &mut R,
) -> Result<Frame<T>> {
    require_degree2(t)?;
    let regime = Regime::HorizontalDeg2;
    let n = t.dim();
    let tol = t.tol();
    let mut vectors: Vec<Vec<T>> = Vec::with_capacity(k);
    for step in 1..=k {
        let v = span_of(n, &vectors, tol)?;
        let vo = t.omega_perp(&v)?;
        let voo = t.omega_perp(&vo)?;
        let room = vo.complement_within(&voo, tol)?;
        if room.dim() == 0 {
            return Err(exhausted(regime, step, "V^Omega = (V^Omega)^Omega"));
        }
        let mut accepted = None;
        for _ in 0..MAX_RETRIES {
            let tau = unit_vector_in(&room, rng).expect("nonzero room");
            let mut cand = vectors.clone();
            cand.push(tau.clone());
            let ext = span_of(n, &cand, tol)?;
            if ext.dim() == step && t.is_isotropic(&ext) && t.is_regular(&ext)? {
                accepted = Some(tau);
                break;
            }
        }
        match accepted {
            Some(tau) => vectors.push(tau),
            None => return Err(exhausted(regime, step, "retries exhausted")),
        }
    }
    Frame::new(n, vectors, regime)
}

/// `2k` vectors `(u₁, v₁, …)` forming an ω¹-symplectic basis of an
/// ω²-isotropic span; each pair is drawn inside the current `V^Ω`.
pub fn build_isocontact_deg2<T: Scalar, R: Rng + ?Sized>(
    t: &FatTuple2<T>,
    k: usize,
    rng: &mut R,
) -> Result<Frame<T>> {
    require_degree2(t)?;
    let regime = Regime::IsocontactDeg2;
    let n = t.dim();
    let tol = t.tol();
    let mut vectors: Vec<Vec<T>> = Vec::with_capacity(2 * k);
    for step in 1..=k {
        let v = span_of(n, &vectors, tol)?;
        let w = t.omega_perp(&v)?;
        if w.dim() < 2 {
            return Err(exhausted(regime, step, "V^Omega has no room for a pair"));
        }
        let b = w.basis();
        let mut accepted = None;
        for _ in 0..MAX_RETRIES {
            let u = unit_vector_in(&w, rng).expect("nonzero V^Omega");
            // rows: ω¹(u, ·), ω²(u, ·) in coordinates of W
            let r1 = b.transpose().mul_vec(&t.omega1().transpose().mul_vec(&u));
            let r2 = b.transpose().mul_vec(&t.omega2().transpose().mul_vec(&u));
            let m = Matrix::from_rows(&[r1, r2])?;
            let c0 = min_norm_solve(&m, &[T::one(), T::zero()], tol)?;
            let ker = kernel(&m, tol)?;
            let mut c = c0;
            if ker.dim() > 0 {
                let g = gaussian_vector::<T, R>(ker.dim(), rng);
                let extra = ker.basis().mul_vec(&g);
                for (ci, ei) in c.iter_mut().zip(extra) {
                    *ci += ei;
                }
            }
            let vv = b.mul_vec(&c);
            let p1 = t.omega1().bilinear(&u, &vv);
            let p2 = t.omega2().bilinear(&u, &vv);
            if (p1 - T::one()).abs() > tol.agreement() || p2.abs() > tol.agreement() {
                continue;
            }
            let vv: Vec<T> = vv.iter().map(|&x| x / p1).collect();
            let mut cand = vectors.clone();
            cand.push(u.clone());
            cand.push(vv.clone());
            let ext = span_of(n, &cand, tol)?;
            let scale = t.omega2().max_abs();
            if ext.dim() == 2 * step
                && restricted_defect(t.omega2(), ext.basis()) <= tol.threshold(scale)
                && t.is_regular(&ext)?
            {
                accepted = Some((u, vv));
                break;
            }
        }
        match accepted {
            Some((u, vv)) => {
                vectors.push(u);
                vectors.push(vv);
            }
            None => return Err(exhausted(regime, step, "retries exhausted")),
        }
    }
    Frame::new(n, vectors, regime)
}

/// `k` vectors spanning an Ω-isotropic subspace; each step draws
/// `τ ∈ V^Ω ∩ V^⊥`.
pub fn build_horizontal_qcont<T: Scalar, R: Rng + ?Sized>(
    q: &QContTriple<T>,
    k: usize,
    rng: &mut R,
) -> Result<Frame<T>> {
    let regime = Regime::HorizontalQcont;
    let n = q.dim();
    let tol = q.tol();
    let mut vectors: Vec<Vec<T>> = Vec::with_capacity(k);
    for step in 1..=k {
        let v = span_of(n, &vectors, tol)?;
        let room = q.omega_perp3(&v)?.complement_within(&v, tol)?;
        if room.dim() == 0 {
            return Err(exhausted(regime, step, "V^Omega = V"));
        }
        let mut accepted = None;
        for _ in 0..MAX_RETRIES {
            let tau = unit_vector_in(&room, rng).expect("nonzero room");
            let mut cand = vectors.clone();
            cand.push(tau.clone());
            let ext = span_of(n, &cand, tol)?;
            if ext.dim() == step && q.is_isotropic3(&ext) && q.is_regular3(&ext)? {
                accepted = Some(tau);
                break;
            }
        }
        match accepted {
            Some(tau) => vectors.push(tau),
            None => return Err(exhausted(regime, step, "retries exhausted")),
        }
    }
    Frame::new(n, vectors, regime)
}

/// `2k` vectors `(τ₁, η₁, …)`: an ω¹-symplectic basis of a span that is
/// ω²- and ω³-isotropic and Ω-regular. Each step picks `τ`, then `η`, then
/// removes the ω¹-pairings of `η` with the earlier pairs.
pub fn build_isocontact_qcont<T: Scalar, R: Rng + ?Sized>(
    q: &QContTriple<T>,
    k: usize,
    rng: &mut R,
) -> Result<Frame<T>> {
    let regime = Regime::IsocontactQcont;
    let n = q.dim();
    let tol = q.tol();
    let w1 = q.omega(0);
    let mut vectors: Vec<Vec<T>> = Vec::with_capacity(2 * k);
    for step in 1..=k {
        let v = span_of(n, &vectors, tol)?;
        let mut accepted = None;
        for _ in 0..MAX_RETRIES {
            let tau = no_room_is_failure(q.pick_tau(&v, rng), regime, step)?;
            let mut with_tau = vectors.clone();
            with_tau.push(tau.clone());
            let v_tau = span_of(n, &with_tau, tol)?;
            let mut eta = no_room_is_failure(q.pick_eta(&v_tau, &tau, rng), regime, step)?;
            for pair in vectors.chunks(2) {
                let (u, vv) = (&pair[0], &pair[1]);
                let a = w1.bilinear(&eta, vv);
                let b = w1.bilinear(&eta, u);
                for ((e, &ui), &vi) in eta.iter_mut().zip(u).zip(vv) {
                    *e = *e - a * ui + b * vi;
                }
            }
            let pairing = dot(&tau, &w1.mul_vec(&eta));
            if (pairing - T::one()).abs() > tol.agreement() {
                continue;
            }
            let mut cand = with_tau;
            cand.push(eta.clone());
            let ext = span_of(n, &cand, tol)?;
            let scale = q.omega(1).max_abs().max(q.omega(2).max_abs());
            let iso = restricted_defect(q.omega(1), ext.basis())
                .max(restricted_defect(q.omega(2), ext.basis()));
            if ext.dim() == 2 * step && iso <= tol.threshold(scale) && q.is_regular3(&ext)? {
                accepted = Some((tau, eta));
                break;
            }
        }
        match accepted {
            Some((tau, eta)) => {
                vectors.push(tau);
                vectors.push(eta);
            }
            None => return Err(exhausted(regime, step, "retries exhausted")),
        }
    }
    Frame::new(n, vectors, regime)
}
