//! Randomized greedy constructors for admissible frames and a verifier
//! that re-derives every predicate through separate code.

mod builders;
mod verify;

use std::fmt;
use std::str::FromStr;

pub use builders::{
    build_horizontal_deg2, build_horizontal_qcont, build_isocontact_deg2, build_isocontact_qcont,
};
pub use verify::{pivoted_qr_rank, verify_frame};

use crate::error::{mismatch, Error, Result};
use crate::fat2::FatTuple2;
use crate::linalg::{Matrix, Subspace, Tolerance};
use crate::qcont::QContTriple;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    HorizontalDeg2,
    IsocontactDeg2,
    HorizontalQcont,
    IsocontactQcont,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::HorizontalDeg2,
        Regime::IsocontactDeg2,
        Regime::HorizontalQcont,
        Regime::IsocontactQcont,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Regime::HorizontalDeg2 => "horizontal_deg2",
            Regime::IsocontactDeg2 => "isocontact_deg2",
            Regime::HorizontalQcont => "horizontal_qcont",
            Regime::IsocontactQcont => "isocontact_qcont",
        }
    }

    pub fn is_isocontact(self) -> bool {
        matches!(self, Regime::IsocontactDeg2 | Regime::IsocontactQcont)
    }

    pub fn is_qcont(self) -> bool {
        matches!(self, Regime::HorizontalQcont | Regime::IsocontactQcont)
    }

    /// Number of frame vectors for `k` steps.
    pub fn frame_len(self, k: usize) -> usize {
        if self.is_isocontact() {
            2 * k
        } else {
            k
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown regime {s:?}")))
    }
}

/// Ordered vectors in the ambient space of a tuple, tagged with a regime.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    pub ambient_dim: usize,
    pub vectors: Vec<Vec<T>>,
    pub regime: Regime,
}

impl<T: Scalar> Frame<T> {
    pub fn new(ambient_dim: usize, vectors: Vec<Vec<T>>, regime: Regime) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return Err(mismatch(format!(
                "frame vector of length {} in R^{ambient_dim}",
                v.len()
            )));
        }
        Ok(Self {
            ambient_dim,
            vectors,
            regime,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Columns are the frame vectors.
    pub fn matrix(&self) -> Matrix<T> {
        Matrix::from_columns(self.ambient_dim, &self.vectors).expect("lengths checked")
    }

    pub fn span(&self, tol: &Tolerance<T>) -> Result<Subspace<T>> {
        Subspace::span(&self.matrix(), tol)
    }

    pub fn prefix(&self, m: usize) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            vectors: self.vectors[..m].to_vec(),
            regime: self.regime,
        }
    }
}

/// The pointwise structure a frame lives in.
#[derive(Debug, Clone, Copy)]
pub enum Context<'a, T> {
    Fat2(&'a FatTuple2<T>),
    Qcont(&'a QContTriple<T>),
}

impl<T: Scalar> Context<'_, T> {
    pub fn dim(&self) -> usize {
        match self {
            Context::Fat2(t) => t.dim(),
            Context::Qcont(q) => q.dim(),
        }
    }

    pub fn forms(&self) -> Vec<&Matrix<T>> {
        match self {
            Context::Fat2(t) => vec![t.omega1(), t.omega2()],
            Context::Qcont(q) => vec![q.omega(0), q.omega(1), q.omega(2)],
        }
    }

    pub fn tol(&self) -> &Tolerance<T> {
        match self {
            Context::Fat2(t) => t.tol(),
            Context::Qcont(q) => q.tol(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn horizontal_deg2_at_threshold() {
        let t = FatTuple2::<f64>::holomorphic(2);
        let f = build_horizontal_deg2(&t, 2, &mut rng(7)).unwrap();
        let r = verify_frame(&f, Context::Fat2(&t));
        assert!(r.pass(), "{r}");
    }

    #[test]
    fn horizontal_deg2_below_threshold_fails_cleanly() {
        let t = FatTuple2::<f64>::holomorphic(1);
        let e = build_horizontal_deg2(&t, 2, &mut rng(7)).unwrap_err();
        assert!(matches!(e, Error::ConstructionFailure(_)));
    }

    #[test]
    fn isocontact_deg2_single_pair() {
        let t = FatTuple2::<f64>::holomorphic(1);
        let f = build_isocontact_deg2(&t, 1, &mut rng(2)).unwrap();
        let (u, v) = (&f.vectors[0], &f.vectors[1]);
        assert!((t.omega1().bilinear(u, v) - 1.0).abs() < 1e-12);
        assert!(t.omega2().bilinear(u, v).abs() < 1e-12);
        assert!(verify_frame(&f, Context::Fat2(&t)).pass());
    }

    #[test]
    fn qcont_builders() {
        let q = QContTriple::<f64>::standard(2);
        let h = build_horizontal_qcont(&q, 2, &mut rng(1)).unwrap();
        assert!(verify_frame(&h, Context::Qcont(&q)).pass());
        let i = build_isocontact_qcont(&q, 1, &mut rng(1)).unwrap();
        let r = verify_frame(&i, Context::Qcont(&q));
        assert!(r.pass(), "{r}");
        let small = QContTriple::<f64>::standard(1);
        assert!(build_isocontact_qcont(&small, 1, &mut rng(1)).is_err());
    }

    #[test]
    fn duplicated_vector_is_rejected() {
        let t = FatTuple2::<f64>::holomorphic(2);
        let mut f = build_horizontal_deg2(&t, 2, &mut rng(3)).unwrap();
        f.vectors[1] = f.vectors[0].clone();
        let r = verify_frame(&f, Context::Fat2(&t));
        assert!(!r.get("independent").unwrap().pass);
    }

    #[test]
    fn regime_context_mismatch_is_reported() {
        let t = FatTuple2::<f64>::holomorphic(1);
        let f = Frame::new(4, vec![vec![1.0, 0.0, 0.0, 0.0]], Regime::HorizontalQcont).unwrap();
        assert!(!verify_frame(&f, Context::Fat2(&t)).pass());
    }

    #[test]
    fn regime_names_round_trip() {
        for r in Regime::ALL {
            assert_eq!(r.name().parse::<Regime>().unwrap(), r);
        }
        assert!("vertical".parse::<Regime>().is_err());
    }
}
