//! Fat distributions: linear algebra of fat 2-form tuples and
//! quaternionic contact triples, regular isotropic frame construction,
//! affine local models and the jet-lifting solver.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod error;
pub mod fat2;
pub mod frames;
pub mod jets;
pub mod linalg;
pub mod models;
pub mod qcont;
pub mod report;
pub mod sampling;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type Subspace64 = linalg::Subspace<f64>;
pub type Subspace32 = linalg::Subspace<f32>;
pub type Tolerance64 = linalg::Tolerance<f64>;
pub type Tolerance32 = linalg::Tolerance<f32>;
pub type FatTuple = fat2::FatTuple2<f64>;
pub type FatTuple32 = fat2::FatTuple2<f32>;
pub type QCont = qcont::QContTriple<f64>;
pub type QCont32 = qcont::QContTriple<f32>;
pub type Frame64 = frames::Frame<f64>;
pub type Model64 = models::AffineCoframeModel<f64>;
pub type Liouville64 = models::LiouvilleModel<f64>;
pub type JetSystem64 = jets::SymTensorSystem<f64>;
