//! Sequence norms, best summing constants and finite Pietsch domination for
//! linear and multilinear operators between finite-dimensional `ℓq` spaces.
//!
//! Lower bounds on a best summing constant come from optimized witness
//! families ([`witness`]); upper bounds come from discrete domination
//! measures found by linear programming and then re-validated
//! ([`domination`]). [`experiments`] combines both into consistency checks
//! across exponent schemes.
//!
//! The numerical core is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below fix it to `f64`, which is what the experiments and the CLI use.

pub mod domination;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod lp;
pub mod operators;
pub mod rng;
pub mod scalar;
pub mod seqnorms;
pub mod spaces;
pub mod witness;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use spaces::{BallKind, Exponent, SpaceSpec};

pub type Vector = spaces::Vector<f64>;
pub type BallSample = spaces::BallSample<f64>;
pub type VecSequence = seqnorms::VecSequence<f64>;
pub type NormEstimate = seqnorms::NormEstimate<f64>;
pub type LinearOp = operators::LinearOp<f64>;
pub type MultilinearOp = operators::MultilinearOp<f64>;
pub type SummingWitness = witness::SummingWitness<f64>;
pub type ConstantEstimate = witness::ConstantEstimate<f64>;
pub type DominationCertificate = domination::DominationCertificate<f64>;

pub type Vector32 = spaces::Vector<f32>;
pub type VecSequence32 = seqnorms::VecSequence<f32>;
pub type LinearOp32 = operators::LinearOp<f32>;
pub type MultilinearOp32 = operators::MultilinearOp<f32>;
