//! Associated (exponentially tilted) random walks and Wald-type martingales
//! for random walks with stationary increments.
//!
//! Two increment families are covered exactly: finite-state Markov chains
//! ([`markov`]) and stationary Gaussian sequences ([`gaussian`]). For both,
//! the crate finds the tilt parameter θ at which `E(exp(-θ S_n))` has a
//! positive finite limit `q`, builds the associated (downward drifting)
//! model and the martingale `V_k`. [`queueing`] applies θ to waiting-time
//! tails of single-server queues, and [`verify`] runs the convergence,
//! dichotomy and martingale diagnostics.
//!
//! The numerics are generic over [`Scalar`] (`f32`/`f64`); the aliases at
//! the crate root fix `f64`, which is what the quoted tolerances assume.

pub mod defaults;
mod error;
pub mod gaussian;
pub mod io;
pub mod linalg;
pub mod markov;
pub mod mc;
pub mod queueing;
pub mod scalar;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type IncrementPath64 = walk::IncrementPath<f64>;
pub type PartialSums64 = walk::PartialSums<f64>;
pub type MCEstimate64 = mc::MCEstimate<f64>;
pub type MarkovModel64 = markov::MarkovModel<f64>;
pub type TiltSolution64 = markov::TiltSolution<f64>;
pub type GaussianModel64 = gaussian::GaussianModel<f64>;
pub type GaussianTilt64 = gaussian::GaussianTilt<f64>;
pub type ConditionalTiltCoeffs64 = gaussian::ConditionalTiltCoeffs<f64>;
pub type QueueModel64 = queueing::QueueModel<f64>;
pub type WaitingSample64 = queueing::WaitingSample<f64>;

pub type MarkovModel32 = markov::MarkovModel<f32>;
pub type GaussianModel32 = gaussian::GaussianModel<f32>;
