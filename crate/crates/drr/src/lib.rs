//! Distribution-to-real regression at scale: estimators that map a sample
//! set (the only view of an input distribution) to a real-valued response.
//!
//! The pipeline projects each empirical distribution onto a truncated
//! orthonormal cosine basis ([`basis`]), pushes the coefficient vector
//! through random cosine features approximating an RBF kernel ([`rks`]), and
//! fits a linear model in that feature space ([`regress`]). Prediction cost
//! is independent of the training-set size, unlike the kernel smoother
//! baseline which must touch every stored training instance. Synthetic
//! experiment generators ([`synth`]), classical baselines ([`baselines`]),
//! dataset/model file formats ([`dataset`], [`model_file`]), and a benchmark
//! harness ([`bench`]) round out the crate; the `drr` binary drives them.

pub mod baselines;
pub mod basis;
pub mod bench;
pub mod config;
pub mod dataset;
pub mod error;
mod linalg;
pub mod model_file;
pub mod quad;
pub mod regress;
pub mod rks;
pub mod rng;
pub mod sample;
pub mod special;
pub mod synth;

pub use error::{Error, Result};

/// Seed used whenever a caller does not supply one.
pub const DEFAULT_SEED: u64 = 10;
