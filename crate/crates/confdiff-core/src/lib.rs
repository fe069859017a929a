//! Binary classification from unlabeled data pairs annotated with the
//! difference of their positive-class posteriors (confidence differences).
//!
//! The crate provides the full pipeline at desk scale:
//!
//! - [`loss`]: binary-class losses, derivatives, and risk-correction functions
//! - [`risk`]: empirical risk estimators (supervised, soft-label, pairwise
//!   comparison, confidence-difference) plus the corrected estimator and its
//!   four-term decomposition
//! - [`synth`]: Gaussian-mixture ground truth with exact posteriors, dataset
//!   generation, and noise corruption
//! - [`model`]: linear scorer and ReLU MLP with hand-written backward pass
//! - [`optim`]: SGD and Adam updates
//! - [`train`]: minibatch empirical risk minimization and evaluation
//! - [`verify`]: Monte-Carlo checks of unbiasedness, variance minimality,
//!   convergence, and robustness against the synthetic ground truth
//!
//! Everything is deterministic given a seed: generators draw from named
//! ChaCha streams (see [`stream`]), and all float math goes through `libm`
//! so results are bit-identical across platforms. The crate is `no_std`
//! (with `alloc`); IO, file formats, and the CLI live in `confdiff-cli`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod loss;
pub mod model;
pub mod optim;
pub mod risk;
pub mod stream;
pub mod synth;
pub mod train;
pub mod verify;

pub use error::{Error, Result};
