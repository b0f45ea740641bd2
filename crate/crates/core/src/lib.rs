//! Zero-inflated item response models for learners with neurodevelopmental
//! conditions, together with a synthetic-cohort simulator and the evaluation
//! experiments built on it.
//!
//! The crate is organized bottom-up:
//!
//! - [`domain`]: learners, items, attempts, datasets and their on-disk format
//! - [`simulate`]: the synthetic cohort generator
//! - [`models`]: IRT, IRT-ZILM and KTM1 likelihoods with analytic gradients
//! - [`fit`]: full-batch optimization and model artifacts
//! - [`eval`]: metrics, parameter recovery and the intervention experiments
//! - [`cli`]: the `zilm` command-line front end

pub mod cli;
pub mod domain;
pub mod error;
pub mod eval;
pub mod fit;
pub mod math;
pub mod models;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
