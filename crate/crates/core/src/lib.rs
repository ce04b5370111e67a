//! Descriptor selection for partial-least-squares regression.
//!
//! The crate is organised around the pieces of a QSAR-style modelling
//! pipeline:
//!
//! - [`dataset`]: CSV ingestion, scaling, train/test splits and a planted-model
//!   generator for recovery experiments.
//! - [`pls`]: single-response NIPALS PLS with composite coefficients and the
//!   normalised `|b|` descriptor weights.
//! - [`validation`]: k-fold and Monte Carlo cross-validation, F-test selection
//!   of the latent-variable count, RMSEP and r².
//! - [`strs`]: self-tuned reweighted sampling (exponentially decreasing
//!   enforced selection followed by weighted competitive resampling).
//! - [`mcuve`]: Monte Carlo uninformative variable elimination baseline.
//!
//! All randomness flows from explicit `u64` seeds through [`seed`], so every
//! result is reproducible regardless of thread count.

pub mod dataset;
pub mod error;
pub mod mcuve;
pub mod pls;
pub mod seed;
pub mod selection;
pub mod strs;
pub mod validation;

pub use error::{Error, Result};
