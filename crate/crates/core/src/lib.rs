//! Expression intensity estimation from facial landmark sequences.
//!
//! The pipeline projects every landmark trajectory onto its own principal
//! axis, finds the neutral/expression transitions from the median speed,
//! and combines the oriented per-landmark responses with weights that
//! favour landmarks resembling the expected course. Around it sit time
//! warping onto a template, evaluation metrics, Ward subclustering of
//! weight vectors, action-unit responses and a synthetic data generator.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod align;
pub mod analysis;
pub mod baseline;
pub mod batch;
pub mod config;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod response;
pub mod seqdata;
pub mod synth;

pub use error::{Error, Result};
