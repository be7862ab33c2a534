//! Long-tail-aware training and evaluation for spatio-temporal scene graphs.
//!
//! The crate covers the full desk-scale pipeline: annotation data model and
//! synthetic long-tailed dataset generation ([`data`]), curriculum-guided
//! per-epoch label masking ([`maskgen`]), loss primitives with exact manual
//! gradients and the masked composite objectives ([`loss`]), a small
//! differentiable model with hand-written backpropagation and SGD trainers
//! ([`toymodel`]), scene-graph assembly strategies ([`graphbuild`]),
//! Recall@K / meanRecall@K evaluation ([`metrics`]), and feature-space
//! corruption sweeps for robustness testing ([`corruption`]).
//!
//! Everything is deterministic: a single seed fans out into named substreams
//! (see [`stream`]) so runs are byte-reproducible across platforms.

pub mod corruption;
pub mod data;
pub mod error;
pub mod graphbuild;
pub mod loss;
pub mod maskgen;
pub mod metrics;
pub mod stream;
pub mod toymodel;

pub use error::{Error, Result};
