//! Unified target-based sentiment tagging.
//!
//! Two stacked bidirectional LSTMs tag each token: the lower one predicts
//! target boundaries (`B I E S O`), the upper one predicts unified tags
//! (`B-POS` .. `S-NEU`, `O`). Boundary predictions are mapped into the
//! unified tag space through a constrained transition matrix and mixed in
//! proportion to the boundary tagger's confidence; a gate carries features
//! across neighbouring tokens to keep sentiments consistent inside a target;
//! and an auxiliary head learns distant opinion-proximity labels.
//!
//! Everything numeric is generic over [`Scalar`] (`f64` or `f32`).

pub mod corpus;
pub mod error;
pub mod evaluator;
pub mod experiment;
pub mod model;
pub mod numcore;
pub mod scalar;
pub mod tagscheme;
pub mod trainer;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Random generator used everywhere a seed is given.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub type Model64 = model::Model<f64>;
pub type Model32 = model::Model<f32>;
pub type Tensor64 = numcore::Tensor<f64>;
pub type Tensor32 = numcore::Tensor<f32>;
pub type EmbeddingTable64 = corpus::EmbeddingTable<f64>;
pub type EmbeddingTable32 = corpus::EmbeddingTable<f32>;
