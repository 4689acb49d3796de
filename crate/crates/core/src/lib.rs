//! Class-balancing loss functions for long-tailed multi-label text
//! classification, together with the corpus statistics, TF-IDF features,
//! linear trainer and evaluation protocol needed to compare them.
//!
//! The numeric core is generic over a [`Real`] scalar (`f32` or `f64`).
//! The `*64` / `*32` aliases below fix the scalar for callers that do not
//! care about genericity.

pub mod corpus;
pub mod error;
pub mod features;
pub mod losses;
pub mod matrix;
pub mod metrics;
pub mod pipeline;
pub mod runconfig;
pub mod scalar;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Real;

pub type Matrix64 = matrix::Matrix<f64>;
pub type Matrix32 = matrix::Matrix<f32>;

pub type SparseVector64 = features::SparseVector<f64>;
pub type SparseVector32 = features::SparseVector<f32>;
pub type Vectorizer64 = features::Vectorizer<f64>;
pub type Vectorizer32 = features::Vectorizer<f32>;

pub type LossSpec64 = losses::LossSpec<f64>;
pub type LossSpec32 = losses::LossSpec<f32>;
pub type LossCache64 = losses::LossCache<f64>;
pub type LossCache32 = losses::LossCache<f32>;
pub type LossResult64 = losses::LossResult<f64>;
pub type LossResult32 = losses::LossResult<f32>;

pub type LinearModel64 = trainer::LinearModel<f64>;
pub type LinearModel32 = trainer::LinearModel<f32>;
pub type TrainConfig64 = trainer::TrainConfig<f64>;
pub type TrainConfig32 = trainer::TrainConfig<f32>;
