//! Linear multi-label classifier trained with AdamW on any balancing loss.

mod model;
mod optim;
mod train;

pub use model::{accumulate_gradients, Gradients, LinearModel};
pub use optim::{AdamW, AdamWConfig};
pub use train::{predict_probs, train, Dataset, EpochRecord, TrainConfig, TrainHistory, TrainOutcome};
