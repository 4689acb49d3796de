//! Class-balancing losses for multi-label classification.
//!
//! Every loss is a per-entry term on logit `z_i^k` with target `y_i^k`,
//! reduced by the mean over all `B * C` entries. Writing `w` for the entry
//! weight, `γ` for the focusing parameter, `λ` for the negative scale and
//! `v_i` for the class bias:
//!
//! ```text
//! y = 1:  -w (1 - q)^γ ln q          q = σ(z - v)
//! y = 0:  -(w / λ) q^γ ln(1 - q)     q = σ(λ (z - v))
//! ```
//!
//! | kind   | w        | γ     | λ, v  |
//! |--------|----------|-------|-------|
//! | BCE    | 1        | 0     | 1, 0  |
//! | FL     | 1        | γ     | 1, 0  |
//! | CB     | r_CB     | γ     | 1, 0  |
//! | R-FL   | r̂_DB     | γ     | 1, 0  |
//! | NTR-FL | 1        | γ     | λ, v  |
//! | DB-0FL | r̂_DB     | 0     | λ, v  |
//! | CB-NTR | r_CB     | γ     | λ, v  |
//! | DB     | r̂_DB     | γ     | λ, v  |

mod objective;
mod sigmoid;
mod spec;
mod weights;

pub use objective::{loss_and_grad, weight_matrix, Batch, LossCache, LossResult};
pub use sigmoid::{log_one_minus_sigmoid, log_sigmoid, logit, sigmoid};
pub use spec::{LossKind, LossSpec};
pub use weights::{compute_class_bias, compute_r_cb, compute_r_db, smooth_r, ClassBias};
