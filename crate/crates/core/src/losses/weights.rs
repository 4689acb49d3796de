//! Class- and instance-dependent weights and the NTR class bias.

use crate::corpus::ClassStats;
use crate::losses::sigmoid::{logit, sigmoid};
use crate::{Error, Real, Result};

/// Class-balanced weights `(1 - β) / (1 - β^n_i)`.
///
/// Classes with `n_i = 0` get weight 1, the same as a single instance.
pub fn compute_r_cb<F: Real>(counts: &[usize], beta: F) -> Vec<F> {
    counts
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            if n == 0 {
                log::warn!("class {i} has no training instances; class-balanced weight set to 1");
                return F::one();
            }
            let beta_n = match i32::try_from(n) {
                Ok(n) => beta.powi(n),
                Err(_) => beta.powf(F::from_count(n)),
            };
            (F::one() - beta) / (F::one() - beta_n)
        })
        .collect()
}

/// Raw rebalancing weights `P_i^C / P^I` for one instance, for every class.
///
/// `P_i^C = (1/C)(1/n_i)` and `P^I = (1/C) Σ_{j ∈ positives} 1/n_j`.
/// Zero-frequency classes are counted as if seen once.
pub fn compute_r_db<F: Real>(positives: &[usize], counts: &[usize]) -> Result<Vec<F>> {
    if positives.is_empty() {
        return Err(Error::invalid(
            "positives",
            "rebalancing weight is undefined for an instance without positive labels",
        ));
    }
    let c = F::from_count(counts.len());
    let class_prob = |n: usize| F::one() / c / F::from_count(n.max(1));
    let mut instance_prob = F::zero();
    for &j in positives {
        instance_prob += F::one() / F::from_count(counts[j].max(1));
    }
    let instance_prob = instance_prob / c;
    Ok(counts.iter().map(|&n| class_prob(n) / instance_prob).collect())
}

/// `α + σ(β (r - μ))`, mapping into `[α, α + 1]`.
#[inline]
pub fn smooth_r<F: Real>(r: F, alpha: F, beta: F, mu: F) -> F {
    alpha + sigmoid(beta * (r - mu))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassBias<F> {
    /// `b̂_i = -ln(1/p_i - 1)`.
    pub b_hat: Vec<F>,
    /// `v_i = -κ b̂_i`.
    pub v: Vec<F>,
    /// Classes whose prior was 0 or 1 and got clamped into `[1/(N+C), 1 - 1/(N+C)]`.
    pub clamped: Vec<usize>,
}

pub fn compute_class_bias<F: Real>(stats: &ClassStats, kappa: F) -> ClassBias<F> {
    let floor = 1.0 / (stats.total + stats.num_classes()) as f64;
    let mut clamped = Vec::new();
    let b_hat: Vec<F> = stats
        .prior
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let p = if p <= 0.0 || p >= 1.0 {
                log::warn!("class {i} has prior {p}; clamped for the class bias");
                clamped.push(i);
                p.clamp(floor, 1.0 - floor)
            } else {
                p
            };
            logit(F::lit(p))
        })
        .collect();
    let v = b_hat.iter().map(|&b| -kappa * b).collect();
    ClassBias { b_hat, v, clamped }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_balanced_weight_examples() {
        let r = compute_r_cb(&[1, 10, 0], 0.9f64);
        assert_eq!(r[0], 1.0);
        assert!((r[1] - 0.153_534).abs() < 1e-6);
        // direct evaluation of 0.1 / (1 - 0.9^10)
        assert!((r[1] - 0.1 / (1.0 - 0.348_678_440_1)).abs() < 1e-12);
        assert_eq!(r[2], 1.0);
        assert!(compute_r_cb(&[1, 5, 300], 0.0f64).iter().all(|&w| w == 1.0));
    }

    #[test]
    fn rebalancing_weight_examples() {
        let counts = [10usize, 40, 5];
        let r: Vec<f64> = compute_r_db(&[0], &counts).unwrap();
        assert_eq!(r[0], 1.0);

        let r: Vec<f64> = compute_r_db(&[0, 1], &counts).unwrap();
        assert!((r[0] - 0.8).abs() < 1e-15);
        assert!((r[1] - 0.2).abs() < 1e-15);
        // negatives get their own P_i^C over the row's P^I
        assert!((r[2] - 1.6).abs() < 1e-14);

        assert!(compute_r_db::<f64>(&[], &counts).is_err());
    }

    #[test]
    fn smoothing_examples() {
        assert!((smooth_r(0.9f64, 0.1, 10.0, 0.9) - 0.6).abs() < 1e-15);
        assert!((smooth_r(1.0f64, 0.1, 10.0, 0.9) - 0.831_058_6).abs() < 1e-7);
        assert!((smooth_r(-1e6f64, 0.1, 10.0, 0.9) - 0.1).abs() < 1e-15);
        assert!((smooth_r(1e6f64, 0.1, 10.0, 0.9) - 1.1).abs() < 1e-15);
    }

    #[test]
    fn class_bias_examples() {
        let stats = ClassStats::from_counts(vec![50, 1, 100, 0], 100).unwrap();
        let bias = compute_class_bias(&stats, 0.05f64);
        assert_eq!(bias.b_hat[0], 0.0);
        assert_eq!(bias.v[0], 0.0);
        assert!((bias.b_hat[1] + 4.595_12).abs() < 1e-5);
        assert!((bias.v[1] - 0.229_756).abs() < 1e-6);
        assert_eq!(bias.clamped, vec![2, 3]);
        let floor = 1.0f64 / 104.0;
        assert!((bias.b_hat[3] - (floor / (1.0 - floor)).ln()).abs() < 1e-12);
        assert!((bias.b_hat[2] + bias.b_hat[3]).abs() < 1e-12);

        let off = compute_class_bias(&stats, 0.0f64);
        assert!(off.v.iter().all(|&v| v == 0.0));
    }
}
