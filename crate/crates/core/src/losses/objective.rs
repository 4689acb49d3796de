use serde::Serialize;

use crate::corpus::ClassStats;
use crate::losses::sigmoid::{log_sigmoid, sigmoid};
use crate::losses::spec::LossSpec;
use crate::losses::weights::{compute_class_bias, compute_r_cb, compute_r_db, smooth_r};
use crate::matrix::Matrix;
use crate::{Error, Real, Result};

/// Logits for `B` instances over `C` classes with their positive labels.
#[derive(Debug, Clone)]
pub struct Batch<F> {
    logits: Matrix<F>,
    positives: Vec<Vec<usize>>,
    targets: Vec<bool>,
}

impl<F: Real> Batch<F> {
    pub fn new(logits: Matrix<F>, positives: Vec<Vec<usize>>) -> Result<Self> {
        let (b, c) = logits.shape();
        if positives.len() != b {
            return Err(Error::ShapeMismatch {
                expected: format!("{b} label rows"),
                got: format!("{}", positives.len()),
            });
        }
        if !logits.all_finite() {
            return Err(Error::NonFinite("logits"));
        }
        let mut targets = vec![false; b * c];
        let mut positives = positives;
        for (k, row) in positives.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            for &i in row.iter() {
                if i >= c {
                    return Err(Error::ShapeMismatch {
                        expected: format!("label ids below {c}"),
                        got: format!("{i} in row {k}"),
                    });
                }
                targets[k * c + i] = true;
            }
        }
        Ok(Self {
            logits,
            positives,
            targets,
        })
    }

    /// Builds positive lists from a dense 0/1 target matrix.
    pub fn from_dense(logits: Matrix<F>, targets: &Matrix<F>) -> Result<Self> {
        if logits.shape() != targets.shape() {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", logits.shape()),
                got: format!("{:?}", targets.shape()),
            });
        }
        let positives = (0..targets.rows())
            .map(|k| {
                targets
                    .row(k)
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &y)| (y > F::zero()).then_some(i))
                    .collect()
            })
            .collect();
        Self::new(logits, positives)
    }

    pub fn logits(&self) -> &Matrix<F> {
        &self.logits
    }

    pub fn positives(&self) -> &[Vec<usize>] {
        &self.positives
    }

    #[inline]
    pub fn target(&self, k: usize, i: usize) -> bool {
        self.targets[k * self.logits.cols() + i]
    }

    pub fn len(&self) -> usize {
        self.logits.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.logits.rows() == 0
    }

    pub fn num_classes(&self) -> usize {
        self.logits.cols()
    }
}

/// Per-class quantities derived once from training statistics.
#[derive(Debug, Clone, Serialize)]
pub struct LossCache<F> {
    pub stats: ClassStats,
    /// Class-balanced weights; all ones unless the kind uses them.
    pub r_cb: Vec<F>,
    /// `-ln(1/p_i - 1)`.
    pub b_hat: Vec<F>,
    /// Class bias for NTR kinds; all zeros otherwise.
    pub v: Vec<F>,
    /// Human-readable notes about zero-frequency or clamped classes.
    pub warnings: Vec<String>,
}

impl<F: Real> LossCache<F> {
    pub fn build(stats: &ClassStats, spec: &LossSpec<F>) -> Result<Self> {
        spec.validate()?;
        let c = stats.num_classes();
        let mut warnings = Vec::new();
        let r_cb = if spec.kind.uses_cb_weight() {
            compute_r_cb(&stats.counts, spec.beta_cb)
        } else {
            vec![F::one(); c]
        };
        let (b_hat, v) = if spec.kind.uses_ntr() {
            let bias = compute_class_bias(stats, spec.kappa);
            if !bias.clamped.is_empty() {
                warnings.push(format!("prior clamped for classes {:?}", bias.clamped));
            }
            (bias.b_hat, bias.v)
        } else {
            (vec![F::zero(); c], vec![F::zero(); c])
        };
        let zero: Vec<usize> = (0..c).filter(|&i| stats.counts[i] == 0).collect();
        if !zero.is_empty() {
            warnings.push(format!("classes without training instances: {zero:?}"));
        }
        Ok(Self {
            stats: stats.clone(),
            r_cb,
            b_hat,
            v,
            warnings,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.stats.num_classes()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossResult<F> {
    /// Mean over all `B * C` instance-label terms.
    pub value: F,
    /// `∂ value / ∂ z`.
    pub grad: Matrix<F>,
}

fn check_compatible<F: Real>(batch: &Batch<F>, cache: &LossCache<F>) -> Result<()> {
    if batch.num_classes() != cache.num_classes() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} classes", cache.num_classes()),
            got: format!("{} logit columns", batch.num_classes()),
        });
    }
    Ok(())
}

/// Entry weights `w_i^k` for the batch: r_CB, smoothed r_DB, or ones.
pub fn weight_matrix<F: Real>(spec: &LossSpec<F>, batch: &Batch<F>, cache: &LossCache<F>) -> Result<Matrix<F>> {
    check_compatible(batch, cache)?;
    let (b, c) = batch.logits().shape();
    let mut w = Matrix::from_fn(b, c, |_, _| F::one());
    if spec.kind.uses_cb_weight() {
        for k in 0..b {
            w.row_mut(k).copy_from_slice(&cache.r_cb);
        }
    } else if spec.kind.uses_db_weight() {
        for k in 0..b {
            let raw: Vec<F> = compute_r_db(&batch.positives()[k], &cache.stats.counts)?;
            for (dst, r) in w.row_mut(k).iter_mut().zip(raw) {
                *dst = smooth_r(r, spec.alpha, spec.beta_smooth, spec.mu);
            }
        }
    }
    Ok(w)
}

/// Loss value and exact gradient with respect to the logits.
///
/// With `s = z - v` on positives and `t = λ (z - v)` on negatives the
/// per-entry derivatives are
///
/// ```text
/// y = 1:  w (1 - q)^γ (γ q ln q - (1 - q))
/// y = 0:  w q^γ (q - γ (1 - q) ln(1 - q))
/// ```
pub fn loss_and_grad<F: Real>(spec: &LossSpec<F>, batch: &Batch<F>, cache: &LossCache<F>) -> Result<LossResult<F>> {
    spec.validate()?;
    let weights = weight_matrix(spec, batch, cache)?;
    let (b, c) = batch.logits().shape();
    if b == 0 || c == 0 {
        return Err(Error::Empty("batch"));
    }
    let gamma = spec.effective_gamma();
    let focal = gamma != F::zero();
    let lambda = if spec.kind.uses_ntr() { spec.lambda } else { F::one() };

    let mut grad = Matrix::zeros(b, c);
    let mut total = F::zero();
    for k in 0..b {
        let z_row = batch.logits().row(k);
        let w_row = weights.row(k);
        let g_row = grad.row_mut(k);
        for i in 0..c {
            let w = w_row[i];
            let shifted = z_row[i] - cache.v[i];
            let (term, d) = if batch.target(k, i) {
                let q = sigmoid(shifted);
                let one_minus_q = sigmoid(-shifted);
                let log_q = log_sigmoid(shifted);
                let factor = if focal { one_minus_q.powf(gamma) } else { F::one() };
                (
                    -w * factor * log_q,
                    w * factor * (gamma * q * log_q - one_minus_q),
                )
            } else {
                let t = lambda * shifted;
                let q = sigmoid(t);
                let one_minus_q = sigmoid(-t);
                let log_one_minus_q = log_sigmoid(-t);
                let factor = if focal { q.powf(gamma) } else { F::one() };
                (
                    -(w / lambda) * factor * log_one_minus_q,
                    w * factor * (q - gamma * one_minus_q * log_one_minus_q),
                )
            };
            total += term;
            g_row[i] = d;
        }
    }
    let n = F::from_count(b * c);
    for g in grad.as_mut_slice() {
        *g /= n;
    }
    Ok(LossResult {
        value: total / n,
        grad,
    })
}
