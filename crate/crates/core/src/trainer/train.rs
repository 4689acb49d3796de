use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::features::{SparseVector, Vectorizer};
use crate::losses::{loss_and_grad, Batch, LossCache, LossSpec};
use crate::matrix::Matrix;
use crate::metrics::{default_grid, select_threshold};
use crate::trainer::model::{accumulate_gradients, LinearModel};
use crate::trainer::optim::{AdamW, AdamWConfig};
use crate::{Error, Real, Result};

/// Feature vectors paired with their positive label ids.
#[derive(Debug, Clone)]
pub struct Dataset<F> {
    pub features: Vec<SparseVector<F>>,
    pub labels: Vec<Vec<usize>>,
}

impl<F: Real> Dataset<F> {
    pub fn from_corpus(corpus: &Corpus, vectorizer: &Vectorizer<F>) -> Self {
        Self {
            features: vectorizer.transform_corpus(corpus),
            labels: corpus.label_sets(),
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    fn select(&self, rows: &[usize]) -> (Vec<SparseVector<F>>, Vec<Vec<usize>>) {
        (
            rows.iter().map(|&k| self.features[k].clone()).collect(),
            rows.iter().map(|&k| self.labels[k].clone()).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<F> {
    pub lr: F,
    pub weight_decay: F,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation micro-F1 improvement before stopping.
    pub patience: usize,
    /// Seeds the weight initialization.
    pub init_seed: u64,
    /// Seeds the per-epoch shuffle, independently of the initialization.
    pub shuffle_seed: u64,
    /// Gradient accumulation chunks per batch.
    pub workers: usize,
    pub threshold_grid: Vec<f64>,
}

impl<F: Real> Default for TrainConfig<F> {
    fn default() -> Self {
        Self {
            lr: F::lit(5e-3),
            weight_decay: F::lit(0.01),
            batch_size: 32,
            max_epochs: 30,
            patience: 3,
            init_seed: 0,
            shuffle_seed: 1,
            workers: 1,
            threshold_grid: default_grid(),
        }
    }
}

impl<F: Real> TrainConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= F::zero() && self.lr.is_finite()) {
            return Err(Error::invalid("lr", format!("{} must be finite and >= 0", self.lr)));
        }
        if !(self.weight_decay >= F::zero() && self.weight_decay.is_finite()) {
            return Err(Error::invalid("weight_decay", format!("{} must be >= 0", self.weight_decay)));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 || self.workers == 0 {
            return Err(Error::invalid(
                "train",
                "batch_size, max_epochs, patience and workers must be positive",
            ));
        }
        if self.threshold_grid.is_empty() || self.threshold_grid.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return Err(Error::invalid("threshold_grid", "thresholds must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Training-set loss after the epoch's updates.
    pub train_loss: f64,
    pub val_micro_f1: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Index into `epochs` of the retained model.
    pub best_epoch: usize,
    pub initial_train_loss: f64,
}

impl TrainHistory {
    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.get(self.best_epoch)
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for e in &self.epochs {
            out.push_str(&serde_json::to_string(e)?);
            out.push('\n');
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<F> {
    pub model: LinearModel<F>,
    pub history: TrainHistory,
    /// Validation-selected decision threshold of the retained model.
    pub threshold: f64,
}

/// Mean loss over the whole dataset, evaluated in `chunk`-row pieces.
pub(crate) fn dataset_loss<F: Real>(
    model: &LinearModel<F>,
    data: &Dataset<F>,
    spec: &LossSpec<F>,
    cache: &LossCache<F>,
    chunk: usize,
) -> Result<f64> {
    let mut total = 0.0;
    let mut start = 0;
    while start < data.len() {
        let end = (start + chunk).min(data.len());
        let logits = model.forward(&data.features[start..end])?;
        let batch = Batch::new(logits, data.labels[start..end].to_vec())?;
        total += loss_and_grad(spec, &batch, cache)?.value.as_f64() * (end - start) as f64;
        start = end;
    }
    Ok(total / data.len() as f64)
}

/// Mini-batch AdamW training with per-epoch validation and early stopping.
///
/// After every epoch the validation micro-F1 is measured at the best grid
/// threshold; the parameters of the best epoch so far are kept and returned.
pub fn train<F: Real>(
    train: &Dataset<F>,
    val: &Dataset<F>,
    spec: &LossSpec<F>,
    cache: &LossCache<F>,
    config: &TrainConfig<F>,
) -> Result<TrainOutcome<F>> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if val.is_empty() {
        return Err(Error::Empty("validation set"));
    }
    let dim = train.features[0].dim();
    let mut model = LinearModel::init(dim, cache.num_classes(), config.init_seed)?;
    model.class_shift = cache.v.clone();
    let mut optimizer = AdamW::new(&model, AdamWConfig::new(config.lr, config.weight_decay));
    let mut rng = ChaCha8Rng::seed_from_u64(config.shuffle_seed);
    let mut order: Vec<usize> = (0..train.len()).collect();

    let mut history = TrainHistory {
        initial_train_loss: dataset_loss(&model, train, spec, cache, config.batch_size)?,
        ..Default::default()
    };
    let mut best: Option<(f64, LinearModel<F>, f64)> = None;
    let mut stale = 0;

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        for rows in order.chunks(config.batch_size) {
            let (xs, ys) = train.select(rows);
            let logits = model.forward(&xs)?;
            let batch = Batch::new(logits, ys)?;
            let result = loss_and_grad(spec, &batch, cache)?;
            let grads = accumulate_gradients(&model, &xs, &result.grad, config.workers)?;
            optimizer.step(&mut model, &grads)?;
        }
        let train_loss = dataset_loss(&model, train, spec, cache, config.batch_size)?;
        let probs = model.probabilities(&val.features)?;
        let (threshold, val_micro_f1) = select_threshold(&probs, &val.labels, &config.threshold_grid)?;
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_micro_f1,
            threshold,
        });
        log::debug!("epoch {epoch}: loss {train_loss:.6} val micro-F1 {val_micro_f1:.4} @ {threshold}");

        if best.as_ref().is_none_or(|(f1, _, _)| val_micro_f1 > *f1) {
            best = Some((val_micro_f1, model.clone(), threshold));
            history.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    let (_, model, threshold) = best.expect("at least one epoch runs");
    Ok(TrainOutcome {
        model,
        history,
        threshold,
    })
}

/// Class probabilities for raw documents, `σ(W x + b - shift)`.
pub fn predict_probs<F: Real>(
    model: &LinearModel<F>,
    vectorizer: &Vectorizer<F>,
    corpus: &Corpus,
) -> Result<Matrix<F>> {
    model.probabilities(&vectorizer.transform_corpus(corpus))
}
