//! Synthetic long-tailed multi-label corpora.
//!
//! Labels are ranked by intended frequency: rank `r` is drawn as a document's
//! primary label with probability proportional to `(r + 1)^-decay`. The first
//! `head` ranks form the head, then `medium`, then `tail`. Every non-head label
//! is linked to one head label, and with probability `linkage` a document whose
//! primary label is non-head also carries that head label. Text is drawn from
//! per-label token pools, plus shared noise tokens at rate `noise`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Bucket, Corpus, Document, LabelVocabulary};
use crate::{Error, Result};

const NOISE_VOCABULARY: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub head: usize,
    pub medium: usize,
    pub tail: usize,
    /// Rank-frequency power-law exponent; 0 gives uniform primary labels.
    pub decay: f64,
    /// Probability that a medium/tail primary label is accompanied by its linked head label.
    pub linkage: f64,
    pub tokens_per_doc: usize,
    pub tokens_per_label: usize,
    /// Fraction of tokens drawn from the shared noise vocabulary.
    pub noise: f64,
    pub documents: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            head: 20,
            medium: 20,
            tail: 20,
            decay: 1.5,
            linkage: 0.5,
            tokens_per_doc: 40,
            tokens_per_label: 12,
            noise: 0.5,
            documents: 5000,
        }
    }
}

impl SyntheticSpec {
    pub fn classes(&self) -> usize {
        self.head + self.medium + self.tail
    }

    pub fn validate(&self) -> Result<()> {
        if self.head == 0 {
            return Err(Error::invalid("synth", "need at least one head label"));
        }
        for (name, rate) in [("linkage", self.linkage), ("noise", self.noise)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::invalid("synth", format!("{name} must lie in [0, 1], got {rate}")));
            }
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return Err(Error::invalid("synth", format!("decay must be finite and >= 0, got {}", self.decay)));
        }
        if self.tokens_per_doc == 0 || self.tokens_per_label == 0 {
            return Err(Error::invalid("synth", "token counts must be positive"));
        }
        Ok(())
    }

    /// Declared bucket of the label with frequency rank `rank`.
    pub fn declared_bucket(&self, rank: usize) -> Bucket {
        if rank < self.head {
            Bucket::Head
        } else if rank < self.head + self.medium {
            Bucket::Medium
        } else {
            Bucket::Tail
        }
    }

    /// Head label linked to a non-head label.
    pub fn linked_head(&self, rank: usize) -> Option<usize> {
        (rank >= self.head).then(|| (rank - self.head) % self.head)
    }

    pub fn label_name(rank: usize) -> String {
        format!("c{rank:02}")
    }

    fn label_token(label: usize, k: usize) -> String {
        format!("w{label}t{k}")
    }

    fn noise_token(k: usize) -> String {
        format!("nz{k}")
    }

    pub fn generate(&self, seed: u64) -> Result<Corpus> {
        self.validate()?;
        let c = self.classes();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<f64> = (0..c).map(|r| ((r + 1) as f64).powf(-self.decay)).collect();
        let primary = WeightedIndex::new(&weights).map_err(|e| Error::invalid("synth", e.to_string()))?;
        let vocab = LabelVocabulary::from_names((0..c).map(Self::label_name))?;

        let mut documents = Vec::with_capacity(self.documents);
        let mut tokens = Vec::with_capacity(self.tokens_per_doc);
        for k in 0..self.documents {
            let label = primary.sample(&mut rng);
            let mut labels = vec![label];
            if let Some(parent) = self.linked_head(label) {
                if rng.gen_bool(self.linkage) {
                    labels.push(parent);
                }
            }
            tokens.clear();
            for _ in 0..self.tokens_per_doc {
                if rng.gen_bool(self.noise) {
                    tokens.push(Self::noise_token(rng.gen_range(0..NOISE_VOCABULARY)));
                } else {
                    let source = labels[rng.gen_range(0..labels.len())];
                    tokens.push(Self::label_token(source, rng.gen_range(0..self.tokens_per_label)));
                }
            }
            documents.push(Document::new(format!("syn{k:06}"), tokens.join(" "), labels));
        }
        Corpus::new(documents, vocab)
    }
}
