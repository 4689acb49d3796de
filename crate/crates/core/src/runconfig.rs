//! Flat `section.key = value` run configuration.
//!
//! ```text
//! # comment
//! run.seed = 7
//! data.source = synthetic
//! loss.kind = db
//! train.lr = 0.005
//! ```
//!
//! Every key has a default; [`RunConfig::to_text`] writes the fully resolved
//! form, which parses back to an identical config.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::corpus::{Boundaries, SplitFractions};
use crate::features::VectorizerSettings;
use crate::losses::{LossKind, LossSpec};
use crate::metrics::GroupMode;
use crate::synth::SyntheticSpec;
use crate::trainer::TrainConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Jsonl(PathBuf),
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BucketMode {
    /// Three near-equal frequency groups from the training counts.
    Quantiles,
    Fixed(Boundaries),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub data: DataSource,
    pub split: SplitFractions,
    pub synth: SyntheticSpec,
    pub features: VectorizerSettings,
    pub loss: LossSpec<f64>,
    pub train: TrainConfig<f64>,
    pub buckets: BucketMode,
    pub group_mode: GroupMode,
    pub top_pairs: usize,
    pub compare_losses: Vec<LossKind>,
    pub lr_grid: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            data: DataSource::Synthetic,
            split: SplitFractions::default(),
            synth: SyntheticSpec::default(),
            features: VectorizerSettings::default(),
            loss: LossSpec::default(),
            train: TrainConfig::default(),
            buckets: BucketMode::Quantiles,
            group_mode: GroupMode::SingleVsMulti,
            top_pairs: 3,
            compare_losses: LossKind::ALL.to_vec(),
            lr_grid: vec![1e-3, 5e-3, 1e-2],
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {value:?}"))),
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

pub fn parse_losses(value: &str) -> Result<Vec<LossKind>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        let mut fixed = Boundaries::reuters();
        let mut bucket_mode = "quantiles".to_owned();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let (section, name) = key
                .split_once('.')
                .ok_or_else(|| Error::Config(format!("line {}: key {key:?} needs a section prefix", n + 1)))?;
            match (section, name) {
                ("run", "seed") => config.seed = parse(key, value)?,
                ("run", "out") => config.out_dir = PathBuf::from(value),
                ("data", "source") => {
                    config.data = match value {
                        "synthetic" => DataSource::Synthetic,
                        "jsonl" => match &config.data {
                            DataSource::Jsonl(p) => DataSource::Jsonl(p.clone()),
                            DataSource::Synthetic => DataSource::Jsonl(PathBuf::new()),
                        },
                        other => return Err(Error::Config(format!("{key}: unknown source {other:?}"))),
                    }
                }
                ("data", "path") => config.data = DataSource::Jsonl(PathBuf::from(value)),
                ("split", "train") => config.split.train = parse(key, value)?,
                ("split", "val") => config.split.val = parse(key, value)?,
                ("split", "test") => config.split.test = parse(key, value)?,
                ("synth", "head") => config.synth.head = parse(key, value)?,
                ("synth", "medium") => config.synth.medium = parse(key, value)?,
                ("synth", "tail") => config.synth.tail = parse(key, value)?,
                ("synth", "decay") => config.synth.decay = parse(key, value)?,
                ("synth", "linkage") => config.synth.linkage = parse(key, value)?,
                ("synth", "tokens_per_doc") => config.synth.tokens_per_doc = parse(key, value)?,
                ("synth", "tokens_per_label") => config.synth.tokens_per_label = parse(key, value)?,
                ("synth", "noise") => config.synth.noise = parse(key, value)?,
                ("synth", "documents") => config.synth.documents = parse(key, value)?,
                ("features", "min_df") => config.features.min_df = parse(key, value)?,
                ("features", "max_features") => config.features.max_features = parse(key, value)?,
                ("features", "min_token_len") => config.features.min_token_len = parse(key, value)?,
                ("loss", name) => config.loss.set(name, value)?,
                ("train", "lr") => config.train.lr = parse(key, value)?,
                ("train", "weight_decay") => config.train.weight_decay = parse(key, value)?,
                ("train", "batch_size") => config.train.batch_size = parse(key, value)?,
                ("train", "max_epochs") => config.train.max_epochs = parse(key, value)?,
                ("train", "patience") => config.train.patience = parse(key, value)?,
                ("train", "init_seed") => config.train.init_seed = parse(key, value)?,
                ("train", "shuffle_seed") => config.train.shuffle_seed = parse(key, value)?,
                ("train", "workers") => config.train.workers = parse(key, value)?,
                ("train", "threshold_grid") => config.train.threshold_grid = parse_list(key, value)?,
                ("buckets", "mode") => bucket_mode = value.to_owned(),
                ("buckets", "tail_max") => fixed.tail_max = parse(key, value)?,
                ("buckets", "head_min") => fixed.head_min = parse(key, value)?,
                ("buckets", "tail_inclusive") => fixed.tail_inclusive = parse_bool(key, value)?,
                ("buckets", "head_inclusive") => fixed.head_inclusive = parse_bool(key, value)?,
                ("eval", "groups") => config.group_mode = value.parse()?,
                ("eval", "top_pairs") => config.top_pairs = parse(key, value)?,
                ("compare", "losses") => config.compare_losses = parse_losses(value)?,
                ("compare", "lr_grid") => config.lr_grid = parse_list(key, value)?,
                _ => return Err(Error::Config(format!("line {}: unknown key {key:?}", n + 1))),
            }
        }
        config.buckets = match bucket_mode.as_str() {
            "quantiles" => BucketMode::Quantiles,
            "fixed" => BucketMode::Fixed(fixed),
            other => return Err(Error::Config(format!("buckets.mode: expected quantiles or fixed, got {other:?}"))),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if let DataSource::Jsonl(p) = &self.data {
            if p.as_os_str().is_empty() {
                return Err(Error::Config("data.source = jsonl requires data.path".into()));
            }
        }
        self.split.validate()?;
        self.synth.validate()?;
        self.loss.validate()?;
        self.train.validate()?;
        if let BucketMode::Fixed(b) = self.buckets {
            b.validate()?;
        }
        if self.lr_grid.is_empty() || self.lr_grid.iter().any(|lr| !(*lr > 0.0 && lr.is_finite())) {
            return Err(Error::Config("compare.lr_grid needs positive learning rates".into()));
        }
        Ok(())
    }

    /// Fully resolved config in the same flat format `parse` accepts.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let list = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        put("run.seed", self.seed.to_string());
        put("run.out", self.out_dir.display().to_string());
        match &self.data {
            DataSource::Synthetic => put("data.source", "synthetic".into()),
            DataSource::Jsonl(p) => put("data.path", p.display().to_string()),
        }
        put("split.train", format!("{:?}", self.split.train));
        put("split.val", format!("{:?}", self.split.val));
        put("split.test", format!("{:?}", self.split.test));
        put("synth.head", self.synth.head.to_string());
        put("synth.medium", self.synth.medium.to_string());
        put("synth.tail", self.synth.tail.to_string());
        put("synth.decay", format!("{:?}", self.synth.decay));
        put("synth.linkage", format!("{:?}", self.synth.linkage));
        put("synth.tokens_per_doc", self.synth.tokens_per_doc.to_string());
        put("synth.tokens_per_label", self.synth.tokens_per_label.to_string());
        put("synth.noise", format!("{:?}", self.synth.noise));
        put("synth.documents", self.synth.documents.to_string());
        put("features.min_df", self.features.min_df.to_string());
        put("features.max_features", self.features.max_features.to_string());
        put("features.min_token_len", self.features.min_token_len.to_string());
        for (k, v) in self.loss.to_pairs() {
            put(&format!("loss.{k}"), v);
        }
        put("train.lr", format!("{:?}", self.train.lr));
        put("train.weight_decay", format!("{:?}", self.train.weight_decay));
        put("train.batch_size", self.train.batch_size.to_string());
        put("train.max_epochs", self.train.max_epochs.to_string());
        put("train.patience", self.train.patience.to_string());
        put("train.init_seed", self.train.init_seed.to_string());
        put("train.shuffle_seed", self.train.shuffle_seed.to_string());
        put("train.workers", self.train.workers.to_string());
        put("train.threshold_grid", list(&self.train.threshold_grid));
        match self.buckets {
            BucketMode::Quantiles => put("buckets.mode", "quantiles".into()),
            BucketMode::Fixed(b) => {
                put("buckets.mode", "fixed".into());
                put("buckets.tail_max", b.tail_max.to_string());
                put("buckets.head_min", b.head_min.to_string());
                put("buckets.tail_inclusive", b.tail_inclusive.to_string());
                put("buckets.head_inclusive", b.head_inclusive.to_string());
            }
        }
        put("eval.groups", self.group_mode.key().into());
        put("eval.top_pairs", self.top_pairs.to_string());
        put(
            "compare.losses",
            self.compare_losses.iter().map(|k| k.key()).collect::<Vec<_>>().join(","),
        );
        put("compare.lr_grid", list(&self.lr_grid));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolved_text_round_trips() {
        let mut c = RunConfig::parse(
            "run.seed = 4\n# comment\nloss.kind = cb-ntr\nloss.mu = 0.05\ntrain.lr = 0.01\n\
             buckets.mode = fixed\nbuckets.tail_max = 15\nbuckets.head_min = 50\ndata.path = x.jsonl\n",
        )
        .unwrap();
        assert_eq!(c.loss.kind, LossKind::CbNtr);
        assert_eq!(c.buckets, BucketMode::Fixed(Boundaries::pubmed()));
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        c.data = DataSource::Synthetic;
        c.split.train = 5000.0 / 6000.0;
        c.split.val = 500.0 / 6000.0;
        c.split.test = 500.0 / 6000.0;
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn unknown_loss_kind_lists_valid_kinds() {
        let err = RunConfig::parse("loss.kind = ldam\n").unwrap_err().to_string();
        assert!(err.contains("ntr-fl") && err.contains("db-0fl"), "{err}");
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(RunConfig::parse("train.momentum = 0.9\n").is_err());
        assert!(RunConfig::parse("seed = 1\n").is_err());
        assert!(RunConfig::parse("train.batch_size = many\n").is_err());
        assert!(RunConfig::parse("split.train = 0.9\nsplit.val = 0.2\n").is_err());
        assert!(RunConfig::parse("data.source = jsonl\n").is_err());
    }
}
