//! End-to-end commands: corpus statistics, synthetic generation, training
//! and multi-loss comparison. Each command writes its outputs to disk and
//! returns a summary; the CLI is a thin wrapper around these.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{
    quantile_boundaries, Boundaries, BucketAssignment, ClassStats, Corpus, CooccurrenceMatrix, StatsReport,
};
use crate::features::Vectorizer;
use crate::losses::{LossCache, LossKind, LossSpec};
use crate::metrics::{render_table, EvalInputs, EvalReport};
use crate::runconfig::{BucketMode, DataSource, RunConfig};
use crate::synth::SyntheticSpec;
use crate::trainer::{train, Dataset, LinearModel, TrainConfig, TrainHistory, TrainOutcome};
use crate::{Error, Result};

const CHECKPOINT_VERSION: u32 = 1;

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(|e| Error::io(path, e))
}

/// Writes `stats.json`, `frequencies.csv`, `rank_frequency.csv` and
/// `cooccurrence.csv` for the corpus at `data`.
pub fn cmd_stats(data: &Path, out: &Path, boundaries: Option<Boundaries>) -> Result<StatsReport> {
    let loaded = Corpus::load_jsonl(data)?;
    create_dir(out)?;
    let report = StatsReport::build(&loaded.corpus, boundaries, loaded.dropped_empty)?;
    write_file(&out.join("stats.json"), serde_json::to_string_pretty(&report)?)?;
    write_with(&out.join("frequencies.csv"), |w| report.write_frequency_csv(w))?;
    write_with(&out.join("rank_frequency.csv"), |w| report.write_rank_frequency_csv(w))?;
    let cooc = CooccurrenceMatrix::from_corpus(&loaded.corpus);
    write_with(&out.join("cooccurrence.csv"), |w| cooc.write_csv(loaded.corpus.vocab.names(), w))?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSummary {
    pub documents: usize,
    pub classes: usize,
    /// Declared head/medium/tail sizes.
    pub declared: [usize; 3],
    /// Head/medium/tail sizes from 3-quantile bucketing of realized counts.
    pub realized: Option<[usize; 3]>,
    pub avg_labels_per_instance: f64,
    pub max_declared_tail_count: usize,
}

impl std::fmt::Display for SynthSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "documents = {}, classes = {}", self.documents, self.classes)?;
        writeln!(
            f,
            "declared buckets head/medium/tail = {}/{}/{}",
            self.declared[0], self.declared[1], self.declared[2]
        )?;
        if let Some(r) = self.realized {
            writeln!(f, "realized buckets head/medium/tail = {}/{}/{}", r[0], r[1], r[2])?;
        }
        writeln!(f, "max declared-tail count = {}", self.max_declared_tail_count)?;
        write!(f, "avg labels/instance = {:.2}", self.avg_labels_per_instance)
    }
}

pub fn synth_summary(spec: &SyntheticSpec, corpus: &Corpus) -> Result<SynthSummary> {
    let realized = if corpus.is_empty() {
        None
    } else {
        let stats = ClassStats::from_corpus(corpus)?;
        let b = quantile_boundaries(&stats, 3)?;
        Some(BucketAssignment::new(&stats, b)?.sizes())
    };
    let counts = if corpus.is_empty() {
        vec![0; corpus.num_classes()]
    } else {
        ClassStats::from_corpus(corpus)?.counts
    };
    let tail_start = spec.head + spec.medium;
    Ok(SynthSummary {
        documents: corpus.len(),
        classes: corpus.num_classes(),
        declared: [spec.head, spec.medium, spec.tail],
        realized,
        avg_labels_per_instance: corpus.avg_labels_per_instance(),
        max_declared_tail_count: counts[tail_start..].iter().copied().max().unwrap_or(0),
    })
}

/// Generates a synthetic corpus and writes it as JSONL.
pub fn cmd_synth(spec: &SyntheticSpec, seed: u64, out: &Path) -> Result<SynthSummary> {
    let corpus = spec.generate(seed)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_with(out, |w| corpus.write_jsonl(w))?;
    synth_summary(spec, &corpus)
}

/// Splits, statistics, buckets and features shared by every loss in a run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: Corpus,
    pub val: Corpus,
    pub test: Corpus,
    pub dropped_empty: usize,
    pub stats: ClassStats,
    pub buckets: BucketAssignment,
    pub vectorizer: Vectorizer<f64>,
    pub train_set: Dataset<f64>,
    pub val_set: Dataset<f64>,
    pub test_set: Dataset<f64>,
}

pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    config.validate()?;
    let (corpus, dropped_empty) = match &config.data {
        DataSource::Synthetic => (config.synth.generate(config.seed)?, 0),
        DataSource::Jsonl(path) => {
            let loaded = Corpus::load_jsonl(path)?;
            (loaded.corpus, loaded.dropped_empty)
        }
    };
    let (train, val, test) = corpus.split(config.split, config.seed)?;
    for (name, part) in [("training split", &train), ("validation split", &val), ("test split", &test)] {
        if part.is_empty() {
            return Err(Error::Empty(name));
        }
    }
    let stats = ClassStats::from_corpus(&train)?;
    let boundaries = match config.buckets {
        BucketMode::Quantiles => quantile_boundaries(&stats, 3)?,
        BucketMode::Fixed(b) => b,
    };
    let buckets = BucketAssignment::new(&stats, boundaries)?;
    let vectorizer = Vectorizer::fit(&train, config.features)?;
    let train_set = Dataset::from_corpus(&train, &vectorizer);
    let val_set = Dataset::from_corpus(&val, &vectorizer);
    let test_set = Dataset::from_corpus(&test, &vectorizer);
    Ok(Prepared {
        train,
        val,
        test,
        dropped_empty,
        stats,
        buckets,
        vectorizer,
        train_set,
        val_set,
        test_set,
    })
}

/// A trained model evaluated on the test split.
#[derive(Debug, Clone)]
pub struct LossRun {
    pub spec: LossSpec<f64>,
    pub lr: f64,
    pub cache: LossCache<f64>,
    pub outcome: TrainOutcome<f64>,
    pub report: EvalReport,
}

impl LossRun {
    pub fn val_micro_f1(&self) -> f64 {
        self.outcome.history.best().map(|e| e.val_micro_f1).unwrap_or(0.0)
    }
}

pub fn run_loss(prepared: &Prepared, spec: &LossSpec<f64>, train_config: &TrainConfig<f64>, config: &RunConfig) -> Result<LossRun> {
    let cache = LossCache::build(&prepared.stats, spec)?;
    let outcome = train(&prepared.train_set, &prepared.val_set, spec, &cache, train_config)?;
    let probs = outcome.model.probabilities(&prepared.test_set.features)?;
    let report = EvalReport::evaluate(EvalInputs {
        probs: &probs,
        truth: &prepared.test_set.labels,
        threshold: outcome.threshold,
        buckets: &prepared.buckets,
        group_mode: config.group_mode,
        label_names: prepared.train.vocab.names(),
        top_pairs: config.top_pairs,
    })?;
    Ok(LossRun {
        spec: *spec,
        lr: train_config.lr,
        cache,
        outcome,
        report,
    })
}

/// Trains once per learning rate in `lr_grid` and keeps the run with the
/// best validation micro-F1 (earlier grid entries win ties).
pub fn run_loss_lr_search(prepared: &Prepared, spec: &LossSpec<f64>, config: &RunConfig, lr_grid: &[f64]) -> Result<LossRun> {
    let mut best: Option<LossRun> = None;
    for &lr in lr_grid {
        let tc = TrainConfig { lr, ..config.train.clone() };
        let run = run_loss(prepared, spec, &tc, config)?;
        if best.as_ref().is_none_or(|b| run.val_micro_f1() > b.val_micro_f1()) {
            best = Some(run);
        }
    }
    best.ok_or(Error::Empty("learning-rate grid"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub loss: LossSpec<f64>,
    pub threshold: f64,
    pub labels: Vec<String>,
    pub vectorizer_sha256: String,
    pub model: LinearModel<f64>,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Checkpoint = serde_json::from_str(&text)?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::invalid("checkpoint", format!("unsupported version {}", ckpt.version)));
        }
        Ok(ckpt)
    }
}

fn write_run(dir: &Path, run: &LossRun, prepared: &Prepared) -> Result<()> {
    create_dir(dir)?;
    let ckpt = Checkpoint {
        version: CHECKPOINT_VERSION,
        loss: run.spec,
        threshold: run.outcome.threshold,
        labels: prepared.train.vocab.names().to_vec(),
        vectorizer_sha256: prepared.vectorizer.fingerprint()?,
        model: run.outcome.model.clone(),
    };
    write_file(&dir.join("checkpoint.json"), serde_json::to_string(&ckpt)?)?;
    write_file(&dir.join("history.jsonl"), run.outcome.history.to_jsonl()?)?;
    write_file(&dir.join("loss_cache.json"), run.cache.to_json()?)?;
    write_file(&dir.join("report.json"), run.report.to_json()?)?;
    let table = render_table(&[(run.spec.kind.label().to_owned(), &run.report)]);
    write_file(&dir.join("report.txt"), table)?;
    Ok(())
}

fn write_shared(config: &RunConfig, prepared: &Prepared) -> Result<()> {
    create_dir(&config.out_dir)?;
    write_file(&config.out_dir.join("run_config.txt"), config.to_text())?;
    write_file(&config.out_dir.join("vectorizer.json"), prepared.vectorizer.to_json()?)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub out_dir: PathBuf,
    pub report: EvalReport,
    pub history: TrainHistory,
    pub threshold: f64,
}

/// Trains `config.loss` at `config.train.lr`, evaluates on the test split at
/// the validation-selected threshold and writes everything under `out_dir`.
pub fn cmd_train(config: &RunConfig) -> Result<TrainSummary> {
    let prepared = prepare(config)?;
    write_shared(config, &prepared)?;
    let run = run_loss(&prepared, &config.loss, &config.train, config)?;
    write_run(&config.out_dir, &run, &prepared)?;
    Ok(TrainSummary {
        out_dir: config.out_dir.clone(),
        threshold: run.outcome.threshold,
        history: run.outcome.history.clone(),
        report: run.report,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareRow {
    pub loss: LossKind,
    pub lr: Option<f64>,
    pub val_micro_f1: Option<f64>,
    pub report: Option<EvalReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareSummary {
    pub rows: Vec<CompareRow>,
    pub table: String,
}

impl CompareSummary {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.error.is_none())
    }

    pub fn row(&self, kind: LossKind) -> Option<&EvalReport> {
        self.rows.iter().find(|r| r.loss == kind).and_then(|r| r.report.as_ref())
    }
}

/// Runs every loss kind on the same splits, features and initialization.
/// Per-kind outputs go to `out_dir/NN-kind/`; the combined table to
/// `compare.txt` and `compare.json`.
pub fn cmd_compare(config: &RunConfig, kinds: &[LossKind]) -> Result<CompareSummary> {
    if kinds.len() < 2 {
        return Err(Error::Config("compare needs at least two loss kinds".into()));
    }
    let prepared = prepare(config)?;
    let mut resolved = config.clone();
    resolved.compare_losses = kinds.to_vec();
    write_shared(&resolved, &prepared)?;

    let mut rows = Vec::with_capacity(kinds.len());
    for (n, &kind) in kinds.iter().enumerate() {
        let spec = config.loss.with_kind(kind);
        let dir = config.out_dir.join(format!("{:02}-{}", n + 1, kind.key()));
        let outcome = run_loss_lr_search(&prepared, &spec, config, &config.lr_grid)
            .and_then(|run| write_run(&dir, &run, &prepared).map(|_| run));
        rows.push(match outcome {
            Ok(run) => CompareRow {
                loss: kind,
                lr: Some(run.lr),
                val_micro_f1: Some(run.val_micro_f1()),
                report: Some(run.report),
                error: None,
            },
            Err(e) => {
                log::error!("{kind}: {e}");
                CompareRow {
                    loss: kind,
                    lr: None,
                    val_micro_f1: None,
                    report: None,
                    error: Some(e.to_string()),
                }
            }
        });
    }
    let ok: Vec<(String, &EvalReport)> = rows
        .iter()
        .filter_map(|r| r.report.as_ref().map(|rep| (r.loss.label().to_owned(), rep)))
        .collect();
    let mut table = render_table(&ok);
    for r in rows.iter().filter(|r| r.error.is_some()) {
        table.push_str(&format!("{}: FAILED ({})\n", r.loss.label(), r.error.as_deref().unwrap_or("")));
    }
    let summary = CompareSummary { rows, table };
    write_file(&config.out_dir.join("compare.txt"), &summary.table)?;
    write_file(&config.out_dir.join("compare.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}
