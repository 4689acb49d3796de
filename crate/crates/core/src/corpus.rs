//! Multi-label corpora: ingestion, splitting and label statistics.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    /// Sorted, deduplicated label ids.
    pub labels: Vec<usize>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, labels: impl IntoIterator<Item = usize>) -> Self {
        let mut labels: Vec<usize> = labels.into_iter().collect();
        labels.sort_unstable();
        labels.dedup();
        Self {
            id: id.into(),
            text: text.into(),
            labels,
        }
    }
}

/// Bijection between label names and dense ids `0..C`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVocabulary {
    names: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl LabelVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut vocab = Self::new();
        for name in names {
            let name = name.into();
            if vocab.index.contains_key(&name) {
                return Err(Error::invalid("labels", format!("duplicate label name {name:?}")));
            }
            vocab.intern(&name);
        }
        Ok(vocab)
    }

    /// Returns the id for `name`, inserting it if unseen.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub vocab: LabelVocabulary,
}

#[derive(Deserialize)]
struct RawDocument {
    #[serde(default)]
    id: Option<String>,
    text: String,
    labels: Vec<String>,
}

#[derive(Serialize)]
struct RawDocumentOut<'a> {
    id: &'a str,
    text: &'a str,
    labels: Vec<&'a str>,
}

/// Result of reading a JSONL corpus.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub corpus: Corpus,
    /// Documents dropped because their label set was empty.
    pub dropped_empty: usize,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, vocab: LabelVocabulary) -> Result<Self> {
        let c = vocab.len();
        for doc in &documents {
            if doc.labels.is_empty() {
                return Err(Error::invalid("documents", format!("document {:?} has no labels", doc.id)));
            }
            if let Some(&bad) = doc.labels.iter().find(|&&l| l >= c) {
                return Err(Error::invalid(
                    "documents",
                    format!("document {:?} has label id {bad} outside vocabulary of {c}", doc.id),
                ));
            }
        }
        Ok(Self { documents, vocab })
    }

    pub fn empty() -> Self {
        Self {
            documents: Vec::new(),
            vocab: LabelVocabulary::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.vocab.len()
    }

    /// Subset sharing this corpus' vocabulary, in the order of `indices`.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            documents: indices.iter().map(|&i| self.documents[i].clone()).collect(),
            vocab: self.vocab.clone(),
        }
    }

    pub fn label_sets(&self) -> Vec<Vec<usize>> {
        self.documents.iter().map(|d| d.labels.clone()).collect()
    }

    pub fn avg_labels_per_instance(&self) -> f64 {
        if self.documents.is_empty() {
            return 0.0;
        }
        let total: usize = self.documents.iter().map(|d| d.labels.len()).sum();
        total as f64 / self.documents.len() as f64
    }

    pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Loaded> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_jsonl(BufReader::new(file)).map_err(|e| match e {
            Error::Io { error, .. } => Error::io(path, error),
            other => other,
        })
    }

    pub fn read_jsonl(reader: impl BufRead) -> Result<Loaded> {
        let mut vocab = LabelVocabulary::new();
        let mut documents = Vec::new();
        let mut dropped_empty = 0;
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io("<reader>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawDocument = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                line: line_no,
                reason: e.to_string(),
            })?;
            if raw.labels.is_empty() {
                dropped_empty += 1;
                continue;
            }
            let labels: Vec<usize> = raw.labels.iter().map(|l| vocab.intern(l)).collect();
            let id = raw.id.unwrap_or_else(|| format!("line{line_no}"));
            documents.push(Document::new(id, raw.text, labels));
        }
        if dropped_empty > 0 {
            log::warn!("dropped {dropped_empty} documents with empty label sets");
        }
        Ok(Loaded {
            corpus: Corpus { documents, vocab },
            dropped_empty,
        })
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for doc in &self.documents {
            let out = RawDocumentOut {
                id: &doc.id,
                text: &doc.text,
                labels: doc
                    .labels
                    .iter()
                    .map(|&l| self.vocab.name(l).unwrap_or_default())
                    .collect(),
            };
            serde_json::to_writer(&mut w, &out)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Seeded train/val/test partition. Each part keeps the corpus order.
    pub fn split(&self, fractions: SplitFractions, seed: u64) -> Result<(Corpus, Corpus, Corpus)> {
        fractions.validate()?;
        let m = self.documents.len();
        let n_train = ((fractions.train * m as f64).round() as usize).min(m);
        let n_val = ((fractions.val * m as f64).round() as usize).min(m - n_train);
        let n_test = ((fractions.test * m as f64).round() as usize).min(m - n_train - n_val);

        let mut order: Vec<usize> = (0..m).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);

        let take = |range: std::ops::Range<usize>| {
            let mut idx = order[range].to_vec();
            idx.sort_unstable();
            self.subset(&idx)
        };
        let train = take(0..n_train);
        let val = take(n_train..n_train + n_val);
        let test = take(n_train + n_val..n_train + n_val + n_test);
        Ok((train, val, test))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("train", self.train), ("val", self.val), ("test", self.test)] {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::invalid("fractions", format!("{name} fraction must be positive, got {f}")));
            }
        }
        let sum = self.train + self.val + self.test;
        if sum > 1.0 + 1e-9 {
            return Err(Error::invalid("fractions", format!("fractions sum to {sum} > 1")));
        }
        Ok(())
    }
}

/// Per-class training frequencies and priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    /// Number of training documents carrying each label.
    pub counts: Vec<usize>,
    /// Number of training documents.
    pub total: usize,
    /// `counts[i] / total`.
    pub prior: Vec<f64>,
}

impl ClassStats {
    pub fn from_counts(counts: Vec<usize>, total: usize) -> Result<Self> {
        if total == 0 {
            return Err(Error::Empty("class statistics need at least one instance"));
        }
        if let Some(&bad) = counts.iter().find(|&&n| n > total) {
            return Err(Error::invalid("counts", format!("count {bad} exceeds instance total {total}")));
        }
        let prior = counts.iter().map(|&n| n as f64 / total as f64).collect();
        Ok(Self { counts, total, prior })
    }

    pub fn from_corpus(train: &Corpus) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty("training corpus"));
        }
        let mut counts = vec![0usize; train.num_classes()];
        for doc in &train.documents {
            for &l in &doc.labels {
                counts[l] += 1;
            }
        }
        Self::from_counts(counts, train.len())
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn avg_instances_per_label(&self) -> f64 {
        if self.counts.is_empty() {
            return 0.0;
        }
        self.counts.iter().sum::<usize>() as f64 / self.counts.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Head,
    Medium,
    Tail,
}

impl Bucket {
    pub const ALL: [Bucket; 3] = [Bucket::Head, Bucket::Medium, Bucket::Tail];

    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::Head => "head",
            Bucket::Medium => "medium",
            Bucket::Tail => "tail",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Frequency cut-offs for head/medium/tail, in training instance counts.
///
/// With both flags set, `tail = {n <= tail_max}`, `head = {n >= head_min}`
/// and medium is the open interval between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundaries {
    pub tail_max: usize,
    pub head_min: usize,
    pub tail_inclusive: bool,
    pub head_inclusive: bool,
}

impl Boundaries {
    pub fn new(tail_max: usize, head_min: usize) -> Self {
        Self {
            tail_max,
            head_min,
            tail_inclusive: true,
            head_inclusive: true,
        }
    }

    /// Reuters-21578 cut-offs: tail <= 8, head >= 35.
    pub fn reuters() -> Self {
        Self::new(8, 35)
    }

    /// PubMed cut-offs: tail <= 15, head >= 50.
    pub fn pubmed() -> Self {
        Self::new(15, 50)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tail_max >= self.head_min {
            return Err(Error::invalid(
                "boundaries",
                format!("tail_max {} must be below head_min {}", self.tail_max, self.head_min),
            ));
        }
        Ok(())
    }

    pub fn classify(&self, n: usize) -> Bucket {
        let is_head = if self.head_inclusive { n >= self.head_min } else { n > self.head_min };
        let is_tail = if self.tail_inclusive { n <= self.tail_max } else { n < self.tail_max };
        if is_head {
            Bucket::Head
        } else if is_tail {
            Bucket::Tail
        } else {
            Bucket::Medium
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketAssignment {
    pub buckets: Vec<Bucket>,
    pub boundaries: Boundaries,
}

impl BucketAssignment {
    pub fn new(stats: &ClassStats, boundaries: Boundaries) -> Result<Self> {
        boundaries.validate()?;
        Ok(Self {
            buckets: stats.counts.iter().map(|&n| boundaries.classify(n)).collect(),
            boundaries,
        })
    }

    pub fn classes(&self, bucket: Bucket) -> Vec<usize> {
        (0..self.buckets.len()).filter(|&i| self.buckets[i] == bucket).collect()
    }

    pub fn sizes(&self) -> [usize; 3] {
        let mut s = [0; 3];
        for b in &self.buckets {
            s[*b as usize] += 1;
        }
        s
    }
}

/// Boundaries splitting classes into `q = 3` frequency groups of near-equal
/// size. The frequency at each cut point goes to the lower bucket, so ties
/// can make bucket sizes unequal.
pub fn quantile_boundaries(stats: &ClassStats, q: usize) -> Result<Boundaries> {
    if q != 3 {
        return Err(Error::invalid("q", format!("only 3 buckets are supported, got {q}")));
    }
    let c = stats.num_classes();
    if c < q {
        return Err(Error::invalid("stats", format!("need at least {q} classes, got {c}")));
    }
    let (tail_max, head_min) = tercile_cuts(stats.counts.clone());
    Ok(Boundaries::new(tail_max, head_min))
}

/// Cut points `(low_max, high_min)` splitting `values` into three groups of
/// near-equal size, with values equal to a cut point kept in the lower group.
pub(crate) fn tercile_cuts(mut values: Vec<usize>) -> (usize, usize) {
    values.sort_unstable();
    let n = values.len();
    let cut = |j: usize| ((j * n) as f64 / 3.0).round() as usize;
    let low_max = values[cut(1).max(1) - 1];
    let mid_max = values[cut(2).max(1) - 1].max(low_max);
    let high_min = values.iter().copied().find(|&v| v > mid_max).unwrap_or(mid_max + 1);
    (low_max, high_min)
}

/// Conditional label co-occurrence `p(i|j) = count(i and j) / count(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceMatrix {
    classes: usize,
    /// Symmetric joint counts, row-major.
    joint: Vec<usize>,
    /// `conditional[j * C + i] = p(i|j)`: rows are the conditioning label.
    conditional: Vec<f64>,
}

impl CooccurrenceMatrix {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let c = corpus.num_classes();
        let mut joint = vec![0usize; c * c];
        for doc in &corpus.documents {
            for &a in &doc.labels {
                for &b in &doc.labels {
                    joint[a * c + b] += 1;
                }
            }
        }
        let mut conditional = vec![0.0; c * c];
        for j in 0..c {
            let count_j = joint[j * c + j];
            if count_j == 0 {
                continue;
            }
            for i in 0..c {
                conditional[j * c + i] = joint[j * c + i] as f64 / count_j as f64;
            }
        }
        Self {
            classes: c,
            joint,
            conditional,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    /// `p(i|j)`; zero when label `j` never occurs.
    pub fn prob(&self, i: usize, given: usize) -> f64 {
        self.conditional[given * self.classes + i]
    }

    pub fn joint(&self, i: usize, j: usize) -> usize {
        self.joint[i * self.classes + j]
    }

    pub fn count(&self, j: usize) -> usize {
        self.joint(j, j)
    }

    /// Labels that never occur; their rows are all zero.
    pub fn absent(&self) -> Vec<usize> {
        (0..self.classes).filter(|&j| self.count(j) == 0).collect()
    }

    /// CSV with a header of label names; row `j` holds `p(i|j)` for every column `i`.
    pub fn write_csv(&self, names: &[String], mut w: impl Write) -> std::io::Result<()> {
        let quoted: Vec<String> = names.iter().map(|n| csv_field(n)).collect();
        writeln!(w, "label,{}", quoted.join(","))?;
        for j in 0..self.classes {
            let row: Vec<String> = (0..self.classes).map(|i| format!("{:.6}", self.prob(i, j))).collect();
            writeln!(w, "{},{}", quoted[j], row.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// JSON summary of a corpus' label distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsReport {
    pub documents: usize,
    pub classes: usize,
    pub avg_labels_per_instance: f64,
    pub avg_instances_per_label: f64,
    pub dropped_empty: usize,
    pub labels: Vec<LabelStats>,
    pub boundaries: Option<Boundaries>,
    pub bucket_sizes: Option<[usize; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelStats {
    pub name: String,
    pub count: usize,
    pub prior: f64,
    pub bucket: Option<Bucket>,
}

impl StatsReport {
    pub fn build(corpus: &Corpus, boundaries: Option<Boundaries>, dropped_empty: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Ok(Self {
                documents: 0,
                classes: corpus.num_classes(),
                avg_labels_per_instance: 0.0,
                avg_instances_per_label: 0.0,
                dropped_empty,
                labels: corpus
                    .vocab
                    .names()
                    .iter()
                    .map(|n| LabelStats {
                        name: n.clone(),
                        count: 0,
                        prior: 0.0,
                        bucket: None,
                    })
                    .collect(),
                boundaries: None,
                bucket_sizes: None,
            });
        }
        let stats = ClassStats::from_corpus(corpus)?;
        let boundaries = match boundaries {
            Some(b) => Some(b),
            None if stats.num_classes() >= 3 => Some(quantile_boundaries(&stats, 3)?),
            None => None,
        };
        let assignment = boundaries.map(|b| BucketAssignment::new(&stats, b)).transpose()?;
        let labels = (0..stats.num_classes())
            .map(|i| LabelStats {
                name: corpus.vocab.names()[i].clone(),
                count: stats.counts[i],
                prior: stats.prior[i],
                bucket: assignment.as_ref().map(|a| a.buckets[i]),
            })
            .collect();
        Ok(Self {
            documents: corpus.len(),
            classes: stats.num_classes(),
            avg_labels_per_instance: corpus.avg_labels_per_instance(),
            avg_instances_per_label: stats.avg_instances_per_label(),
            dropped_empty,
            labels,
            boundaries,
            bucket_sizes: assignment.as_ref().map(BucketAssignment::sizes),
        })
    }

    pub fn write_frequency_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "label,count,prior,bucket")?;
        for l in &self.labels {
            let bucket = l.bucket.map(Bucket::as_str).unwrap_or("");
            writeln!(w, "{},{},{:.6},{}", csv_field(&l.name), l.count, l.prior, bucket)?;
        }
        Ok(())
    }

    /// Labels ranked by descending frequency (ties by label id).
    pub fn write_rank_frequency_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let mut order: Vec<usize> = (0..self.labels.len()).collect();
        order.sort_by(|&a, &b| self.labels[b].count.cmp(&self.labels[a].count).then(a.cmp(&b)));
        writeln!(w, "rank,label,count")?;
        for (rank, &i) in order.iter().enumerate() {
            writeln!(w, "{},{},{}", rank + 1, csv_field(&self.labels[i].name), self.labels[i].count)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(label_sets: &[&[usize]], c: usize) -> Corpus {
        let vocab = LabelVocabulary::from_names((0..c).map(|i| format!("l{i}"))).unwrap();
        let docs = label_sets
            .iter()
            .enumerate()
            .map(|(k, ls)| Document::new(format!("d{k}"), "x", ls.iter().copied()))
            .collect();
        Corpus::new(docs, vocab).unwrap()
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let loaded = Corpus::read_jsonl("".as_bytes()).unwrap();
        assert_eq!(loaded.corpus.len(), 0);
        assert_eq!(loaded.corpus.num_classes(), 0);
    }

    #[test]
    fn vocabulary_in_first_seen_order() {
        let data = "{\"text\":\"a\",\"labels\":[\"acq\"]}\n{\"text\":\"b\",\"labels\":[\"acq\",\"nickel\"]}\n";
        let loaded = Corpus::read_jsonl(data.as_bytes()).unwrap();
        assert_eq!(loaded.corpus.vocab.names(), ["acq", "nickel"]);
        let stats = ClassStats::from_corpus(&loaded.corpus).unwrap();
        assert_eq!(stats.counts, vec![2, 1]);
    }

    #[test]
    fn missing_labels_names_the_line() {
        let data = "{\"text\":\"a\",\"labels\":[\"acq\"]}\n{\"text\":\"b\"}\n";
        let err = Corpus::read_jsonl(data.as_bytes()).unwrap_err();
        match err {
            Error::MalformedLine { line, ref reason } => {
                assert_eq!(line, 2);
                assert!(reason.contains("labels"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_label_sets_are_dropped_and_counted() {
        let data = "{\"text\":\"a\",\"labels\":[]}\n{\"text\":\"b\",\"labels\":[\"x\"]}\n";
        let loaded = Corpus::read_jsonl(data.as_bytes()).unwrap();
        assert_eq!(loaded.dropped_empty, 1);
        assert_eq!(loaded.corpus.len(), 1);
    }

    #[test]
    fn jsonl_round_trip() {
        let c = corpus(&[&[0, 2], &[1]], 3);
        let mut buf = Vec::new();
        c.write_jsonl(&mut buf).unwrap();
        let back = Corpus::read_jsonl(buf.as_slice()).unwrap().corpus;
        assert_eq!(back.len(), 2);
        assert_eq!(back.documents[0].id, "d0");
        // first-seen order renumbers l2 before l1
        assert_eq!(back.vocab.names(), ["l0", "l2", "l1"]);
    }

    #[test]
    fn duplicate_label_names_rejected() {
        assert!(LabelVocabulary::from_names(["a", "a"]).is_err());
    }

    #[test]
    fn class_stats_examples() {
        let s = ClassStats::from_corpus(&corpus(&[&[0, 1]], 2)).unwrap();
        assert_eq!((s.counts.clone(), s.total, s.prior.clone()), (vec![1, 1], 1, vec![1.0, 1.0]));

        let s = ClassStats::from_corpus(&corpus(&[&[0], &[0], &[1]], 2)).unwrap();
        assert_eq!(s.prior, vec![2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn table_one_reuters_aggregates_are_consistent() {
        // 10788 documents, 90 labels, 13330 label assignments.
        let mut counts = vec![148usize; 90];
        counts[0] += 13330 - 148 * 90;
        let stats = ClassStats::from_counts(counts, 10788).unwrap();
        assert!((stats.avg_instances_per_label() - 148.11).abs() < 0.005);
        let per_instance = 13330.0 / 10788.0;
        assert!((per_instance - 1.24f64).abs() < 0.005);
    }

    #[test]
    fn bucket_rule() {
        let stats = ClassStats::from_counts(vec![100, 20, 3], 200).unwrap();
        let a = BucketAssignment::new(&stats, Boundaries::reuters()).unwrap();
        assert_eq!(a.buckets, vec![Bucket::Head, Bucket::Medium, Bucket::Tail]);

        // boundary values themselves are head/tail under inclusive semantics
        let stats = ClassStats::from_counts(vec![35, 8, 9, 34], 200).unwrap();
        let a = BucketAssignment::new(&stats, Boundaries::reuters()).unwrap();
        assert_eq!(a.buckets, vec![Bucket::Head, Bucket::Tail, Bucket::Medium, Bucket::Medium]);

        let exclusive = Boundaries {
            tail_inclusive: false,
            head_inclusive: false,
            ..Boundaries::reuters()
        };
        let a = BucketAssignment::new(&stats, exclusive).unwrap();
        assert_eq!(a.buckets, vec![Bucket::Medium, Bucket::Medium, Bucket::Medium, Bucket::Medium]);
    }

    #[test]
    fn pubmed_boundaries() {
        let stats = ClassStats::from_counts(vec![50, 49, 16, 15, 0], 1000).unwrap();
        let a = BucketAssignment::new(&stats, Boundaries::pubmed()).unwrap();
        assert_eq!(
            a.buckets,
            vec![Bucket::Head, Bucket::Medium, Bucket::Medium, Bucket::Tail, Bucket::Tail]
        );
    }

    #[test]
    fn equal_counts_share_a_bucket() {
        let stats = ClassStats::from_counts(vec![12; 7], 100).unwrap();
        let a = BucketAssignment::new(&stats, Boundaries::reuters()).unwrap();
        assert!(a.buckets.iter().all(|&b| b == Bucket::Medium));
        let b = quantile_boundaries(&stats, 3).unwrap();
        let a = BucketAssignment::new(&stats, b).unwrap();
        assert!(a.buckets.iter().all(|&x| x == a.buckets[0]));
    }

    #[test]
    fn overlapping_boundaries_rejected() {
        let stats = ClassStats::from_counts(vec![1], 1).unwrap();
        assert!(BucketAssignment::new(&stats, Boundaries::new(35, 8)).is_err());
        assert!(BucketAssignment::new(&stats, Boundaries::new(8, 8)).is_err());
    }

    #[test]
    fn quantiles_exact_split() {
        let stats = ClassStats::from_counts((1..=9).collect(), 10).unwrap();
        let b = quantile_boundaries(&stats, 3).unwrap();
        let a = BucketAssignment::new(&stats, b).unwrap();
        assert_eq!(a.sizes(), [3, 3, 3]);
        assert_eq!(b, Boundaries::new(3, 7));

        let stats = ClassStats::from_counts(vec![5, 1, 9], 10).unwrap();
        let a = BucketAssignment::new(&stats, quantile_boundaries(&stats, 3).unwrap()).unwrap();
        assert_eq!(a.buckets, vec![Bucket::Medium, Bucket::Tail, Bucket::Head]);
    }

    #[test]
    fn quantiles_with_ties_go_to_lower_bucket() {
        // Enumerated by hand: sorted [1,2,2,2,2,3], cuts at positions 2 and 4
        // land on frequency 2, so every 2 is tail and medium is empty.
        let stats = ClassStats::from_counts(vec![2, 1, 2, 3, 2, 2], 10).unwrap();
        let b = quantile_boundaries(&stats, 3).unwrap();
        assert_eq!(b, Boundaries::new(2, 3));
        let a = BucketAssignment::new(&stats, b).unwrap();
        assert_eq!(a.sizes(), [1, 0, 5]);

        // sorted [1,1,1,4,4,4,4,9,9]: tail={1}, medium={4}, head={9}
        let stats = ClassStats::from_counts(vec![4, 1, 9, 4, 1, 4, 1, 9, 4], 10).unwrap();
        let a = BucketAssignment::new(&stats, quantile_boundaries(&stats, 3).unwrap()).unwrap();
        assert_eq!(a.sizes(), [2, 4, 3]);
    }

    #[test]
    fn quantiles_need_three_classes() {
        let stats = ClassStats::from_counts(vec![1, 2], 3).unwrap();
        assert!(quantile_boundaries(&stats, 3).is_err());
        let stats = ClassStats::from_counts(vec![3, 1, 2], 3).unwrap();
        let a = BucketAssignment::new(&stats, quantile_boundaries(&stats, 3).unwrap()).unwrap();
        assert_eq!(a.sizes(), [1, 1, 1]);
    }

    #[test]
    fn cooccurrence_examples() {
        let m = CooccurrenceMatrix::from_corpus(&corpus(&[&[0, 1], &[0]], 2));
        assert_eq!(m.prob(1, 0), 0.5);
        assert_eq!(m.prob(0, 1), 1.0);
        assert_eq!(m.prob(0, 0), 1.0);
        assert_eq!(m.prob(1, 1), 1.0);

        let m = CooccurrenceMatrix::from_corpus(&corpus(&[&[0], &[1], &[1]], 3));
        assert_eq!(m.prob(0, 1), 0.0);
        assert_eq!(m.prob(1, 0), 0.0);
        assert_eq!(m.absent(), vec![2]);
        assert!((0..3).all(|i| m.prob(i, 2) == 0.0));
    }

    #[test]
    fn cooccurrence_csv_header_is_label_names() {
        let c = corpus(&[&[0, 1], &[0]], 2);
        let m = CooccurrenceMatrix::from_corpus(&c);
        let mut buf = Vec::new();
        m.write_csv(c.vocab.names(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "label,l0,l1");
        assert_eq!(lines[1], "l0,1.000000,0.500000");
        assert_eq!(lines[2], "l1,1.000000,1.000000");
    }

    #[test]
    fn split_sizes_and_determinism() {
        let c = corpus(&[&[0usize][..]; 10], 1);
        let f = SplitFractions { train: 0.8, val: 0.1, test: 0.1 };
        let (tr, va, te) = c.split(f, 7).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (8, 1, 1));
        let (tr2, va2, te2) = c.split(f, 7).unwrap();
        assert_eq!((tr, va, te), (tr2, va2, te2));
    }

    #[test]
    fn split_is_disjoint_and_order_stable() {
        let docs: Vec<&[usize]> = vec![&[0]; 50];
        let c = corpus(&docs, 1);
        let f = SplitFractions { train: 0.6, val: 0.2, test: 0.2 };
        let (tr, va, te) = c.split(f, 3).unwrap();
        let id = |d: &Document| d.id[1..].parse::<usize>().unwrap();
        let mut all: Vec<usize> = Vec::new();
        for part in [&tr, &va, &te] {
            let ids: Vec<usize> = part.documents.iter().map(id).collect();
            assert!(ids.windows(2).all(|w| w[0] < w[1]));
            all.extend(ids);
        }
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 50);

        let (tr_other, _, _) = c.split(f, 4).unwrap();
        assert_ne!(tr, tr_other);
    }

    #[test]
    fn split_rejects_oversubscribed_fractions() {
        let c = corpus(&[&[0usize][..]; 10], 1);
        let f = SplitFractions { train: 0.7, val: 0.2, test: 0.2 };
        assert!(c.split(f, 0).is_err());
    }

    #[test]
    fn stats_report_for_empty_corpus() {
        let r = StatsReport::build(&Corpus::empty(), None, 0).unwrap();
        assert_eq!((r.documents, r.classes), (0, 0));
    }
}
