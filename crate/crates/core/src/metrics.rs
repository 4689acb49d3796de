//! Micro/macro F1, threshold selection, bucket and label-count breakdowns,
//! and confused-pair analysis.
//!
//! An instance-label pair is predicted positive when `prob >= threshold`.
//! A class with no true positives, false positives or false negatives has
//! F1 = 0 and still counts toward macro averages.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{tercile_cuts, Bucket, BucketAssignment};
use crate::matrix::Matrix;
use crate::{Error, Real, Result};

/// Default threshold grid `0.05, 0.10, ..., 0.95`.
pub fn default_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 20.0).collect()
}

#[inline]
fn predicted<F: Real>(p: F, threshold: f64) -> bool {
    p.as_f64() >= threshold
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

fn check_shapes<F: Real>(probs: &Matrix<F>, truth: &[Vec<usize>]) -> Result<()> {
    if probs.rows() != truth.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} truth rows", probs.rows()),
            got: format!("{}", truth.len()),
        });
    }
    if let Some(bad) = truth.iter().flatten().find(|&&i| i >= probs.cols()) {
        return Err(Error::ShapeMismatch {
            expected: format!("label ids below {}", probs.cols()),
            got: format!("{bad}"),
        });
    }
    Ok(())
}

fn truth_row(labels: &[usize], c: usize) -> Vec<bool> {
    let mut row = vec![false; c];
    for &i in labels {
        row[i] = true;
    }
    row
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: Vec<usize>,
    pub fp: Vec<usize>,
    pub fn_: Vec<usize>,
}

impl ConfusionCounts {
    pub fn zeros(c: usize) -> Self {
        Self {
            tp: vec![0; c],
            fp: vec![0; c],
            fn_: vec![0; c],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.tp.len()
    }

    /// Counts over the instances in `rows` (all rows when `None`).
    pub fn compute<F: Real>(
        probs: &Matrix<F>,
        truth: &[Vec<usize>],
        threshold: f64,
        rows: Option<&[usize]>,
    ) -> Result<Self> {
        check_shapes(probs, truth)?;
        let c = probs.cols();
        let mut counts = Self::zeros(c);
        let all: Vec<usize>;
        let rows = match rows {
            Some(r) => r,
            None => {
                all = (0..probs.rows()).collect();
                &all
            }
        };
        for &k in rows {
            let y = truth_row(&truth[k], c);
            for (i, &p) in probs.row(k).iter().enumerate() {
                match (y[i], predicted(p, threshold)) {
                    (true, true) => counts.tp[i] += 1,
                    (false, true) => counts.fp[i] += 1,
                    (true, false) => counts.fn_[i] += 1,
                    (false, false) => {}
                }
            }
        }
        Ok(counts)
    }

    pub fn pooled(&self, classes: &[usize]) -> (usize, usize, usize) {
        classes.iter().fold((0, 0, 0), |(tp, fp, fn_), &i| {
            (tp + self.tp[i], fp + self.fp[i], fn_ + self.fn_[i])
        })
    }

    pub fn class_f1(&self, i: usize) -> f64 {
        f1(self.tp[i], self.fp[i], self.fn_[i])
    }

    pub fn scores(&self) -> F1Scores {
        let per_class: Vec<f64> = (0..self.num_classes()).map(|i| self.class_f1(i)).collect();
        let all: Vec<usize> = (0..self.num_classes()).collect();
        let subset = self.subset(&all);
        F1Scores {
            per_class,
            micro: subset.micro,
            macro_: subset.macro_,
        }
    }

    /// Micro F1 pooled over `classes`, macro F1 averaged over them.
    pub fn subset(&self, classes: &[usize]) -> SubsetScores {
        if classes.is_empty() {
            return SubsetScores::default();
        }
        let (tp, fp, fn_) = self.pooled(classes);
        let macro_ = classes.iter().map(|&i| self.class_f1(i)).sum::<f64>() / classes.len() as f64;
        SubsetScores {
            micro: f1(tp, fp, fn_),
            macro_,
            classes: classes.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Scores {
    pub per_class: Vec<f64>,
    pub micro: f64,
    #[serde(rename = "macro")]
    pub macro_: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SubsetScores {
    pub micro: f64,
    #[serde(rename = "macro")]
    pub macro_: f64,
    pub classes: usize,
}

/// Micro/macro F1 for each frequency bucket.
pub fn bucket_scores(counts: &ConfusionCounts, buckets: &BucketAssignment) -> Vec<(Bucket, SubsetScores)> {
    Bucket::ALL
        .iter()
        .map(|&b| (b, counts.subset(&buckets.classes(b))))
        .collect()
}

/// Grid point with the best micro F1; ties go to the lower threshold.
pub fn select_threshold<F: Real>(probs: &Matrix<F>, truth: &[Vec<usize>], grid: &[f64]) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::Empty("threshold grid"));
    }
    let mut best: Option<(f64, f64)> = None;
    for &t in grid {
        let micro = ConfusionCounts::compute(probs, truth, t, None)?.scores().micro;
        best = match best {
            Some((bt, bm)) if bm > micro || (bm == micro && bt <= t) => Some((bt, bm)),
            _ => Some((t, micro)),
        };
    }
    Ok(best.expect("grid is non-empty"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupMode {
    SingleVsMulti,
    Quantiles,
}

impl std::str::FromStr for GroupMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "single-vs-multi" => Ok(GroupMode::SingleVsMulti),
            "quantiles" | "3-quantiles" => Ok(GroupMode::Quantiles),
            other => Err(Error::Config(format!(
                "unknown grouping {other:?}; expected single-vs-multi or quantiles"
            ))),
        }
    }
}

impl GroupMode {
    pub fn key(self) -> &'static str {
        match self {
            GroupMode::SingleVsMulti => "single-vs-multi",
            GroupMode::Quantiles => "quantiles",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceGroup {
    pub name: String,
    pub instances: Vec<usize>,
}

/// Partitions instances by how many labels they carry.
pub fn group_by_label_count(label_sets: &[Vec<usize>], mode: GroupMode) -> Vec<InstanceGroup> {
    let sizes: Vec<usize> = label_sets.iter().map(Vec::len).collect();
    let pick = |pred: &dyn Fn(usize) -> bool| -> Vec<usize> { (0..sizes.len()).filter(|&k| pred(sizes[k])).collect() };
    match mode {
        GroupMode::SingleVsMulti => vec![
            InstanceGroup {
                name: "single-label".into(),
                instances: pick(&|n| n <= 1),
            },
            InstanceGroup {
                name: "multi-label".into(),
                instances: pick(&|n| n > 1),
            },
        ],
        GroupMode::Quantiles => {
            if sizes.is_empty() {
                return Vec::new();
            }
            let (low_max, high_min) = tercile_cuts(sizes.clone());
            let middle = if low_max + 1 <= high_min - 1 {
                format!("{}-{} labels", low_max + 1, high_min - 1)
            } else {
                "(empty)".to_owned()
            };
            vec![
                InstanceGroup {
                    name: format!("<={low_max} labels"),
                    instances: pick(&|n| n <= low_max),
                },
                InstanceGroup {
                    name: middle,
                    instances: pick(&|n| n > low_max && n < high_min),
                },
                InstanceGroup {
                    name: format!(">={high_min} labels"),
                    instances: pick(&|n| n >= high_min),
                },
            ]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusedPair {
    /// True label that was not predicted.
    pub missed: usize,
    /// Label predicted without being true.
    pub predicted: usize,
    pub count: usize,
}

/// Within each instance, pairs every missed true label with every false
/// positive. Ranked by count, then lexicographically.
pub fn confused_pairs<F: Real>(
    probs: &Matrix<F>,
    truth: &[Vec<usize>],
    threshold: f64,
    top_k: usize,
) -> Result<Vec<ConfusedPair>> {
    check_shapes(probs, truth)?;
    let c = probs.cols();
    let mut tally: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (k, labels) in truth.iter().enumerate() {
        let y = truth_row(labels, c);
        let row = probs.row(k);
        let missed: Vec<usize> = (0..c).filter(|&i| y[i] && !predicted(row[i], threshold)).collect();
        let false_pos: Vec<usize> = (0..c).filter(|&j| !y[j] && predicted(row[j], threshold)).collect();
        for &i in &missed {
            for &j in &false_pos {
                *tally.entry((i, j)).or_insert(0) += 1;
            }
        }
    }
    let mut pairs: Vec<ConfusedPair> = tally
        .into_iter()
        .map(|((missed, predicted), count)| ConfusedPair {
            missed,
            predicted,
            count,
        })
        .collect();
    pairs.sort_by(|a, b| b.count.cmp(&a.count).then((a.missed, a.predicted).cmp(&(b.missed, b.predicted))));
    pairs.truncate(top_k);
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedScores {
    pub name: String,
    pub instances: usize,
    #[serde(flatten)]
    pub scores: SubsetScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPair {
    pub missed: String,
    pub predicted: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub total: SubsetScores,
    pub buckets: Vec<NamedScores>,
    pub label_count_groups: Vec<NamedScores>,
    pub per_class_f1: Vec<f64>,
    pub confused_pairs: Vec<NamedPair>,
}

pub struct EvalInputs<'a, F> {
    pub probs: &'a Matrix<F>,
    pub truth: &'a [Vec<usize>],
    pub threshold: f64,
    pub buckets: &'a BucketAssignment,
    pub group_mode: GroupMode,
    pub label_names: &'a [String],
    pub top_pairs: usize,
}

impl EvalReport {
    pub fn evaluate<F: Real>(inputs: EvalInputs<'_, F>) -> Result<Self> {
        let EvalInputs {
            probs,
            truth,
            threshold,
            buckets,
            group_mode,
            label_names,
            top_pairs,
        } = inputs;
        let counts = ConfusionCounts::compute(probs, truth, threshold, None)?;
        let all: Vec<usize> = (0..counts.num_classes()).collect();
        let bucket_rows = bucket_scores(&counts, buckets)
            .into_iter()
            .map(|(b, scores)| NamedScores {
                name: b.as_str().to_owned(),
                instances: truth
                    .iter()
                    .filter(|labels| labels.iter().any(|&i| buckets.buckets[i] == b))
                    .count(),
                scores,
            })
            .collect();
        let mut groups = Vec::new();
        for g in group_by_label_count(truth, group_mode) {
            let gc = ConfusionCounts::compute(probs, truth, threshold, Some(&g.instances))?;
            groups.push(NamedScores {
                name: g.name,
                instances: g.instances.len(),
                scores: gc.subset(&all),
            });
        }
        let name = |i: usize| label_names.get(i).cloned().unwrap_or_else(|| i.to_string());
        let pairs = confused_pairs(probs, truth, threshold, top_pairs)?
            .into_iter()
            .map(|p| NamedPair {
                missed: name(p.missed),
                predicted: name(p.predicted),
                count: p.count,
            })
            .collect();
        Ok(Self {
            threshold,
            total: counts.subset(&all),
            buckets: bucket_rows,
            label_count_groups: groups,
            per_class_f1: counts.scores().per_class,
            confused_pairs: pairs,
        })
    }

    pub fn bucket(&self, b: Bucket) -> Option<&SubsetScores> {
        self.buckets.iter().find(|r| r.name == b.as_str()).map(|r| &r.scores)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn pct(scores: &SubsetScores) -> String {
    format!("{:.2}/{:.2}", 100.0 * scores.micro, 100.0 * scores.macro_)
}

/// One table row per named report: Total, Head, Medium, Tail as miF/maF
/// percentages, followed by the label-count groups.
pub fn render_table(rows: &[(String, &EvalReport)]) -> String {
    let mut header = vec![
        "Loss".to_owned(),
        "Total miF/maF".to_owned(),
        "Head miF/maF".to_owned(),
        "Medium miF/maF".to_owned(),
        "Tail miF/maF".to_owned(),
    ];
    if let Some((_, first)) = rows.first() {
        for g in &first.label_count_groups {
            header.push(format!("{} miF/maF", g.name));
        }
    }
    let mut lines: Vec<Vec<String>> = vec![header];
    for (name, r) in rows {
        let mut line = vec![name.clone(), pct(&r.total)];
        for b in Bucket::ALL {
            line.push(r.bucket(b).map(pct).unwrap_or_else(|| "-".into()));
        }
        for g in &r.label_count_groups {
            line.push(pct(&g.scores));
        }
        lines.push(line);
    }
    let cols = lines.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|j| lines.iter().filter_map(|l| l.get(j)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (n, line) in lines.iter().enumerate() {
        let cells: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(j, s)| format!("{s:<w$}", w = widths[j]))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        if n == 0 {
            let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * cols.saturating_sub(1)));
        }
    }
    out
}
