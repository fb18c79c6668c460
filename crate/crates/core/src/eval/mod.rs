//! Stratified splitting, k-fold plans and classification metrics.

mod experiment;

pub use experiment::{
    run_experiment, ExperimentSpec, FoldInfo, MethodReport, Report, SourceReport, SpecPaths,
    Summary, TrainingSource, MACHINE_READABLE_MARKER,
};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::category::{EmotionCategory, N_CLASSES};
use crate::error::{Error, Result};
use crate::labeler::Document;
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub per_class: [ClassMetrics; N_CLASSES],
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub accuracy: f64,
    /// `confusion[gold][predicted]`
    pub confusion: [[u64; N_CLASSES]; N_CLASSES],
}

impl Metrics {
    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn summary(&self) -> Summary {
        Summary {
            accuracy: self.accuracy,
            precision: self.weighted_precision,
            recall: self.weighted_recall,
            f1: self.weighted_f1,
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Per-class and gold-frequency-weighted precision, recall and F1.
pub fn compute_metrics(gold: &[EmotionCategory], predicted: &[EmotionCategory]) -> Result<Metrics> {
    if gold.len() != predicted.len() {
        return Err(Error::InvalidArgument(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::InvalidArgument("no predictions to evaluate".into()));
    }
    let mut confusion = [[0u64; N_CLASSES]; N_CLASSES];
    for (g, p) in gold.iter().zip(predicted) {
        confusion[g.index()][p.index()] += 1;
    }
    let n = gold.len() as u64;
    let per_class: [ClassMetrics; N_CLASSES] = std::array::from_fn(|c| {
        let tp = confusion[c][c];
        let support: u64 = confusion[c].iter().sum();
        let predicted_c: u64 = (0..N_CLASSES).map(|g| confusion[g][c]).sum();
        let precision = ratio(tp, predicted_c);
        let recall = ratio(tp, support);
        ClassMetrics {
            precision,
            recall,
            f1: harmonic(precision, recall),
            support,
        }
    });
    let weighted = |f: fn(&ClassMetrics) -> f64| {
        per_class
            .iter()
            .map(|m| m.support as f64 / n as f64 * f(m))
            .sum::<f64>()
    };
    let trace: u64 = (0..N_CLASSES).map(|c| confusion[c][c]).sum();
    Ok(Metrics {
        weighted_precision: weighted(|m| m.precision),
        weighted_recall: weighted(|m| m.recall),
        weighted_f1: weighted(|m| m.f1),
        accuracy: ratio(trace, n),
        per_class,
        confusion,
    })
}

/// Member indices of each class, in category order.
fn by_class(labels: &[EmotionCategory]) -> [Vec<usize>; N_CLASSES] {
    let mut groups: [Vec<usize>; N_CLASSES] = Default::default();
    for (i, l) in labels.iter().enumerate() {
        groups[l.index()].push(i);
    }
    groups
}

/// Per class, `round(count * test_fraction)` members go to the test side.
/// Returns `(train, test)` index lists in ascending order.
pub fn stratified_split_indices(
    labels: &[EmotionCategory],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, mut members) in by_class(labels).into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let category = EmotionCategory::ALL[c];
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                category,
                count: members.len(),
                needed: 2,
            });
        }
        members.shuffle(&mut rng_for(seed, &format!("split/{category}")));
        let n_test = (members.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

fn gold_labels(docs: &[Document]) -> Result<Vec<EmotionCategory>> {
    docs.iter()
        .map(|d| {
            d.gold_label
                .ok_or_else(|| Error::InvalidArgument(format!("document `{}` has no gold label", d.id)))
        })
        .collect()
}

pub fn stratified_split(
    docs: &[Document],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<Document>, Vec<Document>)> {
    let labels = gold_labels(docs)?;
    let (train, test) = stratified_split_indices(&labels, test_fraction, seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| docs[i].clone()).collect();
    Ok((pick(&train), pick(&test)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Train/test index lists per fold; the test sets partition the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    /// A single fold from a stratified train/test split.
    pub fn fixed(labels: &[EmotionCategory], test_fraction: f64, seed: u64) -> Result<Self> {
        let (train, test) = stratified_split_indices(labels, test_fraction, seed)?;
        Ok(FoldPlan {
            folds: vec![Fold { train, test }],
        })
    }
}

/// Stratified k folds: each class is shuffled and dealt round-robin, the
/// dealing position carrying over between classes so fold sizes differ by
/// at most one.
pub fn make_folds_indices(labels: &[EmotionCategory], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {k}")));
    }
    let groups = by_class(labels);
    for (c, members) in groups.iter().enumerate() {
        if !members.is_empty() && members.len() < k {
            return Err(Error::ClassTooSmall {
                category: EmotionCategory::ALL[c],
                count: members.len(),
                needed: k,
            });
        }
    }
    if labels.is_empty() {
        return Err(Error::InvalidArgument("cannot fold an empty corpus".into()));
    }
    let mut assignment = vec![0usize; labels.len()];
    let mut offset = 0usize;
    for (c, mut members) in groups.into_iter().enumerate() {
        members.shuffle(&mut rng_for(seed, &format!("folds/{}", EmotionCategory::ALL[c])));
        for (j, i) in members.iter().enumerate() {
            assignment[*i] = (offset + j) % k;
        }
        offset += members.len();
    }
    let folds = (0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect();
    Ok(FoldPlan { folds })
}

pub fn make_folds(docs: &[Document], k: usize, seed: u64) -> Result<FoldPlan> {
    make_folds_indices(&gold_labels(docs)?, k, seed)
}
