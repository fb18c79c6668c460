//! Reference evaluators and corpus helpers shared by the integration tests.
#![allow(dead_code)]

use emodist::category::{EmotionCategory, ProbDist, N_CLASSES};
use emodist::classifiers::{ClassifierKind, ClassifierParams};
use emodist::ensemble::CombineRule;
use emodist::labeler::Document;
use emodist::preprocess::PreprocessConfig;
use emodist::seed::Rng;
use emodist::train_artifact;
use rand::Rng as _;

/// Posterior of a multinomial naive Bayes model, computed densely and
/// directly from the training rows with no logarithms.
pub fn bayes_posterior(
    x: &[Vec<f64>],
    y: &[EmotionCategory],
    alpha: f64,
    query: &[f64],
) -> [f64; N_CLASSES] {
    let v = query.len();
    let mut joint = [0.0; N_CLASSES];
    for c in EmotionCategory::ALL {
        let rows: Vec<&Vec<f64>> = x.iter().zip(y).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
        if rows.is_empty() {
            continue;
        }
        let counts: Vec<f64> = (0..v).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
        let total: f64 = counts.iter().sum();
        let mut p = rows.len() as f64 / x.len() as f64;
        for j in 0..v {
            p *= ((counts[j] + alpha) / (total + alpha * v as f64)).powf(query[j]);
        }
        joint[c.index()] = p;
    }
    let z: f64 = joint.iter().sum();
    joint.map(|p| p / z)
}

/// Scores and label of a combining rule, evaluated left to right with the
/// first maximum winning.
pub fn brute_combine(dists: &[ProbDist], rule: CombineRule) -> ([f64; N_CLASSES], EmotionCategory) {
    let mut scores = [0.0; N_CLASSES];
    for (c, score) in scores.iter_mut().enumerate() {
        let col: Vec<f64> = dists.iter().map(|d| d.0[c]).collect();
        *score = match rule {
            CombineRule::Average => {
                let mut s = 0.0;
                for p in &col {
                    s += p;
                }
                s / col.len() as f64
            }
            CombineRule::Product => {
                let mut s = 1.0;
                for p in &col {
                    s *= p;
                }
                s
            }
            CombineRule::Maximum => {
                let mut s = col[0];
                for &p in &col[1..] {
                    if p > s {
                        s = p;
                    }
                }
                s
            }
            CombineRule::Minimum => {
                let mut s = col[0];
                for &p in &col[1..] {
                    if p < s {
                        s = p;
                    }
                }
                s
            }
        };
    }
    let mut best = 0;
    for c in 1..N_CLASSES {
        if scores[c] > scores[best] {
            best = c;
        }
    }
    (scores, EmotionCategory::ALL[best])
}

/// A distribution whose entries are multiples of 1/64, so sums and
/// products of a few of them are exact in any order. Ties are common.
pub fn dyadic_dist(rng: &mut Rng) -> ProbDist {
    let mut cuts = [rng.random_range(0..=64u32), rng.random_range(0..=64), rng.random_range(0..=64)];
    cuts.sort_unstable();
    let w = [cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], 64 - cuts[2]];
    ProbDist::new(w.map(|v| f64::from(v) / 64.0)).expect("sums to one")
}

/// Trains all three classifiers on `train` and returns their accuracies
/// on `test`, in [`ClassifierKind::ALL`] order.
pub fn accuracies(
    train: &[Document],
    test: &[Document],
    config: &PreprocessConfig,
    params: &ClassifierParams,
    seed: u64,
) -> [f64; 3] {
    let art = train_artifact(train, config, &ClassifierKind::ALL, params, 1, seed).expect("training");
    let mut correct = [0usize; 3];
    for d in test {
        let gold = d.label().expect("test documents are labeled");
        for (k, p) in art.predict_all(&d.raw_text).expect("prediction").iter().enumerate() {
            if p.argmax() == gold {
                correct[k] += 1;
            }
        }
    }
    correct.map(|c| c as f64 / test.len() as f64)
}

pub fn mean3(rows: &[[f64; 3]]) -> [f64; 3] {
    let n = rows.len() as f64;
    std::array::from_fn(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n)
}
