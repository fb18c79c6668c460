//! One-vs-rest linear SVMs trained with Pegasos-style stochastic
//! subgradient descent on the L2-regularized hinge loss. The bias is an
//! extra, regularized weight on a constant feature.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mnb::check_dim;
use crate::category::{EmotionCategory, ProbDist, N_CLASSES};
use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::seed::{derive, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    lambda: f64,
    epochs: u32,
    weights: [Vec<f64>; N_CLASSES],
    bias: [f64; N_CLASSES],
}

/// `w = scale * v`, so the shrink step of each iteration is O(1).
struct ScaledWeights {
    v: Vec<f64>,
    vb: f64,
    scale: f64,
}

impl ScaledWeights {
    fn margin(&self, x: &SparseVector) -> f64 {
        self.scale * (x.dot_dense(&self.v) + self.vb)
    }

    fn shrink(&mut self, factor: f64) {
        if factor == 0.0 {
            self.v.iter_mut().for_each(|w| *w = 0.0);
            self.vb = 0.0;
            self.scale = 1.0;
            return;
        }
        self.scale *= factor;
        if self.scale < 1e-9 {
            self.v.iter_mut().for_each(|w| *w *= self.scale);
            self.vb *= self.scale;
            self.scale = 1.0;
        }
    }

    fn add(&mut self, x: &SparseVector, step: f64) {
        let s = step / self.scale;
        for &(j, w) in x.entries() {
            self.v[j as usize] += s * w;
        }
        self.vb += s;
    }

    fn into_dense(self) -> (Vec<f64>, f64) {
        let s = self.scale;
        (self.v.into_iter().map(|w| w * s).collect(), self.vb * s)
    }
}

fn train_binary(
    x: &[SparseVector],
    positive: &[bool],
    n_features: usize,
    lambda: f64,
    epochs: u32,
    seed: u64,
) -> (Vec<f64>, f64) {
    let mut w = ScaledWeights {
        v: vec![0.0; n_features],
        vb: 0.0,
        scale: 1.0,
    };
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = rng(seed);
    let mut t: u64 = 0;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let y = if positive[i] { 1.0 } else { -1.0 };
            let violated = y * w.margin(&x[i]) < 1.0;
            w.shrink(1.0 - eta * lambda);
            if violated {
                w.add(&x[i], eta * y);
            }
        }
    }
    w.into_dense()
}

impl LinearSvm {
    pub fn fit(
        x: &[SparseVector],
        y: &[EmotionCategory],
        n_features: usize,
        lambda: f64,
        epochs: u32,
        seed: u64,
    ) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "{} samples but {} labels",
                x.len(),
                y.len()
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
        }
        if epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        for xi in x {
            check_dim(xi, n_features)?;
        }
        let mut present = [false; N_CLASSES];
        y.iter().for_each(|c| present[c.index()] = true);
        if present.iter().filter(|&&p| p).count() < 2 {
            return Err(Error::SingleClass);
        }

        let per_class: Vec<(Vec<f64>, f64)> = EmotionCategory::ALL
            .par_iter()
            .map(|&c| {
                let positive: Vec<bool> = y.iter().map(|&yi| yi == c).collect();
                train_binary(x, &positive, n_features, lambda, epochs, derive(seed, c.index() as u64))
            })
            .collect();
        let mut weights: [Vec<f64>; N_CLASSES] = Default::default();
        let mut bias = [0.0; N_CLASSES];
        for (c, (w, b)) in per_class.into_iter().enumerate() {
            weights[c] = w;
            bias[c] = b;
        }
        Ok(LinearSvm {
            lambda,
            epochs,
            weights,
            bias,
        })
    }

    pub fn n_features(&self) -> usize {
        self.weights[0].len()
    }

    pub fn weights(&self, c: EmotionCategory) -> (&[f64], f64) {
        (&self.weights[c.index()], self.bias[c.index()])
    }

    pub fn margins(&self, x: &SparseVector) -> Result<[f64; N_CLASSES]> {
        check_dim(x, self.n_features())?;
        Ok(std::array::from_fn(|c| x.dot_dense(&self.weights[c]) + self.bias[c]))
    }

    /// Softmax over the four one-vs-rest margins.
    pub fn predict_proba(&self, x: &SparseVector) -> Result<ProbDist> {
        Ok(softmax(self.margins(x)?))
    }

    /// Mean over classes of `lambda/2 |w|^2 + mean hinge`, the quantity
    /// each binary problem minimizes.
    pub fn objective(&self, x: &[SparseVector], y: &[EmotionCategory]) -> f64 {
        objective_of(&self.weights, &self.bias, self.lambda, x, y)
    }

    /// The same objective at all-zero weights (equal to 1).
    pub fn zero_objective(&self, x: &[SparseVector], y: &[EmotionCategory]) -> f64 {
        let zeros: [Vec<f64>; N_CLASSES] = std::array::from_fn(|_| vec![0.0; self.n_features()]);
        objective_of(&zeros, &[0.0; N_CLASSES], self.lambda, x, y)
    }
}

fn objective_of(
    weights: &[Vec<f64>; N_CLASSES],
    bias: &[f64; N_CLASSES],
    lambda: f64,
    x: &[SparseVector],
    y: &[EmotionCategory],
) -> f64 {
    let mut total = 0.0;
    for c in 0..N_CLASSES {
        let reg = weights[c].iter().map(|w| w * w).sum::<f64>() + bias[c] * bias[c];
        let hinge: f64 = x
            .iter()
            .zip(y)
            .map(|(xi, yi)| {
                let s = if yi.index() == c { 1.0 } else { -1.0 };
                (1.0 - s * (xi.dot_dense(&weights[c]) + bias[c])).max(0.0)
            })
            .sum::<f64>()
            / x.len() as f64;
        total += 0.5 * lambda * reg + hinge;
    }
    total / N_CLASSES as f64
}

pub fn softmax(m: [f64; N_CLASSES]) -> ProbDist {
    let max = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ProbDist::from_weights(m.map(|v| (v - max).exp()))
}
