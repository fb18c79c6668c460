use serde::{Deserialize, Serialize};

use crate::category::{EmotionCategory, ProbDist, N_CLASSES};
use crate::error::{Error, Result};
use crate::features::SparseVector;

/// Multinomial naive Bayes over fractional (TF-IDF) counts with additive
/// smoothing. Only sufficient statistics are stored; likelihoods are
/// derived on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialNb {
    alpha: f64,
    class_docs: [u64; N_CLASSES],
    /// Per class, summed feature weights over that class's documents.
    feature_sums: [Vec<f64>; N_CLASSES],
    class_totals: [f64; N_CLASSES],
}

impl MultinomialNb {
    pub fn fit(x: &[SparseVector], y: &[EmotionCategory], n_features: usize, alpha: f64) -> Result<Self> {
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
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        let mut class_docs = [0u64; N_CLASSES];
        let mut feature_sums: [Vec<f64>; N_CLASSES] = std::array::from_fn(|_| vec![0.0; n_features]);
        for (xi, &c) in x.iter().zip(y) {
            check_dim(xi, n_features)?;
            class_docs[c.index()] += 1;
            let row = &mut feature_sums[c.index()];
            for &(j, w) in xi.entries() {
                row[j as usize] += w;
            }
        }
        let class_totals = std::array::from_fn(|c| feature_sums[c].iter().sum());
        Ok(MultinomialNb {
            alpha,
            class_docs,
            feature_sums,
            class_totals,
        })
    }

    pub fn n_features(&self) -> usize {
        self.feature_sums[0].len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Class frequencies in the training set.
    pub fn priors(&self) -> [f64; N_CLASSES] {
        let n: u64 = self.class_docs.iter().sum();
        self.class_docs.map(|c| c as f64 / n as f64)
    }

    /// `ln P(term j | class c)`.
    pub fn log_likelihood(&self, c: EmotionCategory, j: usize) -> f64 {
        let c = c.index();
        let v = self.n_features() as f64;
        ((self.feature_sums[c][j] + self.alpha) / (self.class_totals[c] + self.alpha * v)).ln()
    }

    pub fn log_likelihood_row(&self, c: EmotionCategory) -> Vec<f64> {
        (0..self.n_features()).map(|j| self.log_likelihood(c, j)).collect()
    }

    pub fn predict_proba(&self, x: &SparseVector) -> Result<ProbDist> {
        check_dim(x, self.n_features())?;
        let priors = self.priors();
        let mut log_post = [f64::NEG_INFINITY; N_CLASSES];
        for c in EmotionCategory::ALL {
            if self.class_docs[c.index()] == 0 {
                continue;
            }
            let mut lp = priors[c.index()].ln();
            for &(j, w) in x.entries() {
                lp += w * self.log_likelihood(c, j as usize);
            }
            log_post[c.index()] = lp;
        }
        let max = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let unnorm = log_post.map(|lp| if lp.is_finite() { (lp - max).exp() } else { 0.0 });
        Ok(ProbDist::from_weights(unnorm))
    }
}

pub(super) fn check_dim(x: &SparseVector, n_features: usize) -> Result<()> {
    if x.dim() != n_features {
        return Err(Error::DimensionMismatch {
            expected: n_features,
            found: x.dim(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use EmotionCategory::*;

    fn sv(dim: usize, pairs: &[(u32, f64)]) -> SparseVector {
        SparseVector::from_pairs(dim, pairs.to_vec()).unwrap()
    }

    #[test]
    fn two_doc_likelihood_by_hand() {
        let x = vec![sv(2, &[(0, 1.0)]), sv(2, &[(1, 1.0)])];
        let m = MultinomialNb::fit(&x, &[Anger, Joy], 2, 1.0).unwrap();
        // (1 + 1) / (1 + 2)
        assert!((m.log_likelihood(Anger, 0).exp() - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.log_likelihood(Anger, 1).exp() - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.log_likelihood(Joy, 1).exp() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_class_is_certain() {
        let x = vec![sv(3, &[(0, 1.0)]), sv(3, &[(2, 0.5)])];
        let m = MultinomialNb::fit(&x, &[Sadness, Sadness], 3, 1.0).unwrap();
        for probe in [sv(3, &[]), sv(3, &[(1, 1.0)]), sv(3, &[(0, 0.3), (2, 0.9)])] {
            assert_eq!(m.predict_proba(&probe).unwrap(), ProbDist::one_hot(Sadness));
        }
    }

    #[test]
    fn empty_vector_returns_priors() {
        let x = vec![sv(2, &[(0, 1.0)]), sv(2, &[(1, 1.0)]), sv(2, &[(1, 1.0)]), sv(2, &[(0, 1.0)])];
        let m = MultinomialNb::fit(&x, &[Anger, Joy, Joy, Disgust], 2, 1.0).unwrap();
        let p = m.predict_proba(&sv(2, &[])).unwrap();
        assert_eq!(p.0, [0.25, 0.25, 0.5, 0.0]);
    }

    #[test]
    fn likelihood_rows_sum_to_one() {
        let x = vec![sv(4, &[(0, 0.2), (3, 0.7)]), sv(4, &[(1, 1.0)]), sv(4, &[(2, 0.4)])];
        let m = MultinomialNb::fit(&x, &[Anger, Joy, Joy], 4, 0.5).unwrap();
        for c in EmotionCategory::ALL {
            let s: f64 = m.log_likelihood_row(c).iter().map(|l| l.exp()).sum();
            assert!((s - 1.0).abs() < 1e-6, "{c}: {s}");
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(MultinomialNb::fit(&[], &[], 2, 1.0), Err(Error::EmptyTrainingSet)));
        let x = vec![sv(2, &[(0, 1.0)])];
        assert!(MultinomialNb::fit(&x, &[Anger], 2, 0.0).is_err());
        let m = MultinomialNb::fit(&x, &[Anger], 2, 1.0).unwrap();
        assert!(matches!(
            m.predict_proba(&sv(3, &[])),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }
}
