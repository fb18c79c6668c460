//! Multiclass text classifiers producing a [`ProbDist`] per document.

mod mnb;
mod rf;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use mnb::MultinomialNb;
pub use rf::{DecisionTree, ForestFit, MaxFeatures, Node, RandomForest};
pub use svm::{softmax, LinearSvm};

use crate::category::{EmotionCategory, ProbDist};
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Svm,
    Mnb,
    Rf,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Svm, ClassifierKind::Mnb, ClassifierKind::Rf];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::Mnb => "mnb",
            ClassifierKind::Rf => "rf",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str().to_uppercase())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "svm" => Ok(ClassifierKind::Svm),
            "mnb" | "nb" => Ok(ClassifierKind::Mnb),
            "rf" => Ok(ClassifierKind::Rf),
            other => Err(Error::InvalidArgument(format!("unknown classifier `{other}`"))),
        }
    }
}

/// Hyperparameters for all three learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub mnb_alpha: f64,
    pub svm_lambda: f64,
    pub svm_epochs: u32,
    pub rf_trees: usize,
    pub rf_max_features: MaxFeatures,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            mnb_alpha: 1.0,
            svm_lambda: 1e-4,
            svm_epochs: 20,
            rf_trees: 100,
            rf_max_features: MaxFeatures::Sqrt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelParams {
    Mnb(MultinomialNb),
    Svm(LinearSvm),
    Rf(RandomForest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub n_features: usize,
    pub seed: u64,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn predict_proba(&self, x: &SparseVector) -> Result<ProbDist> {
        if x.dim() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: x.dim(),
            });
        }
        match &self.params {
            ModelParams::Mnb(m) => m.predict_proba(x),
            ModelParams::Svm(m) => m.predict_proba(x),
            ModelParams::Rf(m) => m.predict_proba(x),
        }
    }

    /// Argmax of [`predict_proba`](Self::predict_proba), ties to the
    /// earliest category.
    pub fn predict(&self, x: &SparseVector) -> Result<EmotionCategory> {
        self.predict_proba(x).map(|p| p.argmax())
    }
}

pub fn train_mnb(
    x: &[SparseVector],
    y: &[EmotionCategory],
    n_features: usize,
    alpha: f64,
) -> Result<TrainedModel> {
    Ok(TrainedModel {
        kind: ClassifierKind::Mnb,
        n_features,
        seed: 0,
        params: ModelParams::Mnb(MultinomialNb::fit(x, y, n_features, alpha)?),
    })
}

pub fn train_svm(
    x: &[SparseVector],
    y: &[EmotionCategory],
    n_features: usize,
    lambda: f64,
    epochs: u32,
    seed: u64,
) -> Result<TrainedModel> {
    Ok(TrainedModel {
        kind: ClassifierKind::Svm,
        n_features,
        seed,
        params: ModelParams::Svm(LinearSvm::fit(x, y, n_features, lambda, epochs, seed)?),
    })
}

pub fn train_rf(
    x: &[SparseVector],
    y: &[EmotionCategory],
    n_features: usize,
    n_trees: usize,
    max_features: MaxFeatures,
    seed: u64,
) -> Result<TrainedModel> {
    Ok(TrainedModel {
        kind: ClassifierKind::Rf,
        n_features,
        seed,
        params: ModelParams::Rf(RandomForest::fit(x, y, n_features, n_trees, max_features, seed)?),
    })
}

pub fn train(
    kind: ClassifierKind,
    x: &[SparseVector],
    y: &[EmotionCategory],
    n_features: usize,
    params: &ClassifierParams,
    seed: u64,
) -> Result<TrainedModel> {
    match kind {
        ClassifierKind::Mnb => train_mnb(x, y, n_features, params.mnb_alpha),
        ClassifierKind::Svm => train_svm(x, y, n_features, params.svm_lambda, params.svm_epochs, seed),
        ClassifierKind::Rf => train_rf(x, y, n_features, params.rf_trees, params.rf_max_features, seed),
    }
}

pub fn predict_proba(model: &TrainedModel, x: &SparseVector) -> Result<ProbDist> {
    model.predict_proba(x)
}

pub fn predict(model: &TrainedModel, x: &SparseVector) -> Result<EmotionCategory> {
    model.predict(x)
}
