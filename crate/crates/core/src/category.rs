//! The closed four-class emotion label set and the probability
//! distribution type exchanged between classifiers and the ensemble.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of emotion classes.
pub const N_CLASSES: usize = 4;

/// One of the four emotions a text can be labeled with.
///
/// The declaration order is the total order used for deterministic
/// iteration and for breaking ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionCategory {
    Anger,
    Disgust,
    Joy,
    Sadness,
}

impl EmotionCategory {
    pub const ALL: [EmotionCategory; N_CLASSES] = [
        EmotionCategory::Anger,
        EmotionCategory::Disgust,
        EmotionCategory::Joy,
        EmotionCategory::Sadness,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmotionCategory::Anger => "anger",
            EmotionCategory::Disgust => "disgust",
            EmotionCategory::Joy => "joy",
            EmotionCategory::Sadness => "sadness",
        }
    }
}

impl fmt::Display for EmotionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmotionCategory {
    type Err = Error;

    /// Case-insensitive; anything outside the four names is rejected.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        EmotionCategory::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

/// Index of the largest value; ties go to the lowest index, i.e. the
/// earliest category in [`EmotionCategory::ALL`].
pub fn argmax(values: &[f64; N_CLASSES]) -> EmotionCategory {
    let mut best = 0;
    for i in 1..N_CLASSES {
        if values[i] > values[best] {
            best = i;
        }
    }
    EmotionCategory::ALL[best]
}

/// Probability distribution over the four categories, indexed by
/// [`EmotionCategory::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbDist(pub [f64; N_CLASSES]);

impl ProbDist {
    pub const TOLERANCE: f64 = 1e-9;

    /// Validates non-negativity and unit sum.
    pub fn new(p: [f64; N_CLASSES]) -> Result<Self> {
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "probabilities must be finite and non-negative: {p:?}"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > Self::TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(ProbDist(p))
    }

    /// Rescales non-negative weights to sum to one. All-zero input gives
    /// the uniform distribution.
    pub fn from_weights(w: [f64; N_CLASSES]) -> Self {
        let sum: f64 = w.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            ProbDist(w.map(|v| v / sum))
        } else {
            ProbDist([1.0 / N_CLASSES as f64; N_CLASSES])
        }
    }

    pub fn one_hot(c: EmotionCategory) -> Self {
        let mut p = [0.0; N_CLASSES];
        p[c.index()] = 1.0;
        ProbDist(p)
    }

    #[inline]
    pub fn get(&self, c: EmotionCategory) -> f64 {
        self.0[c.index()]
    }

    pub fn as_array(&self) -> &[f64; N_CLASSES] {
        &self.0
    }

    pub fn argmax(&self) -> EmotionCategory {
        argmax(&self.0)
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|v| v.is_finite() && *v >= 0.0)
            && (self.0.iter().sum::<f64>() - 1.0).abs() <= Self::TOLERANCE
    }
}
