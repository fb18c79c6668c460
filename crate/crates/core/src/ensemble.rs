//! Fixed combining rules over per-classifier probability distributions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::category::{argmax, EmotionCategory, ProbDist, N_CLASSES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineRule {
    Average,
    Product,
    Maximum,
    Minimum,
}

impl CombineRule {
    pub const ALL: [CombineRule; 4] = [
        CombineRule::Average,
        CombineRule::Product,
        CombineRule::Maximum,
        CombineRule::Minimum,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CombineRule::Average => "average",
            CombineRule::Product => "product",
            CombineRule::Maximum => "maximum",
            CombineRule::Minimum => "minimum",
        }
    }
}

impl fmt::Display for CombineRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CombineRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "average" | "avg" | "mean" => Ok(CombineRule::Average),
            "product" | "prod" => Ok(CombineRule::Product),
            "maximum" | "max" => Ok(CombineRule::Maximum),
            "minimum" | "min" => Ok(CombineRule::Minimum),
            other => Err(Error::InvalidArgument(format!("unknown combine rule `{other}`"))),
        }
    }
}

/// Per-class combined scores (not renormalized) and the winning label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combined {
    pub scores: [f64; N_CLASSES],
    pub label: EmotionCategory,
}

/// Combines the distributions with `rule` and takes the argmax, ties to
/// the earliest category.
///
/// Each class's values are reduced in sorted order so the result does not
/// depend on the order of `dists`. The product falls back to comparing
/// log-sums when a class product underflows.
pub fn combine(dists: &[ProbDist], rule: CombineRule) -> Result<Combined> {
    if dists.is_empty() {
        return Err(Error::InvalidArgument("cannot combine an empty list of distributions".into()));
    }
    let column = |c: usize| {
        let mut v: Vec<f64> = dists.iter().map(|d| d.0[c]).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let n = dists.len() as f64;
    let scores: [f64; N_CLASSES] = std::array::from_fn(|c| {
        let v = column(c);
        match rule {
            CombineRule::Average => v.iter().sum::<f64>() / n,
            CombineRule::Product => v.iter().product(),
            CombineRule::Maximum => v[v.len() - 1],
            CombineRule::Minimum => v[0],
        }
    });
    let label = if rule == CombineRule::Product && underflowed(&scores, dists) {
        let logs: [f64; N_CLASSES] = std::array::from_fn(|c| {
            let v = column(c);
            if v[0] == 0.0 {
                f64::NEG_INFINITY
            } else {
                v.iter().map(|p| p.ln()).sum()
            }
        });
        argmax(&logs)
    } else {
        argmax(&scores)
    };
    Ok(Combined { scores, label })
}

/// True when some class has only positive inputs but a product too small
/// to compare reliably.
fn underflowed(scores: &[f64; N_CLASSES], dists: &[ProbDist]) -> bool {
    (0..N_CLASSES).any(|c| {
        scores[c] < f64::MIN_POSITIVE && dists.iter().all(|d| d.0[c] > 0.0)
    })
}

/// Runs every rule in [`CombineRule::ALL`] order.
pub fn combine_all(dists: &[ProbDist]) -> Result<Vec<(CombineRule, Combined)>> {
    CombineRule::ALL
        .into_iter()
        .map(|r| combine(dists, r).map(|c| (r, c)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use EmotionCategory::*;

    fn pd(p: [f64; 4]) -> ProbDist {
        ProbDist::new(p).unwrap()
    }

    #[test]
    fn worked_three_classifier_example() {
        let d = [
            pd([0.9, 0.05, 0.03, 0.02]),
            pd([0.1, 0.45, 0.25, 0.2]),
            pd([0.1, 0.5, 0.25, 0.15]),
        ];
        let avg = combine(&d, CombineRule::Average).unwrap();
        assert_eq!(avg.label, Anger);
        assert!((avg.scores[0] - 0.366_666_666_666_666_6).abs() < 1e-12);
        assert!((avg.scores[1] - 0.333_333_333_333_333_3).abs() < 1e-12);

        let prod = combine(&d, CombineRule::Product).unwrap();
        assert_eq!(prod.label, Disgust);
        assert!((prod.scores[1] - 0.01125).abs() < 1e-15);
        assert!((prod.scores[0] - 0.009).abs() < 1e-15);

        let max = combine(&d, CombineRule::Maximum).unwrap();
        assert_eq!(max.label, Anger);
        assert_eq!(max.scores[0], 0.9);

        let min = combine(&d, CombineRule::Minimum).unwrap();
        assert_eq!(min.label, Anger);
        assert_eq!(min.scores[0], 0.1);
        assert_eq!(min.scores[1], 0.05);
    }

    #[test]
    fn single_distribution_reduces_to_its_argmax() {
        let d = [pd([0.1, 0.2, 0.6, 0.1])];
        for r in CombineRule::ALL {
            assert_eq!(combine(&d, r).unwrap().label, Joy);
        }
    }

    #[test]
    fn empty_list_is_an_error() {
        assert!(combine(&[], CombineRule::Average).is_err());
    }

    #[test]
    fn zero_probability_zeroes_product() {
        let d = [pd([0.5, 0.5, 0.0, 0.0]), pd([0.0, 0.2, 0.4, 0.4])];
        let p = combine(&d, CombineRule::Product).unwrap();
        assert_eq!(p.scores[0], 0.0);
        assert_eq!(p.label, Disgust);
    }

    #[test]
    fn product_underflow_still_ranks_by_log_sum() {
        let tiny = 1e-200;
        let a = pd([tiny, 2.0 * tiny, 1.0 - 3.0 * tiny, 0.0]);
        let b = pd([tiny, 2.0 * tiny, 0.0, 1.0 - 3.0 * tiny]);
        let p = combine(&[a, b], CombineRule::Product).unwrap();
        assert_eq!(p.scores[0], 0.0);
        assert_eq!(p.scores[1], 0.0);
        assert_eq!(p.label, Disgust);
    }

    #[test]
    fn rule_names_parse() {
        assert_eq!("Average".parse::<CombineRule>().unwrap(), CombineRule::Average);
        assert_eq!("min".parse::<CombineRule>().unwrap(), CombineRule::Minimum);
        assert!("median".parse::<CombineRule>().is_err());
    }
}
