//! Random forest of unpruned CART trees (Gini impurity) over sparse
//! feature vectors.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mnb::check_dim;
use crate::category::{EmotionCategory, ProbDist, N_CLASSES};
use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::seed::{derive, rng, Rng};

/// How many candidate features to examine at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    /// `ceil(sqrt(V))`
    Sqrt,
    /// `ceil(log2(V))`
    Log2,
    All,
    Fixed(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let v = n_features.max(1);
        let m = match self {
            MaxFeatures::Sqrt => (v as f64).sqrt().ceil() as usize,
            MaxFeatures::Log2 => (v as f64).log2().ceil() as usize,
            MaxFeatures::All => v,
            MaxFeatures::Fixed(n) => n,
        };
        m.clamp(1, v)
    }
}

impl std::str::FromStr for MaxFeatures {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "sqrt" => Ok(MaxFeatures::Sqrt),
            "log2" => Ok(MaxFeatures::Log2),
            "all" => Ok(MaxFeatures::All),
            n => n
                .parse()
                .map(MaxFeatures::Fixed)
                .map_err(|_| format!("invalid max_features `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        counts: [u32; N_CLASSES],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    fn leaf_for(&self, x: &SparseVector) -> &[u32; N_CLASSES] {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x.get(*feature) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Class frequencies at the leaf reached by `x`.
    pub fn predict_proba(&self, x: &SparseVector) -> [f64; N_CLASSES] {
        let counts = self.leaf_for(x);
        let total: u32 = counts.iter().sum();
        counts.map(|c| c as f64 / total as f64)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

fn gini(counts: &[u32; N_CLASSES], n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn class_counts(samples: &[usize], y: &[EmotionCategory]) -> [u32; N_CLASSES] {
    let mut counts = [0u32; N_CLASSES];
    for &i in samples {
        counts[y[i].index()] += 1;
    }
    counts
}

struct BestSplit {
    feature: u32,
    threshold: f64,
    impurity: f64,
}

/// Best threshold on one feature given its nonzero `(value, class)` pairs
/// at the node, sorted by value. The remaining samples are zero. `None` if
/// the feature is constant over the node.
fn best_threshold(nonzero: &[(f64, u8)], n: u32, total: &[u32; N_CLASSES]) -> Option<(f64, f64)> {
    let mut zero_counts = *total;
    for &(_, c) in nonzero {
        zero_counts[c as usize] -= 1;
    }
    let n_zero = n - nonzero.len() as u32;
    let mut groups: Vec<(f64, [u32; N_CLASSES])> = Vec::with_capacity(nonzero.len() + 1);
    let mut zero_placed = n_zero == 0;
    for &(v, c) in nonzero {
        if !zero_placed && v >= 0.0 {
            groups.push((0.0, zero_counts));
            zero_placed = true;
        }
        match groups.last_mut() {
            Some((g, counts)) if *g == v => counts[c as usize] += 1,
            _ => {
                let mut counts = [0; N_CLASSES];
                counts[c as usize] = 1;
                groups.push((v, counts));
            }
        }
    }
    if !zero_placed {
        groups.push((0.0, zero_counts));
    }
    if groups.len() < 2 {
        return None;
    }
    let mut left = [0u32; N_CLASSES];
    let mut nl = 0u32;
    let mut best: Option<(f64, f64)> = None;
    for k in 0..groups.len() - 1 {
        for c in 0..N_CLASSES {
            left[c] += groups[k].1[c];
            nl += groups[k].1[c];
        }
        let right: [u32; N_CLASSES] = std::array::from_fn(|c| total[c] - left[c]);
        let imp = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
        if best.is_none_or(|(b, _)| imp < b) {
            let (lo, hi) = (groups[k].0, groups[k + 1].0);
            let mid = 0.5 * (lo + hi);
            // adjacent floats can round the midpoint up onto the right value
            let threshold = if mid < hi { mid } else { lo };
            best = Some((imp, threshold));
        }
    }
    best
}

/// Column view of the training matrix: for each feature, the samples
/// where it is nonzero.
struct Columns(Vec<Vec<(u32, f64)>>);

impl Columns {
    fn new(x: &[SparseVector], n_features: usize) -> Self {
        let mut cols = vec![Vec::new(); n_features];
        for (i, xi) in x.iter().enumerate() {
            for &(f, v) in xi.entries() {
                cols[f as usize].push((i as u32, v));
            }
        }
        Columns(cols)
    }
}

/// Per-tree buffers reused across nodes.
struct Scratch {
    /// Bootstrap multiplicity of each sample in the current node.
    mult: Vec<u32>,
    seen: Vec<bool>,
    pairs: Vec<(f64, u8)>,
}

struct Data<'a> {
    x: &'a [SparseVector],
    y: &'a [EmotionCategory],
    cols: &'a Columns,
}

fn find_split(
    samples: &[usize],
    data: &Data<'_>,
    scratch: &mut Scratch,
    max_features: usize,
    rng: &mut Rng,
) -> Option<BestSplit> {
    let Data { x, y, cols } = *data;
    // features that are zero on every sample here cannot split the node
    let mut candidates: Vec<u32> = Vec::new();
    for &i in samples {
        scratch.mult[i] += 1;
        if scratch.mult[i] == 1 {
            for &(f, _) in x[i].entries() {
                if !scratch.seen[f as usize] {
                    scratch.seen[f as usize] = true;
                    candidates.push(f);
                }
            }
        }
    }
    for &f in &candidates {
        scratch.seen[f as usize] = false;
    }
    candidates.sort_unstable();
    let total = class_counts(samples, y);
    let n = samples.len() as u32;
    let mut best: Option<BestSplit> = None;
    let mut visited = 0;
    let mut remaining = candidates.len();
    while visited < max_features && remaining > 0 {
        let pick = rng.random_range(0..remaining);
        candidates.swap(pick, remaining - 1);
        remaining -= 1;
        let f = candidates[remaining];
        let col = &cols.0[f as usize];
        let pairs = &mut scratch.pairs;
        pairs.clear();
        if samples.len() < col.len() {
            for &i in samples {
                let v = x[i].get(f);
                if v != 0.0 {
                    pairs.push((v, y[i].index() as u8));
                }
            }
        } else {
            for &(i, v) in col {
                let c = y[i as usize].index() as u8;
                for _ in 0..scratch.mult[i as usize] {
                    pairs.push((v, c));
                }
            }
        }
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((impurity, threshold)) = best_threshold(pairs, n, &total) {
            visited += 1;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                best = Some(BestSplit {
                    feature: f,
                    threshold,
                    impurity,
                });
            }
        }
    }
    for &i in samples {
        scratch.mult[i] = 0;
    }
    best
}

fn grow_tree(data: &Data<'_>, samples: Vec<usize>, max_features: usize, rng: &mut Rng) -> DecisionTree {
    let Data { x, y, cols } = *data;
    let mut scratch = Scratch {
        mult: vec![0; x.len()],
        seen: vec![false; cols.0.len()],
        pairs: Vec::new(),
    };
    let mut nodes: Vec<Node> = vec![Node::Leaf { counts: [0; N_CLASSES] }];
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, samples)];
    while let Some((slot, samples)) = stack.pop() {
        let counts = class_counts(&samples, y);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let split = if pure || samples.len() < 2 {
            None
        } else {
            find_split(&samples, data, &mut scratch, max_features, rng)
        };
        match split {
            None => nodes[slot] = Node::Leaf { counts },
            Some(s) => {
                let (l, r): (Vec<usize>, Vec<usize>) = samples
                    .iter()
                    .partition(|&&i| x[i].get(s.feature) <= s.threshold);
                let left = nodes.len();
                nodes.push(Node::Leaf { counts: [0; N_CLASSES] });
                nodes.push(Node::Leaf { counts: [0; N_CLASSES] });
                nodes[slot] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left: left as u32,
                    right: left as u32 + 1,
                };
                stack.push((left + 1, r));
                stack.push((left, l));
            }
        }
    }
    DecisionTree { nodes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    n_features: usize,
    max_features: MaxFeatures,
    trees: Vec<DecisionTree>,
}

/// A trained forest plus its out-of-bag accuracy (`None` if no sample
/// was ever out of bag).
pub struct ForestFit {
    pub forest: RandomForest,
    pub oob_accuracy: Option<f64>,
}

impl RandomForest {
    pub fn fit(
        x: &[SparseVector],
        y: &[EmotionCategory],
        n_features: usize,
        n_trees: usize,
        max_features: MaxFeatures,
        seed: u64,
    ) -> Result<Self> {
        Self::fit_with_oob(x, y, n_features, n_trees, max_features, seed).map(|f| f.forest)
    }

    /// Grows `n_trees` trees on bootstrap samples. Tree `t` uses a
    /// generator derived from `(seed, t)`, so the result does not depend
    /// on thread scheduling.
    pub fn fit_with_oob(
        x: &[SparseVector],
        y: &[EmotionCategory],
        n_features: usize,
        n_trees: usize,
        max_features: MaxFeatures,
        seed: u64,
    ) -> Result<ForestFit> {
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
        if n_trees == 0 {
            return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
        }
        for xi in x {
            check_dim(xi, n_features)?;
        }
        let m = max_features.resolve(n_features);
        let n = x.len();
        let cols = Columns::new(x, n_features);
        let data = Data { x, y, cols: &cols };
        let grown: Vec<(DecisionTree, Vec<bool>)> = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut r = rng(derive(seed, t as u64));
                let mut in_bag = vec![false; n];
                let samples: Vec<usize> = (0..n)
                    .map(|_| {
                        let i = r.random_range(0..n);
                        in_bag[i] = true;
                        i
                    })
                    .collect();
                (grow_tree(&data, samples, m, &mut r), in_bag)
            })
            .collect();

        let mut oob_votes = vec![[0.0f64; N_CLASSES]; n];
        let mut oob_seen = vec![false; n];
        for (tree, in_bag) in &grown {
            for i in (0..n).filter(|&i| !in_bag[i]) {
                let p = tree.predict_proba(&x[i]);
                oob_seen[i] = true;
                for c in 0..N_CLASSES {
                    oob_votes[i][c] += p[c];
                }
            }
        }
        let scored: Vec<bool> = (0..n)
            .filter(|&i| oob_seen[i])
            .map(|i| crate::category::argmax(&oob_votes[i]) == y[i])
            .collect();
        let oob_accuracy = (!scored.is_empty())
            .then(|| scored.iter().filter(|&&ok| ok).count() as f64 / scored.len() as f64);

        let mut trees: Vec<DecisionTree> = grown.into_iter().map(|(t, _)| t).collect();
        trees.shrink_to_fit();
        Ok(ForestFit {
            forest: RandomForest {
                n_features,
                max_features,
                trees,
            },
            oob_accuracy,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Mean of the per-tree leaf class frequencies.
    pub fn predict_proba(&self, x: &SparseVector) -> Result<ProbDist> {
        check_dim(x, self.n_features)?;
        let mut acc = [0.0; N_CLASSES];
        for t in &self.trees {
            let p = t.predict_proba(x);
            for c in 0..N_CLASSES {
                acc[c] += p[c];
            }
        }
        Ok(ProbDist::from_weights(acc))
    }

    /// Checks that every tree has at least one leaf and no empty leaf.
    pub fn is_well_formed(&self) -> bool {
        !self.trees.is_empty()
            && self.trees.iter().all(|t| {
                t.n_leaves() > 0
                    && t.nodes.iter().all(|n| match n {
                        Node::Leaf { counts } => counts.iter().sum::<u32>() > 0,
                        Node::Split { left, right, .. } => {
                            (*left as usize) < t.nodes.len() && (*right as usize) < t.nodes.len()
                        }
                    })
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use EmotionCategory::*;

    fn sv(dim: usize, pairs: &[(u32, f64)]) -> SparseVector {
        SparseVector::from_pairs(dim, pairs.to_vec()).unwrap()
    }

    #[test]
    fn single_sample_forest_predicts_its_class() {
        let x = vec![sv(3, &[(1, 1.0)])];
        let f = RandomForest::fit(&x, &[Disgust], 3, 1, MaxFeatures::Sqrt, 0).unwrap();
        assert_eq!(f.predict_proba(&sv(3, &[])).unwrap(), ProbDist::one_hot(Disgust));
        assert_eq!(f.predict_proba(&x[0]).unwrap().argmax(), Disgust);
    }

    #[test]
    fn same_seed_same_forest() {
        let x: Vec<SparseVector> = (0..40)
            .map(|i| sv(6, &[((i % 6) as u32, 1.0), (((i * 7) % 6) as u32, 0.5)]))
            .collect();
        let y: Vec<EmotionCategory> = (0..40).map(|i| EmotionCategory::ALL[i % 4]).collect();
        let a = RandomForest::fit(&x, &y, 6, 10, MaxFeatures::Sqrt, 5).unwrap();
        let b = RandomForest::fit(&x, &y, 6, 10, MaxFeatures::Sqrt, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.is_well_formed());
        let c = RandomForest::fit(&x, &y, 6, 10, MaxFeatures::Sqrt, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn max_features_rules() {
        assert_eq!(MaxFeatures::Sqrt.resolve(300), 18);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!(MaxFeatures::Log2.resolve(1024), 10);
        assert_eq!(MaxFeatures::Fixed(500).resolve(10), 10);
        assert_eq!("sqrt".parse::<MaxFeatures>().unwrap(), MaxFeatures::Sqrt);
        assert_eq!("7".parse::<MaxFeatures>().unwrap(), MaxFeatures::Fixed(7));
    }

    #[test]
    fn gini_of_pure_and_even_nodes() {
        assert_eq!(gini(&[4, 0, 0, 0], 4), 0.0);
        assert!((gini(&[1, 1, 1, 1], 4) - 0.75).abs() < 1e-15);
    }
}
