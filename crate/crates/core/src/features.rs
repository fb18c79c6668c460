//! Bag-of-words vocabulary and TF-IDF sparse vectors.
//!
//! Weights are `tf * idf` with raw term counts and the smoothed
//! `idf = ln((1 + n_docs) / (1 + df)) + 1`, then L2-normalized.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    /// Terms in index order (lexicographic).
    terms: Vec<String>,
    df: Vec<u32>,
    n_docs: u32,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Terms with document frequency `>= min_df`, indexed in lexicographic
    /// order.
    pub fn fit<T: AsRef<[String]>>(token_lists: &[T], min_df: u32) -> Result<Self> {
        if token_lists.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if min_df == 0 {
            return Err(Error::InvalidArgument("min_df must be at least 1".into()));
        }
        let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
        for doc in token_lists {
            let mut seen: Vec<&str> = doc.as_ref().iter().map(String::as_str).collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *counts.entry(t).or_default() += 1;
            }
        }
        let (terms, df): (Vec<String>, Vec<u32>) = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_df)
            .map(|(t, c)| (t.to_string(), c))
            .unzip();
        Ok(Vocabulary::from_parts(terms, df, token_lists.len() as u32))
    }

    fn from_parts(terms: Vec<String>, df: Vec<u32>, n_docs: u32) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary {
            terms,
            df,
            n_docs,
            index,
        }
    }

    /// Rebuilds the lookup table after deserialization and checks the
    /// stored invariants.
    pub(crate) fn restore(self) -> Result<Self> {
        let Vocabulary {
            terms, df, n_docs, ..
        } = self;
        if terms.len() != df.len() {
            return Err(Error::Corrupt("vocabulary term and df lengths differ".into()));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Corrupt("vocabulary terms not strictly sorted".into()));
        }
        if df.iter().any(|&d| d == 0 || d > n_docs) {
            return Err(Error::Corrupt("vocabulary df out of range".into()));
        }
        Ok(Vocabulary::from_parts(terms, df, n_docs))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> u32 {
        self.n_docs
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, idx: u32) -> Option<&str> {
        self.terms.get(idx as usize).map(String::as_str)
    }

    pub fn df(&self, term: &str) -> Option<u32> {
        self.index_of(term).map(|i| self.df[i as usize])
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf_at(&self, idx: u32) -> f64 {
        let df = self.df[idx as usize] as f64;
        ((1.0 + self.n_docs as f64) / (1.0 + df)).ln() + 1.0
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.index_of(term).map(|i| self.idf_at(i))
    }

    pub fn transform(&self, tokens: &[String]) -> SparseVector {
        transform(tokens, self)
    }
}

/// Sorted `(index, weight)` pairs with strictly increasing indices and
/// positive weights; `dim` is the vocabulary size it was built against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn empty(dim: usize) -> Self {
        SparseVector {
            dim,
            entries: Vec::new(),
        }
    }

    /// Sorts by index, sums duplicates and drops non-positive weights.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(u32, f64)>) -> Result<Self> {
        pairs.sort_by_key(|p| p.0);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            if i as usize >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: i as usize + 1,
                });
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidArgument(format!("invalid weight {w} at {i}")));
            }
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => entries.push((i, w)),
            }
        }
        entries.retain(|&(_, w)| w > 0.0);
        Ok(SparseVector { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Value at `idx` (zero when absent).
    pub fn get(&self, idx: u32) -> f64 {
        self.entries
            .binary_search_by_key(&idx, |e| e.0)
            .map_or(0.0, |p| self.entries[p].1)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }

    pub fn dot_dense(&self, w: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| w[i as usize] * v).sum()
    }

    pub fn l2_normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for e in self.entries.iter_mut() {
                e.1 /= n;
            }
        }
        self
    }
}

pub fn fit_vocabulary<T: AsRef<[String]>>(token_lists: &[T], min_df: u32) -> Result<Vocabulary> {
    Vocabulary::fit(token_lists, min_df)
}

/// TF-IDF vector of one document; out-of-vocabulary tokens are ignored.
pub fn transform(tokens: &[String], vocab: &Vocabulary) -> SparseVector {
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    for t in tokens {
        if let Some(i) = vocab.index_of(t) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let entries = counts
        .into_iter()
        .map(|(i, tf)| (i, tf as f64 * vocab.idf_at(i)))
        .collect();
    SparseVector {
        dim: vocab.len(),
        entries,
    }
    .l2_normalized()
}
