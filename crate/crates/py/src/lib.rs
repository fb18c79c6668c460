//! Python bindings for the emodist core library.

use std::collections::BTreeMap;

use emodist::category::{EmotionCategory, ProbDist};
use emodist::classifiers::{ClassifierKind, ClassifierParams};
use emodist::ensemble::{combine as combine_dists, CombineRule};
use emodist::eval::{compute_metrics, stratified_split_indices};
use emodist::labeler::{score_text, Document};
use emodist::{extract_emojis, strip_emojis, PreprocessConfig, Selection};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn err(e: emodist::Error) -> PyErr {
    match e {
        emodist::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = emodist::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn dist_dict(d: &ProbDist) -> BTreeMap<String, f64> {
    EmotionCategory::ALL
        .iter()
        .map(|c| (c.as_str().to_string(), d.get(*c)))
        .collect()
}

fn config(enabled: bool) -> PreprocessConfig {
    PreprocessConfig::all(enabled)
}

/// Emoji lexicon: emoji sequences with a category and a score.
#[pyclass(name = "Lexicon", module = "emodist", frozen)]
struct PyLexicon {
    inner: emodist::Lexicon,
}

#[pymethods]
impl PyLexicon {
    /// The lexicon shipped with the library.
    #[staticmethod]
    fn bundled() -> Self {
        PyLexicon {
            inner: emodist::Lexicon::bundled(),
        }
    }

    #[staticmethod]
    fn from_tsv(text: &str) -> PyResult<Self> {
        let inner = emodist::Lexicon::parse(text, std::path::Path::new("<string>")).map_err(err)?;
        Ok(PyLexicon { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyLexicon {
            inner: emodist::load_lexicon(path).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn to_tsv(&self) -> String {
        self.inner.to_tsv()
    }

    /// Emojis found in `text`, in order of appearance.
    fn extract(&self, text: &str) -> Vec<String> {
        extract_emojis(text, &self.inner)
            .iter()
            .map(|e| e.as_string())
            .collect()
    }

    fn strip(&self, text: &str) -> String {
        strip_emojis(text, &self.inner)
    }

    /// Summed absolute scores per category.
    fn scores(&self, text: &str) -> BTreeMap<String, u32> {
        let t = score_text(text, &self.inner);
        EmotionCategory::ALL
            .iter()
            .map(|c| (c.as_str().to_string(), t.get(*c)))
            .collect()
    }

    /// The emoji-derived label of `text`, or None when it has no emoji.
    #[pyo3(signature = (text, seed = emodist::DEFAULT_SEED))]
    fn label(&self, text: &str, seed: u64) -> Option<&'static str> {
        emodist::auto_label(&Document::unlabeled("py", text), &self.inner, seed).map(|c| c.as_str())
    }
}

/// Tokens after the preprocessing pipeline (or plain tokenization when
/// `enabled` is false).
#[pyfunction]
#[pyo3(signature = (text, enabled = true))]
fn preprocess(text: &str, enabled: bool) -> Vec<String> {
    emodist::preprocess(text, &config(enabled))
}

/// A trained model: preprocessing settings, vocabulary and classifiers.
#[pyclass(name = "Model", module = "emodist", frozen)]
struct PyModel {
    inner: emodist::ModelArtifact,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (texts, labels, classifiers = vec!["svm".to_string(), "mnb".to_string(), "rf".to_string()], seed = emodist::DEFAULT_SEED, preprocess = true, rf_trees = 100, min_df = 1))]
    fn train(
        texts: Vec<String>,
        labels: Vec<String>,
        classifiers: Vec<String>,
        seed: u64,
        preprocess: bool,
        rf_trees: usize,
        min_df: u32,
    ) -> PyResult<Self> {
        if texts.len() != labels.len() {
            return Err(PyValueError::new_err(format!(
                "{} texts but {} labels",
                texts.len(),
                labels.len()
            )));
        }
        let docs = texts
            .into_iter()
            .zip(&labels)
            .enumerate()
            .map(|(i, (t, l))| Ok(Document::manual(i.to_string(), t, parse::<EmotionCategory>(l)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let kinds = classifiers
            .iter()
            .map(|k| parse::<ClassifierKind>(k))
            .collect::<PyResult<Vec<_>>>()?;
        let params = ClassifierParams {
            rf_trees,
            ..ClassifierParams::default()
        };
        let inner = emodist::train_artifact(&docs, &config(preprocess), &kinds, &params, min_df, seed)
            .map_err(err)?;
        Ok(PyModel { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: emodist::load_model(path).map_err(err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        emodist::save_model(path, &self.inner).map_err(err)
    }

    #[getter]
    fn classifiers(&self) -> Vec<&'static str> {
        self.inner.kinds().into_iter().map(ClassifierKind::as_str).collect()
    }

    #[getter]
    fn vocabulary_size(&self) -> usize {
        self.inner.vocabulary.len()
    }

    /// Class probabilities from one classifier, or from all of them merged
    /// by `rule`. With neither given, a single stored classifier is used.
    #[pyo3(signature = (text, classifier = None, rule = None))]
    fn predict_proba(
        &self,
        text: &str,
        classifier: Option<&str>,
        rule: Option<&str>,
    ) -> PyResult<BTreeMap<String, f64>> {
        let selection = match (classifier, rule) {
            (Some(_), Some(_)) => return Err(PyValueError::new_err("pass classifier or rule, not both")),
            (Some(k), None) => Selection::Classifier(parse(k)?),
            (None, Some(r)) => Selection::Rule(parse(r)?),
            (None, None) => match self.inner.kinds().as_slice() {
                [k] => Selection::Classifier(*k),
                _ => return Err(PyValueError::new_err("model has several classifiers; pass classifier or rule")),
            },
        };
        let d = self.inner.predict_proba(text, selection).map_err(err)?;
        Ok(dist_dict(&d))
    }

    #[pyo3(signature = (text, classifier = None, rule = None))]
    fn predict(&self, text: &str, classifier: Option<&str>, rule: Option<&str>) -> PyResult<String> {
        let probs = self.predict_proba(text, classifier, rule)?;
        let values: [f64; 4] = std::array::from_fn(|c| probs[EmotionCategory::ALL[c].as_str()]);
        Ok(emodist::category::argmax(&values).as_str().to_string())
    }
}

/// Combines per-classifier distributions (each a list of four
/// probabilities in anger, disgust, joy, sadness order) with `rule`.
/// Returns the label and the combined scores.
#[pyfunction]
#[pyo3(signature = (dists, rule = "average"))]
fn combine(dists: Vec<[f64; 4]>, rule: &str) -> PyResult<(String, Vec<f64>)> {
    let rule: CombineRule = parse(rule)?;
    let dists = dists
        .into_iter()
        .map(|p| ProbDist::new(p).map_err(err))
        .collect::<PyResult<Vec<_>>>()?;
    let c = combine_dists(&dists, rule).map_err(err)?;
    Ok((c.label.as_str().to_string(), c.scores.to_vec()))
}

/// Weighted precision, recall, F1 and accuracy.
#[pyfunction]
fn metrics(gold: Vec<String>, predicted: Vec<String>) -> PyResult<BTreeMap<String, f64>> {
    let g = gold.iter().map(|s| parse(s)).collect::<PyResult<Vec<EmotionCategory>>>()?;
    let p = predicted.iter().map(|s| parse(s)).collect::<PyResult<Vec<EmotionCategory>>>()?;
    let m = compute_metrics(&g, &p).map_err(err)?;
    Ok(BTreeMap::from([
        ("accuracy".to_string(), m.accuracy),
        ("precision".to_string(), m.weighted_precision),
        ("recall".to_string(), m.weighted_recall),
        ("f1".to_string(), m.weighted_f1),
    ]))
}

/// Stratified train/test index split; each class contributes
/// round(count * test_fraction) test items.
#[pyfunction]
#[pyo3(signature = (labels, test_fraction = 0.2, seed = emodist::DEFAULT_SEED))]
fn stratified_split(labels: Vec<String>, test_fraction: f64, seed: u64) -> PyResult<(Vec<usize>, Vec<usize>)> {
    let l = labels.iter().map(|s| parse(s)).collect::<PyResult<Vec<EmotionCategory>>>()?;
    stratified_split_indices(&l, test_fraction, seed).map_err(err)
}

#[pymodule]
#[pyo3(name = "emodist")]
fn emodist_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add(
        "CATEGORIES",
        EmotionCategory::ALL.iter().map(|c| c.as_str()).collect::<Vec<_>>(),
    )?;
    m.add_class::<PyLexicon>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(combine, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add_function(wrap_pyfunction!(stratified_split, m)?)?;
    Ok(())
}
