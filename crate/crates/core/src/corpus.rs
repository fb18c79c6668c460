//! Line-oriented corpus and prediction files.
//!
//! Corpus records are `id<TAB>label<TAB>provenance<TAB>text`, with `-` for
//! a missing label or provenance. The text is the rest of the line and may
//! itself contain tabs. Prediction records are
//! `id<TAB>label<TAB>p_anger<TAB>p_disgust<TAB>p_joy<TAB>p_sadness`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::category::{EmotionCategory, ProbDist, N_CLASSES};
use crate::ensemble::{CombineRule, Combined};
use crate::error::{Error, Result};
use crate::labeler::{Document, Provenance};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.strip_suffix('\r').unwrap_or(l);
        (!l.trim().is_empty() && !l.starts_with('#')).then_some((i + 1, l))
    })
}

fn optional(field: &str) -> Option<&str> {
    let f = field.trim();
    (f != "-" && !f.is_empty()).then_some(f)
}

pub fn parse_corpus(text: &str, origin: &Path) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (line, rec) in records(text) {
        let err = |msg: String| Error::parse(origin, line, msg);
        let mut parts = rec.splitn(4, '\t');
        let (Some(id), Some(label), Some(prov), Some(body)) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(err("expected `id<TAB>label<TAB>provenance<TAB>text`".into()));
        };
        let id = id.trim();
        if id.is_empty() {
            return Err(err("empty id".into()));
        }
        if body.trim().is_empty() {
            return Err(err(format!("record `{id}` has empty text")));
        }
        let label = optional(label)
            .map(str::parse::<EmotionCategory>)
            .transpose()
            .map_err(|e| err(e.to_string()))?;
        let provenance = match optional(prov) {
            Some(p) => p.parse::<Provenance>().map_err(err)?,
            None if label.is_some() => Provenance::Manual,
            None => Provenance::Unlabeled,
        };
        let (gold_label, auto_label) = match (provenance, label) {
            (Provenance::Manual, Some(l)) => (Some(l), None),
            (Provenance::Auto, Some(l)) => (None, Some(l)),
            (Provenance::Unlabeled, None) => (None, None),
            (Provenance::Unlabeled, Some(_)) => {
                return Err(err("unlabeled record carries a label".into()))
            }
            (p, None) => return Err(err(format!("{} record needs a label", p.as_str()))),
        };
        if let Some(first) = seen.insert(id.to_string(), line) {
            return Err(Error::Duplicate {
                path: origin.to_path_buf(),
                line,
                first,
                what: "id",
                key: id.to_string(),
            });
        }
        docs.push(Document {
            id: id.to_string(),
            raw_text: body.to_string(),
            gold_label,
            auto_label,
            provenance,
        });
    }
    Ok(docs)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    parse_corpus(&read(path)?, path)
}

/// One record per document. Line breaks inside a text become spaces.
pub fn format_corpus(docs: &[Document]) -> String {
    let mut out = String::new();
    for d in docs {
        let label = match d.provenance {
            Provenance::Auto => d.auto_label.or(d.gold_label),
            _ => d.gold_label.or(d.auto_label),
        };
        let prov = match (d.provenance, label) {
            (Provenance::Unlabeled, None) => "-",
            (Provenance::Unlabeled, Some(_)) => "manual",
            (p, _) => p.as_str(),
        };
        let text = d.raw_text.replace(['\n', '\r'], " ");
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            d.id,
            label.map_or("-", EmotionCategory::as_str),
            prov,
            text
        );
    }
    out
}

pub fn save_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    write(path.as_ref(), &format_corpus(docs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: String,
    pub label: EmotionCategory,
    pub probs: [f64; N_CLASSES],
}

impl Prediction {
    pub fn new(id: impl Into<String>, dist: &ProbDist) -> Self {
        Prediction {
            id: id.into(),
            label: dist.argmax(),
            probs: dist.0,
        }
    }

    /// Probabilities rescaled to sum to one (file values are rounded).
    pub fn dist(&self) -> ProbDist {
        ProbDist::from_weights(self.probs)
    }
}

pub const PREDICTIONS_HEADER: &str = "# id\tlabel\tp_anger\tp_disgust\tp_joy\tp_sadness";

pub fn format_predictions(preds: &[Prediction]) -> String {
    let mut out = String::from(PREDICTIONS_HEADER);
    out.push('\n');
    for p in preds {
        let _ = writeln!(
            out,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            p.id, p.label, p.probs[0], p.probs[1], p.probs[2], p.probs[3]
        );
    }
    out
}

pub fn parse_predictions(text: &str, origin: &Path) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for (line, rec) in records(text) {
        let err = |msg: String| Error::parse(origin, line, msg);
        let f: Vec<&str> = rec.split('\t').collect();
        if f.len() != 2 + N_CLASSES {
            return Err(err(format!("expected 6 tab-separated fields, found {}", f.len())));
        }
        let label = f[1].parse().map_err(|e: Error| err(e.to_string()))?;
        let mut probs = [0.0; N_CLASSES];
        for c in 0..N_CLASSES {
            probs[c] = f[2 + c]
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|p| p.is_finite() && *p >= 0.0)
                .ok_or_else(|| err(format!("invalid probability `{}`", f[2 + c])))?;
        }
        out.push(Prediction {
            id: f[0].to_string(),
            label,
            probs,
        });
    }
    Ok(out)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>> {
    let path = path.as_ref();
    parse_predictions(&read(path)?, path)
}

pub fn save_predictions(path: impl AsRef<Path>, preds: &[Prediction]) -> Result<()> {
    write(path.as_ref(), &format_predictions(preds))
}

pub const COMBINED_HEADER: &str = "# id\trule\tlabel\ts_anger\ts_disgust\ts_joy\ts_sadness";

/// Combined-prediction rows; scores use the shortest exact decimal form.
pub fn format_combined(rows: &[(String, CombineRule, Combined)]) -> String {
    let mut out = String::from(COMBINED_HEADER);
    out.push('\n');
    for (id, rule, c) in rows {
        let _ = writeln!(
            out,
            "{id}\t{rule}\t{}\t{}\t{}\t{}\t{}",
            c.label, c.scores[0], c.scores[1], c.scores[2], c.scores[3]
        );
    }
    out
}

pub fn parse_combined(text: &str, origin: &Path) -> Result<Vec<(String, CombineRule, Combined)>> {
    let mut out = Vec::new();
    for (line, rec) in records(text) {
        let err = |msg: String| Error::parse(origin, line, msg);
        let f: Vec<&str> = rec.split('\t').collect();
        if f.len() != 3 + N_CLASSES {
            return Err(err(format!("expected 7 tab-separated fields, found {}", f.len())));
        }
        let rule = f[1].parse().map_err(|e: Error| err(e.to_string()))?;
        let label = f[2].parse().map_err(|e: Error| err(e.to_string()))?;
        let mut scores = [0.0; N_CLASSES];
        for c in 0..N_CLASSES {
            scores[c] = f[3 + c]
                .parse()
                .map_err(|_| err(format!("invalid score `{}`", f[3 + c])))?;
        }
        out.push((f[0].to_string(), rule, Combined { scores, label }));
    }
    Ok(out)
}
