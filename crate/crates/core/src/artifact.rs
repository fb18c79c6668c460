//! Model files: preprocessing settings, vocabulary and trained classifiers
//! in one checksummed, canonical text file.
//!
//! Layout: a header line `emodist-model v<VERSION> sha256:<hex>` followed
//! by a single JSON document whose SHA-256 the header records.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::category::{EmotionCategory, ProbDist};
use crate::classifiers::{train, ClassifierKind, ClassifierParams, ModelParams, TrainedModel};
use crate::ensemble::{combine, CombineRule};
use crate::error::{Error, Result};
use crate::features::{SparseVector, Vocabulary};
use crate::labeler::Document;
use crate::preprocess::{preprocess, PreprocessConfig};
use crate::seed::derive;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "emodist-model";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub version: u32,
    pub seed: u64,
    pub min_df: u32,
    pub preprocess: PreprocessConfig,
    pub vocabulary: Vocabulary,
    pub models: Vec<TrainedModel>,
}

impl ModelArtifact {
    pub fn featurize(&self, text: &str) -> SparseVector {
        self.vocabulary.transform(&preprocess(text, &self.preprocess))
    }

    pub fn model(&self, kind: ClassifierKind) -> Option<&TrainedModel> {
        self.models.iter().find(|m| m.kind == kind)
    }

    pub fn kinds(&self) -> Vec<ClassifierKind> {
        self.models.iter().map(|m| m.kind).collect()
    }

    /// One distribution per stored model, in storage order.
    pub fn predict_all(&self, text: &str) -> Result<Vec<ProbDist>> {
        let x = self.featurize(text);
        self.models.iter().map(|m| m.predict_proba(&x)).collect()
    }

    /// A single model's distribution, or the models combined by `rule`.
    /// Combined scores are rescaled to sum to one.
    pub fn predict_proba(&self, text: &str, select: Selection) -> Result<ProbDist> {
        match select {
            Selection::Classifier(kind) => {
                let m = self.model(kind).ok_or_else(|| {
                    Error::InvalidArgument(format!("model file has no {kind} classifier"))
                })?;
                m.predict_proba(&self.featurize(text))
            }
            Selection::Rule(rule) => {
                let dists = self.predict_all(text)?;
                let c = combine(&dists, rule)?;
                Ok(ProbDist::from_weights(c.scores))
            }
        }
    }

    pub fn to_canonical_string(&self) -> Result<String> {
        let body = serde_json::to_string(self)?;
        let digest = hex::encode(Sha256::digest(body.as_bytes()).as_slice());
        Ok(format!("{MAGIC} v{} sha256:{digest}\n{body}\n", self.version))
    }

    pub fn from_canonical_str(text: &str) -> Result<Self> {
        let (header, rest) = text
            .split_once('\n')
            .ok_or_else(|| Error::Corrupt("missing header line".into()))?;
        let mut parts = header.split(' ');
        let (Some(MAGIC), Some(ver), Some(sum), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(Error::Corrupt("unrecognized header".into()));
        };
        let version: u32 = ver
            .strip_prefix('v')
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Corrupt(format!("bad version field `{ver}`")))?;
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                expected: FORMAT_VERSION,
                found: version,
            });
        }
        let expected = sum
            .strip_prefix("sha256:")
            .ok_or_else(|| Error::Corrupt("bad checksum field".into()))?;
        let body = rest.strip_suffix('\n').unwrap_or(rest);
        let actual = hex::encode(Sha256::digest(body.as_bytes()).as_slice());
        if actual != expected {
            return Err(Error::Corrupt("checksum mismatch (truncated or modified file)".into()));
        }
        let mut art: ModelArtifact =
            serde_json::from_str(body).map_err(|e| Error::Corrupt(e.to_string()))?;
        if art.version != version {
            return Err(Error::Corrupt("header and body versions differ".into()));
        }
        art.vocabulary = art.vocabulary.restore()?;
        for m in &art.models {
            let consistent = m.n_features == art.vocabulary.len()
                && match &m.params {
                    ModelParams::Mnb(p) => p.n_features() == m.n_features,
                    ModelParams::Svm(p) => p.n_features() == m.n_features,
                    ModelParams::Rf(p) => p.n_features() == m.n_features,
                };
            if !consistent {
                return Err(Error::Corrupt(format!("{} model does not match the vocabulary", m.kind)));
            }
        }
        Ok(art)
    }
}

/// Which output of a multi-model artifact to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Classifier(ClassifierKind),
    Rule(CombineRule),
}

pub fn save_model(path: impl AsRef<Path>, artifact: &ModelArtifact) -> Result<()> {
    crate::corpus::write(path.as_ref(), &artifact.to_canonical_string()?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelArtifact> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelArtifact::from_canonical_str(&text)
}

/// Preprocesses, fits the vocabulary and trains each requested classifier.
/// Classifier `k` (by position) is seeded with `derive(seed, k)`.
pub fn train_artifact(
    docs: &[Document],
    config: &PreprocessConfig,
    kinds: &[ClassifierKind],
    params: &ClassifierParams,
    min_df: u32,
    seed: u64,
) -> Result<ModelArtifact> {
    if docs.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let labels: Vec<EmotionCategory> = docs
        .iter()
        .map(|d| {
            d.label()
                .ok_or_else(|| Error::InvalidArgument(format!("document `{}` has no label", d.id)))
        })
        .collect::<Result<_>>()?;
    let tokens: Vec<_> = docs.iter().map(|d| preprocess(&d.raw_text, config)).collect();
    let vocabulary = Vocabulary::fit(&tokens, min_df)?;
    let x: Vec<SparseVector> = tokens.iter().map(|t| vocabulary.transform(t)).collect();
    let models = kinds
        .iter()
        .enumerate()
        .map(|(k, &kind)| train(kind, &x, &labels, vocabulary.len(), params, derive(seed, k as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelArtifact {
        version: FORMAT_VERSION,
        seed,
        min_df,
        preprocess: config.clone(),
        vocabulary,
        models,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use EmotionCategory::*;

    fn docs() -> Vec<Document> {
        let rows = [
            ("1", "سعيد فرح جميل", Joy),
            ("2", "فرح سعيد جدا", Joy),
            ("3", "حزين بكاء الم", Sadness),
            ("4", "بكاء حزين جدا", Sadness),
            ("5", "غضب غاضب قهر", Anger),
            ("6", "قهر غضب جدا", Anger),
            ("7", "قرف مقزز وسخ", Disgust),
            ("8", "وسخ قرف جدا", Disgust),
        ];
        rows.iter()
            .map(|(id, t, l)| Document::manual(*id, *t, *l))
            .collect()
    }

    fn small_params() -> ClassifierParams {
        ClassifierParams {
            rf_trees: 5,
            svm_epochs: 3,
            ..ClassifierParams::default()
        }
    }

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let art = train_artifact(&docs(), &PreprocessConfig::default(), &ClassifierKind::ALL, &small_params(), 1, 42)
            .unwrap();
        let text = art.to_canonical_string().unwrap();
        let back = ModelArtifact::from_canonical_str(&text).unwrap();
        assert_eq!(back, art);
        assert_eq!(back.to_canonical_string().unwrap(), text);
    }

    #[test]
    fn truncation_and_version_are_detected() {
        let art = train_artifact(&docs(), &PreprocessConfig::disabled(), &[ClassifierKind::Mnb], &small_params(), 1, 1)
            .unwrap();
        let text = art.to_canonical_string().unwrap();
        let mut end = text.len() / 2;
        while !text.is_char_boundary(end) {
            end -= 1;
        }
        let cut = &text[..end];
        assert!(matches!(ModelArtifact::from_canonical_str(cut), Err(Error::Corrupt(_))));
        let bumped = text.replacen(" v1 ", " v2 ", 1);
        assert!(matches!(
            ModelArtifact::from_canonical_str(&bumped),
            Err(Error::VersionMismatch { expected: 1, found: 2 })
        ));
        assert!(matches!(ModelArtifact::from_canonical_str(""), Err(Error::Corrupt(_))));
    }

    #[test]
    fn selection_by_classifier_and_rule() {
        let art = train_artifact(&docs(), &PreprocessConfig::default(), &ClassifierKind::ALL, &small_params(), 1, 3)
            .unwrap();
        let p = art.predict_proba("سعيد فرح", Selection::Classifier(ClassifierKind::Mnb)).unwrap();
        assert!(p.is_valid());
        assert_eq!(p.argmax(), Joy);
        let q = art.predict_proba("حزين بكاء", Selection::Rule(CombineRule::Average)).unwrap();
        assert!(q.is_valid());
        assert_eq!(q.argmax(), Sadness);
        let only_mnb = train_artifact(&docs(), &PreprocessConfig::default(), &[ClassifierKind::Mnb], &small_params(), 1, 3)
            .unwrap();
        assert!(only_mnb.predict_proba("x", Selection::Classifier(ClassifierKind::Rf)).is_err());
    }
}
