//! Emotion classification for Arabic tweets with emoji-based distant
//! supervision.
//!
//! The pipeline: an emoji lexicon labels raw tweets, the text is
//! normalized and tokenized, TF-IDF vectors feed three classifiers (MNB,
//! linear SVM, random forest), and their probability outputs can be merged
//! with fixed combining rules.

pub mod artifact;
pub mod category;
pub mod classifiers;
pub mod cli;
pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod features;
pub mod labeler;
pub mod lexicon;
pub mod preprocess;
pub mod seed;
pub mod synth;

pub use artifact::{load_model, save_model, train_artifact, ModelArtifact, Selection};
pub use category::{EmotionCategory, ProbDist, N_CLASSES};
pub use classifiers::{
    predict, predict_proba, train, train_mnb, train_rf, train_svm, ClassifierKind,
    ClassifierParams, MaxFeatures, TrainedModel,
};
pub use corpus::{load_corpus, parse_corpus, save_corpus, Prediction};
pub use ensemble::{combine, combine_all, CombineRule, Combined};
pub use error::{Error, Result};
pub use eval::{
    compute_metrics, make_folds, run_experiment, stratified_split, ExperimentSpec, Metrics,
    Report,
};
pub use features::{fit_vocabulary, transform, SparseVector, Vocabulary};
pub use labeler::{auto_label, build_auto_corpus, score_emotions, Document, Provenance};
pub use lexicon::{extract_emojis, load_lexicon, strip_emojis, EmojiEntry, Lexicon};
pub use preprocess::{preprocess, AffixTable, PreprocessConfig, TokenList};
pub use seed::DEFAULT_SEED;
