//! The experiment grid: train on automatically or manually labeled data,
//! evaluate every classifier and combining rule on the same manually
//! labeled test folds, and report per-fold and mean scores.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{compute_metrics, make_folds_indices, FoldPlan, Metrics};
use crate::category::{EmotionCategory, ProbDist, N_CLASSES};
use crate::classifiers::{train, ClassifierKind, ClassifierParams};
use crate::ensemble::{combine, CombineRule};
use crate::error::{Error, Result};
use crate::features::{SparseVector, Vocabulary};
use crate::labeler::{build_auto_corpus_with, AutoCorpusOptions, Document, Provenance};
use crate::lexicon::Lexicon;
use crate::preprocess::{preprocess, PreprocessConfig, TokenList};
use crate::seed::{derive, DEFAULT_SEED};

const PLAN_STREAM: u64 = 0x706c_616e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingSource {
    Auto,
    Manual,
}

impl TrainingSource {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainingSource::Auto => "auto",
            TrainingSource::Manual => "manual",
        }
    }

    fn banner(self) -> &'static str {
        match self {
            TrainingSource::Auto => "trained on automatically labeled data (TCALD)",
            TrainingSource::Manual => "trained on manually labeled data (TCMLD)",
        }
    }
}

/// One configuration of the experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub sources: Vec<TrainingSource>,
    pub preprocess: bool,
    pub single_emoji_only: bool,
    pub strip_emojis: bool,
    pub classifiers: Vec<ClassifierKind>,
    pub rules: Vec<CombineRule>,
    pub n_folds: usize,
    /// One stratified train/test split instead of k folds.
    pub fixed_split: bool,
    pub test_fraction: f64,
    pub min_df: u32,
    pub params: ClassifierParams,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            sources: vec![TrainingSource::Auto, TrainingSource::Manual],
            preprocess: true,
            single_emoji_only: false,
            strip_emojis: true,
            classifiers: ClassifierKind::ALL.to_vec(),
            rules: CombineRule::ALL.to_vec(),
            n_folds: 5,
            fixed_split: false,
            test_fraction: 0.2,
            min_df: 1,
            params: ClassifierParams::default(),
            seed: DEFAULT_SEED,
        }
    }
}

/// Corpus and lexicon locations named in a spec file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecPaths {
    pub auto_corpus: Option<PathBuf>,
    pub manual_corpus: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(format!("expected a boolean, found `{v}`")),
    }
}

fn parse_list<T>(v: &str, f: impl Fn(&str) -> Result<T>) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(s).map_err(|e| e.to_string()))
        .collect()
}

fn parse_num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("invalid number `{v}`"))
}

impl ExperimentSpec {
    /// Built-in grids: `paper_grid` (both sources, every classifier and
    /// rule), `no_preprocess`, and `single_emoji` (auto source, single-emoji
    /// tweets only).
    pub fn preset(name: &str) -> Option<Self> {
        let base = ExperimentSpec::default();
        match name {
            "paper_grid" => Some(base),
            "no_preprocess" => Some(ExperimentSpec {
                preprocess: false,
                ..base
            }),
            "single_emoji" => Some(ExperimentSpec {
                sources: vec![TrainingSource::Auto],
                single_emoji_only: true,
                ..base
            }),
            _ => None,
        }
    }

    /// Parses flat `key = value` lines. Relative paths resolve against
    /// `origin`'s directory.
    pub fn parse(text: &str, origin: &Path) -> Result<(Self, SpecPaths)> {
        let mut spec = ExperimentSpec::default();
        let mut paths = SpecPaths::default();
        let base = origin.parent().unwrap_or(Path::new(""));
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::parse(origin, i + 1, msg);
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let resolve = |v: &str| Some(base.join(v));
            match key {
                "preset" => {
                    let keep_seed = spec.seed;
                    spec = ExperimentSpec::preset(value)
                        .ok_or_else(|| err(format!("unknown preset `{value}`")))?;
                    spec.seed = keep_seed;
                }
                "training_source" | "sources" => {
                    spec.sources = match value.to_ascii_lowercase().as_str() {
                        "both" => vec![TrainingSource::Auto, TrainingSource::Manual],
                        other => parse_list(other, |s| match s {
                            "auto" => Ok(TrainingSource::Auto),
                            "manual" => Ok(TrainingSource::Manual),
                            _ => Err(Error::InvalidArgument(format!("unknown training source `{s}`"))),
                        })
                        .map_err(err)?,
                    }
                }
                "preprocess" => spec.preprocess = parse_bool(value).map_err(err)?,
                "single_emoji_only" => spec.single_emoji_only = parse_bool(value).map_err(err)?,
                "strip_emojis" => spec.strip_emojis = parse_bool(value).map_err(err)?,
                "classifiers" => spec.classifiers = parse_list(value, str::parse).map_err(err)?,
                "rules" => {
                    spec.rules = match value.to_ascii_lowercase().as_str() {
                        "all" => CombineRule::ALL.to_vec(),
                        "none" => Vec::new(),
                        other => parse_list(other, str::parse).map_err(err)?,
                    }
                }
                "n_folds" => spec.n_folds = parse_num(value).map_err(err)?,
                "fixed_split" => spec.fixed_split = parse_bool(value).map_err(err)?,
                "test_fraction" => spec.test_fraction = parse_num(value).map_err(err)?,
                "min_df" => spec.min_df = parse_num(value).map_err(err)?,
                "seed" => spec.seed = parse_num(value).map_err(err)?,
                "mnb_alpha" => spec.params.mnb_alpha = parse_num(value).map_err(err)?,
                "svm_lambda" => spec.params.svm_lambda = parse_num(value).map_err(err)?,
                "svm_epochs" => spec.params.svm_epochs = parse_num(value).map_err(err)?,
                "rf_trees" => spec.params.rf_trees = parse_num(value).map_err(err)?,
                "rf_max_features" => spec.params.rf_max_features = value.parse().map_err(err)?,
                "auto_corpus" => paths.auto_corpus = resolve(value),
                "manual_corpus" => paths.manual_corpus = resolve(value),
                "lexicon" => paths.lexicon = resolve(value),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        spec.validate()?;
        Ok((spec, paths))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.sources.is_empty() {
            return bad("at least one training source is required");
        }
        if self.classifiers.is_empty() {
            return bad("at least one classifier is required");
        }
        if !self.fixed_split && self.n_folds < 2 {
            return bad("n_folds must be at least 2");
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad("test_fraction must be in (0, 1)");
        }
        if self.min_df == 0 {
            return bad("min_df must be at least 1");
        }
        Ok(())
    }

    pub fn preprocess_config(&self) -> PreprocessConfig {
        PreprocessConfig::all(self.preprocess)
    }

    /// Fold plan over the manual corpus. Depends only on the gold labels
    /// and the seed, never on preprocessing.
    pub fn fold_plan(&self, manual: &[Document]) -> Result<FoldPlan> {
        let labels = gold_labels(manual)?;
        let seed = derive(self.seed, PLAN_STREAM);
        if self.fixed_split {
            FoldPlan::fixed(&labels, self.test_fraction, seed)
        } else {
            make_folds_indices(&labels, self.n_folds, seed)
        }
    }

    /// Auto-labeled training corpus. Documents that already carry an auto
    /// label are kept as they are; the rest are labeled from their emojis.
    pub fn auto_training_corpus(&self, raw: &[Document], lex: &Lexicon) -> Vec<Document> {
        let opts = AutoCorpusOptions {
            seed: self.seed,
            single_emoji_only: self.single_emoji_only,
            strip_emojis: self.strip_emojis,
        };
        let mut out = Vec::with_capacity(raw.len());
        for d in raw {
            if d.provenance == Provenance::Auto && d.auto_label.is_some() {
                out.push(d.clone());
            } else {
                out.extend(build_auto_corpus_with(std::slice::from_ref(d), lex, &opts));
            }
        }
        out
    }

    /// Method names in report column order.
    pub fn method_names(&self) -> Vec<String> {
        self.classifiers
            .iter()
            .map(|k| k.to_string())
            .chain(self.rules.iter().map(|r| r.as_str().to_string()))
            .collect()
    }
}

fn gold_labels(docs: &[Document]) -> Result<Vec<EmotionCategory>> {
    docs.iter()
        .map(|d| {
            d.gold_label
                .ok_or_else(|| Error::InvalidArgument(format!("manual document `{}` has no gold label", d.id)))
        })
        .collect()
}

/// Weighted precision/recall/F1 and accuracy of one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Summary {
    pub fn mean(rows: &[Summary]) -> Summary {
        let n = rows.len() as f64;
        let avg = |f: fn(&Summary) -> f64| rows.iter().map(f).sum::<f64>() / n;
        Summary {
            accuracy: avg(|s| s.accuracy),
            precision: avg(|s| s.precision),
            recall: avg(|s| s.recall),
            f1: avg(|s| s.f1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub name: String,
    pub folds: Vec<Summary>,
    pub mean: Summary,
    /// Confusion matrix summed over folds, `[gold][predicted]`.
    pub confusion: [[u64; N_CLASSES]; N_CLASSES],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceReport {
    pub source: TrainingSource,
    pub n_train: Vec<usize>,
    /// Auto documents dropped from a fold because their id is in its test set.
    pub excluded: Vec<usize>,
    pub methods: Vec<MethodReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldInfo {
    pub n_test: usize,
    /// SHA-256 over the fold's test ids, newline separated.
    pub test_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub spec: ExperimentSpec,
    pub folds: Vec<FoldInfo>,
    pub sections: Vec<SourceReport>,
}

impl Report {
    pub fn section(&self, source: TrainingSource) -> Option<&SourceReport> {
        self.sections.iter().find(|s| s.source == source)
    }

    pub fn method(&self, source: TrainingSource, name: &str) -> Option<&MethodReport> {
        self.section(source)?
            .methods
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
    }
}

struct FoldEval {
    n_train: usize,
    excluded: usize,
    methods: Vec<Metrics>,
}

/// Trains every requested classifier on `train`, evaluates them and the
/// combining rules on `test`.
fn evaluate_fold(
    spec: &ExperimentSpec,
    train_tokens: &[&TokenList],
    train_labels: &[EmotionCategory],
    test_tokens: &[&TokenList],
    test_labels: &[EmotionCategory],
    seed: u64,
) -> Result<Vec<Metrics>> {
    let vocab = Vocabulary::fit(train_tokens, spec.min_df)?;
    let xtr: Vec<SparseVector> = train_tokens.iter().map(|t| vocab.transform(t)).collect();
    let xte: Vec<SparseVector> = test_tokens.iter().map(|t| vocab.transform(t)).collect();

    let mut per_classifier: Vec<Vec<ProbDist>> = Vec::with_capacity(spec.classifiers.len());
    for (k, &kind) in spec.classifiers.iter().enumerate() {
        let model = train(kind, &xtr, train_labels, vocab.len(), &spec.params, derive(seed, k as u64))?;
        per_classifier.push(xte.iter().map(|x| model.predict_proba(x)).collect::<Result<_>>()?);
    }

    let mut results = Vec::with_capacity(spec.classifiers.len() + spec.rules.len());
    for dists in &per_classifier {
        let pred: Vec<EmotionCategory> = dists.iter().map(ProbDist::argmax).collect();
        results.push(compute_metrics(test_labels, &pred)?);
    }
    for &rule in &spec.rules {
        let pred = (0..xte.len())
            .map(|i| {
                let column: Vec<ProbDist> = per_classifier.iter().map(|d| d[i]).collect();
                combine(&column, rule).map(|c| c.label)
            })
            .collect::<Result<Vec<_>>>()?;
        results.push(compute_metrics(test_labels, &pred)?);
    }
    for m in &results {
        debug_assert!((m.weighted_recall - m.accuracy).abs() < 1e-12);
    }
    Ok(results)
}

/// Runs the grid. For every fold the manual test portion is shared by all
/// training sources; the auto source trains on the whole auto corpus minus
/// any document whose id appears in that fold's test set.
pub fn run_experiment(
    spec: &ExperimentSpec,
    auto_corpus: &[Document],
    manual_corpus: &[Document],
    lexicon: &Lexicon,
) -> Result<Report> {
    spec.validate()?;
    let plan = spec.fold_plan(manual_corpus)?;
    let manual_labels = gold_labels(manual_corpus)?;
    let cfg = spec.preprocess_config();
    let manual_tokens: Vec<TokenList> = manual_corpus
        .par_iter()
        .map(|d| preprocess(&d.raw_text, &cfg))
        .collect();

    let wants_auto = spec.sources.contains(&TrainingSource::Auto);
    let auto_docs = if wants_auto {
        spec.auto_training_corpus(auto_corpus, lexicon)
    } else {
        Vec::new()
    };
    if wants_auto && auto_docs.is_empty() {
        return Err(Error::InvalidArgument(
            "the automatically labeled corpus is empty after labeling".into(),
        ));
    }
    let auto_tokens: Vec<TokenList> = auto_docs
        .par_iter()
        .map(|d| preprocess(&d.raw_text, &cfg))
        .collect();
    let auto_labels: Vec<EmotionCategory> = auto_docs
        .iter()
        .map(|d| d.auto_label.expect("auto corpus documents carry a label"))
        .collect();

    let fold_results: Vec<Vec<FoldEval>> = plan
        .folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let fold_seed = derive(spec.seed, f as u64);
            let test_tokens: Vec<&TokenList> = fold.test.iter().map(|&i| &manual_tokens[i]).collect();
            let test_labels: Vec<EmotionCategory> = fold.test.iter().map(|&i| manual_labels[i]).collect();
            let test_ids: HashSet<&str> = fold.test.iter().map(|&i| manual_corpus[i].id.as_str()).collect();
            spec.sources
                .iter()
                .map(|&source| {
                    let (train_idx, excluded): (Vec<usize>, usize) = match source {
                        TrainingSource::Manual => (fold.train.clone(), 0),
                        TrainingSource::Auto => {
                            let keep: Vec<usize> = (0..auto_docs.len())
                                .filter(|&i| !test_ids.contains(auto_docs[i].id.as_str()))
                                .collect();
                            let dropped = auto_docs.len() - keep.len();
                            (keep, dropped)
                        }
                    };
                    let (tokens, labels) = match source {
                        TrainingSource::Manual => (&manual_tokens, &manual_labels),
                        TrainingSource::Auto => (&auto_tokens, &auto_labels),
                    };
                    let train_tokens: Vec<&TokenList> = train_idx.iter().map(|&i| &tokens[i]).collect();
                    let train_labels: Vec<EmotionCategory> = train_idx.iter().map(|&i| labels[i]).collect();
                    let methods = evaluate_fold(
                        spec,
                        &train_tokens,
                        &train_labels,
                        &test_tokens,
                        &test_labels,
                        fold_seed,
                    )?;
                    Ok(FoldEval {
                        n_train: train_idx.len(),
                        excluded,
                        methods,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let folds = plan
        .folds
        .iter()
        .map(|fold| {
            let mut h = Sha256::new();
            for &i in &fold.test {
                h.update(manual_corpus[i].id.as_bytes());
                h.update(b"\n");
            }
            FoldInfo {
                n_test: fold.test.len(),
                test_digest: hex::encode(h.finalize().as_slice()),
            }
        })
        .collect();

    let names = spec.method_names();
    let sections = spec
        .sources
        .iter()
        .enumerate()
        .map(|(s, &source)| {
            let methods = names
                .iter()
                .enumerate()
                .map(|(m, name)| {
                    let per_fold: Vec<&Metrics> = fold_results.iter().map(|fr| &fr[s].methods[m]).collect();
                    let rows: Vec<Summary> = per_fold.iter().map(|x| x.summary()).collect();
                    let mut confusion = [[0u64; N_CLASSES]; N_CLASSES];
                    for x in &per_fold {
                        for g in 0..N_CLASSES {
                            for p in 0..N_CLASSES {
                                confusion[g][p] += x.confusion[g][p];
                            }
                        }
                    }
                    MethodReport {
                        name: name.clone(),
                        mean: Summary::mean(&rows),
                        folds: rows,
                        confusion,
                    }
                })
                .collect();
            SourceReport {
                source,
                n_train: fold_results.iter().map(|fr| fr[s].n_train).collect(),
                excluded: fold_results.iter().map(|fr| fr[s].excluded).collect(),
                methods,
            }
        })
        .collect();

    Ok(Report {
        spec: spec.clone(),
        folds,
        sections,
    })
}

fn ordinal(n: usize) -> String {
    let suffix = match (n % 10, n % 100) {
        (1, r) if r != 11 => "st",
        (2, r) if r != 12 => "nd",
        (3, r) if r != 13 => "rd",
        _ => "th",
    };
    format!("{n}{suffix} fold")
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

/// Marker line separating the table from the JSON block.
pub const MACHINE_READABLE_MARKER: &str = "# ---- machine-readable ----";

impl Report {
    /// Per-source accuracy tables (one row per fold plus the average) and
    /// weighted precision/recall/F1 of the mean row, in percent.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let fixed = self.spec.fixed_split;
        for sec in &self.sections {
            let _ = writeln!(out, "== {} ==", sec.source.banner());
            let _ = writeln!(
                out,
                "training documents per fold: {}",
                sec.n_train.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ")
            );
            let _ = writeln!(out, "\naccuracy (%)");
            let mut header = format!("{:<10}", "");
            for m in &sec.methods {
                let _ = write!(header, " | {:>8}", m.name);
            }
            let _ = writeln!(out, "{header}");
            let _ = writeln!(out, "{}", "-".repeat(header.chars().count()));
            for f in 0..self.folds.len() {
                let label = if fixed { "test split".to_string() } else { ordinal(f + 1) };
                let mut row = format!("{label:<10}");
                for m in &sec.methods {
                    let _ = write!(row, " | {:>8}", pct(m.folds[f].accuracy));
                }
                let _ = writeln!(out, "{row}");
            }
            let mut row = format!("{:<10}", "Avg.");
            for m in &sec.methods {
                let _ = write!(row, " | {:>8}", pct(m.mean.accuracy));
            }
            let _ = writeln!(out, "{row}");

            let _ = writeln!(out, "\nweighted averages over folds (%)");
            let _ = writeln!(out, "{:<10} | {:>9} | {:>9} | {:>9}", "method", "precision", "recall", "f1");
            for m in &sec.methods {
                let _ = writeln!(
                    out,
                    "{:<10} | {:>9} | {:>9} | {:>9}",
                    m.name,
                    pct(m.mean.precision),
                    pct(m.mean.recall),
                    pct(m.mean.f1)
                );
            }
            out.push('\n');
        }
        out
    }

    /// Human-readable tables followed by the JSON form of the report.
    pub fn render_file(&self) -> Result<String> {
        let mut out = self.render_text();
        out.push_str(MACHINE_READABLE_MARKER);
        out.push('\n');
        out.push_str(&serde_json::to_string_pretty(self)?);
        out.push('\n');
        Ok(out)
    }

    /// Reads back the JSON block of a file written by `render_file`.
    pub fn parse_file(text: &str) -> Result<Report> {
        let (_, json) = text
            .split_once(MACHINE_READABLE_MARKER)
            .ok_or_else(|| Error::InvalidArgument("report has no machine-readable block".into()))?;
        Ok(serde_json::from_str(json.trim())?)
    }
}
