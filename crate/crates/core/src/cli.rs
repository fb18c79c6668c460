//! The `emodist` command line.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::artifact::{load_model, save_model, train_artifact, Selection};
use crate::category::{EmotionCategory, ProbDist};
use crate::classifiers::{ClassifierKind, ClassifierParams, MaxFeatures};
use crate::corpus::{self, load_corpus, load_predictions, save_corpus, save_predictions, Prediction};
use crate::ensemble::{combine, CombineRule};
use crate::error::{Error, Result};
use crate::eval::{compute_metrics, run_experiment, ExperimentSpec, Metrics, TrainingSource};
use crate::labeler::{build_auto_corpus_with, multi_emoji_fraction, AutoCorpusOptions, Document};
use crate::lexicon::{load_lexicon, Lexicon};
use crate::preprocess::{load_stopwords, preprocess, AffixTable, PreprocessConfig};
use crate::seed::DEFAULT_SEED;
use crate::synth::{generate, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "emodist", version, about = "Emotion classification with emoji distant supervision")]
struct Cli {
    /// Master seed for every random choice. Falls back to EMODIST_SEED.
    #[arg(long, global = true, env = "EMODIST_SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Label raw tweets from their emojis.
    LabelAuto(LabelAutoArgs),
    /// Dump preprocessed tokens, one document per line.
    Preprocess(PreprocessArgs),
    /// Train classifiers on a labeled corpus and write a model file.
    Train(TrainArgs),
    /// Write class probabilities for every document in a corpus.
    Predict(PredictArgs),
    /// Score a predictions file against gold labels.
    Evaluate(EvaluateArgs),
    /// Run the fold-based comparison of training sources and classifiers.
    Experiment(ExperimentArgs),
    /// Merge several prediction files with a combining rule.
    Combine(CombineArgs),
    /// Generate synthetic auto and manual corpora.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct LabelAutoArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Emoji lexicon TSV (defaults to the bundled one).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Keep only tweets with exactly one emoji.
    #[arg(long)]
    single_emoji_only: bool,
    /// Leave the emojis in the text.
    #[arg(long)]
    keep_emojis: bool,
}

#[derive(Debug, Args, Default)]
struct PipelineArgs {
    /// Turn every preprocessing step off.
    #[arg(long)]
    no_preprocess: bool,
    #[arg(long)]
    no_hashtags: bool,
    #[arg(long)]
    no_collapse: bool,
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    no_stem: bool,
    #[arg(long)]
    no_stopwords: bool,
    /// Stop-word list replacing the bundled one.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Affix table replacing the bundled one.
    #[arg(long)]
    affixes: Option<PathBuf>,
}

impl PipelineArgs {
    fn config(&self) -> Result<PreprocessConfig> {
        let mut cfg = PreprocessConfig::all(!self.no_preprocess);
        if self.no_hashtags {
            cfg.strip_trailing_hashtags = false;
        }
        if self.no_collapse {
            cfg.collapse_repeats = false;
        }
        if self.no_normalize {
            cfg.normalize = false;
            cfg.strip_diacritics = false;
        }
        if self.no_stem {
            cfg.light_stem = false;
        }
        if self.no_stopwords {
            cfg.remove_stopwords = false;
        }
        if let Some(p) = &self.stopwords {
            cfg.set_stopwords(load_stopwords(p)?);
        }
        if let Some(p) = &self.affixes {
            cfg.set_affixes(AffixTable::load(p)?);
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 1.0)]
    mnb_alpha: f64,
    #[arg(long, default_value_t = 1e-4)]
    svm_lambda: f64,
    #[arg(long, default_value_t = 20)]
    svm_epochs: u32,
    #[arg(long, default_value_t = 100)]
    rf_trees: usize,
    /// sqrt, log2, all, or a count.
    #[arg(long, default_value = "sqrt")]
    rf_max_features: MaxFeatures,
}

impl ParamArgs {
    fn params(&self) -> ClassifierParams {
        ClassifierParams {
            mnb_alpha: self.mnb_alpha,
            svm_lambda: self.svm_lambda,
            svm_epochs: self.svm_epochs,
            rf_trees: self.rf_trees,
            rf_max_features: self.rf_max_features,
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated subset of svm, mnb, rf.
    #[arg(long, value_delimiter = ',', default_value = "svm,mnb,rf")]
    classifiers: Vec<ClassifierKind>,
    #[arg(long, default_value_t = 1)]
    min_df: u32,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Which stored classifier to use.
    #[arg(long, conflicts_with = "rule")]
    classifier: Option<ClassifierKind>,
    /// Combine all stored classifiers with this rule.
    #[arg(long)]
    rule: Option<CombineRule>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    predictions: PathBuf,
    /// Corpus holding the gold labels.
    #[arg(long)]
    gold: PathBuf,
    /// Also write the metrics as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// A preset name (paper_grid, no_preprocess, single_emoji) or a spec file.
    #[arg(long)]
    spec: String,
    /// Raw tweets for the automatic arm. Synthetic data is used when no
    /// corpus is given here or in the spec file.
    #[arg(long)]
    auto_corpus: Option<PathBuf>,
    #[arg(long)]
    manual_corpus: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    fixed_split: bool,
    /// Report file (text tables followed by JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also train one model per training source on all of its data and
    /// save them here.
    #[arg(long)]
    models_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CombineArgs {
    /// Prediction files, one per classifier.
    #[arg(required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// average, product, maximum, minimum, or all.
    #[arg(long, default_value = "all")]
    rule: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Directory receiving auto.tsv, manual.tsv and lexicon.tsv.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 2000)]
    n_auto: usize,
    #[arg(long, default_value_t = 600)]
    n_manual: usize,
    #[arg(long, default_value_t = 300)]
    vocab_size: usize,
    #[arg(long, default_value_t = 0.10)]
    label_noise: f64,
    #[arg(long, default_value_t = 0.425)]
    multi_emoji_fraction: f64,
    /// Per-word rate of elongation, alef variants, articles and stop words.
    #[arg(long, default_value_t = 0.0)]
    surface_noise: f64,
    /// Lexicon to draw emojis from (defaults to the bundled one).
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("emodist: {e}");
            1
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::LabelAuto(a) => label_auto(a, seed.unwrap_or(DEFAULT_SEED)),
        Command::Preprocess(a) => preprocess_cmd(a),
        Command::Train(a) => train_cmd(a, seed.unwrap_or(DEFAULT_SEED)),
        Command::Predict(a) => predict_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Experiment(a) => experiment_cmd(a, seed),
        Command::Combine(a) => combine_cmd(a),
        Command::Synth(a) => synth_cmd(a, seed.unwrap_or(DEFAULT_SEED)),
    }
}

fn lexicon_or_bundled(path: Option<&Path>) -> Result<Lexicon> {
    match path {
        Some(p) => load_lexicon(p),
        None => Ok(Lexicon::bundled()),
    }
}

fn label_auto(a: LabelAutoArgs, seed: u64) -> Result<()> {
    let lex = lexicon_or_bundled(a.lexicon.as_deref())?;
    let docs = load_corpus(&a.corpus)?;
    let opts = AutoCorpusOptions {
        seed,
        single_emoji_only: a.single_emoji_only,
        strip_emojis: !a.keep_emojis,
    };
    let labeled = build_auto_corpus_with(&docs, &lex, &opts);
    save_corpus(&a.out, &labeled)?;
    println!(
        "labeled {} of {} documents ({:.2}% with several emojis)",
        labeled.len(),
        docs.len(),
        100.0 * multi_emoji_fraction(&docs, &lex)
    );
    Ok(())
}

fn preprocess_cmd(a: PreprocessArgs) -> Result<()> {
    let cfg = a.pipeline.config()?;
    let docs = load_corpus(&a.corpus)?;
    let mut out = String::new();
    for d in &docs {
        let _ = writeln!(out, "{}\t{}", d.id, preprocess(&d.raw_text, &cfg).join(" "));
    }
    corpus::write(&a.out, &out)
}

fn train_cmd(a: TrainArgs, seed: u64) -> Result<()> {
    let cfg = a.pipeline.config()?;
    let docs = load_corpus(&a.corpus)?;
    let labeled: Vec<Document> = docs.into_iter().filter(|d| d.label().is_some()).collect();
    let mut kinds = a.classifiers.clone();
    kinds.dedup();
    let art = train_artifact(&labeled, &cfg, &kinds, &a.params.params(), a.min_df, seed)?;
    save_model(&a.out, &art)?;
    println!(
        "trained {} on {} documents, {} features",
        kinds.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", "),
        labeled.len(),
        art.vocabulary.len()
    );
    Ok(())
}

fn predict_cmd(a: PredictArgs) -> Result<()> {
    let art = load_model(&a.model)?;
    let select = match (a.classifier, a.rule) {
        (Some(k), _) => Selection::Classifier(k),
        (None, Some(r)) => Selection::Rule(r),
        (None, None) => match art.kinds().as_slice() {
            [only] => Selection::Classifier(*only),
            kinds => {
                return Err(Error::InvalidArgument(format!(
                    "the model holds {} classifiers; pick one with --classifier or --rule",
                    kinds.len()
                )))
            }
        },
    };
    let docs = load_corpus(&a.corpus)?;
    let preds = docs
        .iter()
        .map(|d| art.predict_proba(&d.raw_text, select).map(|p| Prediction::new(d.id.clone(), &p)))
        .collect::<Result<Vec<_>>>()?;
    save_predictions(&a.out, &preds)
}

fn metrics_table(m: &Metrics) -> String {
    let mut out = String::from("class\tprecision\trecall\tf1\tsupport\n");
    for c in EmotionCategory::ALL {
        let cm = &m.per_class[c.index()];
        let _ = writeln!(out, "{c}\t{:.4}\t{:.4}\t{:.4}\t{}", cm.precision, cm.recall, cm.f1, cm.support);
    }
    let _ = writeln!(
        out,
        "weighted\t{:.4}\t{:.4}\t{:.4}\t{}",
        m.weighted_precision,
        m.weighted_recall,
        m.weighted_f1,
        m.total()
    );
    let _ = writeln!(out, "accuracy\t{:.4}", m.accuracy);
    out
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let preds = load_predictions(&a.predictions)?;
    let gold: HashMap<String, EmotionCategory> = load_corpus(&a.gold)?
        .into_iter()
        .filter_map(|d| d.label().map(|l| (d.id, l)))
        .collect();
    let mut g = Vec::with_capacity(preds.len());
    for p in &preds {
        let l = gold.get(&p.id).ok_or_else(|| {
            Error::InvalidArgument(format!("no gold label for prediction `{}`", p.id))
        })?;
        g.push(*l);
    }
    let pred: Vec<EmotionCategory> = preds.iter().map(|p| p.label).collect();
    let m = compute_metrics(&g, &pred)?;
    print!("{}", metrics_table(&m));
    if let Some(out) = &a.out {
        corpus::write(out, &format!("{}\n", serde_json::to_string_pretty(&m)?))?;
    }
    Ok(())
}

fn load_spec(name: &str) -> Result<(ExperimentSpec, crate::eval::SpecPaths)> {
    if let Some(spec) = ExperimentSpec::preset(name) {
        return Ok((spec, Default::default()));
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(Error::InvalidArgument(format!(
            "`{name}` is neither a preset (paper_grid, no_preprocess, single_emoji) nor a spec file"
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentSpec::parse(&text, path)
}

fn experiment_cmd(a: ExperimentArgs, seed: Option<u64>) -> Result<()> {
    let (mut spec, paths) = load_spec(&a.spec)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(k) = a.folds {
        spec.n_folds = k;
    }
    if a.fixed_split {
        spec.fixed_split = true;
    }
    spec.validate()?;
    let lexicon_path = a.lexicon.or(paths.lexicon);
    let lex = lexicon_or_bundled(lexicon_path.as_deref())?;
    let auto_path = a.auto_corpus.or(paths.auto_corpus);
    let manual_path = a.manual_corpus.or(paths.manual_corpus);
    let (auto, manual) = match (auto_path, manual_path) {
        (Some(ap), Some(mp)) => (load_corpus(ap)?, load_corpus(mp)?),
        (None, None) => {
            let synth = generate(
                &SynthConfig {
                    seed: spec.seed,
                    ..SynthConfig::default()
                },
                &lex,
            )?;
            (synth.auto, synth.manual)
        }
        (Some(ap), None) if !spec.sources.contains(&TrainingSource::Manual) => {
            return Err(Error::InvalidArgument(format!(
                "the test documents come from the manual corpus; pass --manual-corpus along with {}",
                ap.display()
            )))
        }
        (None, Some(mp)) if !spec.sources.contains(&TrainingSource::Auto) => {
            (Vec::new(), load_corpus(mp)?)
        }
        _ => {
            return Err(Error::InvalidArgument(
                "give both --auto-corpus and --manual-corpus, or neither".into(),
            ))
        }
    };
    let report = run_experiment(&spec, &auto, &manual, &lex)?;
    print!("{}", report.render_text());
    if let Some(out) = &a.out {
        corpus::write(out, &report.render_file()?)?;
    }
    if let Some(dir) = &a.models_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let cfg = spec.preprocess_config();
        for &source in &spec.sources {
            let docs = match source {
                TrainingSource::Auto => spec.auto_training_corpus(&auto, &lex),
                TrainingSource::Manual => manual.clone(),
            };
            let art = train_artifact(&docs, &cfg, &spec.classifiers, &spec.params, spec.min_df, spec.seed)?;
            save_model(dir.join(format!("{}.model", source.as_str())), &art)?;
        }
    }
    Ok(())
}

fn combine_cmd(a: CombineArgs) -> Result<()> {
    let rules = if a.rule.eq_ignore_ascii_case("all") {
        CombineRule::ALL.to_vec()
    } else {
        vec![a.rule.parse::<CombineRule>()?]
    };
    let files = a
        .inputs
        .iter()
        .map(load_predictions)
        .collect::<Result<Vec<_>>>()?;
    let first = &files[0];
    let lookups: Vec<HashMap<&str, &Prediction>> = files
        .iter()
        .map(|f| f.iter().map(|p| (p.id.as_str(), p)).collect())
        .collect();
    for (f, path) in files.iter().zip(&a.inputs).skip(1) {
        if f.len() != first.len() {
            return Err(Error::InvalidArgument(format!(
                "{} has {} predictions, expected {}",
                path.display(),
                f.len(),
                first.len()
            )));
        }
    }
    let mut rows = Vec::with_capacity(first.len() * rules.len());
    for p in first {
        let dists = lookups
            .iter()
            .zip(&a.inputs)
            .map(|(l, path)| {
                l.get(p.id.as_str()).map(|q| ProbDist(q.probs)).ok_or_else(|| {
                    Error::InvalidArgument(format!("{} has no prediction for `{}`", path.display(), p.id))
                })
            })
            .collect::<Result<Vec<ProbDist>>>()?;
        for &rule in &rules {
            rows.push((p.id.clone(), rule, combine(&dists, rule)?));
        }
    }
    corpus::write(&a.out, &corpus::format_combined(&rows))
}

fn synth_cmd(a: SynthArgs, seed: u64) -> Result<()> {
    let lex = lexicon_or_bundled(a.lexicon.as_deref())?;
    let cfg = SynthConfig {
        seed,
        vocab_size: a.vocab_size,
        n_auto: a.n_auto,
        n_manual: a.n_manual,
        label_noise: a.label_noise,
        multi_emoji_fraction: a.multi_emoji_fraction,
        ..SynthConfig::default()
    }
    .with_surface_noise(a.surface_noise);
    let c = generate(&cfg, &lex)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    save_corpus(a.out_dir.join("auto.tsv"), &c.auto)?;
    save_corpus(a.out_dir.join("manual.tsv"), &c.manual)?;
    corpus::write(&a.out_dir.join("lexicon.tsv"), &lex.to_tsv())?;
    println!("wrote {} auto and {} manual documents", c.auto.len(), c.manual.len());
    Ok(())
}
