//! Synthetic tweet corpora for experiments without real data.
//!
//! Each class draws words from a unigram distribution that boosts its own
//! block of topical words. Auto-corpus tweets carry emojis from the
//! lexicon; with probability `label_noise` those emojis point at a
//! different class than the one that generated the words. Manual tweets
//! carry their true label and no emojis.
//!
//! Base words are built so that normalization and light stemming leave
//! them intact and keep distinct words distinct. Surface noise
//! (elongation, alef variants, a leading article, stop words) is therefore
//! exactly what preprocessing is meant to undo.

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::category::{EmotionCategory, N_CLASSES};
use crate::error::{Error, Result};
use crate::labeler::Document;
use crate::lexicon::{EmojiEntry, Lexicon};
use crate::preprocess::PreprocessConfig;
use crate::seed::{rng_for, Rng};

const LETTERS: &[char] = &[
    'ب', 'ت', 'ث', 'ج', 'ح', 'خ', 'د', 'ذ', 'ر', 'ز', 'س', 'ش', 'ص', 'ض', 'ط', 'ظ', 'ع', 'غ', 'ف', 'ق',
    'ك', 'ل', 'م', 'ن', 'ه', 'و', 'ي',
];
/// Letters that could be read as the start of a prefix.
const BAD_FIRST: &[char] = &['و', 'ف', 'ب', 'ك', 'ل'];
/// Letters that end some suffix.
const BAD_LAST: &[char] = &['ن', 'ت', 'م', 'ي', 'ه'];
const ALEF_VARIANTS: [char; 3] = ['أ', 'إ', 'آ'];
const TATWEEL: char = 'ـ';

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub vocab_size: usize,
    /// Topical words per class, taken from the front of the vocabulary.
    pub topic_words: usize,
    /// Sampling weight of a class's own topical words (others weigh 1).
    pub topic_boost: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub n_auto: usize,
    pub n_manual: usize,
    pub class_weights: [f64; N_CLASSES],
    /// Chance that an auto tweet's emojis point at a wrong class.
    pub label_noise: f64,
    /// Share of auto tweets with more than one emoji.
    pub multi_emoji_fraction: f64,
    /// Per-word chances of each kind of surface noise.
    pub elongation: f64,
    pub alef_variants: f64,
    pub article: f64,
    /// Chance of a stop word before each word.
    pub stopwords: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: crate::seed::DEFAULT_SEED,
            vocab_size: 300,
            topic_words: 30,
            topic_boost: 4.0,
            min_len: 6,
            max_len: 14,
            n_auto: 2000,
            n_manual: 600,
            class_weights: [1.0; N_CLASSES],
            label_noise: 0.10,
            multi_emoji_fraction: 0.425,
            elongation: 0.0,
            alef_variants: 0.0,
            article: 0.0,
            stopwords: 0.0,
        }
    }
}

impl SynthConfig {
    /// Sets every surface-noise rate to `rate`.
    pub fn with_surface_noise(mut self, rate: f64) -> Self {
        self.elongation = rate;
        self.alef_variants = rate;
        self.article = rate;
        self.stopwords = rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.topic_words * N_CLASSES > self.vocab_size {
            return bad(format!(
                "{} topical words per class do not fit in a vocabulary of {}",
                self.topic_words, self.vocab_size
            ));
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return bad(format!("invalid length range {}..={}", self.min_len, self.max_len));
        }
        if !(self.topic_boost.is_finite() && self.topic_boost > 0.0) {
            return bad("topic_boost must be positive".into());
        }
        if self.class_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || self.class_weights.iter().sum::<f64>() <= 0.0
        {
            return bad("class weights must be nonnegative with a positive sum".into());
        }
        for (name, p) in [
            ("label_noise", self.label_noise),
            ("multi_emoji_fraction", self.multi_emoji_fraction),
            ("elongation", self.elongation),
            ("alef_variants", self.alef_variants),
            ("article", self.article),
            ("stopwords", self.stopwords),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub vocabulary: Vec<String>,
    /// Unlabeled tweets with emojis.
    pub auto: Vec<Document>,
    /// The class that generated each auto tweet's words.
    pub auto_truth: Vec<EmotionCategory>,
    pub manual: Vec<Document>,
}

/// Words of 3 to 6 letters with an interior alef, no doubled letters, no
/// prefix letter in front and no suffix letter at the end.
fn base_vocabulary(n: usize, rng: &mut Rng, exclude: &BTreeSet<String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.random_range(3..=6usize);
        let alef_at = rng.random_range(1..len - 1);
        let mut w: Vec<char> = Vec::with_capacity(len);
        for i in 0..len {
            if i == alef_at {
                w.push('ا');
                continue;
            }
            let c = loop {
                let c = *LETTERS.choose(rng).expect("nonempty");
                let ok = (i != 0 || !BAD_FIRST.contains(&c))
                    && (i != len - 1 || !BAD_LAST.contains(&c))
                    && w.last() != Some(&c);
                if ok {
                    break c;
                }
            };
            w.push(c);
        }
        let w: String = w.into_iter().collect();
        if !exclude.contains(&w) && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

struct Noise<'a> {
    cfg: &'a SynthConfig,
    stopwords: &'a [String],
}

impl Noise<'_> {
    fn word(&self, w: &str, rng: &mut Rng) -> String {
        let mut chars: Vec<char> = w.chars().collect();
        if rng.random_bool(self.cfg.alef_variants) {
            if let Some(i) = chars.iter().position(|&c| c == 'ا') {
                chars[i] = *ALEF_VARIANTS.choose(rng).expect("nonempty");
            }
        }
        if rng.random_bool(self.cfg.elongation) {
            let i = rng.random_range(0..chars.len());
            if rng.random_bool(0.5) {
                let extra = rng.random_range(2..=4);
                chars.splice(i..i, std::iter::repeat_n(chars[i], extra));
            } else if i + 1 < chars.len() {
                let extra = rng.random_range(1..=3);
                chars.splice(i + 1..i + 1, std::iter::repeat_n(TATWEEL, extra));
            }
        }
        let mut out = String::new();
        if rng.random_bool(self.cfg.article) {
            out.push_str("ال");
        }
        out.extend(chars);
        out
    }

    fn tokens(&self, words: &[&str], rng: &mut Rng) -> Vec<String> {
        let mut out = Vec::with_capacity(words.len() * 2);
        for w in words {
            if !self.stopwords.is_empty() && rng.random_bool(self.cfg.stopwords) {
                out.push(self.stopwords.choose(rng).expect("nonempty").clone());
            }
            out.push(self.word(w, rng));
        }
        out
    }
}

struct Model {
    vocab: Vec<String>,
    words: [WeightedIndex<f64>; N_CLASSES],
    classes: WeightedIndex<f64>,
}

impl Model {
    fn new(cfg: &SynthConfig, vocab: Vec<String>) -> Result<Self> {
        let block = cfg.topic_words;
        let words = std::array::from_fn(|c| {
            let weights = (0..vocab.len()).map(|j| {
                if j / block.max(1) == c && j < block * N_CLASSES {
                    cfg.topic_boost
                } else {
                    1.0
                }
            });
            WeightedIndex::new(weights).expect("positive weights")
        });
        let classes = WeightedIndex::new(cfg.class_weights)
            .map_err(|e| Error::InvalidArgument(format!("class weights: {e}")))?;
        Ok(Model {
            vocab,
            words,
            classes,
        })
    }

    fn words(&self, c: EmotionCategory, cfg: &SynthConfig, rng: &mut Rng) -> Vec<&str> {
        let n = rng.random_range(cfg.min_len..=cfg.max_len);
        (0..n)
            .map(|_| self.vocab[self.words[c.index()].sample(rng)].as_str())
            .collect()
    }

    fn class(&self, rng: &mut Rng) -> EmotionCategory {
        EmotionCategory::ALL[self.classes.sample(rng)]
    }
}

/// Emojis whose lexicon scores make `target` the strict winner.
fn emojis_for<'a>(
    target: EmotionCategory,
    multi: bool,
    by_class: &[Vec<&'a EmojiEntry>; N_CLASSES],
    rng: &mut Rng,
) -> Vec<&'a EmojiEntry> {
    let own = &by_class[target.index()];
    let pick = |rng: &mut Rng| *own.choose(rng).expect("every class has an emoji");
    if !multi {
        return vec![pick(rng)];
    }
    let k = rng.random_range(2..=3);
    let mut chosen: Vec<&EmojiEntry> = (0..k).map(|_| pick(rng)).collect();
    if rng.random_bool(0.5) {
        let total: u32 = chosen.iter().map(|e| e.weight()).sum();
        let rivals: Vec<&EmojiEntry> = EmotionCategory::ALL
            .iter()
            .filter(|&&c| c != target)
            .flat_map(|c| by_class[c.index()].iter().copied())
            .filter(|e| e.weight() < total)
            .collect();
        if let Some(r) = rivals.choose(rng) {
            chosen.push(r);
        }
    }
    chosen.shuffle(rng);
    chosen
}

pub fn generate(cfg: &SynthConfig, lex: &Lexicon) -> Result<SynthCorpus> {
    cfg.validate()?;
    let by_class: [Vec<&EmojiEntry>; N_CLASSES] = std::array::from_fn(|c| {
        lex.entries()
            .iter()
            .filter(|e| e.category.index() == c)
            .collect()
    });
    if cfg.n_auto > 0 {
        if let Some(c) = EmotionCategory::ALL.iter().find(|c| by_class[c.index()].is_empty()) {
            return Err(Error::InvalidArgument(format!("lexicon has no {c} emoji")));
        }
    }
    let pre = PreprocessConfig::default();
    let stopwords: Vec<String> = pre.stopwords().iter().cloned().collect();
    let noise = Noise {
        cfg,
        stopwords: &stopwords,
    };
    let vocab = base_vocabulary(
        cfg.vocab_size,
        &mut rng_for(cfg.seed, "synth/vocab"),
        pre.stopwords(),
    );
    let model = Model::new(cfg, vocab)?;

    let mut rng = rng_for(cfg.seed, "synth/manual");
    let manual = (0..cfg.n_manual)
        .map(|i| {
            let c = model.class(&mut rng);
            let words = model.words(c, cfg, &mut rng);
            Document::manual(format!("m{i:05}"), noise.tokens(&words, &mut rng).join(" "), c)
        })
        .collect();

    let mut rng = rng_for(cfg.seed, "synth/auto");
    let mut auto = Vec::with_capacity(cfg.n_auto);
    let mut auto_truth = Vec::with_capacity(cfg.n_auto);
    for i in 0..cfg.n_auto {
        let c = model.class(&mut rng);
        let target = if rng.random_bool(cfg.label_noise) {
            let others: Vec<EmotionCategory> =
                EmotionCategory::ALL.into_iter().filter(|&o| o != c).collect();
            *others.choose(&mut rng).expect("three other classes")
        } else {
            c
        };
        let multi = rng.random_bool(cfg.multi_emoji_fraction);
        let words = model.words(c, cfg, &mut rng);
        let mut tokens = noise.tokens(&words, &mut rng);
        for e in emojis_for(target, multi, &by_class, &mut rng) {
            let at = rng.random_range(0..=tokens.len());
            tokens.insert(at, e.as_string());
        }
        auto.push(Document::unlabeled(format!("a{i:05}"), tokens.join(" ")));
        auto_truth.push(c);
    }
    Ok(SynthCorpus {
        vocabulary: model.vocab,
        auto,
        auto_truth,
        manual,
    })
}
