//! Tweet preprocessing: trailing-hashtag removal, repeated-letter
//! collapsing, Arabic letter normalization, tokenization, stop-word
//! removal and light stemming.
//!
//! Every step is a pure function; [`preprocess`] chains them in a fixed
//! order and each step can be switched off through [`PreprocessConfig`].

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered tokens; never contains an empty string.
pub type TokenList = Vec<String>;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const DEFAULT_AFFIXES: &str = include_str!("../data/affixes.txt");

static EDGE_PUNCT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\p{P}+|\p{P}+$").expect("valid regex"));

/// Prefix and suffix inventories for the light stemmer, each kept sorted
/// longest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffixTable {
    prefixes: Vec<String>,
    suffixes: Vec<String>,
    min_stem_len: usize,
}

impl AffixTable {
    pub fn new(prefixes: Vec<String>, suffixes: Vec<String>, min_stem_len: usize) -> Result<Self> {
        if min_stem_len < 2 {
            return Err(Error::InvalidArgument(format!(
                "min_stem_len must be at least 2, got {min_stem_len}"
            )));
        }
        if prefixes.iter().chain(&suffixes).any(|a| a.is_empty()) {
            return Err(Error::InvalidArgument("affix lists must not contain empty strings".into()));
        }
        Ok(AffixTable {
            prefixes: sort_longest_first(prefixes),
            suffixes: sort_longest_first(suffixes),
            min_stem_len,
        })
    }

    /// Parses the `[prefixes]` / `[suffixes]` / `min_stem_len = N` format.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        enum Section {
            None,
            Prefixes,
            Suffixes,
        }
        let mut section = Section::None;
        let (mut prefixes, mut suffixes) = (Vec::new(), Vec::new());
        let mut min_stem_len = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "[prefixes]" => section = Section::Prefixes,
                "[suffixes]" => section = Section::Suffixes,
                _ if line.starts_with("min_stem_len") => {
                    let value = line
                        .split_once('=')
                        .map(|(_, v)| v.trim())
                        .and_then(|v| v.parse::<usize>().ok())
                        .ok_or_else(|| Error::parse(origin, i + 1, "expected `min_stem_len = N`"))?;
                    min_stem_len = Some(value);
                }
                _ => match section {
                    Section::Prefixes => prefixes.push(line.to_string()),
                    Section::Suffixes => suffixes.push(line.to_string()),
                    Section::None => {
                        return Err(Error::parse(
                            origin,
                            i + 1,
                            "affix outside a [prefixes] or [suffixes] section",
                        ))
                    }
                },
            }
        }
        let min_stem_len =
            min_stem_len.ok_or_else(|| Error::parse(origin, 0, "missing `min_stem_len = N`"))?;
        AffixTable::new(prefixes, suffixes, min_stem_len)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn prefixes(&self) -> &[String] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[String] {
        &self.suffixes
    }

    pub fn min_stem_len(&self) -> usize {
        self.min_stem_len
    }
}

impl Default for AffixTable {
    fn default() -> Self {
        AffixTable::parse(DEFAULT_AFFIXES, Path::new("<default affixes>"))
            .expect("bundled affix table is valid")
    }
}

fn sort_longest_first(mut v: Vec<String>) -> Vec<String> {
    v.sort_by(|a, b| {
        b.chars()
            .count()
            .cmp(&a.chars().count())
            .then_with(|| a.cmp(b))
    });
    v.dedup();
    v
}

/// Parses a stop-word file: one token per line, `#` comments.
pub fn parse_stopwords(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn load_stopwords(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub strip_trailing_hashtags: bool,
    pub collapse_repeats: bool,
    pub normalize: bool,
    /// Sub-flag of `normalize`: also drop tatweel and harakat.
    pub strip_diacritics: bool,
    pub light_stem: bool,
    pub remove_stopwords: bool,
    stopwords: BTreeSet<String>,
    affixes: AffixTable,
}

impl Default for PreprocessConfig {
    /// Every step on, bundled stop words and affix table.
    fn default() -> Self {
        PreprocessConfig::new(parse_stopwords(DEFAULT_STOPWORDS), AffixTable::default())
    }
}

impl PreprocessConfig {
    /// All steps on. Stop words are normalized here so they compare equal
    /// to normalized tokens.
    pub fn new(stopwords: impl IntoIterator<Item = String>, affixes: AffixTable) -> Self {
        let mut cfg = PreprocessConfig {
            strip_trailing_hashtags: true,
            collapse_repeats: true,
            normalize: true,
            strip_diacritics: true,
            light_stem: true,
            remove_stopwords: true,
            stopwords: BTreeSet::new(),
            affixes,
        };
        cfg.set_stopwords(stopwords);
        cfg
    }

    /// Every step off: `preprocess` reduces to `tokenize`.
    pub fn disabled() -> Self {
        PreprocessConfig {
            strip_trailing_hashtags: false,
            collapse_repeats: false,
            normalize: false,
            strip_diacritics: false,
            light_stem: false,
            remove_stopwords: false,
            ..PreprocessConfig::default()
        }
    }

    /// Default resources with every flag set to `on`.
    pub fn all(on: bool) -> Self {
        if on {
            Self::default()
        } else {
            Self::disabled()
        }
    }

    pub fn set_stopwords(&mut self, words: impl IntoIterator<Item = String>) {
        self.stopwords = words
            .into_iter()
            .map(|w| normalize_with(&w, true))
            .filter(|w| !w.is_empty())
            .collect();
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    pub fn affixes(&self) -> &AffixTable {
        &self.affixes
    }

    pub fn set_affixes(&mut self, affixes: AffixTable) {
        self.affixes = affixes;
    }
}

fn is_hashtag(token: &str) -> bool {
    token.starts_with('#')
}

/// Drops the run of hashtags that ends the tweet and turns every other
/// hashtag into plain words (`#` and `_` become spaces).
///
/// The trailing run only counts when some ordinary word precedes it; a
/// tweet made entirely of hashtags keeps them all as words.
pub fn remove_trailing_hashtags(text: &str) -> String {
    if !text.contains('#') {
        return text.to_string();
    }
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut cut = tokens.len();
    while cut > 0 && is_hashtag(tokens[cut - 1]) {
        cut -= 1;
    }
    if cut == 0 {
        cut = tokens.len();
    }
    let mut words: Vec<String> = Vec::with_capacity(cut);
    for tok in &tokens[..cut] {
        if is_hashtag(tok) {
            let plain = tok.replace(['#', '_'], " ");
            words.extend(plain.split_whitespace().map(str::to_string));
        } else {
            words.push((*tok).to_string());
        }
    }
    words.join(" ")
}

/// Replaces each run of more than two identical characters with one.
pub fn collapse_repeats(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let mut j = i + 1;
        while j < chars.len() && chars[j] == c {
            j += 1;
        }
        let run = j - i;
        let keep = if run > 2 { 1 } else { run };
        out.extend(std::iter::repeat_n(c, keep));
        i = j;
    }
    out
}

/// Alef forms to bare alef, taa marbuta to haa, and (with
/// `strip_diacritics`) removal of tatweel and harakat.
pub fn normalize_with(text: &str, strip_diacritics: bool) -> String {
    text.chars()
        .filter_map(|c| match c {
            '\u{0623}' | '\u{0625}' | '\u{0622}' => Some('\u{0627}'),
            '\u{0629}' => Some('\u{0647}'),
            '\u{0640}' | '\u{064B}'..='\u{0652}' if strip_diacritics => None,
            other => Some(other),
        })
        .collect()
}

pub fn normalize(text: &str) -> String {
    normalize_with(text, true)
}

/// Splits on Unicode whitespace and trims punctuation from token edges.
pub fn tokenize(text: &str) -> TokenList {
    text.split_whitespace()
        .map(|tok| EDGE_PUNCT.replace_all(tok, ""))
        .filter(|tok| !tok.is_empty())
        .map(|tok| tok.into_owned())
        .collect()
}

pub fn remove_stopwords(tokens: TokenList, stopwords: &BTreeSet<String>) -> TokenList {
    if stopwords.is_empty() {
        return tokens;
    }
    tokens
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .collect()
}

/// Removes at most one prefix, then at most one suffix. Candidates are
/// tried longest first and the first whose removal leaves at least
/// `min_stem_len` characters is taken.
pub fn light_stem(token: &str, affixes: &AffixTable) -> String {
    let min = affixes.min_stem_len;
    let mut stem = token;
    let len = |s: &str| s.chars().count();
    if let Some(rest) = affixes
        .prefixes
        .iter()
        .filter_map(|p| stem.strip_prefix(p.as_str()))
        .find(|rest| len(rest) >= min)
    {
        stem = rest;
    }
    if let Some(rest) = affixes
        .suffixes
        .iter()
        .filter_map(|s| stem.strip_suffix(s.as_str()))
        .find(|rest| len(rest) >= min)
    {
        stem = rest;
    }
    stem.to_string()
}

/// Full pipeline: trailing hashtags, repeats, normalization, tokenize,
/// stop words, light stemming.
pub fn preprocess(text: &str, config: &PreprocessConfig) -> TokenList {
    let mut text = std::borrow::Cow::Borrowed(text);
    if config.strip_trailing_hashtags {
        text = remove_trailing_hashtags(&text).into();
    }
    if config.collapse_repeats {
        text = collapse_repeats(&text).into();
    }
    if config.normalize {
        text = normalize_with(&text, config.strip_diacritics).into();
    }
    let mut tokens = tokenize(&text);
    if config.remove_stopwords {
        tokens = remove_stopwords(tokens, &config.stopwords);
    }
    if config.light_stem {
        for t in tokens.iter_mut() {
            *t = light_stem(t, &config.affixes);
        }
    }
    tokens
}
