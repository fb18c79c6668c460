//! Scored emoji lexicon: loading, validation, and greedy longest-match
//! extraction of emoji occurrences from raw text.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::category::EmotionCategory;
use crate::error::{Error, Result};

/// Largest allowed score magnitude.
pub const MAX_SCORE: i8 = 5;

const ZWJ: char = '\u{200D}';

/// Presentation selectors. They never change which emoji is meant, so they
/// are dropped from entries and skipped inside matches.
fn is_variation_selector(c: char) -> bool {
    matches!(c, '\u{FE0E}' | '\u{FE0F}')
}

/// Codepoints that modify the glyph before them without starting a new one.
fn is_modifier(c: char) -> bool {
    is_variation_selector(c)
        || matches!(c, '\u{1F3FB}'..='\u{1F3FF}' | '\u{20E3}' | '\u{E0020}'..='\u{E007F}')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmojiEntry {
    pub codepoints: Vec<char>,
    pub category: EmotionCategory,
    pub score: i8,
}

impl EmojiEntry {
    pub fn new(codepoints: Vec<char>, category: EmotionCategory, score: i8) -> Result<Self> {
        let codepoints: Vec<char> = codepoints
            .into_iter()
            .filter(|c| !is_variation_selector(*c))
            .collect();
        if codepoints.is_empty() {
            return Err(Error::InvalidArgument("emoji has no codepoints".into()));
        }
        if score == 0 || score.unsigned_abs() > MAX_SCORE as u8 {
            return Err(Error::InvalidArgument(format!(
                "score {score} outside -5..=-1, 1..=5"
            )));
        }
        Ok(EmojiEntry {
            codepoints,
            category,
            score,
        })
    }

    pub fn as_string(&self) -> String {
        self.codepoints.iter().collect()
    }

    /// Unsigned contribution to the category total.
    pub fn weight(&self) -> u32 {
        self.score.unsigned_abs() as u32
    }
}

#[derive(Debug, Default, Clone)]
struct TrieNode {
    children: HashMap<char, usize>,
    entry: Option<usize>,
}

/// One lexicon match in a text: byte span (including consumed modifiers
/// and ZWJ continuations) and the matched entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmojiMatch {
    pub start: usize,
    pub end: usize,
    pub entry: usize,
}

/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<EmojiEntry>,
    trie: Vec<TrieNode>,
    longest_len: usize,
}

impl PartialEq for Lexicon {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            entries: Vec::new(),
            trie: vec![TrieNode::default()],
            longest_len: 0,
        }
    }
}

const BUNDLED: &str = include_str!("../data/lexicon.tsv");

impl Lexicon {
    /// The lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Lexicon::parse(BUNDLED, Path::new("lexicon.tsv")).expect("bundled lexicon is valid")
    }

    pub fn from_entries(entries: Vec<EmojiEntry>) -> Result<Self> {
        let mut lex = Lexicon::default();
        for e in entries {
            if lex.insert(e.clone()).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate emoji `{}`",
                    e.as_string()
                )));
            }
        }
        Ok(lex)
    }

    /// Inserts an entry, returning the index of an existing entry with the
    /// same codepoints instead if there is one.
    fn insert(&mut self, entry: EmojiEntry) -> Option<usize> {
        let mut node = 0;
        for &c in &entry.codepoints {
            node = match self.trie[node].children.get(&c) {
                Some(&n) => n,
                None => {
                    self.trie.push(TrieNode::default());
                    let n = self.trie.len() - 1;
                    self.trie[node].children.insert(c, n);
                    n
                }
            };
        }
        if let Some(existing) = self.trie[node].entry {
            return Some(existing);
        }
        self.longest_len = self.longest_len.max(entry.codepoints.len());
        self.trie[node].entry = Some(self.entries.len());
        self.entries.push(entry);
        None
    }

    /// Parses lexicon TSV. `origin` is only used in error messages.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut lex = Lexicon::default();
        let mut first_line: Vec<usize> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
            }
            let codepoints = parse_emoji_field(fields[0])
                .map_err(|msg| Error::parse(origin, lineno, msg))?;
            let category: EmotionCategory = fields[1]
                .parse()
                .map_err(|e: Error| Error::parse(origin, lineno, e.to_string()))?;
            let score: i8 = fields[2].trim().parse().map_err(|_| {
                Error::parse(origin, lineno, format!("invalid score `{}`", fields[2]))
            })?;
            if score == 0 || score.unsigned_abs() > MAX_SCORE as u8 {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("score {score} out of range (must be in -5..=5 and nonzero)"),
                ));
            }
            let entry = EmojiEntry::new(codepoints, category, score)
                .map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
            let key = entry.as_string();
            if let Some(existing) = lex.insert(entry) {
                return Err(Error::Duplicate {
                    path: origin.to_path_buf(),
                    line: lineno,
                    first: first_line[existing],
                    what: "emoji",
                    key,
                });
            }
            first_line.push(lineno);
        }
        Ok(lex)
    }

    /// Serializes to TSV with emoji literals; `parse` of the output yields
    /// an equal lexicon.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# emoji\tcategory\tscore\n");
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}", e.as_string(), e.category, e.score);
        }
        out
    }

    pub fn entries(&self) -> &[EmojiEntry] {
        &self.entries
    }

    pub fn entry(&self, idx: usize) -> &EmojiEntry {
        &self.entries[idx]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Maximum codepoint-sequence length among entries (0 when empty).
    pub fn longest_len(&self) -> usize {
        self.longest_len
    }

    pub fn get(&self, emoji: &str) -> Option<&EmojiEntry> {
        let mut node = 0;
        for c in emoji.chars().filter(|c| !is_variation_selector(*c)) {
            node = *self.trie[node].children.get(&c)?;
        }
        self.trie[node].entry.map(|i| &self.entries[i])
    }

    /// All matches, left to right, greedy longest match at each position.
    pub fn find_matches(&self, text: &str) -> Vec<EmojiMatch> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            match self.longest_match_at(&chars, i) {
                Some((entry, end)) => {
                    let end = consume_continuations(&chars, end);
                    out.push(EmojiMatch {
                        start: byte_at(i),
                        end: byte_at(end),
                        entry,
                    });
                    i = end;
                }
                None => i += 1,
            }
        }
        out
    }

    /// Walks the trie from `start`; returns the entry and the char index
    /// just past the longest complete match.
    fn longest_match_at(&self, chars: &[(usize, char)], start: usize) -> Option<(usize, usize)> {
        let mut node = 0;
        let mut best = None;
        let mut i = start;
        while i < chars.len() {
            let c = chars[i].1;
            if i > start && is_variation_selector(c) {
                i += 1;
                continue;
            }
            match self.trie[node].children.get(&c) {
                Some(&n) => node = n,
                None => break,
            }
            i += 1;
            if let Some(e) = self.trie[node].entry {
                best = Some((e, i));
            }
        }
        best
    }
}

/// Skips modifiers and `ZWJ <glyph>` continuations following a match.
fn consume_continuations(chars: &[(usize, char)], mut i: usize) -> usize {
    loop {
        match chars.get(i).map(|&(_, c)| c) {
            Some(c) if is_modifier(c) => i += 1,
            Some(ZWJ) => {
                i += 1;
                if i < chars.len() && !chars[i].1.is_whitespace() {
                    i += 1;
                }
            }
            _ => return i,
        }
    }
}

fn parse_emoji_field(field: &str) -> std::result::Result<Vec<char>, String> {
    let field = field.trim_matches(' ');
    if field.is_empty() {
        return Err("empty emoji field".into());
    }
    let looks_like_codepoints = field
        .get(..2)
        .is_some_and(|p| p.eq_ignore_ascii_case("U+"));
    if !looks_like_codepoints {
        return Ok(field.chars().collect());
    }
    field
        .split_whitespace()
        .map(|tok| {
            let hex = tok
                .get(2..)
                .filter(|_| tok[..2].eq_ignore_ascii_case("U+"))
                .ok_or_else(|| format!("expected U+XXXX codepoint, found `{tok}`"))?;
            let v = u32::from_str_radix(hex, 16)
                .map_err(|_| format!("invalid hex codepoint `{tok}`"))?;
            char::from_u32(v).ok_or_else(|| format!("`{tok}` is not a Unicode scalar value"))
        })
        .collect()
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Lexicon::parse(&text, path)
}

/// Every lexicon occurrence in `text`, in order, repeats included.
pub fn extract_emojis<'a>(text: &str, lex: &'a Lexicon) -> Vec<&'a EmojiEntry> {
    lex.find_matches(text)
        .into_iter()
        .map(|m| lex.entry(m.entry))
        .collect()
}

/// Removes every lexicon occurrence (with its modifiers). Repeats until no
/// match remains, since a removal can bring the pieces of a longer
/// sequence together.
pub fn strip_emojis(text: &str, lex: &Lexicon) -> String {
    let mut current = text.to_string();
    loop {
        let matches = lex.find_matches(&current);
        if matches.is_empty() {
            return current;
        }
        let mut out = String::with_capacity(current.len());
        let mut last = 0;
        for m in &matches {
            out.push_str(&current[last..m.start]);
            last = m.end;
        }
        out.push_str(&current[last..]);
        current = out;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use EmotionCategory::*;

    fn lex(rows: &str) -> Lexicon {
        Lexicon::parse(rows, Path::new("test.tsv")).unwrap()
    }

    fn toy() -> Lexicon {
        lex("😊\tjoy\t3\n💔\tsadness\t-3\n😡\tanger\t-5\n")
    }

    #[test]
    fn bundled_lexicon_covers_every_category() {
        let lex = Lexicon::bundled();
        for c in EmotionCategory::ALL {
            assert!(lex.entries().iter().filter(|e| e.category == c).count() >= 10);
        }
    }

    #[test]
    fn parses_broken_heart_row() {
        let l = lex("💔\tsadness\t-3\n");
        assert_eq!(l.len(), 1);
        let e = &l.entries()[0];
        assert_eq!(e.codepoints, vec!['\u{1F494}']);
        assert_eq!(e.category, Sadness);
        assert_eq!(e.score, -3);
    }

    #[test]
    fn parses_codepoint_notation_and_comments() {
        let l = lex("# comment\nU+1F494\tSadness\t-3\nu+1F468 U+200D U+1F469\tjoy\t2\n");
        assert_eq!(l.len(), 2);
        assert_eq!(l.entries()[1].codepoints, vec!['\u{1F468}', ZWJ, '\u{1F469}']);
        assert_eq!(l.longest_len(), 3);
    }

    #[test]
    fn empty_file_is_empty_lexicon() {
        let l = lex("");
        assert!(l.is_empty());
        assert_eq!(l.longest_len(), 0);
    }

    #[test]
    fn duplicate_rows_rejected() {
        let err = Lexicon::parse("😊\tjoy\t3\n😊\tjoy\t2\n", Path::new("x")).unwrap_err();
        assert!(matches!(err, Error::Duplicate { line: 2, first: 1, .. }), "{err}");
        // a trailing variation selector does not make a distinct entry
        let err = Lexicon::parse("❤\tjoy\t3\n❤\u{FE0F}\tjoy\t3\n", Path::new("x")).unwrap_err();
        assert!(matches!(err, Error::Duplicate { .. }));
    }

    #[test]
    fn bad_rows_report_line_numbers() {
        for (rows, line) in [
            ("😊\tjoy\t3\n😡\tanger\n", 2),
            ("😊\tjoy\t6\n", 1),
            ("😊\tjoy\t0\n", 1),
            ("\n😊\tfear\t-2\n", 2),
            ("U+ZZZZ\tjoy\t1\n", 1),
            ("😊\tjoy\tthree\n", 1),
        ] {
            match Lexicon::parse(rows, Path::new("x")) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{rows:?}"),
                other => panic!("expected parse error for {rows:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn extracts_in_order_with_repeats() {
        let l = toy();
        let got: Vec<(EmotionCategory, i8)> = extract_emojis("x 😊😊💔 y", &l)
            .into_iter()
            .map(|e| (e.category, e.score))
            .collect();
        assert_eq!(got, vec![(Joy, 3), (Joy, 3), (Sadness, -3)]);
        assert!(extract_emojis("no emojis here 🙃", &l).is_empty());
    }

    #[test]
    fn zwj_family_sequence_is_one_occurrence() {
        // 👨 is in the lexicon, the family sequence is not; the whole
        // sequence is consumed as a single occurrence of 👨.
        let l = lex("👨\tjoy\t2\n👩\tsadness\t-2\n😊\tjoy\t3\n");
        let text = "a 👨\u{200D}👩\u{200D}👧\u{200D}👦 b";
        let m = l.find_matches(text);
        assert_eq!(m.len(), 1);
        assert_eq!(l.entry(m[0].entry).as_string(), "👨");
        assert_eq!(&text[m[0].start..m[0].end], "👨\u{200D}👩\u{200D}👧\u{200D}👦");
    }

    #[test]
    fn longest_match_wins_over_prefix_entry() {
        let l = lex("👨\tjoy\t2\nU+1F468 U+200D U+1F4BB\tanger\t-1\n😊\tjoy\t3\n");
        let got: Vec<String> = extract_emojis("👨\u{200D}💻 👨", &l)
            .into_iter()
            .map(|e| e.as_string())
            .collect();
        assert_eq!(got, vec!["👨\u{200D}💻".to_string(), "👨".to_string()]);
    }

    #[test]
    fn skin_tone_and_selectors_are_consumed() {
        let l = lex("👍\tjoy\t2\n❤\tjoy\t3\n");
        let text = "👍🏽 ❤\u{FE0F}";
        let m = l.find_matches(text);
        assert_eq!(m.len(), 2);
        assert_eq!(strip_emojis(text, &l), " ");
    }

    #[test]
    fn strip_examples() {
        let l = toy();
        assert_eq!(strip_emojis("مبروك 😊", &l), "مبروك ");
        assert_eq!(strip_emojis("plain text", &l), "plain text");
    }

    #[test]
    fn strip_reaches_fixpoint_when_removal_joins_a_sequence() {
        let l = lex("U+1F468 U+200D U+1F469\tjoy\t2\n😊\tjoy\t3\n");
        let text = "👨\u{200D}😊👩";
        let stripped = strip_emojis(text, &l);
        assert!(extract_emojis(&stripped, &l).is_empty(), "{stripped:?}");
    }

    #[test]
    fn tsv_round_trip() {
        let l = lex("😊\tjoy\t3\nU+1F468 U+200D U+1F4BB\tanger\t-1\n💔\tSADNESS\t-3\n");
        let again = Lexicon::parse(&l.to_tsv(), Path::new("rt")).unwrap();
        assert_eq!(l, again);
    }
}
