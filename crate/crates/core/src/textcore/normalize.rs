use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");
const DEFAULT_STEM_RULES: &str = include_str!("../../data/stem_rules_en.tsv");

/// Normalized text: the lemma sequence every vector in the system is built from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenText {
    pub tokens: Vec<String>,
    /// Raw token count before stopword removal.
    pub source_length: usize,
}

impl TokenText {
    /// Wraps lemmas that are already normalized (query keywords, concept sets).
    pub fn from_lemmas<I, S>(lemmas: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = lemmas.into_iter().map(Into::into).collect();
        let source_length = tokens.len();
        TokenText {
            tokens,
            source_length,
        }
    }

    /// Concatenates several texts in order.
    pub fn concat<'a, I>(parts: I) -> Self
    where
        I: IntoIterator<Item = &'a TokenText>,
    {
        let mut out = TokenText::default();
        for part in parts {
            out.tokens.extend(part.tokens.iter().cloned());
            out.source_length += part.source_length;
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-'
}

fn canonical_entry(raw: &str) -> String {
    let lower = raw.nfc().collect::<String>().to_lowercase();
    lower.nfc().collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordSet {
    words: BTreeSet<String>,
}

impl StopwordSet {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopwordSet {
            words: words
                .into_iter()
                .map(|w| canonical_entry(w.as_ref()))
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    /// One lemma per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut words = BTreeSet::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.chars().any(char::is_whitespace) {
                return Err(Error::parse("stopwords", idx + 1, "entry contains whitespace"));
            }
            words.insert(canonical_entry(line));
        }
        Ok(StopwordSet { words })
    }

    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS).expect("bundled stopword list is valid")
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

/// Replace `suffix` with `replacement` when at least `min_stem` characters remain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemRule {
    pub suffix: String,
    pub replacement: String,
    pub min_stem: usize,
}

impl StemRule {
    pub fn new(suffix: &str, replacement: &str, min_stem: usize) -> Result<Self> {
        let valid = |s: &str| s.chars().all(is_token_char) && s == s.to_lowercase();
        if suffix.is_empty() || !valid(suffix) || !valid(replacement) {
            return Err(Error::Argument(format!(
                "stem rule {suffix:?} -> {replacement:?}: expected lowercase letters, digits or hyphens"
            )));
        }
        if min_stem == 0 {
            return Err(Error::Argument(format!("stem rule {suffix:?}: min_stem must be >= 1")));
        }
        let shrinks = replacement.chars().count() < suffix.chars().count();
        if !shrinks && replacement != suffix {
            return Err(Error::Argument(format!(
                "stem rule {suffix:?} -> {replacement:?}: replacement must be shorter than the suffix or equal to it"
            )));
        }
        Ok(StemRule {
            suffix: suffix.to_string(),
            replacement: replacement.to_string(),
            min_stem,
        })
    }

    /// A rule that matches but leaves the token alone, halting further stemming.
    pub fn is_stop(&self) -> bool {
        self.suffix == self.replacement
    }

    fn matches(&self, token: &str) -> bool {
        token.ends_with(&self.suffix)
            && token.chars().count() - self.suffix.chars().count() >= self.min_stem
    }
}

/// Ordered suffix-strip table, applied until no rule fires.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StemRules {
    rules: Vec<StemRule>,
}

impl StemRules {
    pub fn new(rules: Vec<StemRule>) -> Self {
        StemRules { rules }
    }

    /// Parses `suffix<TAB>replacement<TAB>min_stem` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    "stem rules",
                    line_no,
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
            }
            let min_stem = fields[2]
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::parse("stem rules", line_no, format!("min_stem: {e}")))?;
            let rule = StemRule::new(fields[0].trim(), fields[1].trim(), min_stem)
                .map_err(|e| Error::parse("stem rules", line_no, e.to_string()))?;
            rules.push(rule);
        }
        Ok(StemRules { rules })
    }

    pub fn english() -> Self {
        Self::parse(DEFAULT_STEM_RULES).expect("bundled stem rules are valid")
    }

    pub fn rules(&self) -> &[StemRule] {
        &self.rules
    }

    /// Reduces a token to its fixpoint under the rule table. Leading and
    /// trailing hyphens are trimmed at every step.
    pub fn stem(&self, token: &str) -> String {
        let mut current = token.trim_matches('-').to_string();
        loop {
            if current.is_empty() {
                return current;
            }
            let Some(rule) = self.rules.iter().find(|r| r.matches(&current)) else {
                return current;
            };
            if rule.is_stop() {
                return current;
            }
            current.truncate(current.len() - rule.suffix.len());
            current.push_str(&rule.replacement);
            let trimmed = current.trim_matches('-');
            if trimmed.len() != current.len() {
                current = trimmed.to_string();
            }
        }
    }
}

/// Stopwords plus stemming rules; the complete normalization configuration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Normalizer {
    stopwords: StopwordSet,
    rules: StemRules,
}

impl Normalizer {
    pub fn new(stopwords: StopwordSet, rules: StemRules) -> Self {
        Normalizer { stopwords, rules }
    }

    pub fn english() -> Self {
        Normalizer::new(StopwordSet::english(), StemRules::english())
    }

    pub fn stopwords(&self) -> &StopwordSet {
        &self.stopwords
    }

    pub fn rules(&self) -> &StemRules {
        &self.rules
    }

    /// NFC, case-fold, split on anything that is not a letter, digit or
    /// hyphen, drop stopwords, stem. Stems that land on a stopword are
    /// dropped as well, which keeps the function idempotent.
    pub fn normalize(&self, raw: &str) -> TokenText {
        let folded = canonical_entry(raw);
        let mut tokens = Vec::new();
        let mut source_length = 0;
        for piece in folded.split(|c: char| !is_token_char(c)) {
            let piece = piece.trim_matches('-');
            if piece.is_empty() {
                continue;
            }
            source_length += 1;
            if self.stopwords.contains(piece) {
                continue;
            }
            let stem = self.rules.stem(piece);
            if stem.is_empty() || self.stopwords.contains(&stem) {
                continue;
            }
            tokens.push(stem);
        }
        TokenText {
            tokens,
            source_length,
        }
    }

    pub fn normalize_bytes(&self, raw: &[u8]) -> Result<TokenText> {
        let text = std::str::from_utf8(raw).map_err(|e| Error::Decode {
            offset: e.valid_up_to(),
        })?;
        Ok(self.normalize(text))
    }

    /// Normalizes a dictionary or concept entry that must reduce to one lemma.
    /// Returns `None` when the entry vanishes entirely (a stopword, say).
    pub fn lemma(&self, raw: &str) -> Result<Option<String>> {
        let mut text = self.normalize(raw);
        match text.tokens.len() {
            0 => Ok(None),
            1 => Ok(text.tokens.pop()),
            n => Err(Error::Argument(format!(
                "{raw:?} normalizes to {n} tokens, expected a single lemma"
            ))),
        }
    }

    /// Hex SHA-256 of the stopword list and rule table.
    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"stopwords\n");
        for word in self.stopwords.iter() {
            hasher.update(word.as_bytes());
            hasher.update(b"\n");
        }
        hasher.update(b"rules\n");
        for rule in self.rules.rules() {
            hasher.update(format!("{}\t{}\t{}\n", rule.suffix, rule.replacement, rule.min_stem));
        }
        let mut out = String::with_capacity(64);
        for byte in hasher.finalize() {
            let _ = write!(out, "{byte:02x}");
        }
        out
    }
}

/// Free-function form of [`Normalizer::normalize`].
pub fn normalize(raw: &str, stopwords: &StopwordSet, rules: &StemRules) -> TokenText {
    Normalizer::new(stopwords.clone(), rules.clone()).normalize(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_input() {
        let n = Normalizer::english();
        assert_eq!(n.normalize(""), TokenText::default());
    }

    #[test]
    fn all_stopwords() {
        let sw = StopwordSet::new(["the"]);
        let out = normalize("The THE the", &sw, &StemRules::default());
        assert!(out.tokens.is_empty());
        assert_eq!(out.source_length, 3);
    }

    #[test]
    fn suffix_table_reduces_inflections() {
        let n = Normalizer::english();
        assert_eq!(
            n.normalize("searching searched searches").tokens,
            vec!["search", "search", "search"]
        );
    }

    #[test]
    fn punctuation_splits_and_hyphens_survive() {
        let n = Normalizer::english();
        let out = n.normalize("Coal-mining, (in) the EAST! --x-- 2013");
        assert_eq!(out.tokens, vec!["coal-min", "east", "x", "2013"]);
    }

    #[test]
    fn stop_rule_halts() {
        let n = Normalizer::english();
        assert_eq!(n.normalize("class status analysis").tokens, vec!["class", "status", "analysis"]);
    }

    #[test]
    fn min_stem_guards_short_words() {
        let n = Normalizer::english();
        assert_eq!(n.normalize("gas bed").tokens, vec!["gas", "bed"]);
    }

    #[test]
    fn decode_error_reports_offset() {
        let n = Normalizer::english();
        let err = n.normalize_bytes(b"abc\xffdef").unwrap_err();
        assert!(matches!(err, Error::Decode { offset: 3 }), "{err}");
    }

    #[test]
    fn nfc_folds_decomposed_input() {
        let n = Normalizer::new(StopwordSet::default(), StemRules::default());
        assert_eq!(n.normalize("Cafe\u{301}").tokens, n.normalize("CAFÉ").tokens);
    }

    #[test]
    fn rule_validation() {
        assert!(StemRule::new("", "", 1).is_err());
        assert!(StemRule::new("s", "xx", 1).is_err());
        assert!(StemRule::new("S", "", 1).is_err());
        assert!(StemRule::new("s", "", 0).is_err());
        assert!(StemRule::new("ss", "ss", 1).unwrap().is_stop());
        assert!(StemRules::parse("ing\t\n").is_err());
        assert!(StemRules::parse("ing\t\tx\n").is_err());
    }

    #[test]
    fn stemmed_stopword_is_dropped() {
        let sw = StopwordSet::new(["the"]);
        let rules = StemRules::new(vec![StemRule::new("s", "", 2).unwrap()]);
        let n = Normalizer::new(sw, rules);
        assert!(n.normalize("thes").tokens.is_empty());
        assert_eq!(n.normalize("thes").joined(), n.normalize(&n.normalize("thes").joined()).joined());
    }

    #[test]
    fn lemma_rejects_phrases() {
        let n = Normalizer::english();
        assert_eq!(n.lemma("Mines").unwrap().as_deref(), Some("mine"));
        assert_eq!(n.lemma("the").unwrap(), None);
        assert!(n.lemma("coal mine").is_err());
    }

    #[test]
    fn config_hash_tracks_rules() {
        let a = Normalizer::english();
        let b = Normalizer::new(StopwordSet::english(), StemRules::default());
        assert_eq!(a.config_hash(), Normalizer::english().config_hash());
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    proptest! {
        #[test]
        fn idempotent_on_joined_output(raw in "\\PC{0,80}") {
            let n = Normalizer::english();
            let once = n.normalize(&raw);
            let twice = n.normalize(&once.joined());
            prop_assert_eq!(&once.tokens, &twice.tokens);
            for t in &once.tokens {
                prop_assert!(!t.is_empty());
                prop_assert!(!n.stopwords().contains(t));
                prop_assert!(t.chars().all(|c| c.is_alphanumeric() || c == '-'));
            }
        }

        #[test]
        fn idempotent_on_ascii_words(words in proptest::collection::vec("[a-zA-Z-]{1,12}", 0..12)) {
            let n = Normalizer::english();
            let once = n.normalize(&words.join(" "));
            prop_assert_eq!(&once.tokens, &n.normalize(&once.joined()).tokens);
        }
    }
}
