use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Deserialize;

use super::normalize::{Normalizer, TokenText};
use crate::error::{Error, Result};

/// lemma -> synonym lemmas. Built from `lemma<TAB>syn1,syn2,...` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymDictionary {
    entries: BTreeMap<String, BTreeSet<String>>,
    symmetric_closure_applied: bool,
}

impl SynonymDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `synonym` to `term`'s set. Self-links are ignored.
    pub fn insert(&mut self, term: &str, synonym: &str) {
        if term == synonym || term.is_empty() || synonym.is_empty() {
            return;
        }
        self.entries
            .entry(term.to_string())
            .or_default()
            .insert(synonym.to_string());
        if self.symmetric_closure_applied {
            self.entries
                .entry(synonym.to_string())
                .or_default()
                .insert(term.to_string());
        }
    }

    pub fn parse_tsv(text: &str, normalizer: &Normalizer) -> Result<Self> {
        let mut dict = SynonymDictionary::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let Some((head, tail)) = line.split_once('\t') else {
                return Err(Error::parse("synonyms", line_no, "missing TAB separator"));
            };
            let lemma = |raw: &str| {
                normalizer
                    .lemma(raw)
                    .map_err(|e| Error::parse("synonyms", line_no, e.to_string()))
            };
            let Some(term) = lemma(head)? else {
                continue;
            };
            for raw in tail.split(',') {
                if raw.trim().is_empty() {
                    continue;
                }
                if let Some(syn) = lemma(raw)? {
                    dict.insert(&term, &syn);
                }
            }
        }
        Ok(dict)
    }

    /// Makes the relation symmetric: s ∈ syn(t) ⇔ t ∈ syn(s).
    pub fn with_symmetric_closure(mut self) -> Self {
        let pairs: Vec<(String, String)> = self
            .entries
            .iter()
            .flat_map(|(t, syns)| syns.iter().map(move |s| (s.clone(), t.clone())))
            .collect();
        for (s, t) in pairs {
            self.entries.entry(s).or_default().insert(t);
        }
        self.symmetric_closure_applied = true;
        self
    }

    pub fn symmetric_closure_applied(&self) -> bool {
        self.symmetric_closure_applied
    }

    /// Stored synonyms of `term`; empty when the term has no entry.
    pub fn synonyms(&self, term: &str) -> BTreeSet<String> {
        self.get(term).cloned().unwrap_or_default()
    }

    pub fn get(&self, term: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(term).filter(|s| !s.is_empty())
    }

    pub fn entries(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every lemma reachable from `seeds` by following synonym links,
    /// seeds included.
    pub fn closure_of<'a, I>(&self, seeds: I) -> BTreeSet<String>
    where
        I: IntoIterator<Item = &'a String>,
    {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut queue: VecDeque<String> = VecDeque::new();
        for s in seeds {
            if seen.insert(s.clone()) {
                queue.push_back(s.clone());
            }
        }
        while let Some(term) = queue.pop_front() {
            if let Some(syns) = self.entries.get(&term) {
                for s in syns {
                    if seen.insert(s.clone()) {
                        queue.push_back(s.clone());
                    }
                }
            }
        }
        seen
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AuthorityRecord {
    term: String,
    definition: String,
}

/// Key concept -> reference definition text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuthorityDictionary {
    entries: BTreeMap<String, TokenText>,
}

impl AuthorityDictionary {
    /// JSONL of `{"term": ..., "definition": ...}`. Repeated terms have their
    /// definitions appended in file order.
    pub fn parse_jsonl(text: &str, normalizer: &Normalizer) -> Result<Self> {
        let mut entries: BTreeMap<String, TokenText> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let record: AuthorityRecord = serde_json::from_str(line)
                .map_err(|e| Error::parse("authority", line_no, e.to_string()))?;
            let term = normalizer
                .lemma(&record.term)
                .map_err(|e| Error::parse("authority", line_no, e.to_string()))?
                .ok_or_else(|| Error::parse("authority", line_no, "term normalizes to nothing"))?;
            let definition = normalizer.normalize(&record.definition);
            if definition.is_empty() {
                return Err(Error::parse("authority", line_no, "definition normalizes to nothing"));
            }
            match entries.get_mut(&term) {
                Some(existing) => *existing = TokenText::concat([&*existing, &definition]),
                None => {
                    entries.insert(term, definition);
                }
            }
        }
        Ok(AuthorityDictionary { entries })
    }

    pub fn insert(&mut self, term: String, definition: TokenText) -> Result<()> {
        if definition.is_empty() {
            return Err(Error::Argument(format!("empty definition for {term:?}")));
        }
        self.entries.insert(term, definition);
        Ok(())
    }

    pub fn get(&self, term: &str) -> Option<&TokenText> {
        self.entries.get(term)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = include_str!("../../data/synonyms_sample.tsv");

    fn assert_symmetric(dict: &SynonymDictionary) {
        for (t, syns) in dict.entries() {
            assert!(!syns.contains(t), "{t} lists itself");
            for s in syns {
                assert!(dict.synonyms(s).contains(t), "{s} -> {t} missing");
            }
        }
    }

    #[test]
    fn missing_term_is_empty() {
        let dict = SynonymDictionary::new();
        assert!(dict.synonyms("car").is_empty());
    }

    #[test]
    fn closure_is_symmetric() {
        let mut dict = SynonymDictionary::new();
        dict.insert("car", "auto");
        let dict = dict.with_symmetric_closure();
        assert_eq!(dict.synonyms("auto"), BTreeSet::from(["car".to_string()]));
        assert_symmetric(&dict);
    }

    #[test]
    fn sample_dictionary_lookup() {
        let dict = SynonymDictionary::parse_tsv(SAMPLE, &Normalizer::english()).unwrap();
        let expected: BTreeSet<String> =
            ["colliery", "pit", "quarry"].iter().map(|s| s.to_string()).collect();
        assert_eq!(dict.synonyms("mine"), expected);
        let closed = dict.with_symmetric_closure();
        assert_symmetric(&closed);
        assert_eq!(closed.synonyms("mine"), expected);
        assert!(closed.synonyms("pit").contains("mine"));
    }

    #[test]
    fn self_links_dropped() {
        let dict =
            SynonymDictionary::parse_tsv("mines\tmine,pit\n", &Normalizer::english()).unwrap();
        assert_eq!(dict.synonyms("mine"), BTreeSet::from(["pit".to_string()]));
    }

    #[test]
    fn malformed_lines() {
        let n = Normalizer::english();
        let err = SynonymDictionary::parse_tsv("# c\nmine pit\n", &n).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = SynonymDictionary::parse_tsv("mine\tcoal pit\n", &n).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn transitive_closure() {
        let mut dict = SynonymDictionary::new();
        dict.insert("a", "b");
        dict.insert("b", "c");
        dict.insert("x", "y");
        let seeds = vec!["a".to_string()];
        let got: Vec<String> = dict.closure_of(&seeds).into_iter().collect();
        assert_eq!(got, vec!["a", "b", "c"]);
    }

    #[test]
    fn authority_entries() {
        let n = Normalizer::english();
        let text = r#"{"term": "Mines", "definition": "An excavation for extracting coal."}
{"term": "mine", "definition": "A colliery."}
"#;
        let dict = AuthorityDictionary::parse_jsonl(text, &n).unwrap();
        assert_eq!(dict.len(), 1);
        assert_eq!(
            dict.get("mine").unwrap().tokens,
            vec!["excavation", "extract", "coal", "colliery"]
        );
        let err = AuthorityDictionary::parse_jsonl(r#"{"term":"x","definition":"the"}"#, &n)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(AuthorityDictionary::parse_jsonl("{", &n).is_err());
    }
}
