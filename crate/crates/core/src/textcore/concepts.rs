use std::collections::BTreeSet;

use super::normalize::Normalizer;
use crate::error::{Error, Result};

/// The generalized request: distinct key-concept lemmas, kept in sorted order
/// so seeded draws are reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyConceptSet {
    concepts: Vec<String>,
}

impl KeyConceptSet {
    pub fn new<I, S>(lemmas: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = lemmas.into_iter().map(Into::into).collect();
        if set.iter().any(String::is_empty) {
            return Err(Error::Argument("empty key concept".into()));
        }
        if set.is_empty() {
            return Err(Error::Argument("key concept set is empty".into()));
        }
        Ok(KeyConceptSet {
            concepts: set.into_iter().collect(),
        })
    }

    /// One concept per line. Lines that normalize to nothing are skipped and
    /// duplicates after normalization collapse.
    pub fn parse(text: &str, normalizer: &Normalizer) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match normalizer.lemma(line) {
                Ok(Some(lemma)) => {
                    if !set.insert(lemma.clone()) {
                        log::warn!("key concepts line {}: duplicate concept {lemma:?}", idx + 1);
                    }
                }
                Ok(None) => log::warn!("key concepts line {}: {line:?} normalizes to nothing", idx + 1),
                Err(e) => return Err(Error::parse("key concepts", idx + 1, e.to_string())),
            }
        }
        if set.is_empty() {
            return Err(Error::parse("key concepts", 0, "no key concepts"));
        }
        Ok(KeyConceptSet {
            concepts: set.into_iter().collect(),
        })
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.concepts.binary_search_by(|c| c.as_str().cmp(lemma)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_dedups_after_normalization() {
        let q = KeyConceptSet::parse("Mines\nmine\n\n# note\ncoal\nthe\n", &Normalizer::english())
            .unwrap();
        assert_eq!(q.concepts(), &["coal".to_string(), "mine".to_string()]);
        assert!(q.contains("mine"));
        assert!(!q.contains("pit"));
    }

    #[test]
    fn empty_is_error() {
        assert!(KeyConceptSet::parse("the\n", &Normalizer::english()).is_err());
        assert!(KeyConceptSet::new(Vec::<String>::new()).is_err());
        assert!(KeyConceptSet::parse("coal mine\n", &Normalizer::english()).is_err());
    }
}
