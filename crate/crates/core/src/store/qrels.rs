use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graded relevance: 0 irrelevant, 1 and 2 partially relevant, 3 relevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Grade(u8);

impl Grade {
    pub const IRRELEVANT: Grade = Grade(0);
    pub const RELEVANT: Grade = Grade(3);

    pub fn new(value: u8) -> Result<Self> {
        if value <= 3 {
            Ok(Grade(value))
        } else {
            Err(Error::Argument(format!("grade {value} outside 0..=3")))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// 2^gr - 1.
    pub fn gain(self) -> f64 {
        f64::from((1u32 << self.0) - 1)
    }
}

impl TryFrom<u8> for Grade {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        Grade::new(value)
    }
}

impl From<Grade> for u8 {
    fn from(g: Grade) -> u8 {
        g.0
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// topic -> doc -> grade.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelevanceJudgments {
    grades: BTreeMap<String, BTreeMap<String, Grade>>,
}

impl RelevanceJudgments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, topic: &str, doc_id: &str, grade: Grade) {
        self.grades
            .entry(topic.to_string())
            .or_default()
            .insert(doc_id.to_string(), grade);
    }

    /// Rows are `topic_id<TAB>doc_id<TAB>grade`; blank lines and `#` comments
    /// are skipped. Judgments for documents outside the corpus are kept.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut out = RelevanceJudgments::new();
        for (idx, line) in text.lines().enumerate() {
            let row = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 3 || fields[0].is_empty() || fields[1].is_empty() {
                return Err(Error::parse(
                    "qrels",
                    row,
                    "expected topic_id<TAB>doc_id<TAB>grade",
                ));
            }
            let grade: i64 = fields[2]
                .parse()
                .map_err(|e| Error::parse("qrels", row, format!("grade {:?}: {e}", fields[2])))?;
            let grade = u8::try_from(grade)
                .ok()
                .and_then(|g| Grade::new(g).ok())
                .ok_or(Error::GradeRange { row, grade })?;
            if out.get(fields[0], fields[1]).is_some() {
                log::warn!("qrels row {row}: ({}, {}) judged twice, keeping the later grade", fields[0], fields[1]);
            }
            out.insert(fields[0], fields[1], grade);
        }
        if out.is_empty() {
            log::warn!("relevance judgments are empty");
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text)
    }

    pub fn get(&self, topic: &str, doc_id: &str) -> Option<Grade> {
        self.grades.get(topic)?.get(doc_id).copied()
    }

    pub fn topic(&self, topic: &str) -> Option<&BTreeMap<String, Grade>> {
        self.grades.get(topic)
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.grades.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.grades.values().all(BTreeMap::is_empty)
    }

    pub fn len(&self) -> usize {
        self.grades.values().map(BTreeMap::len).sum()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (topic, docs) in &self.grades {
            for (doc, grade) in docs {
                out.push_str(&format!("{topic}\t{doc}\t{grade}\n"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn relevant_grade_stored() {
        let q = RelevanceJudgments::parse_tsv("t1\td1\t3\n").unwrap();
        assert_eq!(q.get("t1", "d1"), Some(Grade::RELEVANT));
    }

    #[test]
    fn out_of_range_rows() {
        let err = RelevanceJudgments::parse_tsv("t\ta\t1\nt\tb\t5\n").unwrap_err();
        assert!(matches!(err, Error::GradeRange { row: 2, grade: 5 }), "{err}");
        let err = RelevanceJudgments::parse_tsv("t\ta\t4\n").unwrap_err();
        assert!(matches!(err, Error::GradeRange { row: 1, grade: 4 }), "{err}");
        let err = RelevanceJudgments::parse_tsv("t\ta\t-1\n").unwrap_err();
        assert!(matches!(err, Error::GradeRange { row: 1, .. }), "{err}");
        assert!(RelevanceJudgments::parse_tsv("t\ta\tx\n").is_err());
        assert!(RelevanceJudgments::parse_tsv("t a 1\n").is_err());
    }

    #[test]
    fn empty_file_is_empty() {
        assert!(RelevanceJudgments::parse_tsv("").unwrap().is_empty());
    }

    #[test]
    fn grade_serde_rejects_out_of_range() {
        assert!(serde_json::from_str::<Grade>("3").is_ok());
        assert!(serde_json::from_str::<Grade>("4").is_err());
    }

    proptest! {
        #[test]
        fn stored_grades_in_range(rows in proptest::collection::vec((0u8..3, 0u8..20, -2i64..7), 0..40)) {
            let text: String = rows
                .iter()
                .map(|(t, d, g)| format!("t{t}\td{d}\t{g}\n"))
                .collect();
            match RelevanceJudgments::parse_tsv(&text) {
                Ok(q) => {
                    prop_assert!(rows.iter().all(|r| (0..=3).contains(&r.2)));
                    for topic in q.topics() {
                        for g in q.topic(topic).unwrap().values() {
                            prop_assert!(g.value() <= 3);
                        }
                    }
                }
                Err(Error::GradeRange { grade, .. }) => prop_assert!(!(0..=3).contains(&grade)),
                Err(e) => prop_assert!(false, "unexpected {}", e),
            }
        }
    }
}
