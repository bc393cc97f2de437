//! Ranking quality: DCG, ideal DCG (Z), NDCG and per-pattern reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patterns::PatternRanking;
use crate::store::{Grade, RelevanceJudgments};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscountMode {
    /// `1 / log2(rank + 1)`
    #[default]
    Standard,
    /// `1 / log2(rank + 2)`
    PaperOneBased,
}

impl DiscountMode {
    pub fn discount(self, rank: usize) -> f64 {
        let r = rank as f64;
        match self {
            DiscountMode::Standard => 1.0 / (r + 1.0).log2(),
            DiscountMode::PaperOneBased => 1.0 / (r + 2.0).log2(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DiscountMode::Standard => "standard",
            DiscountMode::PaperOneBased => "paper-one-based",
        }
    }
}

impl fmt::Display for DiscountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DiscountMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(DiscountMode::Standard),
            "paper-one-based" => Ok(DiscountMode::PaperOneBased),
            _ => Err(Error::Config(format!("unknown discount mode {s:?}"))),
        }
    }
}

/// Checks raw grade values; the error names the 1-based position.
pub fn grades_from_values(values: &[i64]) -> Result<Vec<Grade>> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            u8::try_from(v)
                .ok()
                .and_then(|b| Grade::new(b).ok())
                .ok_or(Error::GradeRange { row: i + 1, grade: v })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedRanking {
    pub topic_id: String,
    pub items: Vec<(String, Grade)>,
}

impl GradedRanking {
    pub fn new(topic_id: &str, items: Vec<(String, Grade)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (d, _) in &items {
            if !seen.insert(d.as_str()) {
                return Err(Error::Argument(format!("document {d:?} ranked twice")));
            }
        }
        Ok(GradedRanking {
            topic_id: topic_id.to_string(),
            items,
        })
    }

    pub fn grades(&self) -> Vec<Grade> {
        self.items.iter().map(|(_, g)| *g).collect()
    }
}

/// Running DCG after each position.
pub fn dcg_curve(grades: &[Grade], mode: DiscountMode) -> Vec<f64> {
    let mut acc = 0.0;
    grades
        .iter()
        .enumerate()
        .map(|(i, g)| {
            acc += g.gain() * mode.discount(i + 1);
            acc
        })
        .collect()
}

pub fn dcg(grades: &[Grade], mode: DiscountMode) -> f64 {
    dcg_curve(grades, mode).last().copied().unwrap_or(0.0)
}

fn sorted_desc(grades: &[Grade]) -> Vec<Grade> {
    let mut g = grades.to_vec();
    g.sort_by(|a, b| b.cmp(a));
    g
}

/// Z: the DCG of the grades in descending order.
pub fn ideal_dcg(grades: &[Grade], mode: DiscountMode) -> f64 {
    dcg(&sorted_desc(grades), mode)
}

/// `dcg / Z`, with `Z = 0` giving 1.
pub fn ndcg(grades: &[Grade], mode: DiscountMode) -> f64 {
    ndcg_against(grades, grades, mode)
}

/// NDCG where Z comes from `pool` (best `grades.len()` grades of it).
pub fn ndcg_against(grades: &[Grade], pool: &[Grade], mode: DiscountMode) -> f64 {
    let mut ideal = sorted_desc(pool);
    ideal.truncate(grades.len());
    let z = dcg(&ideal, mode);
    if z == 0.0 {
        return 1.0;
    }
    (dcg(grades, mode) / z).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternEval {
    pub label: String,
    pub dcg: f64,
    pub ndcg: f64,
    pub grades: Vec<u8>,
    pub cumulative_dcg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub topic: String,
    pub discount: DiscountMode,
    pub ideal_dcg: f64,
    pub ideal_curve: Vec<f64>,
    pub patterns: Vec<PatternEval>,
    /// Pattern labels by NDCG descending, ties by label.
    pub ordering: Vec<String>,
    /// Ranked documents without a judgment (scored as grade 0).
    pub unjudged: usize,
}

/// Scores every ranking against the topic's judgments. The ideal is taken
/// over the union of ranked documents.
pub fn evaluate_patterns(
    rankings: &[PatternRanking],
    judgments: &RelevanceJudgments,
    topic: &str,
    mode: DiscountMode,
) -> Result<EvalReport> {
    let judged = judgments
        .topic(topic)
        .filter(|t| !t.is_empty())
        .ok_or_else(|| Error::Evaluation(format!("no judged documents for topic {topic:?}")))?;
    let grade_of = |d: &str| judged.get(d).copied().unwrap_or(Grade::IRRELEVANT);
    let union: BTreeSet<&str> = rankings.iter().flat_map(|r| r.doc_ids()).collect();
    let unjudged = union.iter().filter(|d| !judged.contains_key(**d)).count();
    if unjudged > 0 {
        log::info!("{unjudged} ranked documents have no judgment for {topic:?}; scored as 0");
    }
    let pool: Vec<Grade> = union.iter().map(|d| grade_of(d)).collect();
    let depth = rankings.iter().map(|r| r.entries.len()).max().unwrap_or(0);
    let mut ideal = sorted_desc(&pool);
    ideal.truncate(depth);

    let mut patterns = Vec::with_capacity(rankings.len());
    for r in rankings {
        let grades: Vec<Grade> = r.doc_ids().into_iter().map(grade_of).collect();
        let curve = dcg_curve(&grades, mode);
        patterns.push(PatternEval {
            label: r.label.clone(),
            dcg: curve.last().copied().unwrap_or(0.0),
            ndcg: ndcg_against(&grades, &pool, mode),
            grades: grades.iter().map(|g| g.value()).collect(),
            cumulative_dcg: curve,
        });
    }
    let mut ordering: Vec<(&str, f64)> = patterns.iter().map(|p| (p.label.as_str(), p.ndcg)).collect();
    ordering.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    let ordering = ordering.into_iter().map(|(l, _)| l.to_string()).collect();
    Ok(EvalReport {
        topic: topic.to_string(),
        discount: mode,
        ideal_dcg: dcg(&ideal, mode),
        ideal_curve: dcg_curve(&ideal, mode),
        patterns,
        ordering,
        unjudged,
    })
}

impl EvalReport {
    pub fn ndcg_of(&self, label: &str) -> Option<f64> {
        self.patterns.iter().find(|p| p.label == label).map(|p| p.ndcg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "topic {}  discount {}  ideal DCG {:.4}", self.topic, self.discount, self.ideal_dcg);
        let w = self.patterns.iter().map(|p| p.label.len()).max().unwrap_or(0).max("pattern".len());
        let _ = writeln!(out, "{:<w$}  {:>8}  {:>6}  {:>4}", "pattern", "DCG", "NDCG", "docs");
        for p in &self.patterns {
            let _ = writeln!(out, "{:<w$}  {:>8.4}  {:>6.4}  {:>4}", p.label, p.dcg, p.ndcg, p.grades.len());
        }
        let _ = writeln!(out, "order: {}", self.ordering.join(" > "));
        if self.unjudged > 0 {
            let _ = writeln!(out, "unjudged documents scored 0: {}", self.unjudged);
        }
        out
    }

    /// Position vs. cumulative DCG, one column per pattern plus the ideal.
    /// Shorter rankings repeat their final value.
    pub fn to_curve_tsv(&self) -> String {
        let mut out = String::from("position\tideal");
        for p in &self.patterns {
            out.push('\t');
            out.push_str(&p.label);
        }
        out.push('\n');
        let n = self
            .patterns
            .iter()
            .map(|p| p.cumulative_dcg.len())
            .chain([self.ideal_curve.len()])
            .max()
            .unwrap_or(0);
        let at = |c: &[f64], i: usize| c.get(i).or(c.last()).copied().unwrap_or(0.0);
        for i in 0..n {
            let _ = write!(out, "{}\t{}", i + 1, at(&self.ideal_curve, i));
            for p in &self.patterns {
                let _ = write!(out, "\t{}", at(&p.cumulative_dcg, i));
            }
            out.push('\n');
        }
        out
    }
}

/// Top-k Kendall distance (Fagin et al., penalty 0.5 for pairs that only one
/// list orders), normalized by the number of pairs in the union; 0 for
/// identical lists.
pub fn kendall_tau_distance(a: &[&str], b: &[&str]) -> f64 {
    let pos = |l: &[&str]| -> BTreeMap<String, usize> { l.iter().enumerate().map(|(i, d)| (d.to_string(), i)).collect() };
    let (pa, pb) = (pos(a), pos(b));
    let union: Vec<&String> = pa.keys().chain(pb.keys()).collect::<BTreeSet<_>>().into_iter().collect();
    let n = union.len();
    if n < 2 {
        return 0.0;
    }
    let mut penalty = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            let (i, j) = (union[x], union[y]);
            let (ai, aj, bi, bj) = (pa.get(i), pa.get(j), pb.get(i), pb.get(j));
            penalty += match (ai, aj, bi, bj) {
                (Some(ai), Some(aj), Some(bi), Some(bj)) => f64::from((ai < aj) != (bi < bj)),
                // both in one list, exactly one in the other: the present one
                // is implicitly ahead in the other list
                (Some(ai), Some(aj), Some(_), None) => f64::from(aj < ai),
                (Some(ai), Some(aj), None, Some(_)) => f64::from(ai < aj),
                (Some(_), None, Some(bi), Some(bj)) => f64::from(bj < bi),
                (None, Some(_), Some(bi), Some(bj)) => f64::from(bi < bj),
                // each in a different list only
                (Some(_), None, None, Some(_)) | (None, Some(_), Some(_), None) => 1.0,
                // both only in one list
                _ => 0.5,
            };
        }
    }
    penalty / (n * (n - 1) / 2) as f64
}
