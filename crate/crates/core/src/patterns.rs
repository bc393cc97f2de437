//! Reference texts (k-patterns) and pattern-based re-ranking.
//!
//! Four patterns are built from the filtered result set:
//!
//! * `p_ka`: the top `top_k` kept documents concatenated,
//! * `p_kb`: authority-dictionary definitions of the key concepts,
//! * `p_kc`: the single top kept document,
//! * `p_kd`: the key concepts themselves.
//!
//! Every kept document is compared to every present pattern, giving the
//! similarity matrix that the rankings and the GA's `s` factor read from.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::MergedResultSet;
use crate::error::{Error, Result};
use crate::store::Corpus;
use crate::textcore::{AuthorityDictionary, KeyConceptSet, TokenText};
use crate::vsm::{cosine, DocVector, VectorIndex};

pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PatternKind {
    #[serde(rename = "p_ka")]
    Ka,
    #[serde(rename = "p_kb")]
    Kb,
    #[serde(rename = "p_kc")]
    Kc,
    #[serde(rename = "p_kd")]
    Kd,
}

impl PatternKind {
    pub const ALL: [PatternKind; 4] = [PatternKind::Ka, PatternKind::Kb, PatternKind::Kc, PatternKind::Kd];

    pub fn label(self) -> &'static str {
        match self {
            PatternKind::Ka => "p_ka",
            PatternKind::Kb => "p_kb",
            PatternKind::Kc => "p_kc",
            PatternKind::Kd => "p_kd",
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PatternKind {
    type Err = Error;

    /// Accepts `p_ka` or the short form `ka`.
    fn from_str(s: &str) -> Result<Self> {
        let short = s.strip_prefix("p_").unwrap_or(s);
        match short {
            "ka" => Ok(PatternKind::Ka),
            "kb" => Ok(PatternKind::Kb),
            "kc" => Ok(PatternKind::Kc),
            "kd" => Ok(PatternKind::Kd),
            _ => Err(Error::Config(format!("unknown pattern {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KPattern {
    pub vector: DocVector,
    /// Documents, dictionary terms or concepts the pattern was built from.
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KPatternSet {
    pub ka: Option<KPattern>,
    pub kb: Option<KPattern>,
    pub kc: Option<KPattern>,
    pub kd: KPattern,
}

impl KPatternSet {
    pub fn get(&self, kind: PatternKind) -> Option<&KPattern> {
        match kind {
            PatternKind::Ka => self.ka.as_ref(),
            PatternKind::Kb => self.kb.as_ref(),
            PatternKind::Kc => self.kc.as_ref(),
            PatternKind::Kd => Some(&self.kd),
        }
    }

    fn get_mut(&mut self, kind: PatternKind) -> Option<&mut KPattern> {
        match kind {
            PatternKind::Ka => self.ka.as_mut(),
            PatternKind::Kb => self.kb.as_mut(),
            PatternKind::Kc => self.kc.as_mut(),
            PatternKind::Kd => Some(&mut self.kd),
        }
    }

    pub fn present(&self) -> Vec<PatternKind> {
        PatternKind::ALL
            .into_iter()
            .filter(|&k| self.get(k).is_some())
            .collect()
    }

    /// Copy with one pattern's vector multiplied by `alpha`.
    pub fn with_scaled(&self, kind: PatternKind, alpha: f64) -> Self {
        let mut out = self.clone();
        if let Some(p) = out.get_mut(kind) {
            if !p.vector.is_zero() {
                p.vector = p.vector.scaled(alpha);
            }
        }
        out
    }
}

/// Builds all four patterns. `kept` must be the filtered result set; its
/// merged-rating order decides which documents feed `p_ka` and `p_kc`.
pub fn build_kpatterns(
    kept: &MergedResultSet,
    corpus: &Corpus,
    q0: &KeyConceptSet,
    auth: &AuthorityDictionary,
    index: &VectorIndex,
    top_k: usize,
) -> Result<KPatternSet> {
    if top_k == 0 {
        return Err(Error::Argument("top_k must be >= 1".into()));
    }
    let order = kept.rated_order();
    let mut bodies = Vec::with_capacity(top_k.min(order.len()));
    for id in order.iter().take(top_k) {
        bodies.push(&corpus.require(id)?.body);
    }
    let ka = (!bodies.is_empty()).then(|| KPattern {
        vector: index.vectorize(&TokenText::concat(bodies.iter().copied())),
        provenance: order.iter().take(top_k).map(|s| s.to_string()).collect(),
    });
    let kc = match order.first() {
        Some(id) => Some(KPattern {
            vector: index.vectorize(&corpus.require(id)?.body),
            provenance: vec![id.to_string()],
        }),
        None => None,
    };
    let used: Vec<(&String, &TokenText)> = q0
        .concepts()
        .iter()
        .filter_map(|c| auth.get(c).map(|d| (c, d)))
        .collect();
    let kb = (!used.is_empty()).then(|| KPattern {
        vector: index.vectorize(&TokenText::concat(used.iter().map(|(_, d)| *d))),
        provenance: used.iter().map(|(c, _)| c.to_string()).collect(),
    });
    let kd = KPattern {
        vector: index.vectorize(&TokenText::from_lemmas(q0.concepts().iter().cloned())),
        provenance: q0.concepts().to_vec(),
    };
    Ok(KPatternSet { ka, kb, kc, kd })
}

/// Document × pattern cosine matrix over the kept result set.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: Vec<String>,
    cols: Vec<PatternKind>,
    values: Vec<Vec<f64>>,
}

/// Fills `M[d, k] = cosine(d, pattern_k)` for each kept document (in merged
/// rating order) and each present pattern.
pub fn similarity_matrix(
    kept: &MergedResultSet,
    corpus: &Corpus,
    pats: &KPatternSet,
    index: &VectorIndex,
) -> Result<SimilarityMatrix> {
    let rows: Vec<String> = kept.rated_order().into_iter().map(str::to_string).collect();
    let cols = pats.present();
    let values = rows
        .par_iter()
        .map(|id| {
            let owned;
            let v = match index.doc_vector_by_id(id) {
                Some(v) => v,
                None => {
                    owned = index.vectorize(&corpus.require(id)?.body);
                    &owned
                }
            };
            Ok(cols
                .iter()
                .map(|&k| cosine(v, &pats.get(k).expect("present pattern").vector))
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(SimilarityMatrix { rows, cols, values })
}

impl SimilarityMatrix {
    pub fn new(rows: Vec<String>, cols: Vec<PatternKind>, values: Vec<Vec<f64>>) -> Result<Self> {
        let bad = |m: String| Error::Invariant(format!("similarity matrix: {m}"));
        if values.len() != rows.len() {
            return Err(bad(format!("{} rows but {} value rows", rows.len(), values.len())));
        }
        let mut sorted_cols = cols.clone();
        sorted_cols.sort();
        sorted_cols.dedup();
        if sorted_cols.len() != cols.len() {
            return Err(bad("duplicate pattern column".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (id, row) in rows.iter().zip(&values) {
            if !seen.insert(id.as_str()) {
                return Err(bad(format!("duplicate row {id:?}")));
            }
            if row.len() != cols.len() {
                return Err(bad(format!("row {id:?} has {} values, expected {}", row.len(), cols.len())));
            }
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(bad(format!("row {id:?} has a value outside [0,1]")));
            }
        }
        Ok(SimilarityMatrix { rows, cols, values })
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[PatternKind] {
        &self.cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn row_of(&self, doc_id: &str) -> Option<&[f64]> {
        self.rows
            .iter()
            .position(|r| r == doc_id)
            .map(|i| self.values[i].as_slice())
    }

    /// Row lookup table for repeated access by `doc_id`.
    pub fn row_map(&self) -> BTreeMap<&str, &[f64]> {
        self.rows
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().map(Vec::as_slice))
            .collect()
    }

    pub fn col_index(&self, kind: PatternKind) -> Option<usize> {
        self.cols.iter().position(|&k| k == kind)
    }

    pub fn value(&self, doc_id: &str, kind: PatternKind) -> Option<f64> {
        let c = self.col_index(kind)?;
        self.row_of(doc_id).map(|r| r[c])
    }

    /// `doc_id` then one column per present pattern; values use Rust's
    /// shortest round-trip float formatting.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("doc_id");
        for k in &self.cols {
            out.push('\t');
            out.push_str(k.label());
        }
        out.push('\n');
        for (id, row) in self.rows.iter().zip(&self.values) {
            out.push_str(id);
            for v in row {
                out.push('\t');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((_, header)) = lines.next() else {
            return Err(Error::parse("matrix", 1, "missing header"));
        };
        let mut fields = header.split('\t');
        if fields.next() != Some("doc_id") {
            return Err(Error::parse("matrix", 1, "first column must be doc_id"));
        }
        let cols = fields
            .map(|f| f.parse::<PatternKind>())
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::parse("matrix", 1, e.to_string()))?;
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in lines {
            let mut fields = line.split('\t');
            let id = fields.next().unwrap_or_default();
            if id.is_empty() {
                return Err(Error::parse("matrix", idx + 1, "empty doc_id"));
            }
            let row = fields
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::parse("matrix", idx + 1, e.to_string()))?;
            rows.push(id.to_string());
            values.push(row);
        }
        SimilarityMatrix::new(rows, cols, values)
    }
}

/// Nonnegative weights over patterns; scores are the weight-normalized sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PatternBlend(pub BTreeMap<PatternKind, f64>);

impl Default for PatternBlend {
    fn default() -> Self {
        PatternBlend::single(PatternKind::Ka)
    }
}

impl PatternBlend {
    pub fn single(kind: PatternKind) -> Self {
        PatternBlend(BTreeMap::from([(kind, 1.0)]))
    }

    /// Resolves the blend against matrix columns: `(column, weight / total)`.
    /// Zero weights on absent patterns are ignored; a positive weight on an
    /// absent pattern is an error.
    pub fn resolve(&self, cols: &[PatternKind]) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::new();
        let mut total = 0.0;
        for (&kind, &w) in &self.0 {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Config(format!("weight {w} on {kind} must be finite and >= 0")));
            }
            if w == 0.0 {
                continue;
            }
            let Some(c) = cols.iter().position(|&k| k == kind) else {
                return Err(Error::Config(format!("weight on absent pattern {kind}")));
            };
            out.push((c, w));
            total += w;
        }
        if total == 0.0 {
            return Err(Error::Config("pattern weights are all zero".into()));
        }
        for (_, w) in &mut out {
            *w /= total;
        }
        Ok(out)
    }

    pub fn score(resolved: &[(usize, f64)], row: &[f64]) -> f64 {
        resolved.iter().map(|&(c, w)| w * row[c]).sum::<f64>().clamp(0.0, 1.0)
    }
}

impl FromStr for PatternBlend {
    type Err = Error;

    /// `ka=1,kd=0.5`, or a bare pattern name for weight 1.
    fn from_str(s: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, w) = match part.split_once('=') {
                Some((k, w)) => (
                    k.trim(),
                    w.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("weight {w:?}: {e}")))?,
                ),
                None => (part, 1.0),
            };
            map.insert(k.parse::<PatternKind>()?, w);
        }
        if map.is_empty() {
            return Err(Error::Config("empty pattern blend".into()));
        }
        Ok(PatternBlend(map))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RankMode {
    Single(PatternKind),
    Weighted(PatternBlend),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRanking {
    pub label: String,
    /// `(doc_id, score)`, scores non-increasing, ties by `doc_id`.
    pub entries: Vec<(String, f64)>,
}

impl PatternRanking {
    pub fn doc_ids(&self) -> Vec<&str> {
        self.entries.iter().map(|(d, _)| d.as_str()).collect()
    }
}

pub fn rank_by(matrix: &SimilarityMatrix, mode: &RankMode) -> Result<PatternRanking> {
    let (label, resolved) = match mode {
        RankMode::Single(kind) => {
            let c = matrix
                .col_index(*kind)
                .ok_or_else(|| Error::Config(format!("pattern {kind} is absent")))?;
            (kind.label().to_string(), vec![(c, 1.0)])
        }
        RankMode::Weighted(blend) => {
            let resolved = blend.resolve(matrix.cols())?;
            let label = blend
                .0
                .iter()
                .filter(|(_, &w)| w > 0.0)
                .map(|(k, w)| format!("{k}={w}"))
                .collect::<Vec<_>>()
                .join(",");
            (label, resolved)
        }
    };
    let mut entries: Vec<(String, f64)> = matrix
        .rows
        .iter()
        .zip(&matrix.values)
        .map(|(id, row)| (id.clone(), PatternBlend::score(&resolved, row)))
        .collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(PatternRanking { label, entries })
}
