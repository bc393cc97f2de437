//! Query execution and result merging.
//!
//! A [`SearchBackend`] turns a keyword list into a ranked list of at most
//! `P` hits. The built-in [`OfflineBackend`] ranks corpus documents by
//! query–document cosine; external web engines plug in through
//! [`WebSearchAdapter`]. Per-query lists are merged into a
//! [`MergedResultSet`] that remembers where every document appeared.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::{Document, DocumentRecord};
use crate::textcore::{Normalizer, TokenText};
use crate::vsm::{cosine, VectorIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QueryId(pub u64);

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// An ordered list of `m` distinct keyword lemmas.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    pub id: QueryId,
    keywords: Vec<String>,
}

impl Query {
    pub fn new(id: QueryId, keywords: Vec<String>) -> Result<Self> {
        if keywords.is_empty() {
            return Err(Error::Argument("query needs at least one keyword".into()));
        }
        let mut seen = BTreeSet::new();
        for k in &keywords {
            if k.is_empty() || !seen.insert(k.as_str()) {
                return Err(Error::Argument(format!("invalid or repeated keyword {k:?}")));
            }
        }
        Ok(Query { id, keywords })
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub doc_id: String,
    /// 1-based position in the backend's list.
    pub rank: u32,
    pub backend_score: f64,
}

pub trait SearchBackend: Send + Sync {
    fn name(&self) -> &str;

    /// At most `budget` hits, ranks `1..=len`.
    fn search(&self, keywords: &[String], budget: usize) -> Result<Vec<SearchResult>>;
}

/// Runs `query` on `backend` with result budget `budget` (P).
pub fn execute(query: &Query, backend: &dyn SearchBackend, budget: usize) -> Result<Vec<SearchResult>> {
    if budget == 0 {
        return Err(Error::Argument("result budget P must be >= 1".into()));
    }
    let results = backend.search(query.keywords(), budget)?;
    if results.len() > budget {
        return Err(Error::Backend(format!(
            "{} returned {} results for budget {budget}",
            backend.name(),
            results.len()
        )));
    }
    Ok(results)
}

/// Ranks corpus documents by cosine between the keyword vector and the
/// document vector. Documents scoring 0 are not returned; ties go to the
/// smaller `doc_id`.
#[derive(Debug, Clone, Copy)]
pub struct OfflineBackend<'a> {
    index: &'a VectorIndex,
}

impl<'a> OfflineBackend<'a> {
    pub fn new(index: &'a VectorIndex) -> Self {
        OfflineBackend { index }
    }
}

impl SearchBackend for OfflineBackend<'_> {
    fn name(&self) -> &str {
        "offline"
    }

    fn search(&self, keywords: &[String], budget: usize) -> Result<Vec<SearchResult>> {
        let qv = self.index.vectorize(&TokenText::from_lemmas(keywords.iter().cloned()));
        if qv.is_zero() {
            return Ok(Vec::new());
        }
        let candidates: BTreeSet<usize> = qv
            .entries()
            .iter()
            .flat_map(|&(t, _)| self.index.postings(t).iter().map(|p| p.doc as usize))
            .collect();
        let mut scored: Vec<(usize, f64)> = candidates
            .into_iter()
            .map(|d| (d, cosine(&qv, self.index.doc_vector(d))))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(budget);
        Ok(scored
            .into_iter()
            .enumerate()
            .map(|(i, (d, s))| SearchResult {
                doc_id: self.index.doc_ids()[d].clone(),
                rank: i as u32 + 1,
                backend_score: s,
            })
            .collect())
    }
}

/// Cosine between the query's keyword vector and the document body.
pub fn offline_score(query: &Query, doc: &Document, index: &VectorIndex) -> f64 {
    let qv = index.vectorize(&TokenText::from_lemmas(query.keywords().iter().cloned()));
    cosine(&qv, &index.vectorize(&doc.body))
}

/// Which backend a run uses: `offline` or `external:<name>`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BackendKind {
    #[default]
    Offline,
    External(String),
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "offline" => Ok(BackendKind::Offline),
            Some(("external", name)) if !name.is_empty() => Ok(BackendKind::External(name.to_string())),
            _ => Err(Error::Config(format!(
                "backend {s:?}: expected \"offline\" or \"external:<name>\""
            ))),
        }
    }
}

impl TryFrom<String> for BackendKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BackendKind> for String {
    fn from(b: BackendKind) -> String {
        b.to_string()
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendKind::Offline => f.write_str("offline"),
            BackendKind::External(name) => write!(f, "external:{name}"),
        }
    }
}

/// One hit from a web engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalHit {
    pub uri: String,
    pub title: String,
    pub snippet: String,
}

/// Contract for live search engines: keywords and a budget in, ranked hits out.
pub trait WebSearchAdapter: Send + Sync {
    fn name(&self) -> &str;
    fn fetch(&self, keywords: &[String], budget: usize) -> Result<Vec<ExternalHit>>;
}

/// Wraps a [`WebSearchAdapter`]. Hits become transient documents keyed by
/// URI, available afterwards through [`ExternalBackend::transient_documents`].
pub struct ExternalBackend<A> {
    adapter: A,
    normalizer: Normalizer,
    transient: Mutex<BTreeMap<String, Document>>,
}

impl<A: WebSearchAdapter> ExternalBackend<A> {
    pub fn new(adapter: A, normalizer: Normalizer) -> Self {
        ExternalBackend {
            adapter,
            normalizer,
            transient: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn transient_documents(&self) -> Vec<Document> {
        self.transient
            .lock()
            .expect("transient store poisoned")
            .values()
            .cloned()
            .collect()
    }
}

impl<A: WebSearchAdapter> SearchBackend for ExternalBackend<A> {
    fn name(&self) -> &str {
        self.adapter.name()
    }

    fn search(&self, keywords: &[String], budget: usize) -> Result<Vec<SearchResult>> {
        let hits = self.adapter.fetch(keywords, budget)?;
        let mut store = self.transient.lock().expect("transient store poisoned");
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for hit in hits.into_iter().take(budget) {
            if hit.uri.is_empty() || !seen.insert(hit.uri.clone()) {
                continue;
            }
            let rank = out.len() as u32 + 1;
            store.entry(hit.uri.clone()).or_insert_with(|| {
                Document::from_record(
                    DocumentRecord {
                        doc_id: hit.uri.clone(),
                        title: hit.title.clone(),
                        body: format!("{} {}", hit.title, hit.snippet),
                        tags: Vec::new(),
                        uri: Some(hit.uri.clone()),
                    },
                    &self.normalizer,
                )
            });
            out.push(SearchResult {
                doc_id: hit.uri,
                rank,
                backend_score: 1.0 / f64::from(rank),
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedEntry {
    /// query -> rank of this document in that query's list.
    pub appearances: BTreeMap<QueryId, u32>,
    pub best_rank: u32,
    pub query_hit_count: usize,
}

/// The total result set R: every document returned by any query, with its
/// per-query ranks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedResultSet {
    entries: BTreeMap<String, MergedEntry>,
}

/// Merges per-query result lists. Each list must rank `1..=len` without gaps
/// and must not repeat a document.
pub fn merge(results_per_query: &BTreeMap<QueryId, Vec<SearchResult>>) -> Result<MergedResultSet> {
    let mut entries: BTreeMap<String, MergedEntry> = BTreeMap::new();
    for (&qid, list) in results_per_query {
        let mut ranks: Vec<u32> = list.iter().map(|r| r.rank).collect();
        ranks.sort_unstable();
        if ranks.iter().enumerate().any(|(i, &r)| r as usize != i + 1) {
            return Err(Error::Invariant(format!("{qid}: ranks are not 1..={}", list.len())));
        }
        for r in list {
            let entry = entries.entry(r.doc_id.clone()).or_insert_with(|| MergedEntry {
                appearances: BTreeMap::new(),
                best_rank: u32::MAX,
                query_hit_count: 0,
            });
            if entry.appearances.insert(qid, r.rank).is_some() {
                return Err(Error::Invariant(format!("{qid}: document {:?} listed twice", r.doc_id)));
            }
            entry.best_rank = entry.best_rank.min(r.rank);
            entry.query_hit_count = entry.appearances.len();
        }
    }
    Ok(MergedResultSet { entries })
}

impl MergedResultSet {
    pub fn get(&self, doc_id: &str) -> Option<&MergedEntry> {
        self.entries.get(doc_id)
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.entries.contains_key(doc_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &MergedEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Entries whose `doc_id` satisfies `keep`.
    pub fn filtered<F: FnMut(&str) -> bool>(&self, mut keep: F) -> MergedResultSet {
        MergedResultSet {
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Document ids in merged-rating order: best rank ascending, then hit
    /// count descending, then `doc_id`.
    pub fn rated_order(&self) -> Vec<&str> {
        let mut ids: Vec<(&str, &MergedEntry)> = self.iter().collect();
        ids.sort_by(|(a, ea), (b, eb)| {
            ea.best_rank
                .cmp(&eb.best_rank)
                .then(eb.query_hit_count.cmp(&ea.query_hit_count))
                .then(a.cmp(b))
        });
        ids.into_iter().map(|(id, _)| id).collect()
    }
}
