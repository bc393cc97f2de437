//! Vector space model: inverted index, tf·idf weights and cosine similarity.
//!
//! Weights are `tf · log2(n_docs / df)` with raw term counts. Term ids follow
//! lexicographic vocabulary order and document ordinals follow `doc_id`
//! order, so every structure here is reproducible from the corpus alone.
//! Patterns and queries are vectorized against the corpus statistics; they
//! never change `df`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::Corpus;
use crate::textcore::TokenText;

pub type TermId = u32;

/// Sparse nonnegative term-weight vector with its cached Euclidean norm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocVector {
    weights: Vec<(TermId, f64)>,
    norm: f64,
}

impl DocVector {
    /// Builds a vector from `(term, weight)` pairs. Zero weights are dropped;
    /// duplicate terms are summed.
    pub fn from_weights<I>(weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (TermId, f64)>,
    {
        let mut acc: BTreeMap<TermId, f64> = BTreeMap::new();
        for (term, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Argument(format!("weight {w} for term {term} must be finite and >= 0")));
            }
            *acc.entry(term).or_insert(0.0) += w;
        }
        Ok(Self::from_sorted(acc.into_iter().filter(|&(_, w)| w > 0.0).collect()))
    }

    fn from_sorted(weights: Vec<(TermId, f64)>) -> Self {
        let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        DocVector { weights, norm }
    }

    pub fn zero() -> Self {
        DocVector::default()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, term: TermId) -> f64 {
        self.weights
            .binary_search_by_key(&term, |&(t, _)| t)
            .map(|i| self.weights[i].1)
            .unwrap_or(0.0)
    }

    /// Nonzero entries in ascending term order.
    pub fn entries(&self) -> &[(TermId, f64)] {
        &self.weights
    }

    pub fn dot(&self, other: &DocVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.weights, &other.weights);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        assert!(alpha > 0.0 && alpha.is_finite(), "scale factor must be positive");
        Self::from_sorted(self.weights.iter().map(|&(t, w)| (t, w * alpha)).collect())
    }

    /// Unit-length copy; the zero vector stays zero.
    pub fn unit(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scaled(1.0 / self.norm)
    }

    /// Component-wise mean of `vectors`.
    pub fn mean<'a, I>(vectors: I) -> Self
    where
        I: IntoIterator<Item = &'a DocVector>,
    {
        let mut acc: BTreeMap<TermId, f64> = BTreeMap::new();
        let mut count = 0usize;
        for v in vectors {
            count += 1;
            for &(t, w) in &v.weights {
                *acc.entry(t).or_insert(0.0) += w;
            }
        }
        if count == 0 {
            return DocVector::zero();
        }
        let n = count as f64;
        Self::from_sorted(acc.into_iter().map(|(t, w)| (t, w / n)).filter(|&(_, w)| w > 0.0).collect())
    }
}

/// dot(u,v)/(|u||v|), clamped to [0,1]; 0 when either vector is zero.
pub fn cosine(u: &DocVector, v: &DocVector) -> f64 {
    if u.norm == 0.0 || v.norm == 0.0 {
        return 0.0;
    }
    (u.dot(v) / (u.norm * v.norm)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    /// Ordinal into [`VectorIndex::doc_ids`].
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    vocabulary: BTreeMap<String, TermId>,
    terms: Vec<String>,
    doc_freq: Vec<u32>,
    postings: Vec<Vec<Posting>>,
    doc_ids: Vec<String>,
    doc_vectors: Vec<DocVector>,
}

/// Serialized form of a [`VectorIndex`]. Document vectors are derived on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSnapshot {
    pub n_docs: usize,
    pub doc_ids: Vec<String>,
    /// Lemmas in term-id order.
    pub vocabulary: Vec<String>,
    pub doc_freq: Vec<u32>,
    /// Per term, `[doc ordinal, tf]` pairs.
    pub postings: Vec<Vec<(u32, u32)>>,
}

impl VectorIndex {
    pub fn build(corpus: &Corpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let vocab: BTreeSet<&str> = corpus
            .documents()
            .flat_map(|d| d.body.tokens.iter().map(String::as_str))
            .collect();
        let terms: Vec<String> = vocab.into_iter().map(str::to_string).collect();
        let vocabulary: BTreeMap<String, TermId> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TermId))
            .collect();
        let mut postings: Vec<Vec<Posting>> = vec![Vec::new(); terms.len()];
        let mut doc_ids = Vec::with_capacity(corpus.len());
        for (ordinal, doc) in corpus.documents().enumerate() {
            doc_ids.push(doc.doc_id.clone());
            let mut counts: BTreeMap<TermId, u32> = BTreeMap::new();
            for tok in &doc.body.tokens {
                *counts.entry(vocabulary[tok]).or_insert(0) += 1;
            }
            for (term, tf) in counts {
                postings[term as usize].push(Posting {
                    doc: ordinal as u32,
                    tf,
                });
            }
        }
        let doc_freq = postings.iter().map(|p| p.len() as u32).collect();
        let mut index = VectorIndex {
            vocabulary,
            terms,
            doc_freq,
            postings,
            doc_ids,
            doc_vectors: Vec::new(),
        };
        index.doc_vectors = index.derive_doc_vectors();
        Ok(index)
    }

    fn derive_doc_vectors(&self) -> Vec<DocVector> {
        let mut weights: Vec<Vec<(TermId, f64)>> = vec![Vec::new(); self.doc_ids.len()];
        for (term, plist) in self.postings.iter().enumerate() {
            let idf = self.idf(term as TermId);
            if idf == 0.0 {
                continue;
            }
            for p in plist {
                weights[p.doc as usize].push((term as TermId, f64::from(p.tf) * idf));
            }
        }
        weights.into_iter().map(DocVector::from_sorted).collect()
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.terms.len()
    }

    pub fn term_id(&self, lemma: &str) -> Option<TermId> {
        self.vocabulary.get(lemma).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id as usize]
    }

    pub fn df(&self, id: TermId) -> u32 {
        self.doc_freq[id as usize]
    }

    pub fn postings(&self, id: TermId) -> &[Posting] {
        &self.postings[id as usize]
    }

    pub fn idf(&self, id: TermId) -> f64 {
        (self.n_docs() as f64 / f64::from(self.df(id))).log2()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_ordinal(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids.binary_search_by(|d| d.as_str().cmp(doc_id)).ok()
    }

    pub fn doc_vector(&self, ordinal: usize) -> &DocVector {
        &self.doc_vectors[ordinal]
    }

    pub fn doc_vector_by_id(&self, doc_id: &str) -> Option<&DocVector> {
        self.doc_ordinal(doc_id).map(|o| &self.doc_vectors[o])
    }

    /// tf·idf vector of `text` under this index. Out-of-vocabulary lemmas are
    /// dropped.
    pub fn vectorize(&self, text: &TokenText) -> DocVector {
        let mut counts: BTreeMap<TermId, u32> = BTreeMap::new();
        for tok in &text.tokens {
            if let Some(id) = self.term_id(tok) {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        DocVector::from_sorted(
            counts
                .into_iter()
                .map(|(t, tf)| (t, f64::from(tf) * self.idf(t)))
                .filter(|&(_, w)| w > 0.0)
                .collect(),
        )
    }

    /// Fails unless the index was built from exactly the documents of `corpus`.
    pub fn check_corpus(&self, corpus: &Corpus) -> Result<()> {
        let same = self.doc_ids.len() == corpus.len()
            && self
                .doc_ids
                .iter()
                .zip(corpus.documents())
                .all(|(a, d)| a == &d.doc_id);
        if same {
            Ok(())
        } else {
            Err(Error::Config("index was built from a different corpus".into()))
        }
    }

    pub fn snapshot(&self) -> IndexSnapshot {
        IndexSnapshot {
            n_docs: self.n_docs(),
            doc_ids: self.doc_ids.clone(),
            vocabulary: self.terms.clone(),
            doc_freq: self.doc_freq.clone(),
            postings: self
                .postings
                .iter()
                .map(|pl| pl.iter().map(|p| (p.doc, p.tf)).collect())
                .collect(),
        }
    }

    /// Rebuilds an index from a snapshot, checking every structural invariant.
    pub fn from_snapshot(snap: IndexSnapshot) -> Result<Self> {
        let bad = |msg: String| Error::Invariant(format!("index snapshot: {msg}"));
        if snap.n_docs == 0 || snap.doc_ids.len() != snap.n_docs {
            return Err(bad(format!(
                "n_docs {} does not match {} doc ids",
                snap.n_docs,
                snap.doc_ids.len()
            )));
        }
        if snap.doc_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("doc ids not strictly ascending".into()));
        }
        if snap.vocabulary.windows(2).any(|w| w[0] >= w[1])
            || snap.vocabulary.iter().any(String::is_empty)
        {
            return Err(bad("vocabulary not strictly ascending".into()));
        }
        let v = snap.vocabulary.len();
        if snap.doc_freq.len() != v || snap.postings.len() != v {
            return Err(bad("vocabulary, doc_freq and postings lengths differ".into()));
        }
        for (term, (plist, &df)) in snap.postings.iter().zip(&snap.doc_freq).enumerate() {
            if df as usize != plist.len() || df == 0 || df as usize > snap.n_docs {
                return Err(bad(format!("term {term}: df {df} inconsistent with postings")));
            }
            if plist.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(bad(format!("term {term}: postings not sorted")));
            }
            if plist.iter().any(|&(d, tf)| d as usize >= snap.n_docs || tf == 0) {
                return Err(bad(format!("term {term}: posting out of range")));
            }
        }
        let vocabulary = snap
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TermId))
            .collect();
        let mut index = VectorIndex {
            vocabulary,
            terms: snap.vocabulary,
            doc_freq: snap.doc_freq,
            postings: snap
                .postings
                .into_iter()
                .map(|pl| pl.into_iter().map(|(doc, tf)| Posting { doc, tf }).collect())
                .collect(),
            doc_ids: snap.doc_ids,
            doc_vectors: Vec::new(),
        };
        index.doc_vectors = index.derive_doc_vectors();
        Ok(index)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_snapshot(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.snapshot()).expect("snapshot serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Free-function form of [`VectorIndex::vectorize`].
pub fn vectorize(text: &TokenText, index: &VectorIndex) -> DocVector {
    index.vectorize(text)
}
