use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textcore::{Normalizer, TokenText};

/// One line of `corpus.jsonl`. Unknown fields (such as `category` in a
/// labeled training file) are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uri: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub body: TokenText,
    pub raw_body: String,
    pub category_tags: BTreeSet<String>,
    pub source_uri: Option<String>,
}

impl Document {
    pub fn from_record(record: DocumentRecord, normalizer: &Normalizer) -> Self {
        Document {
            body: normalizer.normalize(&record.body),
            doc_id: record.doc_id,
            title: record.title,
            raw_body: record.body,
            category_tags: record.tags.into_iter().collect(),
            source_uri: record.uri,
        }
    }

    pub fn to_record(&self) -> DocumentRecord {
        DocumentRecord {
            doc_id: self.doc_id.clone(),
            title: self.title.clone(),
            body: self.raw_body.clone(),
            tags: self.category_tags.iter().cloned().collect(),
            uri: self.source_uri.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub norm_config_hash: String,
    pub document_count: usize,
    /// Stamped by front ends when a manifest is written to disk; `ingest`
    /// leaves it empty so re-ingesting the same file compares equal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

/// Immutable document collection, ordered by `doc_id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: BTreeMap<String, Document>,
    manifest: CorpusManifest,
}

/// Parses JSONL document records, reporting 1-based line numbers. Blank lines
/// are skipped but still counted.
pub fn parse_records(text: &str, source_name: &str) -> Result<Vec<(usize, DocumentRecord)>> {
    let mut out = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse(source_name, line_no, e.to_string()))?;
        if record.doc_id.is_empty() {
            return Err(Error::parse(source_name, line_no, "empty doc_id"));
        }
        if let Some(&first_line) = seen.get(&record.doc_id) {
            return Err(Error::DuplicateDocument {
                doc_id: record.doc_id,
                first_line,
                second_line: line_no,
            });
        }
        seen.insert(record.doc_id.clone(), line_no);
        out.push((line_no, record));
    }
    Ok(out)
}

impl Corpus {
    pub fn from_documents<I>(documents: I, normalizer: &Normalizer) -> Result<Self>
    where
        I: IntoIterator<Item = Document>,
    {
        let mut map = BTreeMap::new();
        for doc in documents {
            if let Some(prev) = map.insert(doc.doc_id.clone(), doc) {
                return Err(Error::Invariant(format!("duplicate doc_id {:?}", prev.doc_id)));
            }
        }
        if map.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Corpus {
            manifest: CorpusManifest {
                norm_config_hash: normalizer.config_hash(),
                document_count: map.len(),
                created_at: None,
            },
            documents: map,
        })
    }

    pub fn from_jsonl(text: &str, source_name: &str, normalizer: &Normalizer) -> Result<Self> {
        let records = parse_records(text, source_name)?;
        let docs = records
            .into_iter()
            .map(|(_, r)| Document::from_record(r, normalizer));
        Corpus::from_documents(docs, normalizer)
    }

    /// Reads and normalizes a `corpus.jsonl` file.
    pub fn ingest(path: &Path, normalizer: &Normalizer) -> Result<Self> {
        let text = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = String::from_utf8(text).map_err(|e| Error::Decode {
            offset: e.utf8_error().valid_up_to(),
        })?;
        let corpus = Corpus::from_jsonl(&text, &path.display().to_string(), normalizer)?;
        log::info!("ingested {} documents from {}", corpus.len(), path.display());
        Ok(corpus)
    }

    pub fn manifest(&self) -> &CorpusManifest {
        &self.manifest
    }

    pub fn manifest_mut(&mut self) -> &mut CorpusManifest {
        &mut self.manifest
    }

    /// Fails when the corpus was normalized under a different configuration.
    pub fn check_normalizer(&self, normalizer: &Normalizer) -> Result<()> {
        let expected = normalizer.config_hash();
        if self.manifest.norm_config_hash != expected {
            return Err(Error::Config(format!(
                "corpus normalized with config {} but {} is active",
                self.manifest.norm_config_hash, expected
            )));
        }
        Ok(())
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.documents.get(doc_id)
    }

    pub fn require(&self, doc_id: &str) -> Result<&Document> {
        self.get(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))
    }

    /// Documents in ascending `doc_id` order.
    pub fn documents(&self) -> impl ExactSizeIterator<Item = &Document> {
        self.documents.values()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}
