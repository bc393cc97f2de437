//! Document warehouse: corpus ingestion, relevance judgments and run
//! persistence.

mod corpus;
mod qrels;
mod run;

pub use corpus::{parse_records, Corpus, CorpusManifest, Document, DocumentRecord};
pub use qrels::{Grade, RelevanceJudgments};
pub use run::{load_run, parse_manifest, persist_run, write_atomic, RunManifest, RunRecord};
