//! Text normalization and the lexical resources built on top of it.
//!
//! Everything downstream (indexing, queries, k-patterns, filters) consumes
//! [`TokenText`] produced by a single [`Normalizer`]; the normalizer's
//! [`config_hash`](Normalizer::config_hash) is recorded with every corpus so
//! that mismatched tokenization is detected instead of silently skewing
//! similarity values.

mod concepts;
mod dictionary;
mod normalize;

pub use concepts::KeyConceptSet;
pub use dictionary::{AuthorityDictionary, SynonymDictionary};
pub use normalize::{normalize, Normalizer, StemRule, StemRules, StopwordSet, TokenText};
