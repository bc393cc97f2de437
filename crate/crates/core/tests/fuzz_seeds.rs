//! Replays the checked-in fuzz seeds through every parser, asserting what
//! the fuzz targets assert.

use std::fs;
use std::path::PathBuf;

use subsearch::evolve::{FinalResult, GenerationStats};
use subsearch::filter::{parse_labeled, parse_rules};
use subsearch::patterns::{PatternBlend, PatternKind, SimilarityMatrix};
use subsearch::store::{parse_manifest, Corpus, RelevanceJudgments};
use subsearch::textcore::{AuthorityDictionary, KeyConceptSet, Normalizer, StemRules, StopwordSet, SynonymDictionary};
use subsearch::vsm::VectorIndex;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn texts(target: &str) -> Vec<(String, String)> {
    seeds(target)
        .into_iter()
        .filter_map(|(name, b)| String::from_utf8(b).ok().map(|t| (name, t)))
        .collect()
}

#[test]
fn normalize() {
    let n = Normalizer::english();
    for (_, data) in seeds("normalize") {
        if let Ok(t) = n.normalize_bytes(&data) {
            for tok in &t.tokens {
                assert!(!tok.is_empty() && !n.stopwords().contains(tok));
                assert!(!tok.chars().any(char::is_whitespace));
            }
            assert_eq!(n.normalize(&t.joined()).tokens, t.tokens);
        }
    }
}

#[test]
fn word_lists() {
    for (_, t) in texts("stopwords") {
        let _ = StopwordSet::parse(&t);
    }
    let mut parsed = 0;
    for (_, t) in texts("stem_rules") {
        if let Ok(rules) = StemRules::parse(&t) {
            parsed += 1;
            for w in ["running", "nations", "a", "sses", ""] {
                let _ = rules.stem(w);
            }
        }
    }
    assert!(parsed > 0);
}

#[test]
fn dictionaries() {
    let n = Normalizer::english();
    for (name, t) in texts("synonyms") {
        if let Ok(d) = SynonymDictionary::parse_tsv(&t, &n) {
            let seeds: Vec<String> = d.entries().keys().cloned().collect();
            let closure = d.closure_of(&seeds);
            assert!(seeds.iter().all(|s| closure.contains(s)), "{name}");
        }
    }
    let ok = texts("authority").iter().filter(|(_, t)| AuthorityDictionary::parse_jsonl(t, &n).is_ok()).count();
    assert!(ok > 0);
    for (_, t) in texts("key_concepts") {
        if let Ok(q0) = KeyConceptSet::parse(&t, &n) {
            assert!(!q0.is_empty());
        }
    }
}

#[test]
fn corpus_and_judgments() {
    let n = Normalizer::english();
    let mut ok = 0;
    for (_, t) in texts("corpus") {
        if let Ok(c) = Corpus::from_jsonl(&t, "seed", &n) {
            ok += 1;
            assert_eq!(Corpus::from_jsonl(&t, "seed", &n).unwrap(), c);
            VectorIndex::build(&c).unwrap();
        }
    }
    assert!(ok > 0);
    for (_, t) in texts("qrels") {
        if let Ok(q) = RelevanceJudgments::parse_tsv(&t) {
            assert_eq!(RelevanceJudgments::parse_tsv(&q.to_tsv()).unwrap(), q);
        }
    }
}

#[test]
fn filters() {
    let n = Normalizer::english();
    assert!(texts("rules").iter().any(|(_, t)| parse_rules(t, &n).is_ok()));
    assert!(texts("labeled").iter().any(|(_, t)| parse_labeled(t, &n).is_ok()));
}

#[test]
fn matrices_and_indexes() {
    let mut ok = 0;
    for (_, t) in texts("matrix_tsv") {
        if let Ok(m) = SimilarityMatrix::from_tsv(&t) {
            ok += 1;
            assert_eq!(SimilarityMatrix::from_tsv(&m.to_tsv()).unwrap(), m);
        }
    }
    assert!(ok > 0);
    for (_, t) in texts("index_snapshot") {
        let ix = VectorIndex::from_json(&t).unwrap();
        assert_eq!(VectorIndex::from_json(&ix.to_json()).unwrap().to_json(), ix.to_json());
    }
    for (_, t) in texts("pattern_blend") {
        if let Ok(b) = t.parse::<PatternBlend>() {
            let _ = b.resolve(&PatternKind::ALL);
        }
    }
}

#[test]
fn run_files() {
    for (_, t) in texts("run_manifest") {
        parse_manifest(&t).unwrap();
    }
    let (mut gens, mut results) = (0, 0);
    for (_, t) in texts("run_trace") {
        for line in t.lines() {
            gens += serde_json::from_str::<GenerationStats>(line).is_ok() as usize;
            results += serde_json::from_str::<FinalResult>(line).is_ok() as usize;
        }
    }
    assert!(gens > 0 && results > 0);
}
