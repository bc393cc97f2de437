//! Planted corpora for experiments.
//!
//! A seeded generator builds a corpus whose ground truth is known: target
//! documents are written mostly in a small topic vocabulary that is part of
//! `Q_o`, near-topic documents mix a little of it into background text,
//! shop-tagged distractors repeat topic terms next to commercial filler, and
//! the rest is background noise. The remaining `Q_o` concepts are generic:
//! they are sprinkled thinly over the non-target documents, so queries built
//! from them retrieve scattered, unrelated hits. Judgments follow the plan
//! (targets 3, near-topic 1, everything else 0).

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::filter::{FilterConfig, FilterRule};
use crate::rng::{substream, Purpose};
use crate::store::{write_atomic, Corpus, Document, DocumentRecord, Grade, RelevanceJudgments};
use crate::textcore::{AuthorityDictionary, KeyConceptSet, Normalizer, SynonymDictionary};

pub const TOPIC: &str = "planted";
pub const SHOP_TAG: &str = "shop";

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub n_docs: usize,
    pub n_targets: usize,
    pub n_near: usize,
    pub n_shop: usize,
    pub topic_terms: usize,
    pub q0_size: usize,
    pub background_terms: usize,
    pub doc_len: (usize, usize),
    /// Share of topic tokens in a target document.
    pub target_density: f64,
    /// Share of topic tokens in a shop distractor.
    pub shop_density: f64,
    /// Share of generic `Q_o` concepts in non-target documents.
    pub side_density: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            n_docs: 500,
            n_targets: 50,
            n_near: 50,
            n_shop: 20,
            topic_terms: 12,
            q0_size: 50,
            background_terms: 600,
            doc_len: (30, 60),
            target_density: 0.5,
            shop_density: 0.3,
            side_density: 0.08,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocRole {
    Target,
    Near,
    Shop,
    Background,
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub records: Vec<DocumentRecord>,
    pub roles: Vec<DocRole>,
    pub topic_terms: Vec<String>,
    pub q0: Vec<String>,
    pub synonyms: Vec<(String, String)>,
    pub authority: Vec<(String, String)>,
    pub judgments: RelevanceJudgments,
}

const ONSETS: [&str; 14] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v", "z", "br"];
const VOWELS: [&str; 3] = ["a", "o", "u"];

/// Pseudo-words of CV syllables ending in `a`/`o`, so no suffix rule fires.
fn word_source(normalizer: &Normalizer, rng: &mut impl Rng, taken: &mut BTreeSet<String>) -> String {
    loop {
        let syllables = rng.gen_range(3..=4);
        let mut w = String::new();
        for i in 0..syllables {
            w.push_str(ONSETS.choose(rng).expect("onsets"));
            let v = if i + 1 == syllables {
                ["a", "o"].choose(rng).expect("vowels")
            } else {
                VOWELS.choose(rng).expect("vowels")
            };
            w.push_str(v);
        }
        if taken.contains(&w) || normalizer.normalize(&w).tokens != [w.clone()] {
            continue;
        }
        taken.insert(w.clone());
        return w;
    }
}

fn words(n: usize, normalizer: &Normalizer, rng: &mut impl Rng, taken: &mut BTreeSet<String>) -> Vec<String> {
    (0..n).map(|_| word_source(normalizer, rng, taken)).collect()
}

fn body(rng: &mut impl Rng, len: usize, mix: &[(&[String], f64)]) -> String {
    let total: f64 = mix.iter().map(|(_, w)| w).sum();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let mut x = rng.gen::<f64>() * total;
        let mut pick = mix.last().expect("mix").0;
        for (pool, w) in mix {
            if x < *w {
                pick = pool;
                break;
            }
            x -= w;
        }
        out.push(pick.choose(rng).expect("pool").clone());
    }
    out.join(" ")
}

pub fn generate(cfg: &PlantedConfig, normalizer: &Normalizer) -> PlantedCorpus {
    let mut rng = substream(cfg.seed, 0, Purpose::Fixture, 0);
    let mut taken = BTreeSet::new();
    let topic = words(cfg.topic_terms, normalizer, &mut rng, &mut taken);
    let side = words(cfg.q0_size.saturating_sub(cfg.topic_terms), normalizer, &mut rng, &mut taken);
    let variants = words(cfg.topic_terms / 2, normalizer, &mut rng, &mut taken);
    let background = words(cfg.background_terms, normalizer, &mut rng, &mut taken);
    let commerce = words(20, normalizer, &mut rng, &mut taken);

    let mut roles = Vec::with_capacity(cfg.n_docs);
    roles.extend(std::iter::repeat(DocRole::Target).take(cfg.n_targets));
    roles.extend(std::iter::repeat(DocRole::Near).take(cfg.n_near));
    roles.extend(std::iter::repeat(DocRole::Shop).take(cfg.n_shop));
    let fill = cfg.n_docs.saturating_sub(roles.len());
    roles.extend(std::iter::repeat(DocRole::Background).take(fill));
    roles.truncate(cfg.n_docs);
    roles.shuffle(&mut rng);

    let mut judgments = RelevanceJudgments::new();
    let records = roles
        .iter()
        .enumerate()
        .map(|(i, role)| {
            let doc_id = format!("doc{i:04}");
            let len = rng.gen_range(cfg.doc_len.0..=cfg.doc_len.1);
            let d = cfg.target_density;
            let (text, tags, grade) = match role {
                DocRole::Target => (
                    body(&mut rng, len, &[(&topic, d), (&variants, 0.05), (&background, 1.0 - d)]),
                    vec![],
                    3,
                ),
                DocRole::Near => (
                    body(&mut rng, len, &[(&topic, 0.1), (&side, cfg.side_density), (&background, 0.9 - cfg.side_density)]),
                    vec![],
                    1,
                ),
                DocRole::Shop => (
                    body(&mut rng, len, &[(&topic, cfg.shop_density), (&commerce, 0.3), (&background, 0.7 - cfg.shop_density)]),
                    vec![SHOP_TAG.to_string()],
                    0,
                ),
                DocRole::Background => (
                    body(&mut rng, len, &[(&side, cfg.side_density), (&background, 1.0 - cfg.side_density)]),
                    vec![],
                    0,
                ),
            };
            judgments.insert(TOPIC, &doc_id, Grade::new(grade).expect("grade"));
            let uri = match role {
                DocRole::Shop => format!("https://shop.example/{doc_id}"),
                _ => format!("https://library.example/{doc_id}"),
            };
            DocumentRecord {
                doc_id,
                title: String::new(),
                body: text,
                tags,
                uri: Some(uri),
            }
        })
        .collect();

    let synonyms = topic
        .iter()
        .zip(&variants)
        .map(|(t, v)| (t.clone(), v.clone()))
        .collect();
    let authority = topic
        .iter()
        .map(|t| {
            let mut def: Vec<String> = topic.choose_multiple(&mut rng, 4).cloned().collect();
            def.push(t.clone());
            def.extend(background.choose_multiple(&mut rng, 3).cloned());
            (t.clone(), def.join(" "))
        })
        .collect();
    let mut q0: Vec<String> = topic.iter().chain(&side).cloned().collect();
    q0.sort();

    PlantedCorpus {
        records,
        roles,
        topic_terms: topic,
        q0,
        synonyms,
        authority,
        judgments,
    }
}

impl PlantedCorpus {
    pub fn corpus(&self, normalizer: &Normalizer) -> Result<Corpus> {
        Corpus::from_documents(
            self.records.iter().cloned().map(|r| Document::from_record(r, normalizer)),
            normalizer,
        )
    }

    pub fn key_concepts(&self) -> Result<KeyConceptSet> {
        KeyConceptSet::new(self.q0.iter().cloned())
    }

    pub fn synonym_dictionary(&self) -> SynonymDictionary {
        let mut d = SynonymDictionary::new();
        for (t, s) in &self.synonyms {
            d.insert(t, s);
        }
        d
    }

    pub fn authority_dictionary(&self, normalizer: &Normalizer) -> Result<AuthorityDictionary> {
        AuthorityDictionary::parse_jsonl(&self.authority_jsonl(), normalizer)
    }

    /// Drops the shop-tagged distractors.
    pub fn filter(&self) -> Result<FilterConfig> {
        Ok(FilterConfig {
            rules: vec![FilterRule::tag("no-shop", SHOP_TAG)?],
            classifier: None,
        })
    }

    pub fn corpus_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn authority_jsonl(&self) -> String {
        let mut out = String::new();
        for (t, d) in &self.authority {
            let line = serde_json::json!({"term": t, "definition": d});
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn synonyms_tsv(&self) -> String {
        self.synonyms.iter().map(|(t, s)| format!("{t}\t{s}\n")).collect()
    }

    pub fn rules_jsonl(&self) -> String {
        format!("{{\"rule_id\":\"no-shop\",\"kind\":\"tag-match\",\"tag\":\"{SHOP_TAG}\"}}\n")
    }

    /// Writes `corpus.jsonl`, `q0.txt`, `qrels.tsv`, `synonyms.tsv`,
    /// `authority.jsonl` and `rules.jsonl` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join("corpus.jsonl"), self.corpus_jsonl()?.as_bytes())?;
        write_atomic(&dir.join("q0.txt"), (self.q0.join("\n") + "\n").as_bytes())?;
        write_atomic(&dir.join("qrels.tsv"), self.judgments.to_tsv().as_bytes())?;
        write_atomic(&dir.join("synonyms.tsv"), self.synonyms_tsv().as_bytes())?;
        write_atomic(&dir.join("authority.jsonl"), self.authority_jsonl().as_bytes())?;
        write_atomic(&dir.join("rules.jsonl"), self.rules_jsonl().as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::parse_rules;

    #[test]
    fn planted_shape() {
        let n = Normalizer::english();
        let p = generate(&PlantedConfig::default(), &n);
        assert_eq!(p.records.len(), 500);
        assert_eq!(p.q0.len(), 50);
        assert_eq!(p.roles.iter().filter(|r| **r == DocRole::Target).count(), 50);
        let q0 = p.key_concepts().unwrap();
        assert!(p.topic_terms.iter().all(|t| q0.contains(t)));
        let c = p.corpus(&n).unwrap();
        assert_eq!(c.len(), 500);
        // every generated word survives normalization unchanged
        for r in &p.records {
            assert_eq!(n.normalize(&r.body).tokens.len(), r.body.split(' ').count());
        }
        assert_eq!(p.authority_dictionary(&n).unwrap().len(), 12);
        assert_eq!(parse_rules(&p.rules_jsonl(), &n).unwrap().len(), 1);
        let p2 = generate(&PlantedConfig::default(), &n);
        assert_eq!(p.records, p2.records);
    }
}
