//! Exclusion of documents that match the subject formally but are not
//! wanted (tutorials, shops, blogs, ...). Two mechanisms: declarative rules
//! for exact categories and a nearest-centroid classifier for fuzzy ones.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::engine::MergedResultSet;
use crate::error::{Error, Result};
use crate::store::{Corpus, Document, DocumentRecord};
use crate::textcore::Normalizer;
use crate::vsm::{cosine, DocVector, VectorIndex};

pub const DEFAULT_CLASSIFIER_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone)]
pub enum RuleKind {
    TagMatch(String),
    UriPattern(glob::Pattern),
    /// Excludes a document containing at least `threshold` of the lemmas.
    KeywordSignature {
        lemmas: BTreeSet<String>,
        threshold: usize,
    },
}

#[derive(Debug, Clone)]
pub struct FilterRule {
    pub rule_id: String,
    pub kind: RuleKind,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleRecord {
    rule_id: String,
    kind: String,
    #[serde(default)]
    tag: Option<String>,
    #[serde(default)]
    pattern: Option<String>,
    #[serde(default)]
    lemmas: Option<Vec<String>>,
    #[serde(default)]
    threshold: Option<usize>,
}

impl FilterRule {
    pub fn tag(rule_id: &str, tag: &str) -> Result<Self> {
        if tag.is_empty() {
            return Err(Error::Config(format!("rule {rule_id}: empty tag")));
        }
        Ok(FilterRule {
            rule_id: rule_id.to_string(),
            kind: RuleKind::TagMatch(tag.to_string()),
        })
    }

    pub fn uri(rule_id: &str, pattern: &str) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::Config(format!("rule {rule_id}: empty uri pattern")));
        }
        let compiled = glob::Pattern::new(pattern)
            .map_err(|e| Error::Config(format!("rule {rule_id}: bad pattern {pattern:?}: {e}")))?;
        Ok(FilterRule {
            rule_id: rule_id.to_string(),
            kind: RuleKind::UriPattern(compiled),
        })
    }

    pub fn signature<I, S>(rule_id: &str, lemmas: I, threshold: usize) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let lemmas: BTreeSet<String> = lemmas.into_iter().map(Into::into).collect();
        if lemmas.is_empty() || threshold == 0 {
            return Err(Error::Config(format!(
                "rule {rule_id}: keyword signature needs lemmas and threshold >= 1"
            )));
        }
        Ok(FilterRule {
            rule_id: rule_id.to_string(),
            kind: RuleKind::KeywordSignature { lemmas, threshold },
        })
    }

    pub fn matches(&self, doc: &Document) -> bool {
        match &self.kind {
            RuleKind::TagMatch(tag) => doc.category_tags.contains(tag),
            RuleKind::UriPattern(p) => doc.source_uri.as_deref().is_some_and(|u| p.matches(u)),
            RuleKind::KeywordSignature { lemmas, threshold } => {
                let present: BTreeSet<&str> = doc
                    .body
                    .tokens
                    .iter()
                    .map(String::as_str)
                    .filter(|t| lemmas.contains(*t))
                    .collect();
                present.len() >= *threshold
            }
        }
    }
}

/// JSONL rules file, one rule per line:
///
/// ```text
/// {"rule_id": "r1", "kind": "tag-match", "tag": "blog"}
/// {"rule_id": "r2", "kind": "uri-pattern", "pattern": "*shop*"}
/// {"rule_id": "r3", "kind": "keyword-signature", "lemmas": ["tutorial", "exercise"], "threshold": 2}
/// ```
///
/// Signature lemmas pass through `normalizer` so they match document bodies.
pub fn parse_rules(text: &str, normalizer: &Normalizer) -> Result<Vec<FilterRule>> {
    let mut rules = Vec::new();
    let mut ids = BTreeSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RuleRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse("rules", line_no, e.to_string()))?;
        let at_line = |e: Error| Error::Config(format!("rules line {line_no}: {e}"));
        if rec.rule_id.is_empty() || !ids.insert(rec.rule_id.clone()) {
            return Err(Error::Config(format!(
                "rules line {line_no}: missing or duplicate rule_id {:?}",
                rec.rule_id
            )));
        }
        let missing = |field: &str| {
            Error::Config(format!("rules line {line_no}: {} rule needs {field:?}", rec.kind))
        };
        let rule = match rec.kind.as_str() {
            "tag-match" => {
                FilterRule::tag(&rec.rule_id, rec.tag.as_deref().ok_or_else(|| missing("tag"))?)
            }
            "uri-pattern" => FilterRule::uri(
                &rec.rule_id,
                rec.pattern.as_deref().ok_or_else(|| missing("pattern"))?,
            ),
            "keyword-signature" => {
                let raw = rec.lemmas.as_ref().ok_or_else(|| missing("lemmas"))?;
                let mut lemmas = Vec::new();
                for word in raw {
                    if let Some(l) = normalizer.lemma(word).map_err(at_line)? {
                        lemmas.push(l);
                    }
                }
                FilterRule::signature(&rec.rule_id, lemmas, rec.threshold.unwrap_or(1))
            }
            other => {
                return Err(Error::Config(format!(
                    "rules line {line_no}: unknown rule kind {other:?}"
                )))
            }
        }
        .map_err(at_line)?;
        rules.push(rule);
    }
    Ok(rules)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleExclusion {
    pub doc_id: String,
    pub rule_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierExclusion {
    pub doc_id: String,
    pub category: String,
    pub score: f64,
}

/// Splits `results` into kept documents and rule exclusions. When several
/// rules match, the smallest `rule_id` is reported, so the outcome does not
/// depend on rule order.
pub fn apply_rules(
    results: &MergedResultSet,
    corpus: &Corpus,
    rules: &[FilterRule],
) -> Result<(MergedResultSet, Vec<RuleExclusion>)> {
    let mut excluded = Vec::new();
    for (doc_id, _) in results.iter() {
        let doc = corpus.require(doc_id)?;
        if let Some(rule) = rules
            .iter()
            .filter(|r| r.matches(doc))
            .min_by(|a, b| a.rule_id.cmp(&b.rule_id))
        {
            excluded.push(RuleExclusion {
                doc_id: doc_id.to_string(),
                rule_id: rule.rule_id.clone(),
            });
        }
    }
    let dropped: BTreeSet<&str> = excluded.iter().map(|e| e.doc_id.as_str()).collect();
    let kept = results.filtered(|d| !dropped.contains(d));
    Ok((kept, excluded))
}

/// Nearest-centroid classifier over tf·idf vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidClassifier {
    centroids: BTreeMap<String, DocVector>,
    threshold: f64,
}

impl CentroidClassifier {
    pub fn new(centroids: BTreeMap<String, DocVector>, threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Config(format!("classifier threshold {threshold} outside [0,1]")));
        }
        if let Some((cat, _)) = centroids.iter().find(|(_, v)| v.is_zero()) {
            return Err(Error::Training(format!("category {cat:?} has a zero centroid")));
        }
        Ok(CentroidClassifier {
            centroids,
            threshold,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn with_threshold(&self, threshold: f64) -> Result<Self> {
        CentroidClassifier::new(self.centroids.clone(), threshold)
    }

    pub fn centroid(&self, category: &str) -> Option<&DocVector> {
        self.centroids.get(category)
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.centroids.keys().map(String::as_str)
    }

    /// Best category and its cosine; ties go to the smaller category name.
    /// A zero vector carries no evidence and matches nothing.
    pub fn best_match(&self, v: &DocVector) -> Option<(&str, f64)> {
        if v.is_zero() {
            return None;
        }
        let mut best: Option<(&str, f64)> = None;
        for (cat, c) in &self.centroids {
            let s = cosine(v, c);
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((cat, s));
            }
        }
        best
    }
}

/// centroid(c) = unit-length mean of the member documents' vectors.
pub fn train_centroid(
    labeled: &BTreeMap<String, Vec<Document>>,
    index: &VectorIndex,
    threshold: f64,
) -> Result<CentroidClassifier> {
    let mut centroids = BTreeMap::new();
    for (category, docs) in labeled {
        if docs.is_empty() {
            return Err(Error::Training(format!("category {category:?} has no documents")));
        }
        let vectors: Vec<DocVector> = docs.iter().map(|d| index.vectorize(&d.body)).collect();
        let centroid = DocVector::mean(&vectors).unit();
        if centroid.is_zero() {
            return Err(Error::Training(format!(
                "category {category:?}: members share no weighted terms with the index"
            )));
        }
        centroids.insert(category.clone(), centroid);
    }
    if centroids.is_empty() {
        return Err(Error::Training("no categories".into()));
    }
    CentroidClassifier::new(centroids, threshold)
}

#[derive(Deserialize)]
struct LabeledRecord {
    category: String,
    #[serde(flatten)]
    record: DocumentRecord,
}

/// Labeled training JSONL: a corpus record plus a `category` field.
pub fn parse_labeled(text: &str, normalizer: &Normalizer) -> Result<BTreeMap<String, Vec<Document>>> {
    let mut out: BTreeMap<String, Vec<Document>> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: LabeledRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse("training set", idx + 1, e.to_string()))?;
        if rec.category.is_empty() {
            return Err(Error::parse("training set", idx + 1, "empty category"));
        }
        out.entry(rec.category)
            .or_default()
            .push(Document::from_record(rec.record, normalizer));
    }
    Ok(out)
}

fn vector_for<'a>(doc_id: &str, corpus: &Corpus, index: &'a VectorIndex) -> Result<std::borrow::Cow<'a, DocVector>> {
    match index.doc_vector_by_id(doc_id) {
        Some(v) => Ok(std::borrow::Cow::Borrowed(v)),
        None => Ok(std::borrow::Cow::Owned(index.vectorize(&corpus.require(doc_id)?.body))),
    }
}

/// Excludes a document iff its best centroid cosine reaches the threshold.
pub fn classify_exclude(
    results: &MergedResultSet,
    corpus: &Corpus,
    index: &VectorIndex,
    clf: &CentroidClassifier,
) -> Result<(MergedResultSet, Vec<ClassifierExclusion>)> {
    let mut excluded = Vec::new();
    for (doc_id, _) in results.iter() {
        let v = vector_for(doc_id, corpus, index)?;
        if let Some((cat, score)) = clf.best_match(&v) {
            if score >= clf.threshold {
                excluded.push(ClassifierExclusion {
                    doc_id: doc_id.to_string(),
                    category: cat.to_string(),
                    score,
                });
            }
        }
    }
    let dropped: BTreeSet<&str> = excluded.iter().map(|e| e.doc_id.as_str()).collect();
    Ok((results.filtered(|d| !dropped.contains(d)), excluded))
}

/// Rules first, then the optional classifier on what the rules kept.
#[derive(Debug, Clone, Default)]
pub struct FilterConfig {
    pub rules: Vec<FilterRule>,
    pub classifier: Option<CentroidClassifier>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub kept: MergedResultSet,
    pub by_rule: Vec<RuleExclusion>,
    pub by_classifier: Vec<ClassifierExclusion>,
}

impl FilterConfig {
    pub fn apply(&self, results: &MergedResultSet, corpus: &Corpus, index: &VectorIndex) -> Result<FilterOutcome> {
        let (kept, by_rule) = apply_rules(results, corpus, &self.rules)?;
        let (kept, by_classifier) = match &self.classifier {
            Some(clf) => classify_exclude(&kept, corpus, index, clf)?,
            None => (kept, Vec::new()),
        };
        Ok(FilterOutcome {
            kept,
            by_rule,
            by_classifier,
        })
    }

    /// Whether a single document survives; used for per-query filtering.
    pub fn keeps(&self, doc_id: &str, corpus: &Corpus, index: &VectorIndex) -> Result<bool> {
        let doc = corpus.require(doc_id)?;
        if self.rules.iter().any(|r| r.matches(doc)) {
            return Ok(false);
        }
        if let Some(clf) = &self.classifier {
            let v = vector_for(doc_id, corpus, index)?;
            if clf.best_match(&v).is_some_and(|(_, s)| s >= clf.threshold) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{merge, QueryId, SearchResult};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plain() -> Normalizer {
        Normalizer::new(Default::default(), Default::default())
    }

    fn doc(id: &str, body: &str, tags: &[&str], uri: Option<&str>) -> Document {
        Document::from_record(
            DocumentRecord {
                doc_id: id.into(),
                title: String::new(),
                body: body.into(),
                tags: tags.iter().map(|t| t.to_string()).collect(),
                uri: uri.map(str::to_string),
            },
            &plain(),
        )
    }

    fn all_of(corpus: &Corpus) -> MergedResultSet {
        let list = corpus
            .documents()
            .enumerate()
            .map(|(i, d)| SearchResult {
                doc_id: d.doc_id.clone(),
                rank: i as u32 + 1,
                backend_score: 0.0,
            })
            .collect();
        merge(&BTreeMap::from([(QueryId(0), list)])).unwrap()
    }

    fn fixture() -> Corpus {
        Corpus::from_documents(
            vec![
                doc("a", "coal mine report", &["blog"], Some("https://blog.example/a")),
                doc("b", "coal mine output", &[], Some("https://shop.example/b")),
                doc("c", "tutorial exercise coal", &[], None),
                doc("d", "coal seam geology", &["blog", "shop"], None),
                doc("e", "annual mine figures", &[], Some("https://stats.example/e")),
            ],
            &plain(),
        )
        .unwrap()
    }

    #[test]
    fn empty_rule_list_keeps_everything() {
        let c = fixture();
        let input = all_of(&c);
        let (kept, excluded) = apply_rules(&input, &c, &[]).unwrap();
        assert_eq!(kept, input);
        assert!(excluded.is_empty());
    }

    #[test]
    fn tag_rule_excludes_tagged_docs() {
        let c = fixture();
        let rule = FilterRule::tag("no-blogs", "blog").unwrap();
        let (kept, excluded) = apply_rules(&all_of(&c), &c, &[rule]).unwrap();
        assert_eq!(
            excluded,
            vec![
                RuleExclusion { doc_id: "a".into(), rule_id: "no-blogs".into() },
                RuleExclusion { doc_id: "d".into(), rule_id: "no-blogs".into() },
            ]
        );
        assert_eq!(kept.len(), 3);
    }

    #[test]
    fn uri_and_signature_rules() {
        let c = fixture();
        let rules = vec![
            FilterRule::uri("shops", "*shop.example*").unwrap(),
            FilterRule::signature("edu", ["tutorial", "exercise", "lecture"], 2).unwrap(),
        ];
        let (kept, excluded) = apply_rules(&all_of(&c), &c, &rules).unwrap();
        let ids: Vec<&str> = excluded.iter().map(|e| e.doc_id.as_str()).collect();
        assert_eq!(ids, vec!["b", "c"]);
        assert!(kept.contains("a") && kept.contains("d") && kept.contains("e"));
    }

    #[test]
    fn rules_file_parsing() {
        let text = r#"{"rule_id": "r1", "kind": "tag-match", "tag": "blog"}
{"rule_id": "r2", "kind": "uri-pattern", "pattern": "*shop*"}

{"rule_id": "r3", "kind": "keyword-signature", "lemmas": ["Tutorials", "exercise"], "threshold": 2}"#;
        let rules = parse_rules(text, &Normalizer::english()).unwrap();
        assert_eq!(rules.len(), 3);
        match &rules[2].kind {
            RuleKind::KeywordSignature { lemmas, threshold } => {
                assert!(lemmas.contains("tutorial"));
                assert_eq!(*threshold, 2);
            }
            other => panic!("{other:?}"),
        }
        let n = Normalizer::english();
        let err = parse_rules(r#"{"rule_id": "x", "kind": "colour", "tag": "red"}"#, &n).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert!(parse_rules(r#"{"rule_id": "x", "kind": "tag-match"}"#, &n).is_err());
        assert!(parse_rules(r#"{"rule_id": "x", "kind": "tag-match", "tag": ""}"#, &n).is_err());
        assert!(parse_rules(
            r#"{"rule_id": "x", "kind": "keyword-signature", "lemmas": ["a"], "threshold": 0}"#,
            &n
        )
        .is_err());
        let dup = "{\"rule_id\": \"x\", \"kind\": \"tag-match\", \"tag\": \"a\"}\n".repeat(2);
        assert!(parse_rules(&dup, &n).is_err());
    }

    fn training(c: &Corpus) -> BTreeMap<String, Vec<Document>> {
        BTreeMap::from([
            ("edu".to_string(), vec![c.get("c").unwrap().clone()]),
            ("geo".to_string(), vec![c.get("d").unwrap().clone()]),
        ])
    }

    #[test]
    fn single_member_centroid_is_its_unit_vector() {
        let c = fixture();
        let idx = VectorIndex::build(&c).unwrap();
        let clf = train_centroid(&training(&c), &idx, 0.6).unwrap();
        let want = idx.doc_vector_by_id("c").unwrap().unit();
        let got = clf.centroid("edu").unwrap();
        for (&(t1, w1), &(t2, w2)) in got.entries().iter().zip(want.entries()) {
            assert_eq!(t1, t2);
            assert!((w1 - w2).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_members_do_not_move_the_centroid() {
        let c = fixture();
        let idx = VectorIndex::build(&c).unwrap();
        let one = train_centroid(&training(&c), &idx, 0.6).unwrap();
        let mut twice = training(&c);
        let copy = twice["edu"][0].clone();
        twice.get_mut("edu").unwrap().push(copy);
        let two = train_centroid(&twice, &idx, 0.6).unwrap();
        let (a, b) = (one.centroid("edu").unwrap(), two.centroid("edu").unwrap());
        assert!((cosine(a, b) - 1.0).abs() < 1e-12);
        assert!((a.norm() - b.norm()).abs() < 1e-12);
    }

    #[test]
    fn centroids_equal_hand_averages() {
        let docs = vec![
            doc("p1", "x x y", &[], None),
            doc("p2", "y z", &[], None),
            doc("q1", "u v", &[], None),
            doc("r1", "w w w", &[], None),
            doc("r2", "w u", &[], None),
            doc("s1", "filler", &[], None),
        ];
        let c = Corpus::from_documents(docs, &plain()).unwrap();
        let idx = VectorIndex::build(&c).unwrap();
        let labeled = BTreeMap::from([
            ("p".to_string(), vec![c.get("p1").unwrap().clone(), c.get("p2").unwrap().clone()]),
            ("q".to_string(), vec![c.get("q1").unwrap().clone()]),
            ("r".to_string(), vec![c.get("r1").unwrap().clone(), c.get("r2").unwrap().clone()]),
        ]);
        let clf = train_centroid(&labeled, &idx, 0.5).unwrap();
        // n = 6; df: x1 y2 z1 u2 v1 w2
        let idf = |df: f64| (6.0f64 / df).log2();
        let hand: BTreeMap<&str, Vec<(&str, f64)>> = BTreeMap::from([
            ("p", vec![("x", (2.0 * idf(1.0)) / 2.0), ("y", (idf(2.0) + idf(2.0)) / 2.0), ("z", idf(1.0) / 2.0)]),
            ("q", vec![("u", idf(2.0)), ("v", idf(1.0))]),
            ("r", vec![("u", idf(2.0) / 2.0), ("w", (3.0 * idf(2.0) + idf(2.0)) / 2.0)]),
        ]);
        for (cat, comps) in hand {
            let norm = comps.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            let centroid = clf.centroid(cat).unwrap();
            assert_eq!(centroid.entries().len(), comps.len());
            for (term, w) in comps {
                let got = centroid.weight(idx.term_id(term).unwrap());
                assert!((got - w / norm).abs() < 1e-9, "{cat}/{term}: {got} vs {}", w / norm);
            }
        }
    }

    #[test]
    fn training_errors() {
        let c = fixture();
        let idx = VectorIndex::build(&c).unwrap();
        let empty = BTreeMap::from([("x".to_string(), Vec::new())]);
        assert!(matches!(train_centroid(&empty, &idx, 0.6), Err(Error::Training(_))));
        let oov = BTreeMap::from([("x".to_string(), vec![doc("z", "zzz qqq", &[], None)])]);
        assert!(matches!(train_centroid(&oov, &idx, 0.6), Err(Error::Training(_))));
        assert!(train_centroid(&training(&c), &idx, 1.5).is_err());
    }

    #[test]
    fn classifier_thresholds() {
        let c = fixture();
        let idx = VectorIndex::build(&c).unwrap();
        let strict = train_centroid(&training(&c), &idx, 1.0).unwrap();
        let (kept, excluded) = classify_exclude(&all_of(&c), &c, &idx, &strict).unwrap();
        // Only the training documents themselves can reach cosine 1.
        let ids: BTreeSet<&str> = excluded.iter().map(|e| e.doc_id.as_str()).collect();
        assert!(ids.is_subset(&BTreeSet::from(["c", "d"])), "{ids:?}");
        assert_eq!(kept.len() + excluded.len(), c.len());

        let self_sim = cosine(idx.doc_vector_by_id("c").unwrap(), strict.centroid("edu").unwrap());
        let clf = strict.with_threshold(self_sim).unwrap();
        let (_, excluded) = classify_exclude(&all_of(&c), &c, &idx, &clf).unwrap();
        let hit = excluded.iter().find(|e| e.doc_id == "c").unwrap();
        assert_eq!(hit.category, "edu");
        assert!((hit.score - self_sim).abs() < 1e-12);
    }

    #[test]
    fn empty_body_is_kept() {
        let mut docs: Vec<Document> = fixture().documents().cloned().collect();
        docs.push(doc("z", "", &[], None));
        let c = Corpus::from_documents(docs, &plain()).unwrap();
        let idx = VectorIndex::build(&c).unwrap();
        let clf = train_centroid(&training(&c), &idx, 0.0).unwrap();
        let (kept, _) = classify_exclude(&all_of(&c), &c, &idx, &clf).unwrap();
        assert!(kept.contains("z"));
    }

    #[test]
    fn labeled_training_parse() {
        let text = r#"{"doc_id": "t1", "body": "Python tutorial", "category": "tutorial"}
{"doc_id": "t2", "body": "buy coal now", "category": "shop", "tags": ["shop"]}"#;
        let labeled = parse_labeled(text, &Normalizer::english()).unwrap();
        assert_eq!(labeled["tutorial"][0].body.tokens, vec!["python", "tutorial"]);
        assert_eq!(labeled.len(), 2);
        assert!(parse_labeled(r#"{"doc_id": "t1", "body": "x"}"#, &Normalizer::english()).is_err());
    }

    /// Random fixtures: partition, permutation invariance, idempotence and
    /// the monotone classifier threshold against per-document brute force.
    #[test]
    fn random_fixture_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..25 {
            let (c, rules, clf) = random_fixture(&mut rng);
            let idx = VectorIndex::build(&c).unwrap();
            let input = all_of(&c);
            let (kept, excluded) = apply_rules(&input, &c, &rules).unwrap();
            assert_eq!(kept.len() + excluded.len(), input.len());
            for d in c.documents() {
                let brute = rules.iter().any(|r| r.matches(d));
                assert_eq!(brute, !kept.contains(&d.doc_id));
            }
            let mut shuffled = rules.clone();
            shuffled.shuffle(&mut rng);
            let (kept2, excluded2) = apply_rules(&input, &c, &shuffled).unwrap();
            assert_eq!((kept2, excluded2), (kept.clone(), excluded));
            assert!(apply_rules(&kept, &c, &rules).unwrap().1.is_empty());

            let Ok(clf) = train_centroid(&clf, &idx, 0.0) else {
                continue;
            };
            let mut last = usize::MAX;
            for step in 0..=10 {
                let t = step as f64 / 10.0;
                let (k, e) = classify_exclude(&input, &c, &idx, &clf.with_threshold(t).unwrap()).unwrap();
                assert_eq!(k.len() + e.len(), input.len());
                assert!(e.len() <= last);
                last = e.len();
            }
        }
    }

    fn random_fixture(
        rng: &mut ChaCha8Rng,
    ) -> (Corpus, Vec<FilterRule>, BTreeMap<String, Vec<Document>>) {
        let tags = ["blog", "shop", "edu", "news"];
        let docs: Vec<Document> = (0..20)
            .map(|i| {
                let body: Vec<String> =
                    (0..rng.gen_range(1..10)).map(|_| format!("w{}", rng.gen_range(0..25))).collect();
                let doc_tags: Vec<&str> = tags.iter().copied().filter(|_| rng.gen_bool(0.2)).collect();
                let uri = format!("https://{}.example/{i}", tags[rng.gen_range(0..tags.len())]);
                doc(&format!("d{i:02}"), &body.join(" "), &doc_tags, Some(&uri))
            })
            .collect();
        let c = Corpus::from_documents(docs, &plain()).unwrap();
        let mut rules = Vec::new();
        for i in 0..rng.gen_range(0..5) {
            let id = format!("r{i}");
            let rule = match rng.gen_range(0..3) {
                0 => FilterRule::tag(&id, tags[rng.gen_range(0..tags.len())]).unwrap(),
                1 => FilterRule::uri(&id, &format!("*{}*", tags[rng.gen_range(0..tags.len())])).unwrap(),
                _ => {
                    let lemmas: Vec<String> = (0..3).map(|_| format!("w{}", rng.gen_range(0..25))).collect();
                    FilterRule::signature(&id, lemmas, rng.gen_range(1..3)).unwrap()
                }
            };
            rules.push(rule);
        }
        let mut labeled: BTreeMap<String, Vec<Document>> = BTreeMap::new();
        for d in c.documents().filter(|d| !d.body.is_empty()).take(6) {
            labeled
                .entry(format!("cat{}", rng.gen_range(0..3)))
                .or_default()
                .push(d.clone());
        }
        (c, rules, labeled)
    }
}
