//! Genetic search over keyword queries.
//!
//! A population of `N` queries, each `m` distinct key concepts, is evaluated
//! against the search backend: every query runs, the lists are merged and
//! filtered, the k-patterns are rebuilt from the kept set, and every query
//! gets a fitness in `[0,1]`. Parents are paired by outbreeding, children
//! come from synonym recombination plus mutation, and the best `N` of the
//! parent+child pool survive. The loop stops when the fitness spread falls
//! below `stability_epsilon` or after `max_generations` evaluations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{execute, merge, MergedResultSet, Query, QueryId, SearchBackend, SearchResult};
use crate::error::{Error, Result};
use crate::filter::FilterConfig;
use crate::patterns::{build_kpatterns, similarity_matrix, KPatternSet, PatternBlend, SimilarityMatrix, DEFAULT_TOP_K};
use crate::rng::{substream, Purpose};
use crate::store::{Corpus, RunRecord};
use crate::textcore::{AuthorityDictionary, KeyConceptSet, SynonymDictionary};
use crate::vsm::VectorIndex;

/// Two fitness values closer than this count as tied.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParentDistance {
    /// `|w̄_1 − w̄_2|`
    #[default]
    Fitness,
    /// Number of keywords of one parent missing from the other.
    Hamming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositionCredit {
    /// `(P − rank + 1) / P`
    #[default]
    Linear,
    /// `1 / rank`
    Reciprocal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GAConfig {
    pub pop_size: usize,
    pub keywords_per_query: usize,
    pub result_budget: usize,
    pub final_result_count: usize,
    pub mutation_rate: f64,
    pub stability_epsilon: f64,
    pub max_generations: usize,
    pub seed: u64,
    pub parent_distance: ParentDistance,
    /// Rebuild k-patterns every generation. When off, the generation-0
    /// patterns and hit counts are reused, so a query's fitness never changes.
    pub adapt_patterns: bool,
}

impl Default for GAConfig {
    fn default() -> Self {
        GAConfig {
            pop_size: 15,
            keywords_per_query: 3,
            result_budget: 10,
            final_result_count: 50,
            mutation_rate: 0.1,
            stability_epsilon: 0.01,
            max_generations: 10,
            seed: 0,
            parent_distance: ParentDistance::Fitness,
            adapt_patterns: true,
        }
    }
}

impl GAConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.pop_size < 2 {
            return bad("pop_size must be >= 2");
        }
        if self.keywords_per_query < 1 {
            return bad("keywords_per_query must be >= 1");
        }
        if self.result_budget < 1 {
            return bad("result_budget must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation_rate must be in [0,1]");
        }
        if !(self.stability_epsilon >= 0.0 && self.stability_epsilon.is_finite()) {
            return bad("stability_epsilon must be finite and >= 0");
        }
        if self.max_generations < 1 {
            return bad("max_generations must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitnessWeights {
    pub alpha_f: f64,
    pub alpha_p: f64,
    pub alpha_s: f64,
    pub alpha_a: f64,
    pub pattern_blend: PatternBlend,
    pub position_credit: PositionCredit,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        FitnessWeights {
            alpha_f: 1.0,
            alpha_p: 1.0,
            alpha_s: 1.0,
            alpha_a: 0.0,
            pattern_blend: PatternBlend::default(),
            position_credit: PositionCredit::Linear,
        }
    }
}

impl FitnessWeights {
    pub fn validate(&self) -> Result<()> {
        let alphas = [self.alpha_f, self.alpha_p, self.alpha_s, self.alpha_a];
        if alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Config("fitness alphas must be finite and >= 0".into()));
        }
        if alphas.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config("at least one fitness alpha must be positive".into()));
        }
        Ok(())
    }
}

/// Everything a run is configured with; serialized into the run record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub ga: GAConfig,
    pub weights: FitnessWeights,
    pub top_k: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            ga: GAConfig::default(),
            weights: FitnessWeights::default(),
            top_k: DEFAULT_TOP_K,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        self.ga.validate()?;
        self.weights.validate()?;
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryPopulation {
    pub generation: u64,
    pub members: Vec<Query>,
    pub fitness: BTreeMap<QueryId, f64>,
}

impl QueryPopulation {
    pub fn new(generation: u64, members: Vec<Query>) -> Self {
        QueryPopulation {
            generation,
            members,
            fitness: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn fitness_of(&self, id: QueryId) -> Result<f64> {
        self.fitness
            .get(&id)
            .copied()
            .ok_or_else(|| Error::Invariant(format!("{id} has no fitness")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: u64,
    pub mean_fitness: f64,
    pub stddev_fitness: f64,
    pub best_fitness: f64,
    pub best_query_id: QueryId,
    pub best_query: Vec<String>,
    /// Size of the filtered merged result set this generation.
    pub kept_results: usize,
}

impl GenerationStats {
    /// Population (not sample) standard deviation; best ties go to the
    /// smaller query id.
    pub fn compute(pop: &QueryPopulation, kept_results: usize) -> Result<Self> {
        if pop.is_empty() {
            return Err(Error::Invariant("empty population".into()));
        }
        let values = pop
            .members
            .iter()
            .map(|q| pop.fitness_of(q.id))
            .collect::<Result<Vec<f64>>>()?;
        let n = values.len() as f64;
        let flat = values.iter().all(|v| *v == values[0]);
        // a flat population reports its value exactly, free of summation error
        let mean = if flat { values[0] } else { values.iter().sum::<f64>() / n };
        let var = if flat {
            0.0
        } else {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
        };
        let (best_idx, best) = values
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                let better = v > bv || (v == bv && pop.members[i].id < pop.members[bi].id);
                if better {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
        Ok(GenerationStats {
            generation: pop.generation,
            mean_fitness: mean.min(best),
            stddev_fitness: var.sqrt(),
            best_fitness: best,
            best_query_id: pop.members[best_idx].id,
            best_query: pop.members[best_idx].keywords().to_vec(),
            kept_results,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalResult {
    pub rank: u32,
    pub doc_id: String,
    pub weight: f64,
    pub best_rank: u32,
    pub query_hit_count: usize,
}

/// `N` queries of `m` distinct concepts drawn without replacement from `q0`.
pub fn init_population<R: Rng>(q0: &KeyConceptSet, cfg: &GAConfig, rng: &mut R) -> Result<QueryPopulation> {
    let m = cfg.keywords_per_query;
    if m == 0 || m > q0.len() {
        return Err(Error::Argument(format!(
            "keywords_per_query {m} must be in 1..={}",
            q0.len()
        )));
    }
    let members = (0..cfg.pop_size)
        .map(|i| {
            let kw = q0.concepts().choose_multiple(rng, m).cloned().collect();
            Query::new(QueryId(i as u64), kw)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QueryPopulation::new(0, members))
}

/// Weight of one result: convex combination of position credit `f`,
/// popularity `p`, pattern similarity `s` and the constant profile factor `a`.
pub fn result_weight(
    rank: u32,
    budget: usize,
    hit_count: usize,
    n_queries: usize,
    s: f64,
    weights: &FitnessWeights,
) -> Result<f64> {
    weights.validate()?;
    if rank == 0 || budget == 0 || n_queries == 0 {
        return Err(Error::Argument("rank, budget and query count must be >= 1".into()));
    }
    let f = match weights.position_credit {
        PositionCredit::Linear => (budget as f64 - rank as f64 + 1.0).max(0.0) / budget as f64,
        PositionCredit::Reciprocal => 1.0 / rank as f64,
    };
    let p = (hit_count as f64 / n_queries as f64).min(1.0);
    let a = 1.0;
    let total = weights.alpha_f + weights.alpha_p + weights.alpha_s + weights.alpha_a;
    let w = (weights.alpha_f * f + weights.alpha_p * p + weights.alpha_s * s.clamp(0.0, 1.0) + weights.alpha_a * a) / total;
    Ok(w.clamp(0.0, 1.0))
}

/// Mean weight over the query's kept results; 0 when it kept nothing.
pub fn query_fitness(result_weights: &[f64]) -> f64 {
    if result_weights.is_empty() {
        0.0
    } else {
        (result_weights.iter().sum::<f64>() / result_weights.len() as f64).clamp(0.0, 1.0)
    }
}

fn distance(a: &Query, wa: f64, b: &Query, wb: f64, mode: ParentDistance) -> f64 {
    match mode {
        ParentDistance::Fitness => (wa - wb).abs(),
        ParentDistance::Hamming => {
            let bs: BTreeSet<&String> = b.keywords().iter().collect();
            a.keywords().iter().filter(|k| !bs.contains(k)).count() as f64
        }
    }
}

/// The farthest member from `first`; ties go to the smaller query id.
pub fn farthest(pop: &QueryPopulation, first: usize, mode: ParentDistance) -> Result<usize> {
    let a = &pop.members[first];
    let wa = pop.fitness_of(a.id)?;
    let mut best: Option<(usize, f64)> = None;
    for (j, b) in pop.members.iter().enumerate() {
        if j == first {
            continue;
        }
        let d = distance(a, wa, b, pop.fitness_of(b.id)?, mode);
        best = match best {
            None => Some((j, d)),
            Some((bj, bd)) => {
                if d > bd + TIE_EPS || ((d - bd).abs() <= TIE_EPS && b.id < pop.members[bj].id) {
                    Some((j, d))
                } else {
                    Some((bj, bd))
                }
            }
        };
    }
    best.map(|(j, _)| j)
        .ok_or_else(|| Error::Argument("parent selection needs at least 2 members".into()))
}

/// `⌈N/2⌉` pairs of member indices: a uniform first parent and its farthest
/// partner.
pub fn select_parents<R: Rng>(pop: &QueryPopulation, mode: ParentDistance, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    let n = pop.len();
    if n < 2 {
        return Err(Error::Argument("parent selection needs at least 2 members".into()));
    }
    (0..n.div_ceil(2))
        .map(|_| {
            let first = rng.gen_range(0..n);
            Ok((first, farthest(pop, first, mode)?))
        })
        .collect()
}

/// Synonym discrete recombination. `coins[j] == true` keeps parent genes at
/// position `j`; otherwise each child receives a synonym of the other
/// parent's gene.
pub fn crossover_with_coins<R: Rng>(
    a: &[String],
    b: &[String],
    coins: &[bool],
    syn: &SynonymDictionary,
    q0: &KeyConceptSet,
    rng: &mut R,
) -> (Vec<String>, Vec<String>) {
    let donor = |k: &String, rng: &mut R| -> String {
        syn.get(k)
            .and_then(|s| s.iter().choose(rng))
            .cloned()
            .unwrap_or_else(|| k.clone())
    };
    let mut c1 = Vec::with_capacity(a.len());
    let mut c2 = Vec::with_capacity(b.len());
    for j in 0..a.len().min(b.len()) {
        if coins[j] {
            c1.push(a[j].clone());
            c2.push(b[j].clone());
        } else {
            c1.push(donor(&b[j], rng));
            c2.push(donor(&a[j], rng));
        }
    }
    let c1 = repair(c1, q0, rng).unwrap_or_else(|| a.to_vec());
    let c2 = repair(c2, q0, rng).unwrap_or_else(|| b.to_vec());
    (c1, c2)
}

pub fn crossover<R: Rng>(
    a: &Query,
    b: &Query,
    syn: &SynonymDictionary,
    q0: &KeyConceptSet,
    rng: &mut R,
) -> (Vec<String>, Vec<String>) {
    let coins: Vec<bool> = (0..a.len()).map(|_| rng.gen_bool(0.5)).collect();
    crossover_with_coins(a.keywords(), b.keywords(), &coins, syn, q0, rng)
}

/// Replaces repeated genes with fresh draws from `q0`; `None` if `q0` has
/// nothing left to draw.
fn repair<R: Rng>(mut genes: Vec<String>, q0: &KeyConceptSet, rng: &mut R) -> Option<Vec<String>> {
    let mut seen = BTreeSet::new();
    for j in 0..genes.len() {
        if seen.insert(genes[j].clone()) {
            continue;
        }
        let present: BTreeSet<&String> = genes.iter().collect();
        let fresh = q0.concepts().iter().filter(|c| !present.contains(c)).choose(rng)?.clone();
        seen.insert(fresh.clone());
        genes[j] = fresh;
    }
    Some(genes)
}

/// With probability `rate`, one uniformly chosen gene becomes a uniform draw
/// from `q0` minus the query's genes.
pub fn mutate<R: Rng>(genes: &[String], q0: &KeyConceptSet, rate: f64, rng: &mut R) -> Vec<String> {
    let mut out = genes.to_vec();
    if out.is_empty() || !rng.gen_bool(rate.clamp(0.0, 1.0)) {
        return out;
    }
    let pos = rng.gen_range(0..out.len());
    let present: BTreeSet<&String> = genes.iter().collect();
    match q0.concepts().iter().filter(|c| !present.contains(c)).choose(rng) {
        Some(c) => out[pos] = c.clone(),
        None => log::debug!("mutation skipped: no concept outside {genes:?}"),
    }
    out
}

/// Elite selection: the best `N` of parents ∪ children, ties to parents and
/// then to smaller query ids.
pub fn next_generation(parents: &QueryPopulation, children: &[(Query, f64)]) -> Result<QueryPopulation> {
    let mut pool: Vec<(f64, u8, &Query)> = parents
        .members
        .iter()
        .map(|q| Ok((parents.fitness_of(q.id)?, 0u8, q)))
        .collect::<Result<_>>()?;
    pool.extend(children.iter().map(|(q, w)| (*w, 1u8, q)));
    pool.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.id.cmp(&b.2.id)));
    pool.truncate(parents.len());
    Ok(QueryPopulation {
        generation: parents.generation + 1,
        members: pool.iter().map(|(_, _, q)| (*q).clone()).collect(),
        fitness: pool.iter().map(|(w, _, q)| (q.id, *w)).collect(),
    })
}

/// Inputs shared by every generation.
#[derive(Clone, Copy)]
pub struct Environment<'a> {
    pub q0: &'a KeyConceptSet,
    pub corpus: &'a Corpus,
    pub index: &'a VectorIndex,
    pub backend: &'a dyn SearchBackend,
    pub filter: &'a FilterConfig,
    pub synonyms: &'a SynonymDictionary,
    pub authority: &'a AuthorityDictionary,
}

/// One evaluation of a query set.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Aligned with the evaluated queries.
    pub fitness: Vec<f64>,
    pub lists: BTreeMap<QueryId, Vec<SearchResult>>,
    pub kept: MergedResultSet,
    pub patterns: KPatternSet,
    pub matrix: SimilarityMatrix,
    /// Numerator and denominator of the `p` factor per kept document.
    pub hits: BTreeMap<String, usize>,
    pub n_queries: usize,
}

/// Generation-0 patterns and hit counts, reused when adaptation is off.
#[derive(Debug, Clone)]
struct Reference {
    patterns: KPatternSet,
    hits: BTreeMap<String, usize>,
    n_queries: usize,
}

pub struct Evaluator<'a> {
    env: Environment<'a>,
    cfg: &'a EvolveConfig,
    cache: Mutex<HashMap<Vec<String>, Arc<Vec<SearchResult>>>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(env: Environment<'a>, cfg: &'a EvolveConfig) -> Self {
        Evaluator {
            env,
            cfg,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn lists(&self, queries: &[Query]) -> Result<Vec<Arc<Vec<SearchResult>>>> {
        let key = |q: &Query| {
            let mut k = q.keywords().to_vec();
            k.sort();
            k
        };
        let missing: BTreeSet<Vec<String>> = {
            let cache = self.cache.lock().expect("search cache");
            queries.iter().map(key).filter(|k| !cache.contains_key(k)).collect()
        };
        let fetched = missing
            .into_par_iter()
            .map(|k| {
                let q = Query::new(QueryId(0), k.clone())?;
                Ok((k, Arc::new(execute(&q, self.env.backend, self.cfg.ga.result_budget)?)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cache = self.cache.lock().expect("search cache");
        cache.extend(fetched);
        Ok(queries.iter().map(|q| Arc::clone(&cache[&key(q)])).collect())
    }

    fn evaluate_with(&self, queries: &[Query], reference: Option<&Reference>) -> Result<Evaluation> {
        let env = &self.env;
        let lists: BTreeMap<QueryId, Vec<SearchResult>> = queries
            .iter()
            .zip(self.lists(queries)?)
            .map(|(q, l)| (q.id, l.as_ref().clone()))
            .collect();
        if lists.len() != queries.len() {
            return Err(Error::Invariant("query ids are not unique".into()));
        }
        let merged = merge(&lists)?;
        let kept = env.filter.apply(&merged, env.corpus, env.index)?.kept;
        let patterns = match reference {
            Some(r) => r.patterns.clone(),
            None => build_kpatterns(&kept, env.corpus, env.q0, env.authority, env.index, self.cfg.top_k)?,
        };
        let matrix = similarity_matrix(&kept, env.corpus, &patterns, env.index)?;
        let resolved = if matrix.n_rows() == 0 {
            Vec::new()
        } else {
            self.cfg.weights.pattern_blend.resolve(matrix.cols())?
        };
        let rows = matrix.row_map();
        let (hits, n_queries) = match reference {
            Some(r) => (r.hits.clone(), r.n_queries),
            None => (distinct_hits(queries, &lists), queries.len()),
        };
        let fitness = queries
            .par_iter()
            .map(|q| {
                let weights = lists[&q.id]
                    .iter()
                    .filter(|r| kept.contains(&r.doc_id))
                    .map(|r| {
                        let s = PatternBlend::score(&resolved, rows[r.doc_id.as_str()]);
                        result_weight(r.rank, self.cfg.ga.result_budget, hits.get(&r.doc_id).copied().unwrap_or(0), n_queries, s, &self.cfg.weights)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(query_fitness(&weights))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Evaluation {
            fitness,
            lists,
            kept,
            patterns,
            matrix,
            hits,
            n_queries,
        })
    }

    /// Adaptive evaluation: patterns and hit counts from this query set.
    pub fn evaluate(&self, queries: &[Query]) -> Result<Evaluation> {
        self.evaluate_with(queries, None)
    }
}

/// doc -> number of distinct keyword sets whose list contains it. Repeated
/// queries return the same list, so they count once towards `p`.
fn distinct_hits(queries: &[Query], lists: &BTreeMap<QueryId, Vec<SearchResult>>) -> BTreeMap<String, usize> {
    let mut seen: BTreeMap<&str, BTreeSet<Vec<&String>>> = BTreeMap::new();
    for q in queries {
        let mut key: Vec<&String> = q.keywords().iter().collect();
        key.sort();
        for r in &lists[&q.id] {
            seen.entry(r.doc_id.as_str()).or_default().insert(key.clone());
        }
    }
    seen.into_iter().map(|(d, s)| (d.to_string(), s.len())).collect()
}

/// Result of a full run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub population: QueryPopulation,
    pub evaluation: Evaluation,
}

/// Deterministic run id from the configuration and the corpus manifest.
pub fn run_id(cfg: &EvolveConfig, corpus: &Corpus) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(cfg)?);
    h.update(serde_json::to_vec(corpus.manifest())?);
    for d in corpus.documents() {
        h.update(d.doc_id.as_bytes());
        h.update([0]);
    }
    let digest = h.finalize();
    Ok(digest[..8].iter().map(|b| format!("{b:02x}")).collect())
}

pub fn run(env: Environment<'_>, cfg: &EvolveConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    if 2 * cfg.ga.pop_size >= env.q0.len() {
        log::warn!(
            "pop_size {} is not below half of |Q_o| = {}; populations will overlap heavily",
            cfg.ga.pop_size,
            env.q0.len()
        );
    }
    let pop = init_population(env.q0, &cfg.ga, &mut substream(cfg.ga.seed, 0, Purpose::Init, 0))?;
    run_from(env, cfg, pop)
}

/// Runs the generation loop from a given starting population.
pub fn run_from(env: Environment<'_>, cfg: &EvolveConfig, mut pop: QueryPopulation) -> Result<RunOutcome> {
    cfg.validate()?;
    if pop.len() != cfg.ga.pop_size {
        return Err(Error::Argument(format!(
            "population has {} members, pop_size is {}",
            pop.len(),
            cfg.ga.pop_size
        )));
    }
    let ga = &cfg.ga;
    let evaluator = Evaluator::new(env, cfg);
    let mut reference: Option<Reference> = None;
    let mut stats = Vec::new();
    let mut next_id = pop.members.iter().map(|q| q.id.0 + 1).max().unwrap_or(0);

    let final_eval = loop {
        let eval = evaluator.evaluate_with(&pop.members, reference.as_ref())?;
        if !ga.adapt_patterns && reference.is_none() {
            reference = Some(Reference {
                patterns: eval.patterns.clone(),
                hits: eval.hits.clone(),
                n_queries: eval.n_queries,
            });
        }
        pop.fitness = pop.members.iter().map(|q| q.id).zip(eval.fitness.iter().copied()).collect();
        let st = GenerationStats::compute(&pop, eval.kept.len())?;
        log::info!(
            "generation {}: mean {:.4} sd {:.4} best {:.4}",
            st.generation,
            st.mean_fitness,
            st.stddev_fitness,
            st.best_fitness
        );
        let stable = st.stddev_fitness < ga.stability_epsilon;
        stats.push(st);
        if stable || stats.len() >= ga.max_generations {
            break eval;
        }

        let g = pop.generation;
        let pairs = select_parents(&pop, ga.parent_distance, &mut substream(ga.seed, g, Purpose::Select, 0))?;
        let mut children = Vec::with_capacity(ga.pop_size);
        for (i, &(a, b)) in pairs.iter().enumerate() {
            let mut rng = substream(ga.seed, g, Purpose::Crossover, i as u64);
            let (c1, c2) = crossover(&pop.members[a], &pop.members[b], env.synonyms, env.q0, &mut rng);
            children.push(c1);
            children.push(c2);
        }
        children.truncate(ga.pop_size);
        let children = children
            .into_iter()
            .enumerate()
            .map(|(j, genes)| {
                let mut rng = substream(ga.seed, g, Purpose::Mutate, j as u64);
                let genes = mutate(&genes, env.q0, ga.mutation_rate, &mut rng);
                let q = Query::new(QueryId(next_id), genes);
                next_id += 1;
                q
            })
            .collect::<Result<Vec<_>>>()?;

        let pool: Vec<Query> = pop.members.iter().chain(&children).cloned().collect();
        let pooled = evaluator.evaluate_with(&pool, reference.as_ref())?;
        let (parent_w, child_w) = pooled.fitness.split_at(pop.len());
        let parents = QueryPopulation {
            generation: pop.generation,
            members: pop.members.clone(),
            fitness: pop.members.iter().map(|q| q.id).zip(parent_w.iter().copied()).collect(),
        };
        let scored: Vec<(Query, f64)> = children.into_iter().zip(child_w.iter().copied()).collect();
        pop = next_generation(&parents, &scored)?;
    };

    let results = final_results(&final_eval, cfg)?;
    let record = RunRecord {
        run_id: run_id(cfg, env.corpus)?,
        seed: ga.seed,
        config: serde_json::to_value(cfg)?,
        generations: stats,
        results,
    };
    Ok(RunOutcome {
        record,
        population: pop,
        evaluation: final_eval,
    })
}

/// Kept documents of an evaluation, each weighted by its best `w_i` over
/// the queries that returned it, truncated to `final_result_count`. Calling
/// it with different weights re-ranks the same result set.
pub fn final_results(eval: &Evaluation, cfg: &EvolveConfig) -> Result<Vec<FinalResult>> {
    let resolved = if eval.matrix.n_rows() == 0 {
        Vec::new()
    } else {
        cfg.weights.pattern_blend.resolve(eval.matrix.cols())?
    };
    let rows = eval.matrix.row_map();
    let order = eval.kept.rated_order();
    let mut scored = Vec::with_capacity(order.len());
    for (pos, id) in order.iter().enumerate() {
        let e = eval.kept.get(id).expect("rated id");
        let (hits, n) = (eval.hits.get(*id).copied().unwrap_or(0), eval.n_queries);
        let s = PatternBlend::score(&resolved, rows[id]);
        let mut w = 0.0f64;
        for &rank in e.appearances.values() {
            w = w.max(result_weight(rank, cfg.ga.result_budget, hits, n, s, &cfg.weights)?);
        }
        scored.push((w, pos, *id, e));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.truncate(cfg.ga.final_result_count);
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(i, (w, _, id, e))| FinalResult {
            rank: i as u32 + 1,
            doc_id: id.to_string(),
            weight: w,
            best_rank: e.best_rank,
            query_hit_count: e.query_hit_count,
        })
        .collect())
}

/// Every gene a query may legally carry: `q0` plus its synonym closure.
pub fn gene_pool(q0: &KeyConceptSet, syn: &SynonymDictionary) -> BTreeSet<String> {
    syn.closure_of(q0.concepts())
}
