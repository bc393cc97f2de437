//! Command-line front end: argument parsing, input loading, and the
//! `ingest`, `search`, `evolve`, `rank`, `eval`, `report` and `synth`
//! commands.

pub mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use subsearch::engine::{execute, BackendKind, OfflineBackend, Query, QueryId};
use subsearch::evolve::{self, Environment, GenerationStats, ParentDistance, PositionCredit};
use subsearch::filter::{parse_labeled, parse_rules, train_centroid, FilterConfig};
use subsearch::metrics::{evaluate_patterns, DiscountMode, EvalReport};
use subsearch::patterns::{rank_by, PatternBlend, PatternKind, PatternRanking, RankMode, SimilarityMatrix};
use subsearch::store::{load_run, persist_run, write_atomic, Corpus, RelevanceJudgments, RunRecord};
use subsearch::synthetic::{self, PlantedConfig};
use subsearch::textcore::{AuthorityDictionary, KeyConceptSet, Normalizer, StemRules, StopwordSet, SynonymDictionary};
use subsearch::vsm::VectorIndex;
use subsearch::{Error, ErrorClass};

pub use config::RunConfig;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "SUBSEARCH_CONFIG";

pub const MATRIX_FILE: &str = "matrix.tsv";
pub const RANKINGS_FILE: &str = "rankings.jsonl";
pub const EVAL_JSON: &str = "eval.json";
pub const EVAL_TEXT: &str = "eval.txt";
pub const CURVE_FILE: &str = "dcg_curve.tsv";
pub const FITNESS_FILE: &str = "fitness.tsv";
pub const REPORT_FILE: &str = "report.txt";
pub const INDEX_FILE: &str = "index.json";
pub const CORPUS_MANIFEST_FILE: &str = "corpus_manifest.json";

/// Label of the ranking by final GA weight.
pub const FINAL_LABEL: &str = "final";

#[derive(Debug, Parser)]
#[command(name = "subsearch", version, about = "Evolutionary subject search over a local corpus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize a corpus and write its manifest and index snapshot.
    Ingest(IngestArgs),
    /// Run one keyword query against a corpus or an index snapshot.
    Search(SearchArgs),
    /// Run the genetic algorithm and write a run directory.
    Evolve(EvolveArgs),
    /// Rank a run's documents by each k-pattern (and an optional blend).
    Rank(RankArgs),
    /// Score a run's rankings against relevance judgments.
    Eval(EvalArgs),
    /// Summarize a run: fitness by generation and pattern NDCG.
    Report(ReportArgs),
    /// Write a planted synthetic corpus and a matching config.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Stopword list, one word per line (default: built-in English list).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Suffix rule table (default: built-in English rules).
    #[arg(long)]
    pub stem_rules: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// corpus.jsonl to read.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Directory for the manifest and index snapshot.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub norm: NormArgs,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// corpus.jsonl to index on the fly.
    #[arg(long, conflicts_with = "index", required_unless_present = "index")]
    pub corpus: Option<PathBuf>,
    /// Index snapshot written by `ingest`.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Result budget P.
    #[arg(short = 'P', long = "budget", default_value_t = 10)]
    pub budget: usize,
    #[command(flatten)]
    pub norm: NormArgs,
    /// Query terms; normalized like document text.
    #[arg(required = true)]
    pub terms: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Run config (TOML).
    #[arg(long, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Run directory (overrides paths.out_dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub q0: Option<PathBuf>,
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
    #[arg(long)]
    pub authority: Option<PathBuf>,
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Population size N.
    #[arg(long)]
    pub pop_size: Option<usize>,
    /// Keywords per query m.
    #[arg(long)]
    pub keywords: Option<usize>,
    /// Result budget P.
    #[arg(short = 'P', long)]
    pub budget: Option<usize>,
    /// Length of the final ranked list.
    #[arg(long)]
    pub results: Option<usize>,
    #[arg(long)]
    pub mutation_rate: Option<f64>,
    /// Stop once the fitness standard deviation falls below this.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_generations: Option<usize>,
    #[arg(long, value_parser = parse_distance)]
    pub parent_distance: Option<ParentDistance>,
    /// Keep the generation-0 k-patterns for the whole run.
    #[arg(long)]
    pub no_adapt_patterns: bool,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub alpha_f: Option<f64>,
    #[arg(long)]
    pub alpha_p: Option<f64>,
    #[arg(long)]
    pub alpha_s: Option<f64>,
    #[arg(long)]
    pub alpha_a: Option<f64>,
    /// Pattern blend for the semantic factor, e.g. `ka=1,kd=0.5`.
    #[arg(long)]
    pub blend: Option<PatternBlend>,
    #[arg(long, value_parser = parse_credit)]
    pub position_credit: Option<PositionCredit>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Run directory holding matrix.tsv.
    #[arg(long)]
    pub run: PathBuf,
    /// Config supplying [patterns].blend.
    #[arg(long, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Extra weighted ranking, e.g. `ka=1,kd=0.5` (overrides the config).
    #[arg(long)]
    pub blend: Option<PatternBlend>,
    /// Print this ranking instead of the summary.
    #[arg(long)]
    pub show: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub run: PathBuf,
    /// qrels.tsv (overrides paths.qrels).
    #[arg(long)]
    pub qrels: Option<PathBuf>,
    #[arg(long, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Topic to score (default: the config's, or the only topic in qrels).
    #[arg(long)]
    pub topic: Option<String>,
    /// `standard` or `paper-one-based`.
    #[arg(long)]
    pub discount: Option<DiscountMode>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub run: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory for the corpus files and config.toml.
    #[arg(long)]
    pub out: PathBuf,
    /// Generator seed; also written as the run seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub docs: usize,
    /// Target documents; as many near-topic ones are added, plus docs/25
    /// shop distractors.
    #[arg(long, default_value_t = 50)]
    pub targets: usize,
}

fn parse_distance(s: &str) -> Result<ParentDistance, String> {
    match s {
        "fitness" => Ok(ParentDistance::Fitness),
        "hamming" => Ok(ParentDistance::Hamming),
        _ => Err(format!("{s:?}: expected fitness or hamming")),
    }
}

fn parse_credit(s: &str) -> Result<PositionCredit, String> {
    match s {
        "linear" => Ok(PositionCredit::Linear),
        "reciprocal" => Ok(PositionCredit::Reciprocal),
        _ => Err(format!("{s:?}: expected linear or reciprocal")),
    }
}

/// A failure tagged with the pipeline stage it came from.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        exit_code(self.error.class())
    }
}

pub fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Data => 3,
        ErrorClass::Backend => 4,
    }
}

type CliResult<T> = std::result::Result<T, StageError>;

trait Stage<T> {
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T> Stage<T> for subsearch::Result<T> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|error| StageError { stage, error })
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ingest(a) => cmd_ingest(&a),
        Command::Search(a) => cmd_search(&a),
        Command::Evolve(a) => cmd_evolve(&a).map(|_| ()),
        Command::Rank(a) => cmd_rank(&a),
        Command::Eval(a) => cmd_eval(&a).map(|_| ()),
        Command::Report(a) => cmd_report(&a),
        Command::Synth(a) => cmd_synth(&a),
    }
}

fn read_text(path: &Path) -> subsearch::Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| Error::Decode {
        offset: e.utf8_error().valid_up_to(),
    })
}

fn normalizer(stopwords: Option<&Path>, stem_rules: Option<&Path>) -> CliResult<Normalizer> {
    let stops = match stopwords {
        Some(p) => StopwordSet::parse(&read_text(p).stage("stopwords")?).stage("stopwords")?,
        None => StopwordSet::english(),
    };
    let rules = match stem_rules {
        Some(p) => StemRules::parse(&read_text(p).stage("stem-rules")?).stage("stem-rules")?,
        None => StemRules::english(),
    };
    Ok(Normalizer::new(stops, rules))
}

pub fn cmd_ingest(a: &IngestArgs) -> CliResult<()> {
    let n = normalizer(a.norm.stopwords.as_deref(), a.norm.stem_rules.as_deref())?;
    let corpus = Corpus::ingest(&a.corpus, &n).stage("ingest")?;
    let index = VectorIndex::build(&corpus).stage("index")?;
    let mut manifest = serde_json::to_vec_pretty(corpus.manifest()).map_err(Error::from).stage("ingest")?;
    manifest.push(b'\n');
    write_atomic(&a.out.join(CORPUS_MANIFEST_FILE), &manifest).stage("persist")?;
    write_atomic(&a.out.join(INDEX_FILE), index.to_json().as_bytes()).stage("persist")?;
    println!(
        "{} documents, {} terms -> {}",
        corpus.len(),
        index.vocab_size(),
        a.out.display()
    );
    Ok(())
}

pub fn cmd_search(a: &SearchArgs) -> CliResult<()> {
    let n = normalizer(a.norm.stopwords.as_deref(), a.norm.stem_rules.as_deref())?;
    let index = match (&a.corpus, &a.index) {
        (Some(c), _) => VectorIndex::build(&Corpus::ingest(c, &n).stage("ingest")?).stage("index")?,
        (None, Some(i)) => VectorIndex::load(i).stage("index")?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let mut lemmas: Vec<String> = Vec::new();
    for t in a.terms.iter().flat_map(|t| n.normalize(t).tokens) {
        if !lemmas.contains(&t) {
            lemmas.push(t);
        }
    }
    let query = Query::new(QueryId(0), lemmas).stage("search")?;
    let backend = OfflineBackend::new(&index);
    let hits = execute(&query, &backend, a.budget).stage("search")?;
    let mut out = String::new();
    for h in hits {
        let _ = writeln!(out, "{}\t{}\t{:.6}", h.rank, h.doc_id, h.backend_score);
    }
    print!("{out}");
    Ok(())
}

fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p).stage("config"),
        None => Ok(RunConfig::default()),
    }
}

fn apply_overrides(cfg: &mut RunConfig, a: &EvolveArgs) {
    macro_rules! set {
        ($flag:expr => $($field:tt)+) => {
            if let Some(v) = $flag.clone() {
                cfg.$($field)+ = v;
            }
        };
    }
    if let Some(s) = a.seed {
        cfg.set_seed(s);
    }
    if a.out.is_some() {
        cfg.paths.out_dir = a.out.clone();
    }
    for (slot, flag) in [
        (&mut cfg.paths.corpus, &a.corpus),
        (&mut cfg.paths.q0, &a.q0),
        (&mut cfg.paths.synonyms, &a.synonyms),
        (&mut cfg.paths.authority, &a.authority),
        (&mut cfg.paths.rules, &a.rules),
    ] {
        if flag.is_some() {
            *slot = flag.clone();
        }
    }
    set!(a.pop_size => ga.pop_size);
    set!(a.keywords => ga.keywords_per_query);
    set!(a.budget => ga.result_budget);
    set!(a.results => ga.final_result_count);
    set!(a.mutation_rate => ga.mutation_rate);
    set!(a.epsilon => ga.stability_epsilon);
    set!(a.max_generations => ga.max_generations);
    set!(a.parent_distance => ga.parent_distance);
    set!(a.top_k => patterns.top_k);
    set!(a.alpha_f => weights.alpha_f);
    set!(a.alpha_p => weights.alpha_p);
    set!(a.alpha_s => weights.alpha_s);
    set!(a.alpha_a => weights.alpha_a);
    set!(a.blend => weights.pattern_blend);
    set!(a.position_credit => weights.position_credit);
    if a.no_adapt_patterns {
        cfg.ga.adapt_patterns = false;
    }
}

/// Inputs of one run, loaded and checked.
pub struct Inputs {
    pub corpus: Corpus,
    pub index: VectorIndex,
    pub q0: KeyConceptSet,
    pub synonyms: SynonymDictionary,
    pub authority: AuthorityDictionary,
    pub filter: FilterConfig,
}

pub fn load_inputs(cfg: &RunConfig) -> CliResult<Inputs> {
    let p = &cfg.paths;
    let n = normalizer(p.stopwords.as_deref(), p.stem_rules.as_deref())?;
    let corpus_path = p.corpus.as_deref().ok_or_else(|| StageError {
        stage: "config",
        error: Error::Config("paths.corpus is not set".into()),
    })?;
    let corpus = Corpus::ingest(corpus_path, &n).stage("ingest")?;
    let index = VectorIndex::build(&corpus).stage("index")?;
    let q0_path = p.q0.as_deref().ok_or_else(|| StageError {
        stage: "config",
        error: Error::Config("paths.q0 is not set".into()),
    })?;
    let q0 = KeyConceptSet::parse(&read_text(q0_path).stage("q0")?, &n).stage("q0")?;
    let mut synonyms = match &p.synonyms {
        Some(path) => SynonymDictionary::parse_tsv(&read_text(path).stage("synonyms")?, &n).stage("synonyms")?,
        None => SynonymDictionary::new(),
    };
    if cfg.text.symmetric_synonyms {
        synonyms = synonyms.with_symmetric_closure();
    }
    let authority = match &p.authority {
        Some(path) => AuthorityDictionary::parse_jsonl(&read_text(path).stage("authority")?, &n).stage("authority")?,
        None => AuthorityDictionary::default(),
    };
    let rules = match &p.rules {
        Some(path) => parse_rules(&read_text(path).stage("rules")?, &n).stage("rules")?,
        None => Vec::new(),
    };
    let classifier = match &p.labeled {
        Some(path) => {
            let labeled = parse_labeled(&read_text(path).stage("classifier")?, &n).stage("classifier")?;
            Some(train_centroid(&labeled, &index, cfg.filter.classifier_threshold).stage("classifier")?)
        }
        None => None,
    };
    Ok(Inputs {
        corpus,
        index,
        q0,
        synonyms,
        authority,
        filter: FilterConfig { rules, classifier },
    })
}

/// Runs the GA per `a` and writes the run directory; returns its path.
pub fn cmd_evolve(a: &EvolveArgs) -> CliResult<PathBuf> {
    let mut cfg = load_config(a.config.as_deref())?;
    apply_overrides(&mut cfg, a);
    cfg.validate_for_evolve().stage("config")?;
    if let BackendKind::External(name) = &cfg.backend {
        return Err(StageError {
            stage: "backend",
            error: Error::Backend(format!("no adapter for external:{name} in this build")),
        });
    }
    let out_dir = cfg.paths.out_dir.clone().expect("validated");
    let inputs = load_inputs(&cfg)?;
    let ecfg = cfg.evolve_config();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = a.workers {
        if w == 0 {
            return Err(StageError {
                stage: "config",
                error: Error::Config("--workers must be >= 1".into()),
            });
        }
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
        .stage("config")?;

    let backend = OfflineBackend::new(&inputs.index);
    let env = Environment {
        q0: &inputs.q0,
        corpus: &inputs.corpus,
        index: &inputs.index,
        backend: &backend,
        filter: &inputs.filter,
        synonyms: &inputs.synonyms,
        authority: &inputs.authority,
    };
    let mut outcome = pool.install(|| evolve::run(env, &ecfg)).stage("evolve")?;
    outcome.record.config = serde_json::to_value(&cfg).map_err(Error::from).stage("persist")?;

    persist_run(&outcome.record, &out_dir).stage("persist")?;
    let matrix = &outcome.evaluation.matrix;
    write_atomic(&out_dir.join(MATRIX_FILE), matrix.to_tsv().as_bytes()).stage("persist")?;
    let rankings = rankings_for(matrix, &outcome.record, cfg.patterns.blend.as_ref()).stage("rank")?;
    write_rankings(&out_dir, &rankings)?;

    let last = outcome.record.generations.last();
    println!(
        "run {} -> {}: {} generations, best fitness {:.4}, {} results",
        outcome.record.run_id,
        out_dir.display(),
        outcome.record.generations.len(),
        last.map_or(0.0, |g| g.best_fitness),
        outcome.record.results.len()
    );
    Ok(out_dir)
}

/// One ranking per pattern present in `matrix`, the optional blend, and the
/// run's final GA order.
pub fn rankings_for(
    matrix: &SimilarityMatrix,
    record: &RunRecord,
    blend: Option<&PatternBlend>,
) -> subsearch::Result<Vec<PatternRanking>> {
    let mut out = Vec::new();
    for kind in PatternKind::ALL {
        if matrix.col_index(kind).is_some() {
            out.push(rank_by(matrix, &RankMode::Single(kind))?);
        }
    }
    if let Some(b) = blend {
        out.push(rank_by(matrix, &RankMode::Weighted(b.clone()))?);
    }
    out.push(PatternRanking {
        label: FINAL_LABEL.into(),
        entries: record.results.iter().map(|r| (r.doc_id.clone(), r.weight)).collect(),
    });
    Ok(out)
}

fn write_rankings(dir: &Path, rankings: &[PatternRanking]) -> CliResult<()> {
    let mut bytes = Vec::new();
    for r in rankings {
        serde_json::to_writer(&mut bytes, r).map_err(Error::from).stage("persist")?;
        bytes.push(b'\n');
    }
    write_atomic(&dir.join(RANKINGS_FILE), &bytes).stage("persist")
}

fn read_rankings(dir: &Path) -> CliResult<Vec<PatternRanking>> {
    let path = dir.join(RANKINGS_FILE);
    let text = read_text(&path).stage("rank")?;
    let name = path.display().to_string();
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(&name, i + 1, e.to_string())))
        .collect::<subsearch::Result<_>>()
        .stage("rank")
}

fn load_matrix(dir: &Path) -> CliResult<SimilarityMatrix> {
    SimilarityMatrix::from_tsv(&read_text(&dir.join(MATRIX_FILE)).stage("rank")?).stage("rank")
}

pub fn cmd_rank(a: &RankArgs) -> CliResult<()> {
    let cfg = load_config(a.config.as_deref())?;
    let record = load_run(&a.run).stage("load-run")?;
    let matrix = load_matrix(&a.run)?;
    let blend = a.blend.as_ref().or(cfg.patterns.blend.as_ref());
    let rankings = rankings_for(&matrix, &record, blend).stage("rank")?;
    write_rankings(&a.run, &rankings)?;
    let mut out = String::new();
    match &a.show {
        Some(label) => {
            let r = rankings.iter().find(|r| &r.label == label).ok_or_else(|| StageError {
                stage: "rank",
                error: Error::Argument(format!(
                    "no ranking {label:?}; have {}",
                    rankings.iter().map(|r| r.label.as_str()).collect::<Vec<_>>().join(", ")
                )),
            })?;
            for (i, (d, s)) in r.entries.iter().enumerate() {
                let _ = writeln!(out, "{}\t{d}\t{s:.6}", i + 1);
            }
        }
        None => {
            for r in &rankings {
                let head: Vec<&str> = r.doc_ids().into_iter().take(5).collect();
                let _ = writeln!(out, "{:<12} {:>4} docs  top: {}", r.label, r.entries.len(), head.join(" "));
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn pick_topic(flag: Option<&str>, cfg: &RunConfig, qrels: &RelevanceJudgments) -> CliResult<String> {
    if let Some(t) = flag.or(cfg.metrics.topic.as_deref()) {
        return Ok(t.to_string());
    }
    let topics: Vec<&str> = qrels.topics().collect();
    match topics.as_slice() {
        [only] => Ok(only.to_string()),
        _ => Err(StageError {
            stage: "eval",
            error: Error::Config(format!(
                "qrels hold {} topics; pick one with --topic",
                topics.len()
            )),
        }),
    }
}

pub fn cmd_eval(a: &EvalArgs) -> CliResult<EvalReport> {
    let cfg = load_config(a.config.as_deref())?;
    let qrels_path = a.qrels.clone().or(cfg.paths.qrels.clone()).ok_or_else(|| StageError {
        stage: "config",
        error: Error::Config("no qrels: pass --qrels or set paths.qrels".into()),
    })?;
    let qrels = RelevanceJudgments::load(&qrels_path).stage("qrels")?;
    let topic = pick_topic(a.topic.as_deref(), &cfg, &qrels)?;
    let mode = a.discount.unwrap_or(cfg.metrics.discount);
    let rankings = if a.run.join(RANKINGS_FILE).exists() {
        read_rankings(&a.run)?
    } else {
        let record = load_run(&a.run).stage("load-run")?;
        rankings_for(&load_matrix(&a.run)?, &record, cfg.patterns.blend.as_ref()).stage("rank")?
    };
    let report = evaluate_patterns(&rankings, &qrels, &topic, mode).stage("eval")?;
    write_atomic(&a.run.join(EVAL_JSON), report.to_json().stage("eval")?.as_bytes()).stage("persist")?;
    write_atomic(&a.run.join(EVAL_TEXT), report.to_text().as_bytes()).stage("persist")?;
    write_atomic(&a.run.join(CURVE_FILE), report.to_curve_tsv().as_bytes()).stage("persist")?;
    print!("{}", report.to_text());
    Ok(report)
}

/// Fitness by generation as TSV.
pub fn fitness_tsv(generations: &[GenerationStats]) -> String {
    let mut out = String::from("generation\tmean\tstddev\tbest\tkept\tbest_query\n");
    for g in generations {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            g.generation,
            g.mean_fitness,
            g.stddev_fitness,
            g.best_fitness,
            g.kept_results,
            g.best_query.join(" ")
        );
    }
    out
}

pub fn report_text(record: &RunRecord, eval: Option<&EvalReport>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "run {}  seed {}", record.run_id, record.seed);
    let _ = writeln!(out);
    let _ = writeln!(out, "{:>3}  {:>7}  {:>7}  {:>7}  {:>5}  best query", "gen", "mean", "stddev", "best", "kept");
    for g in &record.generations {
        let _ = writeln!(
            out,
            "{:>3}  {:>7.4}  {:>7.4}  {:>7.4}  {:>5}  {}",
            g.generation,
            g.mean_fitness,
            g.stddev_fitness,
            g.best_fitness,
            g.kept_results,
            g.best_query.join(" ")
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "top results");
    for r in record.results.iter().take(10) {
        let _ = writeln!(
            out,
            "{:>3}  {:<16} {:.4}  best rank {:>3}  hits {}",
            r.rank, r.doc_id, r.weight, r.best_rank, r.query_hit_count
        );
    }
    let _ = writeln!(out);
    match eval {
        Some(e) => out.push_str(&e.to_text()),
        None => {
            let _ = writeln!(out, "no evaluation yet; run `subsearch eval`");
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "not reproduced: the share of documents whose relevance group shifts \
         between patterns depends on expert judgments and live web results"
    );
    out
}

pub fn cmd_report(a: &ReportArgs) -> CliResult<()> {
    let record = load_run(&a.run).stage("load-run")?;
    let eval_path = a.run.join(EVAL_JSON);
    let eval: Option<EvalReport> = if eval_path.exists() {
        let text = read_text(&eval_path).stage("report")?;
        Some(serde_json::from_str(&text).map_err(Error::from).stage("report")?)
    } else {
        None
    };
    let text = report_text(&record, eval.as_ref());
    write_atomic(&a.run.join(FITNESS_FILE), fitness_tsv(&record.generations).as_bytes()).stage("persist")?;
    write_atomic(&a.run.join(REPORT_FILE), text.as_bytes()).stage("persist")?;
    print!("{text}");
    Ok(())
}

/// Config written next to a synthetic corpus; every path is relative.
pub fn synth_config(seed: u64) -> String {
    format!(
        "seed = {seed}\n\n[paths]\ncorpus = \"corpus.jsonl\"\nq0 = \"q0.txt\"\nqrels = \"qrels.tsv\"\n\
         synonyms = \"synonyms.tsv\"\nauthority = \"authority.jsonl\"\nrules = \"rules.jsonl\"\nout_dir = \"run\"\n\n\
         [metrics]\ntopic = \"{}\"\n",
        synthetic::TOPIC
    )
}

pub fn cmd_synth(a: &SynthArgs) -> CliResult<()> {
    // near-topic and shop counts scale with the flags; 500/50 gives the defaults
    let pc = PlantedConfig {
        n_docs: a.docs,
        n_targets: a.targets,
        n_near: a.targets,
        n_shop: a.docs / 25,
        seed: a.seed,
        ..Default::default()
    };
    if pc.n_targets + pc.n_near + pc.n_shop > pc.n_docs {
        return Err(StageError {
            stage: "config",
            error: Error::Config(format!("{} docs cannot hold the planted roles", pc.n_docs)),
        });
    }
    let planted = synthetic::generate(&pc, &Normalizer::english());
    planted.write_files(&a.out).stage("persist")?;
    write_atomic(&a.out.join("config.toml"), synth_config(a.seed).as_bytes()).stage("persist")?;
    let roles: BTreeMap<String, usize> = planted.roles.iter().fold(BTreeMap::new(), |mut m, r| {
        *m.entry(format!("{r:?}").to_lowercase()).or_default() += 1;
        m
    });
    println!("{} documents {:?} -> {}", planted.records.len(), roles, a.out.display());
    Ok(())
}
