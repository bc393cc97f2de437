//! Run directories: `manifest.json`, `generations.jsonl`, `results.jsonl`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{FinalResult, GenerationStats};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const GENERATIONS_FILE: &str = "generations.jsonl";
pub const RESULTS_FILE: &str = "results.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub seed: u64,
    /// Snapshot of the configuration the run was started with.
    pub config: serde_json::Value,
    pub generations: Vec<GenerationStats>,
    pub results: Vec<FinalResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub run_id: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub generation_count: usize,
    pub result_count: usize,
}

/// Writes `bytes` to a temp file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn jsonl<T: Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for it in items {
        serde_json::to_writer(&mut out, it)?;
        out.push(b'\n');
    }
    Ok(out)
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(&name, i + 1, e.to_string())))
        .collect()
}

/// Writes the three run files into `out_dir` (created if missing) and
/// returns the manifest path.
pub fn persist_run(record: &RunRecord, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_atomic(&out_dir.join(GENERATIONS_FILE), &jsonl(&record.generations)?)?;
    write_atomic(&out_dir.join(RESULTS_FILE), &jsonl(&record.results)?)?;
    let manifest = RunManifest {
        run_id: record.run_id.clone(),
        seed: record.seed,
        config: record.config.clone(),
        generation_count: record.generations.len(),
        result_count: record.results.len(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    let path = out_dir.join(MANIFEST_FILE);
    write_atomic(&path, &bytes)?;
    Ok(path)
}

pub fn parse_manifest(text: &str) -> Result<RunManifest> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_run(dir: &Path) -> Result<RunRecord> {
    let mpath = dir.join(MANIFEST_FILE);
    let manifest = parse_manifest(&fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?)?;
    let generations: Vec<GenerationStats> = read_jsonl(&dir.join(GENERATIONS_FILE))?;
    let results: Vec<FinalResult> = read_jsonl(&dir.join(RESULTS_FILE))?;
    if generations.len() != manifest.generation_count || results.len() != manifest.result_count {
        return Err(Error::Invariant(format!(
            "{}: manifest counts do not match the trace files",
            dir.display()
        )));
    }
    Ok(RunRecord {
        run_id: manifest.run_id,
        seed: manifest.seed,
        config: manifest.config,
        generations,
        results,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::engine::QueryId;
    use proptest::prelude::*;

    pub(crate) fn arb_record() -> impl Strategy<Value = RunRecord> {
        let stats = (any::<u64>(), 0.0f64..1.0, 0.0f64..0.5, 0.0f64..1.0, any::<u64>(), prop::collection::vec("[a-z]{1,8}", 1..5), 0usize..500)
            .prop_map(|(g, mean, sd, best, id, kw, kept)| GenerationStats {
                generation: g,
                mean_fitness: mean,
                stddev_fitness: sd,
                best_fitness: best,
                best_query_id: QueryId(id),
                best_query: kw,
                kept_results: kept,
            });
        let result = ("[a-z0-9-]{1,12}", 0.0f64..=1.0, 1u32..100, 1usize..30).prop_map(|(d, w, r, h)| FinalResult {
            rank: 0,
            doc_id: d,
            weight: w,
            best_rank: r,
            query_hit_count: h,
        });
        (
            "[0-9a-f]{16}",
            any::<u64>(),
            any::<f64>().prop_filter("finite", |x| x.is_finite()),
            prop::collection::vec(stats, 0..12),
            prop::collection::vec(result, 0..20),
        )
            .prop_map(|(run_id, seed, x, generations, mut results)| {
                for (i, r) in results.iter_mut().enumerate() {
                    r.rank = i as u32 + 1;
                }
                RunRecord {
                    run_id,
                    seed,
                    config: serde_json::json!({"ga": {"seed": seed, "mutation_rate": x}, "top_k": 5}),
                    generations,
                    results,
                }
            })
    }

    #[test]
    fn missing_dir_is_created() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("a/b/run");
        let rec = RunRecord {
            run_id: "r".into(),
            seed: 7,
            config: serde_json::json!({}),
            generations: vec![],
            results: vec![],
        };
        let m = persist_run(&rec, &dir).unwrap();
        assert!(m.exists());
        assert_eq!(load_run(&dir).unwrap(), rec);
    }

    #[test]
    fn truncated_trace_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let mut runner = proptest::test_runner::TestRunner::deterministic();
        let mut rec = {
            use proptest::strategy::ValueTree;
            arb_record().new_tree(&mut runner).unwrap().current()
        };
        rec.generations.push(GenerationStats {
            generation: 0,
            mean_fitness: 0.5,
            stddev_fitness: 0.0,
            best_fitness: 0.5,
            best_query_id: QueryId(0),
            best_query: vec!["x".into()],
            kept_results: 1,
        });
        persist_run(&rec, tmp.path()).unwrap();
        fs::write(tmp.path().join(GENERATIONS_FILE), "").unwrap();
        assert!(load_run(tmp.path()).is_err());
    }

    #[test]
    fn unwritable_target_is_io_error() {
        let tmp = tempfile::tempdir().unwrap();
        let file = tmp.path().join("plain");
        fs::write(&file, "x").unwrap();
        let rec = RunRecord {
            run_id: "r".into(),
            seed: 1,
            config: serde_json::json!(null),
            generations: vec![],
            results: vec![],
        };
        assert!(matches!(persist_run(&rec, &file.join("sub")), Err(Error::Io { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn persist_round_trip(rec in arb_record()) {
            let tmp = tempfile::tempdir().unwrap();
            persist_run(&rec, tmp.path()).unwrap();
            prop_assert_eq!(load_run(tmp.path()).unwrap(), rec);
        }
    }
}
