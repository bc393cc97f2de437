use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use subsearch::store::load_run;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_subsearch"));
    c.env_remove("SUBSEARCH_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path) {
    let o = run(&["synth", "--out", dir.to_str().unwrap(), "--docs", "120", "--targets", "15", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn single_generation_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let cfg = tmp.path().join("config.toml");
    let cfg = cfg.to_str().unwrap();
    let o = run(&["evolve", "--config", cfg, "--max-generations", "1", "--pop-size", "6", "--workers", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rd = tmp.path().join("run");
    let gens = fs::read_to_string(rd.join("generations.jsonl")).unwrap();
    assert_eq!(gens.lines().count(), 1);
    for f in ["manifest.json", "results.jsonl", "matrix.tsv", "rankings.jsonl"] {
        assert!(rd.join(f).is_file(), "{f}");
    }
    let rec = load_run(&rd).unwrap();
    assert_eq!(rec.seed, 3);
    assert_eq!(rec.config["ga"]["pop_size"], 6);

    let rds = rd.to_str().unwrap();
    let o = run(&["rank", "--run", rds, "--blend", "ka=1,kd=1", "--show", "p_ka"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&["eval", "--run", rds, "--config", cfg]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    for label in ["p_ka", "p_kb", "p_kc", "p_kd", "final"] {
        assert!(text.contains(label), "{label} missing from\n{text}");
    }
    for f in ["eval.json", "eval.txt", "dcg_curve.tsv"] {
        assert!(rd.join(f).is_file(), "{f}");
    }
    let o = run(&["report", "--run", rds]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(rd.join("fitness.tsv").is_file());
    assert!(String::from_utf8(o.stdout).unwrap().contains("NDCG"));
}

#[test]
fn config_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let out = tmp.path().join("envrun");
    let o = bin()
        .env("SUBSEARCH_CONFIG", tmp.path().join("config.toml"))
        .args(["evolve", "--max-generations", "1", "--pop-size", "4", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn final_ranking_matching_the_ideal_scores_one() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let cfg = tmp.path().join("config.toml");
    let o = run(&["evolve", "--config", cfg.to_str().unwrap(), "--max-generations", "2", "--pop-size", "6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rd = tmp.path().join("run");
    let rec = load_run(&rd).unwrap();
    // grades fall with the final order; nothing outside it is relevant
    let mut qrels = String::new();
    for (i, r) in rec.results.iter().enumerate() {
        let g = 3 - (3 * i / rec.results.len()) as u8;
        qrels.push_str(&format!("t\t{}\t{g}\n", r.doc_id));
    }
    let qp = tmp.path().join("ideal.tsv");
    fs::write(&qp, qrels).unwrap();
    let o = run(&["eval", "--run", rd.to_str().unwrap(), "--qrels", qp.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(rd.join("eval.json")).unwrap()).unwrap();
    let fin = rep["patterns"].as_array().unwrap().iter().find(|p| p["label"] == "final").unwrap();
    assert!((fin["ndcg"].as_f64().unwrap() - 1.0).abs() < 1e-12, "{fin}");
}

#[test]
fn ingest_then_search() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("c.jsonl");
    fs::write(
        &corpus,
        r#"{"doc_id":"a","body":"coal mine safety"}
{"doc_id":"b","body":"river fishing"}
{"doc_id":"c","body":"coal prices fall"}
"#,
    )
    .unwrap();
    let idx = tmp.path().join("idx");
    let o = run(&["ingest", "--corpus", corpus.to_str().unwrap(), "--out", idx.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&["search", "--index", idx.join("index.json").to_str().unwrap(), "-P", "5", "Coal", "safety"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let ids: Vec<&str> = out.lines().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(ids, ["a", "c"]);
    let o2 = run(&["search", "--corpus", corpus.to_str().unwrap(), "-P", "5", "coal", "safety"]);
    assert_eq!(o2.stdout, out.as_bytes());
}

#[test]
fn exit_codes_follow_error_class() {
    let tmp = tempfile::tempdir().unwrap();
    // unknown flag
    let o = run(&["evolve", "--populaton", "3"]);
    assert_eq!(code(&o), 2);
    // missing seed
    let cfg = tmp.path().join("noseed.toml");
    fs::write(&cfg, "[paths]\ncorpus = \"c.jsonl\"\n").unwrap();
    let o = run(&["evolve", "--config", cfg.to_str().unwrap(), "--out", "x"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("config:"), "{}", stderr(&o));
    // missing corpus file
    let cfg = tmp.path().join("missing.toml");
    fs::write(&cfg, "seed = 1\n[paths]\ncorpus = \"nope.jsonl\"\nq0 = \"nope.txt\"\nout_dir = \"r\"\n").unwrap();
    let o = run(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("paths.corpus"), "{}", stderr(&o));
    // malformed corpus: data error tagged with the stage
    fs::write(tmp.path().join("bad.jsonl"), "{\"doc_id\": 1}\n").unwrap();
    fs::write(tmp.path().join("q0.txt"), "coal\n").unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "seed = 1\n[paths]\ncorpus = \"bad.jsonl\"\nq0 = \"q0.txt\"\nout_dir = \"r\"\n").unwrap();
    let o = run(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("ingest:"), "{}", stderr(&o));
    // external backend is not compiled in
    fs::write(tmp.path().join("ok.jsonl"), "{\"doc_id\":\"a\",\"body\":\"coal\"}\n").unwrap();
    let cfg = tmp.path().join("web.toml");
    fs::write(
        &cfg,
        "seed = 1\nbackend = \"external:bing\"\n[paths]\ncorpus = \"ok.jsonl\"\nq0 = \"q0.txt\"\nout_dir = \"r\"\n",
    )
    .unwrap();
    let o = run(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    // eval on a run without judgments for the topic
    let o = run(&["eval", "--run", tmp.path().join("none").to_str().unwrap(), "--qrels", "/nonexistent"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn help_lists_every_flag() {
    for (cmd, flags) in [
        ("ingest", &["--corpus", "--out", "--stopwords", "--stem-rules"][..]),
        ("search", &["--corpus", "--index", "--budget", "--stopwords"][..]),
        (
            "evolve",
            &[
                "--config", "--out", "--seed", "--pop-size", "--keywords", "--budget", "--results", "--mutation-rate",
                "--epsilon", "--max-generations", "--parent-distance", "--no-adapt-patterns", "--top-k", "--alpha-f",
                "--alpha-p", "--alpha-s", "--alpha-a", "--blend", "--position-credit", "--workers",
            ][..],
        ),
        ("rank", &["--run", "--config", "--blend", "--show"][..]),
        ("eval", &["--run", "--qrels", "--config", "--topic", "--discount"][..]),
        ("report", &["--run"][..]),
        ("synth", &["--out", "--seed", "--docs", "--targets"][..]),
    ] {
        let o = run(&[cmd, "--help"]);
        assert_eq!(code(&o), 0);
        let text = String::from_utf8(o.stdout).unwrap();
        for f in flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
}
