use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mini() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini")
}

/// Copy of the mini corpus in a scratch directory, so runs write there.
fn workspace() -> tempfile::TempDir {
    let tmp = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(mini()).unwrap() {
        let path = entry.unwrap().path();
        if path.is_file() {
            fs::copy(&path, tmp.path().join(path.file_name().unwrap())).unwrap();
        }
    }
    tmp
}

fn sumcot(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumcot"))
        .current_dir(dir)
        .env("SUMCOT_API_KEY", "sk-test-should-never-be-persisted")
        .env_remove("SUMCOT_CONFIG")
        .args(["--config", "sumcot.toml"])
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "status {:?}\nstderr: {}", out.status, String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn all_files(dir: &Path, out: &mut Vec<PathBuf>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            all_files(&path, out);
        } else {
            out.push(path);
        }
    }
}

#[test]
fn ingest_reports_counts() {
    let ws = workspace();
    let text = ok(&sumcot(ws.path(), &["ingest", "--annotations", "annotations.jsonl", "--likert", "likert.jsonl"]));
    assert!(text.contains("documents: 5"), "{text}");
    assert!(text.contains("annotation sets: 2"), "{text}");
    assert!(text.contains("likert scores: 48"), "{text}");
}

#[test]
fn ingest_rejects_a_broken_corpus() {
    let ws = workspace();
    fs::write(ws.path().join("references.jsonl"), "{\"doc_id\":\"nope\",\"kind\":\"dataset\",\"text\":\"x\"}\n")
        .unwrap();
    let out = sumcot(ws.path(), &["ingest"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn mock_run_then_eval_compare_report_and_lint() {
    let ws = workspace();
    let dir = ws.path();
    let first = ok(&sumcot(dir, &["run", "--backend", "mock", "--mode", "sumcot"]));
    assert!(first.contains("processed 5, skipped 0, failed 0"), "{first}");
    let again = ok(&sumcot(dir, &["run", "--backend", "mock", "--mode", "sumcot"]));
    assert!(again.contains("processed 0, skipped 5"), "{again}");
    ok(&sumcot(dir, &["run", "--backend", "mock", "--mode", "standard"]));

    ok(&sumcot(
        dir,
        &[
            "eval",
            "--run",
            "mock-sumcot",
            "--annotations",
            "annotations.jsonl",
            "--format",
            "jsonl",
            "--out",
            "s.jsonl",
        ],
    ));
    ok(&sumcot(dir, &["eval", "--run", "mock-standard", "--format", "jsonl", "--out", "t.jsonl"]));

    let table = ok(&sumcot(dir, &["compare", "--baseline", "mock-standard", "s.jsonl", "t.jsonl"]));
    assert!(table.contains("mock-sumcot") && table.contains("mock-standard"), "{table}");
    let csv = ok(&sumcot(dir, &["compare", "--baseline", "mock-standard", "--format", "csv", "s.jsonl", "t.jsonl"]));
    assert_eq!(csv.lines().count(), 3);

    // jsonl -> jsonl re-render is byte-identical
    let rerendered = ok(&sumcot(dir, &["report", "s.jsonl", "--format", "jsonl"]));
    assert_eq!(rerendered, fs::read_to_string(dir.join("s.jsonl")).unwrap());
    let md = ok(&sumcot(dir, &["report", "s.jsonl", "--format", "md"]));
    assert!(md.contains("cnn-bucknell"));

    let lint = sumcot(dir, &["lint", "--run", "mock-sumcot"]);
    let findings = ok(&lint);
    assert!(findings.contains("\"element_redundancy\"") && findings.contains("cnn-bucknell"), "{findings}");
    let lint_std = sumcot(dir, &["lint", "--run", "mock-standard"]);
    assert_eq!(lint_std.status.code(), Some(1));

    let mut files = Vec::new();
    all_files(dir, &mut files);
    for f in files {
        let bytes = fs::read(&f).unwrap();
        assert!(!String::from_utf8_lossy(&bytes).contains("sk-test"), "credential leaked into {}", f.display());
    }
}

#[test]
fn partial_failure_exits_with_status_two() {
    let ws = workspace();
    let dir = ws.path();
    let fixtures = fs::read_to_string(dir.join("mock_fixtures.jsonl")).unwrap();
    let kept: Vec<&str> = fixtures.lines().filter(|l| !l.contains("Bristol")).collect();
    assert!(kept.len() < fixtures.lines().count());
    fs::write(dir.join("mock_fixtures.jsonl"), kept.join("\n")).unwrap();

    let out = sumcot(dir, &["run", "--backend", "mock", "--mode", "standard", "--run-id", "p"]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("processed 5") && text.contains("failed 1"), "{text}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("xsum-bristol"));
}

#[test]
fn unknown_backend_and_format_are_errors() {
    let ws = workspace();
    let out = sumcot(ws.path(), &["run", "--backend", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    let out = sumcot(ws.path(), &["eval", "--system", "gpt3_zero_shot", "--format", "xml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("xml"));
}

#[test]
fn stats_and_likert_tables() {
    let ws = workspace();
    let stats = ok(&sumcot(ws.path(), &["stats"]));
    assert_eq!(stats.lines().count(), 2 + 3, "{stats}");
    assert!(stats.contains("| element_aware | 5 |"));
    let likert = ok(&sumcot(ws.path(), &["likert", "likert.jsonl"]));
    assert!(likert.contains("element_aware (baseline)") && likert.contains("gpt3_sumcot"));
}

#[test]
fn eval_with_exact_matcher_and_dataset_references() {
    let ws = workspace();
    let text = ok(&sumcot(
        ws.path(),
        &["eval", "--system", "gpt3_zero_shot", "--refs", "dataset", "--matcher", "exact", "--format", "csv"],
    ));
    assert!(text.contains("xsum-baker"));
    let same = sumcot(ws.path(), &["eval", "--references", "element_aware", "--refs", "element_aware"]);
    assert_eq!(same.status.code(), Some(1));
    let cross = ok(&sumcot(ws.path(), &["eval", "--references", "dataset", "--refs", "element_aware"]));
    assert!(cross.contains("dataset"));
}
