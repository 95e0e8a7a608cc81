use std::path::Path;
use std::process::{Command, Output};

fn itermine(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_itermine"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let o = itermine(args, cwd);
    assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    o
}

#[test]
fn bleu_of_identical_files_is_100() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("h.txt"),
        "the cat sat on the mat .\nhello there\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("r.txt"),
        "the cat sat on the mat .\nhello there\n",
    )
    .unwrap();
    let o = ok(&["bleu", "--hyp", "h.txt", "--ref", "r.txt"], dir.path());
    assert!(stdout(&o).starts_with("BLEU = 100.00 "), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = itermine(
        &[
            "align-docs",
            "--store",
            "s.jsonl",
            "--src",
            "hi",
            "--output",
            "o.tsv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--pivot"));
    assert!(stderr(&o).contains("Usage:"));
    assert_eq!(itermine(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(
        itermine(&["bleu", "--nope"], dir.path()).status.code(),
        Some(1)
    );
    assert_eq!(itermine(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = itermine(
        &["bleu", "--hyp", "missing.txt", "--ref", "missing.txt"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    std::fs::write(dir.path().join("bad.jsonl"), "{\"id\": \"a\"}\n").unwrap();
    let o = itermine(
        &["ingest", "--input", "bad.jsonl", "--output", "o.jsonl"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("line 1: missing field lang"),
        "{}",
        stderr(&o)
    );
    std::fs::write(
        dir.path().join("c.toml"),
        "store = \"x\"\nthreshhold = 0.3\n",
    )
    .unwrap();
    let o = itermine(&["iterate", "--config", "c.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("threshhold"), "{}", stderr(&o));
}

#[test]
fn help_lists_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = ok(&["align-docs", "--help"], dir.path());
    let text = stdout(&o);
    for flag in [
        "[default: 2]",
        "[default: 0.51]",
        "[default: identity]",
        "[default: 64]",
        "[default: 0]",
    ] {
        assert!(text.contains(flag), "missing {flag} in\n{text}");
    }
    let text = stdout(&ok(&["filter", "--help"], dir.path()));
    for flag in [
        "[default: 0.5]",
        "[default: 2]",
        "[default: 0.2]",
        "[default: 1]",
    ] {
        assert!(text.contains(flag), "missing {flag} in\n{text}");
    }
}

#[test]
fn iterate_stops_when_growth_stalls() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "make-fixture",
            "--out-dir",
            ".",
            "--rendering",
            "shared",
            "--stories",
            "40",
            "--seed",
            "2",
        ],
        d,
    );
    std::fs::write(
        d.join("c.toml"),
        "store = \"docs.jsonl\"\noutput = \"out\"\n",
    )
    .unwrap();
    ok(&["iterate", "--config", "c.toml"], d);
    assert!(d.join("out/iter1/report.json").exists());
    assert!(d.join("out/iter2/pairs.hi-en.tsv").exists());
    assert!(d.join("out/iter2/docpairs.ta-en.tsv").exists());
    assert!(!d.join("out/iter3").exists());
    let report = std::fs::read_to_string(d.join("out/iter2/report.json")).unwrap();
    assert!(report.contains("\"doc_pair_delta\": 0"), "{report}");
}

#[test]
fn stage_by_stage() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "make-fixture",
            "--out-dir",
            ".",
            "--langs",
            "hi,ta",
            "--stories",
            "30",
            "--seed",
            "6",
        ],
        d,
    );
    ok(
        &["ingest", "--input", "docs.jsonl", "--output", "store.jsonl"],
        d,
    );
    assert_eq!(
        std::fs::read_to_string(d.join("docs.jsonl")).unwrap(),
        std::fs::read_to_string(d.join("store.jsonl")).unwrap()
    );
    let dict = ["--backend", "dictionary", "--dictionary", "dictionary.tsv"];
    for lang in ["hi", "ta"] {
        let cache = format!("cache.{lang}.tsv");
        let docs = format!("docpairs.{lang}.tsv");
        let pairs = format!("pairs.{lang}.tsv");
        let filtered = format!("filtered.{lang}.tsv");
        let mut args = vec![
            "translate",
            "--store",
            "store.jsonl",
            "--src",
            lang,
            "--tgt",
            "en",
            "--output",
            &cache,
        ];
        args.extend(dict);
        ok(&args, d);
        let cached = ["--backend", "cached", "--cache", &cache];
        let mut args = vec![
            "align-docs",
            "--store",
            "store.jsonl",
            "--src",
            lang,
            "--pivot",
            "en",
            "--output",
            &docs,
        ];
        args.extend(cached);
        ok(&args, d);
        let mut args = vec![
            "align-sents",
            "--store",
            "store.jsonl",
            "--doc-pairs",
            &docs,
            "--pivot",
            "en",
            "--output",
            &pairs,
        ];
        args.extend(cached);
        ok(&args, d);
        ok(&["filter", "--input", &pairs, "--output", &filtered], d);
        let truth = format!("truth.{lang}-en.tsv");
        let o = ok(&["accuracy", "--doc-pairs", &docs, "--truth", &truth], d);
        assert!(
            stdout(&o).starts_with("accuracy = 100.00"),
            "{}",
            stdout(&o)
        );
        let o = ok(
            &[
                "accuracy",
                "--doc-pairs",
                &docs,
                "--store",
                "store.jsonl",
                "--src",
                lang,
                "--pivot",
                "en",
            ],
            d,
        );
        assert!(stdout(&o).starts_with("accuracy = "), "{}", stdout(&o));
    }
    let filtered = std::fs::read_to_string(d.join("filtered.hi.tsv")).unwrap();
    assert!(filtered.lines().count() > 50);
    assert!(filtered
        .lines()
        .all(|l| l.split('\t').count() == 7 && l.starts_with("hi\ten\t")));

    ok(
        &[
            "bridge",
            "--pairs",
            "filtered.hi.tsv",
            "filtered.ta.tsv",
            "--out-dir",
            "bridge",
        ],
        d,
    );
    let bridged = std::fs::read_to_string(d.join("bridge/bridge.hi-ta.tsv")).unwrap();
    let o = ok(
        &[
            "grid",
            "--pairs",
            "filtered.hi.tsv",
            "filtered.ta.tsv",
            "--tsv",
        ],
        d,
    );
    let row = stdout(&o)
        .lines()
        .find(|l| l.starts_with("hi\tta\t"))
        .unwrap()
        .to_string();
    assert_eq!(row, format!("hi\tta\t{}\t", bridged.lines().count()));
    let o = ok(
        &[
            "grid",
            "--pairs",
            "filtered.hi.tsv",
            "filtered.ta.tsv",
            "--baseline",
            "filtered.hi.tsv",
        ],
        d,
    );
    assert!(stdout(&o).contains("(+0)"));

    let o = ok(
        &[
            "align-sents",
            "--store",
            "store.jsonl",
            "--doc-pairs",
            "docpairs.hi.tsv",
            "--pivot",
            "en",
            "--method",
            "galechurch",
            "--output",
            "gc.tsv",
        ],
        d,
    );
    assert!(stderr(&o).contains("sentence pairs"));

    ok(
        &[
            "train-subwords",
            "--store",
            "store.jsonl",
            "--out-dir",
            "vocab",
            "--vocab-size",
            "300",
            "--langs",
            "hi,en",
        ],
        d,
    );
    assert!(d.join("vocab/vocab.hi.tsv").exists());
    let union = std::fs::read_to_string(d.join("vocab/union.tsv")).unwrap();
    assert!(union.lines().count() <= 600);
    let mut args = vec![
        "align-docs",
        "--store",
        "store.jsonl",
        "--src",
        "hi",
        "--pivot",
        "en",
        "--subword-vocab",
        "vocab/vocab.en.tsv",
        "--output",
        "sub.tsv",
    ];
    args.extend(dict);
    ok(&args, d);
    assert_eq!(
        std::fs::read_to_string(d.join("sub.tsv"))
            .unwrap()
            .lines()
            .count(),
        30
    );
    let o = itermine(
        &[
            "align-docs",
            "--store",
            "store.jsonl",
            "--src",
            "en",
            "--pivot",
            "en",
            "--output",
            "self.tsv",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn translate_lines_through_dictionary() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("d.tsv"),
        "hi\ten\tनमस्ते\thello\nhi\ten\t।\t.\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("in.txt"), "नमस्ते दुनिया।\n").unwrap();
    let o = ok(
        &[
            "translate",
            "--src",
            "hi",
            "--tgt",
            "en",
            "--input",
            "in.txt",
            "--backend",
            "dictionary",
            "--dictionary",
            "d.tsv",
        ],
        dir.path(),
    );
    assert_eq!(stdout(&o), "hello दुनिया.\n");
}
