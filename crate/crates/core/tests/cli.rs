mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mcdepcnn::corpus::{load_corpus, load_instances, write_corpus, write_instances};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mcdepcnn"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit status")
}

/// A small, fast configuration over the bundled corpus.
fn small_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.toml");
    let text = format!(
        "[paths]\ncorpus = {:?}\ninstances = {:?}\n\n[model]\nfilters_per_window = 8\n\n[train]\nepochs = 3\n\n[seeds]\nbase = 5\n{}",
        common::toy_path("corpus.tsv"),
        common::toy_path("instances.tsv"),
        extra
    );
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{}: {}", name, e))
}

#[test]
fn encode_writes_one_record_per_instance_and_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        let o = run(&["encode", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let encoded = read(&a, "encoded.txt");
    assert_eq!(encoded.lines().filter(|l| l.starts_with("i\t")).count(), 30);
    assert_eq!(encoded, read(&b, "encoded.txt"));
    assert!(read(&a, "config.input.toml").contains("filters_per_window = 8"));
}

#[test]
fn corrupted_corpus_line_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = fs::read_to_string(common::toy_path("corpus.tsv")).unwrap();
    text = text.replacen(
        "\tspecifically\tRB\tB-ADVP\tO\t2\tadvmod",
        "\tspecifically\tRB",
        1,
    );
    let corpus = tmp.path().join("bad.tsv");
    fs::write(&corpus, text).unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, format!("[paths]\ncorpus = {:?}\n", corpus)).unwrap();
    let o = run(&[
        "encode",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("line 2"),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn gradcheck_prints_table_and_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["gradcheck", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    for name in ["conv3.ch1.w", "conv3.ch2.w", "conv3.b", "fc.w", "fc.b"] {
        assert!(stdout.contains(name), "{}", stdout);
    }
    assert!(!stdout.contains("FAIL"));
    assert!(read(tmp.path(), "report.txt").starts_with("mcdepcnn report v1\ncommand gradcheck\n"));
}

#[test]
fn cv_with_two_folds_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out = tmp.path().join("cv");
    let o = run(&[
        "cv",
        "--config",
        &cfg,
        "--k",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("fold0.report.txt").is_file());
    assert!(out.join("fold1.report.txt").is_file());
    assert!(!out.join("fold2.report.txt").exists());
    let report = read(&out, "report.txt");
    assert!(report.contains("[pooled]"));
    assert!(report.contains("[macro]"));
    assert!(report.contains("[difficult]\npositives"));
    assert_eq!(read(&out, "predictions.tsv").lines().count(), 30);
}

#[test]
fn echoed_config_reproduces_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let first = tmp.path().join("first");
    let o = run(&[
        "cv",
        "--config",
        &cfg,
        "--k",
        "3",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let echo = first.join("config.toml");
    let second = tmp.path().join("second");
    let o = run(&[
        "cv",
        "--config",
        echo.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&first, "report.txt"), read(&second, "report.txt"));
}

#[test]
fn train_then_predict() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out = tmp.path().join("train");
    let o = run(&["train", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&out, "loss.tsv").lines().count(), 4);
    let ckpt = out.join("checkpoint.txt");
    assert!(ckpt.is_file());

    let pred = tmp.path().join("pred");
    let o = run(&[
        "predict",
        "--config",
        &cfg,
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--out",
        pred.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        read(&pred, "predictions.tsv"),
        read(&out, "predictions.tsv")
    );
}

#[test]
fn predict_without_checkpoint_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let missing = tmp.path().join("nope.txt");
    let o = run(&[
        "predict",
        "--config",
        &cfg,
        "--checkpoint",
        missing.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let o = run(&[
        "predict",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn schema_mismatch_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out = tmp.path().join("train");
    assert_eq!(
        code(&run(&[
            "train",
            "--config",
            &cfg,
            "--epochs",
            "0",
            "--out",
            out.to_str().unwrap()
        ])),
        0
    );

    // A schema with one more dependency label hashes differently.
    let mut schema = read(&out, "schema.txt");
    schema = schema.replacen("<PAD", "zz_extra\n<PAD", 1);
    let lines: Vec<&str> = schema.lines().collect();
    let pad = lines.iter().rposition(|l| l.starts_with("<PAD")).unwrap();
    let trimmed: Vec<&str> = lines
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != pad)
        .map(|(_, l)| *l)
        .collect();
    let schema_path = tmp.path().join("other_schema.txt");
    fs::write(&schema_path, trimmed.join("\n") + "\n").unwrap();
    let cfg2 = small_config(tmp.path(), "");
    let cfg2_text = fs::read_to_string(&cfg2).unwrap().replacen(
        "[model]",
        &format!("schema = {:?}\n\n[model]", schema_path),
        1,
    );
    fs::write(&cfg2, cfg2_text).unwrap();

    let o = run(&[
        "predict",
        "--config",
        &cfg2,
        "--checkpoint",
        out.join("checkpoint.txt").to_str().unwrap(),
        "--out",
        tmp.path().join("p").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn cross_corpus_from_two_files() {
    let tmp = tempfile::tempdir().unwrap();
    let sentences = load_corpus(common::toy_path("corpus.tsv")).unwrap();
    let instances = load_instances(common::toy_path("instances.tsv"), &sentences).unwrap();
    let first = |d: &str| d < "D07";
    let (a_s, b_s): (Vec<_>, Vec<_>) = sentences.into_iter().partition(|s| first(&s.doc_id));
    let (a_i, b_i): (Vec<_>, Vec<_>) = instances.into_iter().partition(|i| first(i.doc_id()));
    for (name, s, i) in [("a", &a_s, &a_i), ("b", &b_s, &b_i)] {
        fs::write(tmp.path().join(format!("{}.tsv", name)), write_corpus(s)).unwrap();
        fs::write(
            tmp.path().join(format!("{}.inst.tsv", name)),
            write_instances(i),
        )
        .unwrap();
    }
    let cfg = tmp.path().join("cross.toml");
    fs::write(
        &cfg,
        "[paths]\ncorpus = \"a.tsv\"\ninstances = \"a.inst.tsv\"\ntest_corpus = \"b.tsv\"\ntest_instances = \"b.inst.tsv\"\n\n[model]\nfilters_per_window = 8\n\n[train]\nepochs = 3\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = run(&[
        "cross",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&out, "predictions.tsv").lines().count(), b_i.len());
}

#[test]
fn ablate_emits_four_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out = tmp.path().join("abl");
    let o = run(&[
        "ablate",
        "--config",
        &cfg,
        "--k",
        "2",
        "--epochs",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = read(&out, "ablation.tsv");
    assert_eq!(table.lines().count(), 5);
    assert!(table.lines().nth(1).unwrap().ends_with("\t-"));
}

#[test]
fn usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(
        code(&run(&["gradcheck", "--precision", "f32", "--out", out])),
        2
    );
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["train", "--out", out])), 2);
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[model]\nwindowz = [3]\n").unwrap();
    assert_eq!(
        code(&run(&[
            "train",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            out
        ])),
        2
    );
    assert_eq!(code(&run(&["--help"])), 0);
}
