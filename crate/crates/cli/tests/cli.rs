use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simile"))
        .args(args.iter().map(|a| a.as_ref()))
        .output()
        .unwrap()
}

fn ok(args: &[&dyn AsRef<std::ffi::OsStr>]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{:?} failed: {}",
        args.iter().map(|a| a.as_ref().to_owned()).collect::<Vec<_>>(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&dyn AsRef<std::ffi::OsStr>]) -> i32 {
    run(args).status.code().unwrap()
}

fn train_tagger(dir: &Path) -> PathBuf {
    let path = dir.join("tagger.model");
    ok(&[
        &"train-tagger",
        &"--corpus",
        &fixture("tagger_train.tsv"),
        &"--out",
        &path,
    ]);
    path
}

fn train_nb(dir: &Path, data: &str) -> PathBuf {
    let path = dir.join("nb.model");
    ok(&[&"train-classifier", &"--data", &fixture(data), &"--out", &path]);
    path
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&[&"no-such-command"]), 2);
    assert_eq!(code(&[&"extract", &"--input", &"x"]), 2);
    assert_eq!(
        code(&[&"eval", &"--data", &fixture("separable40.tsv"), &"--folds", &"1"]),
        2
    );
    assert_eq!(code(&[&"--help"]), 0);
}

#[test]
fn missing_inputs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing");
    let out = dir.path().join("c.tsv");
    assert_eq!(
        code(&[
            &"extract",
            &"--input",
            &fixture("corpus"),
            &"--tagger",
            &missing,
            &"--out",
            &out
        ]),
        3
    );
    let tagger = train_tagger(dir.path());
    assert_eq!(
        code(&[&"extract", &"--input", &missing, &"--tagger", &tagger, &"--out", &out]),
        3
    );
    let store = dir.path().join("s.store");
    assert_eq!(
        code(&[
            &"classify",
            &"--candidates",
            &missing,
            &"--model",
            &missing,
            &"--store",
            &store
        ]),
        3
    );
    assert_eq!(code(&[&"stats", &"--store", &missing]), 3);
    assert!(!missing.exists());
}

#[test]
fn single_class_data_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("one.tsv");
    std::fs::write(&data, "1\tradi kao konj\n1\tlep kao cvet\n").unwrap();
    assert_eq!(code(&[&"eval", &"--data", &data]), 3);
    assert_eq!(
        code(&[&"train-classifier", &"--data", &data, &"--out", &dir.path().join("m")]),
        3
    );
}

#[test]
fn empty_input_gives_empty_candidate_file() {
    let dir = tempfile::tempdir().unwrap();
    let tagger = train_tagger(dir.path());
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = dir.path().join("c.tsv");
    let report = ok(&[&"extract", &"--input", &empty, &"--tagger", &tagger, &"--out", &out]);
    assert!(report.contains("documents  0"));
    assert_eq!(std::fs::read(&out).unwrap(), b"");

    let model = train_nb(dir.path(), "separable40.tsv");
    let store = dir.path().join("s.store");
    let report = ok(&[
        &"classify",
        &"--candidates",
        &out,
        &"--model",
        &model,
        &"--store",
        &store,
    ]);
    assert!(report.contains("candidates 0"));
    assert!(report.contains("stored     0"));
}

#[test]
fn parallel_extraction_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let tagger = train_tagger(dir.path());
    let mut files = Vec::new();
    for jobs in ["1", "3", "8"] {
        let out = dir.path().join(format!("c{jobs}.tsv"));
        ok(&[
            &"extract",
            &"--input",
            &fixture("corpus"),
            &"--tagger",
            &tagger,
            &"--out",
            &out,
            &"--jobs",
            &jobs,
        ]);
        files.push(std::fs::read(&out).unwrap());
    }
    assert!(!files[0].is_empty());
    assert!(files.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn classify_counts_on_a_hand_checked_batch() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_nb(dir.path(), "separable40.tsv");
    let candidates = dir.path().join("c.tsv");
    // Three positives (konj twice, vuk) and two negatives; the second konj
    // repeats a stem key and is skipped.
    std::fs::write(
        &candidates,
        "radi kao konj\taaaa\t0\t0-3\tradi\tkonj\n\
         trči kao vuk\taaaa\t20\t0-3\ttrči\tvuk\n\
         radi kao pravnik\tbbbb\t0\t1-4\tradi\tpravnik\n\
         radi kao konj\tbbbb\t30\t0-3\tradi\tkonj\n\
         spava kao lekar\tcccc\t5\t0-3\tspava\tlekar\n",
    )
    .unwrap();
    let store = dir.path().join("s.store");
    let report = ok(&[
        &"classify",
        &"--candidates",
        &candidates,
        &"--model",
        &model,
        &"--store",
        &store,
    ]);
    assert!(report.contains("candidates 5"), "{report}");
    assert!(report.contains("positives  3"), "{report}");
    assert!(report.contains("stored     2"), "{report}");
    assert!(report.contains("rejected by model and stored: 2"), "{report}");
    assert!(report.contains("already known: 1"), "{report}");

    let stats = ok(&[&"stats", &"--store", &store, &"--json"]);
    let v: serde_json::Value = serde_json::from_str(&stats).unwrap();
    assert_eq!(v["mined"]["pending"], 2);
    assert_eq!(v["mined"]["rejected"], 2);
    assert_eq!(v["total"], 4);
}

#[test]
fn eval_is_deterministic_for_a_fixed_seed() {
    let data = fixture("labeled_phrases.tsv");
    let a = ok(&[&"eval", &"--data", &data, &"--learner", &"nb,linear", &"--seed", &"3"]);
    let b = ok(&[&"eval", &"--data", &data, &"--learner", &"nb,linear", &"--seed", &"3"]);
    assert_eq!(a, b);
    assert!(a.starts_with("Algorithm"));
}

#[test]
fn always_positive_report() {
    let out = ok(&[
        &"eval",
        &"--data",
        &fixture("separable40.tsv"),
        &"--learner",
        &"always-positive",
    ]);
    assert!(out.contains("precision=1/2 recall=1 f=2/3"), "{out}");
    assert!(out.contains("Always positive  0.500      1.000   0.667"), "{out}");
}

#[test]
fn seed_import_stats_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("s.store");
    let out = ok(&[&"import-seed", &"--store", &store, &"--file", &fixture("seed10.txt")]);
    assert!(out.starts_with("imported 10 phrases"));
    let stats = ok(&[&"stats", &"--store", &store]);
    let seed_row = stats.lines().find(|l| l.starts_with("seed")).unwrap();
    assert_eq!(
        seed_row.split_whitespace().collect::<Vec<_>>(),
        ["seed", "0", "10", "0", "10"]
    );
    let text = ok(&[&"export", &"--store", &store]);
    assert_eq!(text.lines().count(), 10);
    assert_eq!(text.lines().next(), Some("beo kao sneg"));
    let jsonl = ok(&[&"export", &"--store", &store, &"--format", &"jsonl"]);
    for line in jsonl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["status"], "approved");
        assert_eq!(v["provenance"]["source"], "seed10.txt");
    }
}

#[test]
fn count_docs_per_source() {
    let out = ok(&[&"count-docs", &"--input", &fixture("corpus")]);
    assert_eq!(out, "blog\t5\nforum\t5\nlibrary\t5\npublisher\t5\ntotal\t20\n");
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut s = TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(s, "GET {path} HTTP/1.1\r\nHost: 127.0.0.1\r\nConnection: close\r\n\r\n").ok()?;
    let mut resp = String::new();
    s.read_to_string(&mut resp).ok()?;
    Some(resp)
}

#[test]
fn serve_lists_approved_entries() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("s.store");
    ok(&[&"import-seed", &"--store", &store, &"--file", &fixture("seed10.txt")]);
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let bind = format!("127.0.0.1:{port}");
    let mut child = Command::new(env!("CARGO_BIN_EXE_simile"))
        .args(["serve", "--bind", &bind, "--store"])
        .arg(&store)
        .env_remove("SIMILE_CREDENTIAL")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(20);
    let resp = loop {
        if let Some(r) = http_get(port, "/similes") {
            break r;
        }
        assert!(Instant::now() < deadline, "server did not start");
        std::thread::sleep(Duration::from_millis(50));
    };
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(resp.starts_with("HTTP/1.1 200"), "{resp}");
    let body = &resp[resp.find("\r\n\r\n").unwrap() + 4..];
    let v: serde_json::Value = serde_json::from_str(body).unwrap();
    assert_eq!(v["total"], 10);
    assert_eq!(v["entries"][0]["text"], "beo kao sneg");
}
