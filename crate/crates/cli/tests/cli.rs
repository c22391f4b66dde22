use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn cat(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cat"));
    c.args(args).env_remove("CAT_SEED").env_remove("RUST_LOG");
    c
}

fn run(args: &[&str]) -> Output {
    cat(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn config() -> String {
    fixtures().join("config.toml").display().to_string()
}

/// A config whose classifier only reacts to a word the filler never proposes.
fn unflippable_config(dir: &Path) -> String {
    let classifier = dir.join("kw.json");
    std::fs::write(
        &classifier,
        r#"{"kind":"keyword-classifier","labels":["a","b"],"rules":[{"word":"zzz","label":"b","confidence":0.9}],"fallback":[0.9,0.1]}"#,
    )
    .unwrap();
    let bigram = fixtures().join("models/bigram.json");
    let toml = format!(
        "classifier = \"keyword\"\nclassifier_path = {:?}\nattributes = \"none\"\nfiller = \"bigram\"\nfiller_path = {:?}\n",
        classifier.display().to_string(),
        bigram.display().to_string()
    );
    let path = dir.join("config.toml");
    std::fs::write(&path, toml).unwrap();
    path.display().to_string()
}

#[test]
fn explain_writes_one_line_per_record() {
    let o = run(&["explain", "--config", &config()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 50);
    for line in out.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["status"], "ok");
        assert_ne!(v["input_label"], v["contrast_label"]);
    }
}

#[test]
fn stdin_input_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/out.jsonl");
    let input = "{\"id\":\"s1\",\"text\":\"the bank reports profit\",\"label\":\"business\"}\n";
    let mut child = cat(&["explain", "--config", &config(), "--input", "-", "--out", out.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(out).unwrap();
    assert_eq!(written.lines().count(), 1);
    assert!(written.starts_with("{\"id\":\"s1\",\"status\":\"ok\""));
}

#[test]
fn unflippable_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = unflippable_config(dir.path());
    let input = dir.path().join("in.jsonl");
    std::fs::write(&input, "{\"id\":\"u\",\"text\":\"the bank reports profit\",\"label\":\"a\"}\n").unwrap();
    let o = run(&["explain", "--config", &config, "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["status"], "no_contrast");
    assert!(v.get("contrast_text").is_none());
}

#[test]
fn bad_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"id\":\"x\",\"text\":\"ok\"}\n").unwrap();
    let o = run(&["explain", "--config", &config(), "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    let o = run(&["explain", "--config", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["explain", "--config", &config(), "--beam-k", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["train", "--config", &config(), "--target", "bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn overrides_change_the_hash_and_results() {
    let base = stdout(&run(&["explain", "--config", &config()]));
    let occl = stdout(&run(&["explain", "--config", &config(), "--attribution", "occlusion", "--budget", "1"]));
    let hash = |s: &str| {
        let v: serde_json::Value = serde_json::from_str(s.lines().next().unwrap()).unwrap();
        v["config_hash"].as_str().unwrap().to_string()
    };
    assert_ne!(hash(&base), hash(&occl));
    for line in occl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v["status"] == "ok" {
            assert_eq!(v["edits"].as_array().unwrap().len(), 1);
        }
    }
}

#[test]
fn seed_env_is_recorded() {
    let o = cat(&["explain", "--config", &config()]).env("CAT_SEED", "17").output().unwrap();
    let first: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(first["seed"], 17);
}

#[test]
fn evaluate_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    assert_eq!(run(&["explain", "--config", &config(), "--out", a.to_str().unwrap()]).status.code(), Some(0));
    run(&["explain", "--config", &config(), "--budget", "1", "--out", b.to_str().unwrap()]);

    let table = stdout(&run(&["evaluate", "--explanations", a.to_str().unwrap(), "--config", &config()]));
    assert!(table.contains("Flip") && table.contains("Fluency"), "{table}");
    let json = run(&[
        "evaluate",
        "--explanations",
        a.to_str().unwrap(),
        "--config",
        &config(),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v["flip_rate"], 1.0);

    let same = run(&["compare", "--a", a.to_str().unwrap(), "--b", a.to_str().unwrap(), "--format", "json"]);
    assert_eq!(same.status.code(), Some(0), "{}", String::from_utf8_lossy(&same.stderr));
    let text = stdout(&same);
    assert!(text.contains("\"p\":1"), "{text}");

    let diff = run(&["compare", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap(), "--welch"]);
    assert_eq!(diff.status.code(), Some(0), "{}", String::from_utf8_lossy(&diff.stderr));
    assert!(stdout(&diff).contains("Dist"));
}

#[test]
fn train_rebuilds_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    for entry in ["config.toml", "attribute_spec.toml"] {
        std::fs::copy(fixtures().join(entry), dir.path().join(entry)).unwrap();
    }
    std::fs::create_dir_all(dir.path().join("data")).unwrap();
    for entry in std::fs::read_dir(fixtures().join("data")).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), dir.path().join("data").join(entry.file_name())).unwrap();
    }
    let config = dir.path().join("config.toml");
    let o = run(&["train", "--config", config.to_str().unwrap(), "--target", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("held-out accuracy"));
    for model in ["classifier.json", "attributes.json", "bigram.json", "embedder.json"] {
        let fresh = std::fs::read(dir.path().join("models").join(model)).unwrap();
        let shipped = std::fs::read(fixtures().join("models").join(model)).unwrap();
        assert_eq!(fresh, shipped, "{model} differs from the checked-in checkpoint");
    }
}
