use std::path::Path;
use std::process::{Command, Output};

const EXAMPLE: &str = r#"
n = 4

[[forms]]
p = [[1, 0]]
q = [[1, 0]]

[[forms]]
p = []
q = [[0, 0], [1, 0]]

[[forms]]
p = [[0, 0], [0, 0], [1, 0]]
q = []

[[forms]]
p = [[0, 0], [0, 0], [0, 0], [1, 0]]
q = [[0, 0], [0, 0], [0, 0], [1, 0]]
"#;

fn run(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracelab"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn analyze_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.toml",
        &format!("{EXAMPLE}\n[measure]\natoms = [{{ x = 0.5, h = [1.0, 0.0] }}]\n"),
    );
    let out = run(
        &["analyze", "--oracle", "lemma51", "--out", dir.path().to_str().unwrap()],
        &cfg,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["report"]["classification"], "StronglyRegular");
    let lemma = json["oracles"]["lemma51"][0].as_f64().unwrap();
    assert!(json["oracles"]["closed_form"].is_null());
    assert!((lemma + (4.0 * 5f64.sqrt()).atan() / 5f64.sqrt()).abs() < 1e-10);
}

#[test]
fn trace_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        &format!("{EXAMPLE}\n[measure]\natoms = [{{ x = 0.3, h = [1.0, 0.0] }}]\n"),
    );
    let out = run(
        &[
            "trace",
            "--annuli",
            "0..60",
            "--tolerance",
            "0.1",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &cfg,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("trace.json")).unwrap()).unwrap();
    assert_eq!(json["partial_sums"].as_array().unwrap().len(), 60);
    assert_eq!(json["verdict"], "match");
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 61);
}

#[test]
fn spectrum_goes_to_stdout_without_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", EXAMPLE);
    let out = run(&["spectrum", "--annuli", "0..5"], &cfg);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("annulus,re_z,im_z"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn seed_check_passes_on_the_example() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("{EXAMPLE}\n[measure]\natoms = [{{ x = 0.5, h = [1.0, 0.0] }}]\n"),
    );
    let out = run(&["analyze", "--seed-check"], &cfg);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = write(dir.path(), "m.toml", "n = 4\nforms = [\n");
    assert_eq!(run(&["analyze"], &malformed).status.code(), Some(1));

    let missing = dir.path().join("absent.toml");
    assert_eq!(run(&["analyze"], &missing).status.code(), Some(1));

    let ivp = write(
        dir.path(),
        "i.toml",
        "n = 2\n[[forms]]\np = [[1, 0]]\nq = []\n[[forms]]\np = [[0, 0], [1, 0]]\nq = []\n",
    );
    assert_eq!(run(&["analyze"], &ivp).status.code(), Some(2));

    let endpoint = write(
        dir.path(),
        "e.toml",
        &format!("{EXAMPLE}\n[measure]\ndensity = [{{ start = 0.0, end = 0.25, value = [2.0, 0.0] }}]\n"),
    );
    assert_eq!(run(&["trace", "--annuli", "0..30"], &endpoint).status.code(), Some(3));

    let outside = write(
        dir.path(),
        "o.toml",
        &format!("{EXAMPLE}\n[measure]\natoms = [{{ x = 1.5, h = [1.0, 0.0] }}]\n"),
    );
    assert_eq!(run(&["analyze"], &outside).status.code(), Some(3));
}
