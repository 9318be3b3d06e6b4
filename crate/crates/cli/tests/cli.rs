use std::fs;
use std::path::Path;
use std::process::Command;

use hardy_sobolev::geometry::DomainShape;
use hardy_sobolev_cli::Manifest;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hardy-sobolev"))
}

fn run(args: &[&str], out: &Path) -> (i32, String) {
    let o = bin().args(args).arg("--out").arg(out).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn counterexample_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(&["counterexample"], dir.path());
    assert_eq!(code, 0, "{err}");
    let m: Manifest = serde_json::from_str(&fs::read_to_string(dir.path().join("counterexample.manifest.json")).unwrap()).unwrap();
    assert_eq!((m.version, m.rows, m.x_label.as_str()), (1, 12, "log_inverse_h_min"));
    let csv = fs::read_to_string(dir.path().join("counterexample.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
    // same path again: overwritten, manifest version bumped
    assert_eq!(run(&["counterexample"], dir.path()).0, 0);
    let m: Manifest = serde_json::from_str(&fs::read_to_string(dir.path().join("counterexample.manifest.json")).unwrap()).unwrap();
    assert_eq!(m.version, 2);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"resolutions": [16, 8]}"#);
    let (code, err) = run(&["equivalence", "--config", &cfg], dir.path());
    assert_eq!(code, 2, "{err}");
    let (code, _) = run(&["equivalence", "--config", "/nonexistent/config.json"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn geometric_failure_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.499], [1.6, 0.5], [1.0, 0.501], [1.0, 1.0], [0.0, 1.0]];
    let dom = DomainShape::polygon(v, 0.6).unwrap();
    let text = format!(
        r#"{{"domain": {}, "resolutions": [20], "extension": {{"eps0": 0.05, "c": 1.0}},
            "corpus": [{{"generator": "corpus", "name": "affine", "window": null}}]}}"#,
        dom.to_json()
    );
    let cfg = write_config(dir.path(), &text);
    let (code, err) = run(&["extension", "--config", &cfg], dir.path());
    assert_eq!(code, 4, "{err}");
    let csv = fs::read_to_string(dir.path().join("extension.csv")).unwrap();
    assert!(csv.contains("geometric"));
}

#[test]
fn deterministic_reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"dim": 1, "domain": "unit_interval", "resolutions": [8, 16],
            "corpus": [{"generator": "random_smooth", "seed": 4, "modes": 3},
                       {"generator": "corpus", "name": "kink", "window": null}]}"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&["equivalence", "--config", &cfg, "--deterministic"], &a).0, 0);
    assert_eq!(run(&["equivalence", "--config", &cfg, "--deterministic"], &b).0, 0);
    let (x, y) = (fs::read(a.join("equivalence.csv")).unwrap(), fs::read(b.join("equivalence.csv")).unwrap());
    assert_eq!(x, y);
    // the seed is part of the config hash
    let c = dir.path().join("c");
    assert_eq!(run(&["equivalence", "--config", &cfg, "--seed", "9", "--threads", "2"], &c).0, 0);
    let z = fs::read_to_string(c.join("equivalence.csv")).unwrap();
    let hash = |s: &str| s.lines().nth(1).unwrap().split(',').nth(7).unwrap().to_string();
    assert_ne!(hash(&z), hash(&String::from_utf8(x).unwrap()));
}

#[test]
fn every_subcommand_runs_on_a_small_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"resolutions": [6, 12],
            "corpus": [{"generator": "corpus", "name": "bump", "window": 0.1}],
            "hardy": {"fatness_samples": [[0.0, 0.5]], "fatness_radii": [0.1]},
            "content": {"sets": [{"kind": "segment", "a": [0.0, 0.0], "b": [1.0, 0.0]}], "exponents": [1.0]}}"#,
    );
    for sub in ["equivalence", "extension", "hardy", "capacity", "content", "decompose", "counterexample"] {
        let (code, err) = run(&[sub, "--config", &cfg], dir.path());
        assert_eq!(code, 0, "{sub}: {err}");
        assert!(dir.path().join(format!("{sub}.csv")).exists());
    }
}
