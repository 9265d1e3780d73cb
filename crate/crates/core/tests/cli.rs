use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_floquet");

fn floquet(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("FLOQUET_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const SOLVE: &str =
    "task = \"solve\"\n[pulse]\nshape = \"cosine\"\n[solve]\ns = -3.0\ntarget = \"ising\"\n";

#[test]
fn solve_writes_roots_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "solve.toml", SOLVE);
    let out_dir = tmp.path().join("out");
    let out = floquet(
        &["run", &cfg, "--output-dir", out_dir.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let roots = fs::read_to_string(out_dir.join("roots.csv")).unwrap();
    let first: Vec<f64> = roots
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // J0(4v) = 0 at the first zero 2.404825557695773.
    assert!(
        first
            .iter()
            .any(|v| (v - 2.404_825_557_695_773 / 4.0).abs() < 1e-9),
        "{roots}"
    );
    let r = report(&out_dir);
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["task"], "solve");
}

#[test]
fn outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "v.toml",
        "task = \"validate\"\nseed = 7\n[model]\nn_sites = 2\nj_perp = 1.0\nj_z = 0.5\n[pulse]\nshape = \"cosine\"\nstrength = 0.4\nomega = 30.0\n[validate]\nn_cycles = 4\ninitial_state = \"random\"\n",
    );
    let mut csvs = Vec::new();
    for name in ["a", "b"] {
        let d = tmp.path().join(name);
        let out = floquet(
            &["run", &cfg, "--output-dir", d.to_str().unwrap()],
            tmp.path(),
        );
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        csvs.push(fs::read(d.join("trajectory.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert!(!csvs[0].is_empty());
}

#[test]
fn schema_errors_exit_two_and_name_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.toml",
        "task = \"validate\"\n[model]\nn_sites = 14\nj_perp = 1.0\nj_z = 1.0\n[solve]\ns = 1.0\n",
    );
    let out = floquet(&["check", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("pulse.shape"), "{text}");
    assert!(text.contains("pole"), "{text}");

    let unknown = write(tmp.path(), "u.toml", "task = \"solve\"\nbogus = 1\n");
    assert_eq!(
        floquet(&["run", &unknown], tmp.path()).status.code(),
        Some(2)
    );
}

#[test]
fn check_accepts_valid_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "solve.toml", SOLVE);
    let out = floquet(&["check", &cfg], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn unreachable_target_is_a_numeric_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "s.toml",
        "task = \"solve\"\n[pulse]\nshape = \"cosine\"\n[solve]\ns = 0.5\ntarget = \"ising\"\nrequire_roots = true\n",
    );
    let d = tmp.path().join("o");
    let out = floquet(
        &["run", &cfg, "--output-dir", d.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(report(&d)["exit_code"], 3);
}

#[test]
fn output_dir_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "m.toml",
        "task = \"moments\"\n[pulse]\nshape = \"square\"\nstrength = 0.5\n[output]\ndirectory = \"from_config\"\n",
    );
    // The environment variable only fills in when the config is silent.
    let out = Command::new(BIN)
        .args(["run", &cfg])
        .current_dir(tmp.path())
        .env("FLOQUET_OUTPUT_DIR", tmp.path().join("from_env"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("from_config/moments.csv").exists());
    let flag = tmp.path().join("from_flag");
    let out = floquet(
        &["run", &cfg, "--output-dir", flag.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(flag.join("moments.csv").exists());
    let r = report(&flag);
    let u = r["results"]["u"]["value"]
        .as_f64()
        .expect("u value in report");
    assert!((u + 0.0625).abs() < 1e-12);
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = floquet(&["check", path.to_str().unwrap()], &dir);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{}: {}",
                path.display(),
                String::from_utf8_lossy(&out.stdout)
            );
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn surface_and_represent_tasks_run() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (name, artifact) in [
        ("surface.toml", "surface.csv"),
        ("represent.toml", "report.json"),
    ] {
        let d = tmp.path().join(name);
        let cfg = configs.join(name);
        let out = floquet(
            &[
                "run",
                cfg.to_str().unwrap(),
                "--output-dir",
                d.to_str().unwrap(),
            ],
            tmp.path(),
        );
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(d.join(artifact).exists(), "{name}");
    }
    let r = report(&tmp.path().join("represent.toml"));
    assert_eq!(r["results"]["representable"], false, "{}", r["results"]);
}
