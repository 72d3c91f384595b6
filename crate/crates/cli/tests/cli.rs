use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_removable"))
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const DETOUR: [&str; 11] = [
    "detour",
    "--scene",
    "gasket",
    "--levels",
    "5",
    "--epsilon",
    "0.05",
    "--lines",
    "100",
    "--seed",
    "7",
];

#[test]
fn detour_reports_every_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &DETOUR);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = read_json(&dir.path().join("detour.json"));
    assert_eq!(v["batch"]["lines"].as_array().unwrap().len(), 100);
    assert_eq!(v["pass"], true);
    let rows = fs::read_to_string(dir.path().join("detour_lines.csv")).unwrap();
    assert_eq!(rows.lines().count(), 101);
}

#[test]
fn integrated_measure_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "certify",
            "--scene",
            "gasket",
            "--what",
            "integrated-measure",
            "--m",
            "4",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&dir.path().join("certify_integrated-measure.json"));
    assert_eq!(v["reports"][0]["exact"], "243/256");
    assert!(String::from_utf8_lossy(&out.stdout).contains("243/256"));
}

#[test]
fn apollonian_radius_cutoff_keeps_children() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["generate", "--scene", "apollonian", "--min-radius", "0.05"],
    );
    assert_eq!(out.status.code(), Some(0));
    let scene = read_json(&dir.path().join("scene.json"));
    let circles = scene["components"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["shape"].get("circle").is_some())
        .count();
    assert!(circles > 4, "{circles}");
    assert!(dir.path().join("levels.csv").is_file());
}

#[test]
fn identical_configs_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(run(d.path(), &DETOUR).status.code(), Some(0));
        let m = [
            "certify",
            "--what",
            "measure-zero",
            "--m",
            "3",
            "--lines",
            "10",
            "--seed",
            "3",
        ];
        assert_eq!(run(d.path(), &m).status.code(), Some(0));
    }
    for f in [
        "detour.json",
        "detour_lines.csv",
        "certify_measure-zero.json",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(a.path().join("detour.meta.json").is_file());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(dir.path(), &["detour", "--scene", "nowhere"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(dir.path(), &["carpet", "--y0", "0.01"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(dir.path(), &["carpet", "--m", "4"]).status.code(),
        Some(0)
    );
    fs::write(dir.path().join("stale.json"), "{\"pass\": false}").unwrap();
    assert_eq!(run(dir.path(), &["report"]).status.code(), Some(2));
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(r["pass"], false);
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_removable"))
        .env("REMOVABLE_OUTPUT_DIR", dir.path())
        .args(["whitney", "--cutoff", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("cubes.csv").is_file());
}
