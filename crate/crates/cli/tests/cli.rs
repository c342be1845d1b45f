//! End-to-end tests of the `heisbill` binary: exit codes, file formats,
//! and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn heisbill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heisbill"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json_of(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn thresholds_print_ten_decimals_deterministically() {
    let a = heisbill(&["threshold", "critical-angle"]);
    assert!(a.status.success());
    let text = stdout(&a);
    let value: f64 = text.trim().parse().unwrap();
    assert!((1.5835..=1.5845).contains(&value));
    assert_eq!(text.trim().len(), "1.5840228340".len());

    let b = heisbill(&["threshold", "bigon"]);
    let value: f64 = stdout(&b).trim().parse().unwrap();
    assert!((value - 0.909324).abs() < 1e-5);

    // byte-identical across invocations
    let again = heisbill(&["threshold", "critical-angle"]);
    assert_eq!(a.stdout, again.stdout);
}

#[test]
fn simulate_diameter_bouncing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("diam.json");
    let r = heisbill(&[
        "simulate",
        "--table",
        "cyl:0,0,1",
        "--start",
        "-0.9,0,0,0,1,0",
        "--max-bounces",
        "10",
        "--format",
        "json",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let doc = json_of(&out);
    assert_eq!(doc["events"].as_array().unwrap().len(), 10);
    assert_eq!(doc["termination"], "max_bounces");
    assert_eq!(doc["table"], "cyl:0,0,1");
    // all reflections conserve a = 0 on the vertical wall
    for arc in doc["arcs"].as_array().unwrap() {
        assert_eq!(arc["start"]["a"], 0.0);
    }
}

#[test]
fn simulate_escape_and_strict_singular() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let r = heisbill(&[
        "simulate",
        "--table",
        "hplane:0,+1",
        "--start",
        "0,0,1,0,1,0",
        "--max-length",
        "5",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["events"].as_array().unwrap().len(), 0);
    assert_eq!(doc["termination"], "escaped");

    // clockwise loop aimed exactly at the singular point of the plane
    let r = heisbill(&[
        "simulate",
        "--table",
        "hplane:0,+1",
        "--start",
        "1,0,0.39269908169872414,-2,0,-1",
        "--strict",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(2));
    let doc = json_of(&out);
    assert_eq!(doc["termination"], "singular_hit");
    assert_eq!(doc["events"][0]["kind"], "singular");
    // without --strict the same run exits 0
    let r = heisbill(&[
        "simulate",
        "--table",
        "hplane:0,+1",
        "--start",
        "1,0,0.39269908169872414,-2,0,-1",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(
        heisbill(&["simulate", "--table", "pyramid:1", "--start", "0,0,0,0,1,0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        heisbill(&["simulate", "--table", "cyl:0,0,1", "--start", "0,0,0"])
            .status
            .code(),
        Some(1)
    );
    // zero planar momentum is rejected on ingestion
    assert_eq!(
        heisbill(&["simulate", "--table", "cyl:0,0,1", "--start", "0,0,0,1,0,0"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn periodic_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("orbit.json");
    let r = heisbill(&[
        "periodic",
        "ngon",
        "--n",
        "6",
        "--m",
        "1",
        "--radius",
        "1",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    assert!(stdout(&r).contains("closure residual"));
    let doc = json_of(&out);
    assert_eq!(doc["events"].as_array().unwrap().len(), 6);

    let r = heisbill(&[
        "periodic",
        "band",
        "--height",
        "3.14159265",
        "--n",
        "1",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let text = stdout(&r);
    let radius_line = text.lines().find(|l| l.starts_with("loop radius")).unwrap();
    let value: f64 = radius_line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!((value - 1.0).abs() < 1e-8);

    // below the admissibility threshold: exit 2 and the threshold printed
    let r = heisbill(&["periodic", "fincyl", "--d", "1", "--psi", "0.8", "--c", "1"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("0.9093240140"));

    let r = heisbill(&[
        "periodic",
        "fincyl",
        "--d",
        "1",
        "--psi",
        "1.2",
        "--c",
        "1",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let doc = json_of(&out);
    assert_eq!(doc["events"].as_array().unwrap().len(), 6); // 4c + 2
}

#[test]
fn wavefront_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wf.csv");
    let r = heisbill(&[
        "wavefront",
        "--time",
        "3.141592653589793",
        "--samples",
        "100",
        "--format",
        "csv",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 101); // header + samples
    let first: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    // the cusp row: R = 0, z1 = T²/(2π) = π/2
    assert!(first[1].abs() < 1e-12);
    assert!((first[2] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

    // two-sample edge case
    let r = heisbill(&[
        "wavefront",
        "--time",
        "1",
        "--samples",
        "2",
        "--format",
        "csv",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);

    let svg = dir.path().join("wf.svg");
    let r = heisbill(&[
        "wavefront",
        "--time",
        "3.141592653589793",
        "--samples",
        "50",
        "--format",
        "svg",
        "--output",
        svg.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 1);
    assert_eq!(text.matches("class=\"axis\"").count(), 2);
    assert_eq!(text.matches("<text").count(), 2);
}

#[test]
fn export_svg_counts_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let orbit = dir.path().join("hex.json");
    assert!(heisbill(&[
        "periodic",
        "ngon",
        "--n",
        "6",
        "--m",
        "1",
        "--radius",
        "1",
        "--output",
        orbit.to_str().unwrap(),
    ])
    .status
    .success());

    let svg1 = dir.path().join("hex1.svg");
    let svg2 = dir.path().join("hex2.svg");
    for svg in [&svg1, &svg2] {
        assert!(heisbill(&[
            "export-svg",
            "--input",
            orbit.to_str().unwrap(),
            "--plane",
            "xy",
            "--output",
            svg.to_str().unwrap(),
        ])
        .status
        .success());
    }
    let a = std::fs::read(&svg1).unwrap();
    let b = std::fs::read(&svg2).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.matches("class=\"arc\"").count(), 6);
    assert_eq!(text.matches("class=\"bounce\"").count(), 6);
    // projected arcs are emitted as native circular-arc commands
    assert!(text.contains(" A "));

    // xz profile renders as sampled paths
    let xz = dir.path().join("hex_xz.svg");
    assert!(heisbill(&[
        "export-svg",
        "--input",
        orbit.to_str().unwrap(),
        "--plane",
        "xz",
        "--output",
        xz.to_str().unwrap(),
    ])
    .status
    .success());
}

#[test]
fn json_round_trip_via_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    assert!(heisbill(&[
        "simulate",
        "--table",
        "band:0,2",
        "--start",
        "2,0,0,1,0,1",
        "--max-bounces",
        "4",
        "--output",
        out.to_str().unwrap(),
    ])
    .status
    .success());
    let text = std::fs::read_to_string(&out).unwrap();
    let reparsed = heisbill_core::io::TrajectoryFile::from_json(&text).unwrap();
    assert_eq!(reparsed.to_json(), text);
}

#[test]
fn sweep_runs_concurrently() {
    let dir = tempfile::tempdir().unwrap();
    let starts = dir.path().join("starts.txt");
    std::fs::write(
        &starts,
        "# three diameters at different heights\n\
         -0.9,0,0,0,1,0\n\
         -0.9,0,1,0,1,0\n\
         \n\
         -0.9,0,2,0,1,0\n",
    )
    .unwrap();
    let outdir = dir.path().join("runs");
    let r = heisbill(&[
        "sweep",
        "--table",
        "cyl:0,0,1",
        "--starts",
        starts.to_str().unwrap(),
        "--jobs",
        "3",
        "--max-bounces",
        "5",
        "--output-dir",
        outdir.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let mut names: Vec<String> = std::fs::read_dir(&outdir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, vec!["run_00001.json", "run_00002.json", "run_00004.json"]);
    for name in names {
        let doc = json_of(&outdir.join(name));
        assert_eq!(doc["events"].as_array().unwrap().len(), 5);
    }
}

#[test]
fn heis_tol_env_is_accepted() {
    let out = Command::new(env!("CARGO_BIN_EXE_heisbill"))
        .env("HEIS_TOL", "1e-10")
        .args(["threshold", "bigon"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((v - 0.909324).abs() < 1e-4);
}
