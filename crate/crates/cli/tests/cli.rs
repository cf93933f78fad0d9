use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use harness_cli::export::{export, read_record, write_summary, SUMMARY_FILE};
use harness_cli::scene::load_scene;
use harness_cli::sweep::{pareto_sweep, revalidate, Algorithm, SolutionRecord, SolverParams};

fn scene_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes").join(name)
}

fn harness() -> Command {
    Command::new(env!("CARGO_BIN_EXE_harness"))
}

fn untimed(mut records: Vec<SolutionRecord>) -> Vec<SolutionRecord> {
    for r in &mut records {
        r.time_s = 0.0;
    }
    records
}

#[test]
fn export_then_load_round_trips() {
    let (_, inst) = load_scene(&scene_path("y_small.json")).unwrap();
    let out = pareto_sweep(&inst, &[0.3, 0.7], &[Algorithm::Shrh], &SolverParams::default()).unwrap();
    assert!(out.failures.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let files = export(&out.records, dir.path()).unwrap();
    assert_eq!(files.len(), out.records.len() + 1);
    for (r, path) in out.records.iter().zip(&files) {
        let back = read_record(path).unwrap();
        assert_eq!(&back, r);
        assert_eq!(back.routing(), r.routing());
        revalidate(&inst, &back).unwrap();
    }
}

#[test]
fn deterministic_algorithms_repeat_exactly() {
    let (_, inst) = load_scene(&scene_path("y_small.json")).unwrap();
    for algo in [Algorithm::Shrh, Algorithm::Asphrh, Algorithm::Exact] {
        assert!(algo.is_deterministic());
        let a = pareto_sweep(&inst, &[0.2, 0.6], &[algo], &SolverParams::default()).unwrap();
        let b = pareto_sweep(&inst, &[0.2, 0.6], &[algo], &SolverParams::default()).unwrap();
        let (a, b) = (untimed(a.records), untimed(b.records));
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn record_json_matches_golden_file() {
    let (_, inst) = load_scene(&scene_path("y_small.json")).unwrap();
    let out = pareto_sweep(&inst, &[0.5], &[Algorithm::Asphrh], &SolverParams::default()).unwrap();
    let rec = untimed(out.records).remove(0);
    let text = serde_json::to_string_pretty(&rec).unwrap() + "\n";
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/y_small_asphrh_w0.5.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&golden, &text).unwrap();
    }
    assert_eq!(text, fs::read_to_string(&golden).unwrap());
}

#[test]
fn summary_csv_matches_golden_file() {
    let (_, inst) = load_scene(&scene_path("y_small.json")).unwrap();
    let out = pareto_sweep(&inst, &[0.1, 0.7], &[Algorithm::Shrh, Algorithm::Asphrh], &SolverParams::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(SUMMARY_FILE);
    write_summary(&untimed(out.records), &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/y_small_summary.csv");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&golden, &text).unwrap();
    }
    assert_eq!(text, fs::read_to_string(&golden).unwrap());
}

#[test]
fn solve_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let status = harness()
        .args(["solve", "--algo", "asphrh", "--weights", "0,0.4", "--threads", "1", "--seed", "3"])
        .arg("--scene")
        .arg(scene_path("y_small.json"))
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("weight,algo,f,f_L,f_B,h,gap,time"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(!rows.is_empty());
    for row in &rows {
        assert_eq!(row.len(), 8);
        assert_eq!(row[1], "asphrh");
        // No bound for this algorithm.
        assert_eq!((row[5], row[6]), ("", ""));
    }
    let jsons = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "json"))
        .count();
    assert_eq!(jsons, rows.len());
}

#[test]
fn shrh_summary_has_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = harness()
        .args(["solve", "--algo", "shrh", "--weights", "0.5"])
        .arg("--scene")
        .arg(scene_path("y_small.json"))
        .arg("--out")
        .arg(dir.path())
        .env("HARNESS_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
    let first = csv.lines().nth(1).unwrap();
    let cols: Vec<&str> = first.split(',').collect();
    let (f, h, gap): (f64, f64, f64) = (cols[2].parse().unwrap(), cols[5].parse().unwrap(), cols[6].parse().unwrap());
    assert!(h <= f && gap >= 0.0);
}

#[test]
fn validate_reports_scene_errors_with_field_paths() {
    let ok = harness().arg("validate").arg("--scene").arg(scene_path("case_a_synthetic.json")).output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("10 cables"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = fs::read_to_string(scene_path("y_small.json")).unwrap().replace("0.7]", "1.5]");
    fs::write(&bad, text).unwrap();
    let out = harness().arg("validate").arg("--scene").arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("weights[3]"));
}

#[test]
fn bad_weight_on_command_line_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = harness()
        .args(["solve", "--algo", "shrh", "--weights", "0.5,2"])
        .arg("--scene")
        .arg(scene_path("y_small.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn unsolvable_weight_gives_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.json");
    let text = fs::read_to_string(scene_path("y_small.json"))
        .unwrap()
        .replace("\"seed\": 7", "\"seed\": 7, \"pso\": { \"swarm_size\": 0 }");
    fs::write(&scene, text).unwrap();
    let out = harness()
        .args(["solve", "--algo", "pso", "--weights", "0.5"])
        .arg("--scene")
        .arg(&scene)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let csv = fs::read_to_string(dir.path().join("out").join(SUMMARY_FILE)).unwrap();
    assert_eq!(csv, "weight,algo,f,f_L,f_B,h,gap,time\n");
}
