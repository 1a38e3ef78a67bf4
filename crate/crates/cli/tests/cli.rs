use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use idplim_core::CellAverageField;
use idplim_oracles::{dist_sq, project_by_dual_bisection};
use serde_json::Value;

fn idplim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idplim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn save_field(path: &Path, data: Vec<f64>) {
    let n = data.len() / 3;
    CellAverageField::new(1, 1.0 / n as f64, vec![0.0, 1.0], data).unwrap().save(path, Some(1e-13)).unwrap();
}

#[test]
fn project_point_matches_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let out = idplim(tmp.path(), &["project", "--dim", "1", "--epsilon", "1e-13", "--point", "1,2,1", "--out", "run"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("run"));
    assert_eq!(r["status"], "ok");
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["parameters"]["epsilon"], 1e-13);
    let got = floats(&r["result"]["projected"]);
    let want = project_by_dual_bisection(&[1.0, 2.0, 1.0], 1e-13);
    assert!(dist_sq(&got, &want).sqrt() < 1e-10, "{got:?} vs {want:?}");
    assert!(r["result"]["kkt_residual"].as_f64().unwrap() < 1e-9);
    // stdout carries the same result
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, r["result"]);
}

#[test]
fn project_negative_components_and_csv_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = idplim(tmp.path(), &["project", "--point", "-1,0.5,0.2,-3", "--format", "csv", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("kkt_residual,"));
}

#[test]
fn limit_feasible_field_is_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("field.csv");
    save_field(&input, vec![1.0, 0.1, 2.0, 0.5, -0.2, 1.0, 2.0, 0.0, 3.0]);
    let out = idplim(tmp.path(), &["limit", "--norm", "l2", "--in", "field.csv", "--epsilon", "1e-13", "--out", "run"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("run"));
    assert_eq!(r["result"]["solve"]["iterations"], 0);
    assert_eq!(r["result"]["violations_before"], 0);
    let (a, _) = CellAverageField::load(&input).unwrap();
    let (b, _) = CellAverageField::load(&tmp.path().join("run/limited.csv")).unwrap();
    assert_eq!(a.data(), b.data());
}

#[test]
fn limit_repairs_bad_cell_and_conserves() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("field.csv");
    save_field(&input, vec![1.0, 0.0, 2.0, -0.1, 0.0, 1.0, 2.0, 0.3, 3.0, 1.5, 0.0, -0.2]);
    for norm in ["l1", "l2"] {
        let dir = format!("run_{norm}");
        let out = idplim(tmp.path(), &["limit", "--norm", norm, "--gamma", "1e-4", "--in", "field.csv", "--out", &dir]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let r = report(&tmp.path().join(&dir));
        assert_eq!(r["result"]["violations_before"], 2);
        assert_eq!(r["result"]["violations_after"], 0);
        assert!(r["result"]["max_conservation_residual"].as_f64().unwrap() < 1e-11);
        assert!(r["result"]["solve"]["projections"].as_u64().unwrap() > 0);
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    save_field(&tmp.path().join("bad.csv"), vec![1.0, 0.0, 2.0, -0.1, 0.0, 1.0, 2.0, 0.3, 3.0, 1.5, 0.0, -0.2]);
    // total density negative: no admissible field has these sums
    save_field(&tmp.path().join("infeasible.csv"), vec![-1.0, 0.0, 1.0, 0.5, 0.0, 1.0]);

    let out = idplim(tmp.path(), &["limit", "--in", "bad.csv", "--max-iter", "2", "--out", "a"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&tmp.path().join("a"));
    assert_eq!(r["status"], "error");
    assert_eq!(r["exit_code"], 2);
    assert_eq!(r["parameters"]["limiter"]["solver_cfg"]["max_iter"], 2);

    let out = idplim(tmp.path(), &["limit", "--in", "infeasible.csv", "--out", "b"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(&tmp.path().join("b"))["exit_code"], 3);

    let out = idplim(tmp.path(), &["limit", "--in", "missing.csv", "--out", "c"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(report(&tmp.path().join("c"))["exit_code"], 4);

    let out = idplim(tmp.path(), &["sedov", "--cfl", "3", "--out", "d"]);
    assert_eq!(out.status.code(), Some(4));

    let out = idplim(tmp.path(), &["project", "--no-such-flag", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = idplim(tmp.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn synth_lax_is_deterministic_and_stays_in_out_dir() {
    let tmp = tempfile::tempdir().unwrap();
    for dir in ["x", "y"] {
        let out = idplim(tmp.path(), &["synth-lax", "--count", "4", "--seed", "9", "--out", dir]);
        assert_eq!(out.status.code(), Some(0));
    }
    for i in 0..4 {
        let name = format!("lax/lax_{i:04}.csv");
        let a = fs::read(tmp.path().join("x").join(&name)).unwrap();
        let b = fs::read(tmp.path().join("y").join(&name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let mut entries: Vec<_> = fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    entries.sort();
    assert_eq!(entries, ["x", "y"]);
    let r = report(&tmp.path().join("x"));
    assert_eq!(r["result"]["datasets"], 4);
    assert!(r["result"]["min_violations"].as_u64().unwrap() > 0);
}

#[test]
fn synth_advect_writes_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let out = idplim(tmp.path(), &["synth-advect", "--steps", "5", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("o/advect.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("step,time,cell,x,u"));
    assert_eq!(text.lines().count(), 1 + 5 * 300);
    assert!(report(&tmp.path().join("o"))["result"]["snapshots_out_of_bounds"].as_u64().unwrap() > 0);
}

#[test]
fn sedov_run_directory_layout() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.cfg"), "# small\nmesh_n = 10\nt_end = 0.005\nsnapshots = 2\n").unwrap();
    let out = idplim(tmp.path(), &["sedov", "--config", "run.cfg", "--cfl", "0.1", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("o");
    for f in ["audit.jsonl", "steps.csv", "summary.json", "snapshots/snapshot_0000.csv", "snapshots/snapshot_0002.csv.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let r = report(&dir);
    assert_eq!(r["defaults"], "sedov");
    assert_eq!(r["parameters"]["mesh_n"], 10);
    assert_eq!(r["parameters"]["cfl"], 0.1);
    let (field, meta) = CellAverageField::load(&dir.join("snapshots/snapshot_0002.csv")).unwrap();
    assert_eq!(field.n_cells(), 100);
    assert_eq!(meta.dim, 2);
    let drift = floats(&r["result"]["max_relative_drift"]);
    assert!(drift[0] < 1e-12 && drift[3] < 1e-12, "{drift:?}");
}

#[test]
fn jet_short_run_both_norms() {
    let tmp = tempfile::tempdir().unwrap();
    for norm in ["l1", "l2"] {
        let out = idplim(tmp.path(), &["jet", "--mesh", "12", "--t-end", "1e-5", "--norm", norm, "--threads", "1", "--out", norm]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let r = report(&tmp.path().join(norm));
        assert_eq!(r["parameters"]["limiter"]["norm"], norm);
        assert_eq!(r["threads"], 1);
        assert!(r["result"]["min_density"].as_f64().unwrap() >= 1e-8);
    }
}

#[test]
fn convergence_writes_errors_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = idplim(tmp.path(), &["convergence", "--meshes", "8,16", "--degree", "1", "--t-end", "0.02", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rd = csv::Reader::from_path(tmp.path().join("o/errors.csv")).unwrap();
    let header = rd.headers().unwrap().clone();
    assert!(header.iter().any(|h| h == "rate_l2_state"));
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    // l2 then l1 limiter, two meshes each
    assert_eq!(rows.len(), 4);
    let col = header.iter().position(|h| h == "rate_l2_state").unwrap();
    let rate: f64 = rows[1][col].parse().unwrap();
    assert!(rate > 1.7, "rate {rate}");
}

#[test]
fn tune_gamma_and_selftest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = idplim(tmp.path(), &["tune-gamma", "--count", "1", "--grid", "1e-4,1e-2", "--out", "t"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("t"));
    let best = r["result"]["best_gamma"].as_f64().unwrap();
    assert!(best == 1e-4 || best == 1e-2);

    let out = idplim(tmp.path(), &["selftest", "--out", "s"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("s"));
    assert_eq!(r["result"]["failed"], 0);
    assert_eq!(r["result"]["checks"].as_array().unwrap().len(), 4);
}
