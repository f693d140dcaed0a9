use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aklt_core::oracle::OracleReport;
use aklt_core::records::{read_csv, read_json, Document, SampleRow, ORACLE_KIND};
use aklt_core::Estimate;

fn aklt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aklt"))
        .args(args)
        .env_remove("AKLT_THREADS")
        .output()
        .expect("binary runs")
}

fn aklt_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aklt"))
        .args(args)
        .env("AKLT_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// The single run directory under `root`.
fn run_dir(root: &Path) -> PathBuf {
    let dirs: Vec<PathBuf> = fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs[0].clone()
}

fn out_arg(dir: &tempfile::TempDir) -> String {
    dir.path().to_str().unwrap().to_owned()
}

#[test]
fn sample_writes_one_row_per_sample() {
    let out = tempfile::tempdir().unwrap();
    let o = aklt(&[
        "sample",
        "--L",
        "20",
        "--samples",
        "100",
        "--burn-in",
        "20",
        "--thinning",
        "1",
        "--out",
        &out_arg(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = run_dir(out.path());
    let text = fs::read_to_string(dir.join("samples.csv")).unwrap();
    let data_lines = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(data_lines, 100 + 1);
    assert!(!text.contains('\r'));
    let (pre, rows) = read_csv::<SampleRow>(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 100);
    assert_eq!(pre.config["L"], serde_json::json!([20]));
    assert_eq!(pre.config["chain"]["n_samples"], 100);
    assert!(rows
        .iter()
        .all(|r| r.record.side == 20 && r.record.betti_identity_holds()));
    let (_, summary) = read_csv::<Estimate>(fs::File::open(dir.join("summary.csv")).unwrap()).unwrap();
    assert_eq!(summary.len(), 7);
    assert!(dir.join("run.json").is_file());
}

#[test]
fn identical_configs_give_identical_files() {
    let args = [
        "sample",
        "--L",
        "4,8",
        "--samples",
        "30",
        "--burn-in",
        "10",
        "--chains",
        "3",
        "--seed",
        "5",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = aklt_threads(&[&args[..], &["--out", &out_arg(&a)]].concat(), "1");
    let ob = aklt_threads(&[&args[..], &["--out", &out_arg(&b)]].concat(), "3");
    assert!(oa.status.success() && ob.status.success());
    let (da, db) = (run_dir(a.path()), run_dir(b.path()));
    assert_eq!(da.file_name(), db.file_name());
    for f in ["samples.csv", "summary.csv"] {
        assert_eq!(fs::read(da.join(f)).unwrap(), fs::read(db.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn rerunning_a_config_does_not_overwrite() {
    let out = tempfile::tempdir().unwrap();
    let args = [
        "sample",
        "--L",
        "4",
        "--samples",
        "3",
        "--burn-in",
        "1",
        "--out",
        &out_arg(&out),
    ];
    assert!(aklt(&args).status.success());
    let second = aklt(&args);
    assert!(!second.status.success());
    assert!(stderr(&second).contains("already exists"));
}

#[test]
fn flags_override_the_config_file() {
    let out = tempfile::tempdir().unwrap();
    let cfg = out.path().join("run.json");
    fs::write(&cfg, r#"{"L": [6], "n_samples": 7, "burn_in": 3, "seed": 2}"#).unwrap();
    let root = out.path().join("runs");
    let o = aklt(&[
        "sample",
        "--config",
        cfg.to_str().unwrap(),
        "--samples",
        "5",
        "--out",
        root.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (pre, rows) = read_csv::<SampleRow>(fs::File::open(run_dir(&root).join("samples.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(pre.config["seed"], 2);
    assert_eq!(pre.config["chain"]["burn_in"], 3);

    fs::write(&cfg, r#"{"L": [6], "samples": 7}"#).unwrap();
    let o = aklt(&[
        "sample",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        root.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown field"), "{}", stderr(&o));
}

#[test]
fn invalid_configs_fail_before_running() {
    let out = tempfile::tempdir().unwrap();
    for args in [
        vec!["sample", "--L", "5"],
        vec!["sample", "--L", "4", "--thinning", "0"],
        vec!["sample"],
        vec!["percolate", "--L", "4", "--p-grid", "0:0.5"],
        vec!["percolate", "--L", "4", "--boundary", "periodic"],
        vec!["stats", "--input", "/nonexistent/samples.csv"],
    ] {
        let o = aklt(&[&args[..], &["--out", &out_arg(&out)]].concat());
        assert!(!o.status.success(), "{args:?}");
        assert!(stderr(&o).starts_with("error:"), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(fs::read_dir(out.path()).unwrap().count(), 0);
}

#[test]
fn single_point_grid_does_not_bracket() {
    let out = tempfile::tempdir().unwrap();
    let o = aklt(&[
        "percolate",
        "--L",
        "8",
        "--samples",
        "5",
        "--burn-in",
        "5",
        "--p-grid",
        "0:0:0.02",
        "--out",
        &out_arg(&out),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("grid does not bracket threshold"), "{}", stderr(&o));
}

#[test]
fn percolate_reads_saved_configurations() {
    let out = tempfile::tempdir().unwrap();
    let root = out.path().to_str().unwrap();
    let o = aklt(&[
        "sample",
        "--L",
        "8",
        "--samples",
        "20",
        "--burn-in",
        "20",
        "--boundary",
        "open",
        "--save-configs",
        "--out",
        root,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let configs = run_dir(out.path()).join("configs.csv");
    let o = aklt(&[
        "percolate",
        "--input",
        configs.to_str().unwrap(),
        "--trials",
        "5",
        "--p-grid",
        "0:1:0.05",
        "--out",
        root,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let perc = fs::read_dir(out.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_str().unwrap().starts_with("percolate-"))
        .unwrap();
    let doc: Document<Vec<serde_json::Value>> =
        read_json(fs::File::open(perc.join("thresholds.json")).unwrap(), "thresholds").unwrap();
    assert_eq!(doc.data.len(), 2);
    assert_eq!(doc.config["axis"], "both");
    assert!(doc.data.iter().all(|e| e["L"] == 8 && e["n_graphs"] == 20));
    let text = fs::read_to_string(perc.join("threshold.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("vertex,8,")).count(), 21);
}

#[test]
fn stats_extrapolates_and_rejects_unknown_schema() {
    let out = tempfile::tempdir().unwrap();
    let root = out.path().join("runs");
    let o = aklt(&[
        "sample",
        "--L",
        "4,6,8",
        "--samples",
        "40",
        "--burn-in",
        "20",
        "--out",
        root.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let samples = run_dir(&root).join("samples.csv");
    let stats_root = out.path().join("stats");
    let o = aklt(&[
        "stats",
        "--input",
        samples.to_str().unwrap(),
        "--out",
        stats_root.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Document<serde_json::Value> = read_json(
        fs::File::open(run_dir(&stats_root).join("extrapolation.json")).unwrap(),
        "extrapolation",
    )
    .unwrap();
    let fits = doc.data["observables"].as_array().unwrap();
    assert_eq!(fits.len(), 7);
    assert!(fits.iter().all(|f| f["fit"].is_object()));
    assert!(doc.data["max_domain_growth"]["slope"].is_f64());
    assert_eq!(doc.config["sources"][0]["L"], serde_json::json!([4, 6, 8]));

    let bumped = out.path().join("bumped.csv");
    fs::write(
        &bumped,
        fs::read_to_string(&samples)
            .unwrap()
            .replace("samples/1.0", "samples/2.0"),
    )
    .unwrap();
    let o = aklt(&[
        "stats",
        "--input",
        bumped.to_str().unwrap(),
        "--out",
        out.path().join("x").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unsupported schema version 2.0"), "{}", stderr(&o));
}

#[test]
fn oracle_suite_passes_and_reports_resolutions() {
    let out = tempfile::tempdir().unwrap();
    let o = aklt(&["oracle-verify", "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Document<OracleReport> = read_json(
        fs::File::open(run_dir(out.path()).join("oracle_report.json")).unwrap(),
        ORACLE_KIND,
    )
    .unwrap();
    assert!(doc.data.passed);
    assert_eq!(doc.data.star_operator_sign, Some(-1));
    assert_eq!(doc.data.convention, Some(aklt_core::WeightConvention::Multigraph));
}

#[test]
fn corrupted_povm_constant_fails_completeness() {
    let out = tempfile::tempdir().unwrap();
    let frag = out.path().join("two_site.json");
    fs::write(&frag, r#"{"sites": 2, "edges": [[0, 2, 1, 0]]}"#).unwrap();
    let root = out.path().join("runs");
    let o = aklt(&[
        "oracle-verify",
        "--fragment",
        frag.to_str().unwrap(),
        "--povm-constant",
        "1",
        "--out",
        root.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("povm_completeness"), "{}", stderr(&o));
    let doc: Document<serde_json::Value> = read_json(
        fs::File::open(run_dir(&root).join("oracle_report.json")).unwrap(),
        ORACLE_KIND,
    )
    .unwrap();
    let check = doc.data["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "povm_completeness")
        .unwrap()
        .clone();
    assert_eq!(check["passed"], false);
}

#[test]
fn empty_fragment_list_is_an_error() {
    let out = tempfile::tempdir().unwrap();
    let frag = out.path().join("empty.json");
    fs::write(&frag, "[]").unwrap();
    let o = aklt(&[
        "oracle-verify",
        "--fragment",
        frag.to_str().unwrap(),
        "--out",
        out.path().join("runs").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("empty fragment list"), "{}", stderr(&o));
}

#[test]
fn oversized_fragment_is_rejected() {
    let out = tempfile::tempdir().unwrap();
    let frag = out.path().join("big.json");
    fs::write(&frag, r#"{"sites": 7, "edges": [[0, 0, 1, 0]]}"#).unwrap();
    let o = aklt(&[
        "oracle-verify",
        "--fragment",
        frag.to_str().unwrap(),
        "--out",
        out.path().join("runs").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("qubit"), "{}", stderr(&o));
}

#[test]
fn bad_thread_count_is_reported() {
    let out = tempfile::tempdir().unwrap();
    let o = aklt_threads(
        &["sample", "--L", "4", "--samples", "2", "--out", &out_arg(&out)],
        "zero",
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("AKLT_THREADS"));
}
