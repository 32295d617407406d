use hormander::cli::main_from_args;
use serde_json::Value;
use std::path::Path;
use std::process::Command;

fn run(dir: &Path, args: &[&str]) -> i32 {
    let mut all = vec!["hormander", "--out", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    main_from_args(all)
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn malformed_system_file_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.sys");
    std::fs::write(&file, "name = bad\ndim = 2\nfield 1 smooth C{4}: 1 ; (\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hormander"))
        .args(["--system", file.to_str().unwrap(), "--out"])
        .arg(dir.path().join("out"))
        .arg("check")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{}", err);
}

#[test]
fn unknown_system_and_bad_points_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["--system", "nowhere", "check"]), 2);
    assert_eq!(run(dir.path(), &["dist", "--y", "0.1,abc,0"]), 2);
    assert_eq!(run(dir.path(), &["dist", "--y", "0.1,0.2"]), 2);
    assert_eq!(run(dir.path(), &["no-such-command"]), 2);
}

#[test]
fn dist_with_identical_points_reports_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(dir.path(), &["dist", "--x", "0.1,0.2,0.3", "--y", "0.1,0.2,0.3"]);
    assert_eq!(code, 0);
    let s = summary(dir.path());
    assert_eq!(s["schema"], 1);
    assert_eq!(s["operation"], "dist");
    for k in ["d1_upper", "d1_graph", "d_graph"] {
        assert_eq!(s["estimate"][k].as_f64(), Some(0.0), "{}", k);
    }
    let csv = std::fs::read_to_string(dir.path().join("dist.csv")).unwrap();
    assert!(csv.starts_with("quantity,value,method"));
}

#[test]
fn dist_reports_ordered_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(
        dir.path(),
        &["--system", "grushin", "dist", "--x", "0,0", "--y", "0.1,0.002"],
    );
    assert_eq!(code, 0);
    let s = summary(dir.path());
    let e = &s["estimate"];
    let g = e["d_graph"].as_f64().unwrap();
    let g1 = e["d1_graph"].as_f64().unwrap();
    assert!(g > 0.0 && g1 > 0.0);
    assert!(e["euclid_lower"].as_f64().unwrap() <= e["d1_upper"].as_f64().unwrap());
}

#[test]
fn certify_passes_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(a.path(), &["--system", "heisenberg", "certify"]), 0);
    assert_eq!(
        run(b.path(), &["--system", "heisenberg", "--workers", "2", "certify"]),
        0
    );
    let ja = std::fs::read(a.path().join("summary.json")).unwrap();
    let jb = std::fs::read(b.path().join("summary.json")).unwrap();
    assert_eq!(ja, jb);
    let s = summary(a.path());
    assert_eq!(s["passed"], true);
    assert_eq!(s["failures"].as_array().unwrap().len(), 0);
    let run_json: Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("run.json")).unwrap()).unwrap();
    assert!(run_json["timestamp"].as_u64().unwrap() > 0);
}

#[test]
fn failures_name_the_assertion_and_inputs() {
    let dir = tempfile::tempdir().unwrap();
    // A bracket of weight 3 exceeds the declared step 2.
    let code = run(dir.path(), &["--system", "grushin_c11", "flow", "--index", "(1,2,2)"]);
    assert_eq!(code, 1);
    let s = summary(dir.path());
    assert_eq!(s["passed"], false);
    let f = &s["failures"][0];
    assert!(f["name"].as_str().unwrap().len() > 0);
    assert!(f["detail"].as_str().unwrap().len() > 0);
}

#[test]
fn subcommands_write_their_tables() {
    let cases: &[(&[&str], &str)] = &[
        (&["--system", "grushin", "check", "--grid", "3"], "check.csv"),
        (&["--system", "martinet", "bracket"], "bracket.csv"),
        (&["--system", "heisenberg", "expand", "--kmin", "3", "--kmax", "5"], "expand.csv"),
        (
            &["--system", "heisenberg", "flow", "--index", "(1,2)", "--time", "0.01", "--map", "quasi"],
            "trajectory.csv",
        ),
        (&["--system", "grushin", "connect", "--pairs", "3"], "connect.csv"),
        (&["--system", "grushin", "ball", "--kmin", "4", "--kmax", "5"], "ball.csv"),
        (
            &["--system", "grushin", "poincare", "--kmin", "3", "--kmax", "4", "--budget", "5000", "--steps", "4"],
            "poincare.csv",
        ),
        (
            &["--system", "euclid2", "sobolev", "--levels", "1", "--budget", "2000"],
            "sobolev.csv",
        ),
        (&["--system", "grushin", "lagrange", "--pairs", "3"], "lagrange.csv"),
    ];
    for (args, table) in cases {
        let dir = tempfile::tempdir().unwrap();
        let code = run(dir.path(), args);
        assert_eq!(code, 0, "{:?}: {}", args, summary(dir.path()));
        assert!(dir.path().join(table).is_file(), "{:?}", args);
    }
}

#[test]
fn format_flag_selects_outputs() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["--format", "csv", "--system", "grushin", "bracket"]);
    assert!(!dir.path().join("summary.json").exists());
    assert!(dir.path().join("bracket.csv").exists());
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["--format", "json", "--system", "grushin", "bracket"]);
    assert!(dir.path().join("summary.json").exists());
    assert!(!dir.path().join("bracket.csv").exists());
}

#[test]
fn expand_accepts_rounding_level_residuals() {
    // The martinet (1,1,2) remainder is identically zero.
    let dir = tempfile::tempdir().unwrap();
    let code = run(
        dir.path(),
        &["--system", "martinet", "expand", "--index", "(1,1,2)", "--kmin", "3", "--kmax", "10"],
    );
    assert_eq!(code, 0, "{}", summary(dir.path()));
}
