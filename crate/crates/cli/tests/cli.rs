use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_cmc-orbit");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = args.to_vec();
    all.extend(["--out", dir.to_str().unwrap()]);
    run(&all)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is one JSON object")
}

#[test]
fn shoot_small_r0_exits_through_alpha_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["shoot", "--family", "s2n", "--n", "2", "--lambda", "1", "--r0", "0.005"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let shot = json(&tmp.path().join("shot.json"));
    assert_eq!(shot["exit"], "AlphaZero");
    assert!(!tmp.path().join("trajectory.svg").exists());
}

#[test]
fn zero_lambda_is_invalid_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["shoot", "--n", "2", "--lambda", "0", "--r0", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["kind"], "invalid-config");
    assert!(!tmp.path().join("trajectory.csv").exists());
}

#[test]
fn bad_inputs_are_invalid_config() {
    for args in [
        &["shoot", "--n", "1", "--lambda", "1", "--r0", "0.1"][..],
        &["shoot", "--n", "2", "--lambda", "1", "--r0", "2.0"],
        &["shoot", "--n", "2", "--lambda", "1"],
        &["solve", "--family", "s4n", "--lambda", "1"],
        &["solve", "--lambda", "1", "--rtol", "-1"],
        &["solve", "--no-such-flag"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr_json(&out)["kind"], "invalid-config", "{args:?}");
    }
}

#[test]
fn help_and_version_exit_zero() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("strict_monitors") && text.contains("event_tol"));
    assert!(run(&["--version"]).status.success());
}

#[test]
fn trajectory_csv_matches_samples() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["shoot", "--n", "3", "--lambda", "2", "--r0", "1.0", "--plot"]);
    assert!(out.status.success());
    let shot = json(&tmp.path().join("shot.json"));
    let mut rdr = csv::Reader::from_path(tmp.path().join("trajectory.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["s", "r", "theta", "alpha", "H_residual"]
    );
    let s: Vec<f64> = rdr.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(s.len() as u64, shot["samples"].as_u64().unwrap());
    assert!(s.windows(2).all(|w| w[1] > w[0]));
    let svg = fs::read_to_string(tmp.path().join("trajectory.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("path")).count(), 1);
}

#[test]
fn solve_s2n_certifies() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["solve", "--family", "s2n", "--n", "2", "--lambda", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cert = json(&tmp.path().join("certificate.json"));
    for key in ["closure_gap", "seam_defect", "simple", "min_boundary_dist", "length", "r0_star", "h_residuals"] {
        assert!(cert.get(key).is_some(), "missing {key}");
    }
    assert_eq!(cert["closed"], true);
    assert_eq!(cert["simple"], true);
    let h = &cert["h_residuals"];
    assert!(h["algebraic"].as_f64().unwrap() <= 1e-6);
    assert!(h["finite_difference"].as_f64().unwrap() <= 1e-6);
    let sol = json(&tmp.path().join("solution.json"));
    assert!((sol["r0_star"].as_f64().unwrap() - 1.2160900750125463).abs() < 1e-8);
}

fn svg_paths(dir: &Path) -> usize {
    let svg = fs::read_to_string(dir.join("curve.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).expect("valid XML");
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 1);
    doc.descendants().filter(|n| n.has_tag_name("path")).count()
}

#[test]
fn solve_s3n_meets_orthogonality() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["solve", "--family", "s3n-1", "--n", "2", "--lambda", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cert = json(&tmp.path().join("certificate.json"));
    assert!(cert["exit_residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(cert["closed"], true);
    assert_eq!(svg_paths(tmp.path()) as u64, cert["copies"].as_u64().unwrap());
}

#[test]
fn svg_has_one_path_per_copy() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_in(tmp.path(), &["solve", "--n", "3", "--lambda", "1"]).status.success());
    let cert = json(&tmp.path().join("certificate.json"));
    assert_eq!(cert["copies"], 4);
    assert_eq!(svg_paths(tmp.path()), 4);
}

#[test]
fn recertified_curve_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run_in(&a, &["solve", "--family", "s3n-1", "--n", "2", "--lambda", "3"]).status.success());
    let curve = a.join("curve.csv");
    let out = run_in(&b, &["assemble", "--curve", curve.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(a.join("certificate.json")).unwrap(),
        fs::read(b.join("certificate.json")).unwrap()
    );
}

#[test]
fn assemble_from_r0_star() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    assert!(run_in(&a, &["solve", "--n", "2", "--lambda", "1"]).status.success());
    let r0 = json(&a.join("solution.json"))["r0_star"].as_f64().unwrap().to_string();
    let b = tmp.path().join("b");
    let out = run_in(&b, &["assemble", "--n", "2", "--lambda", "1", "--r0", &r0]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(a.join("certificate.json")).unwrap(),
        fs::read(b.join("certificate.json")).unwrap()
    );

    // A generic r0 does not meet the matching condition.
    let out = run_in(&tmp.path().join("c"), &["assemble", "--n", "2", "--lambda", "1", "--r0", "0.9"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["kind"], "assembly");
}

#[test]
fn sweep_respects_length_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["sweep", "--family", "s2n", "--n", "2", "--lambdas", "1,2,5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = json(&tmp.path().join("summary.json"));
    let rows = rows.as_array().unwrap();
    let lambdas: Vec<f64> = rows.iter().map(|r| r["lambda"].as_f64().unwrap()).collect();
    assert_eq!(lambdas, [1.0, 2.0, 5.0]);
    for r in rows {
        let l = r["lambda"].as_f64().unwrap();
        assert!(r["length"].as_f64().unwrap() <= 2.0 * std::f64::consts::PI / l);
        assert!(r["max_h_residual"].as_f64().unwrap() <= 1e-6);
    }
    let csv = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(tmp.path().join("lambda_5").join("certificate.json").exists());
}

#[test]
fn empty_sweep_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["sweep", "--lambdas", ""]);
    assert!(out.status.success());
    assert_eq!(json(&tmp.path().join("summary.json")), Value::Array(vec![]));
    let csv = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn verify_writes_claims_keyed_by_id() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["verify", "--family", "s2n", "--ns", "2", "--lambdas", "1,3", "--no-oracle"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&tmp.path().join("claims.json"));
    assert_eq!(report["all_passed"], true);
    let claims = report["claims"].as_object().unwrap();
    assert!(claims.contains_key("monotonicity"));
    assert!(claims.contains_key("arc-length-bound"));
    assert!(!claims.contains_key("oracle-agreement"));
}

#[test]
fn config_file_and_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    fs::write(
        &cfg,
        "# small shot\nfamily = s2n\nn = 2\nlambda = 7 # overridden\nr0 = 0.005\nrtol = 1e-10\n",
    )
    .unwrap();
    let out = run_in(tmp.path(), &["shoot", "--config", cfg.to_str().unwrap(), "--lambda", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let shot = json(&tmp.path().join("shot.json"));
    assert_eq!(shot["lambda"], 1.0);
    assert_eq!(shot["exit"], "AlphaZero");

    fs::write(&cfg, "lambda = 1\ncolour = red\n").unwrap();
    let out = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("colour"));
}

#[test]
fn identical_configs_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    fs::write(&cfg, "family = s3n-1\nn = 2\nlambda = 1\n").unwrap();
    let dirs = [tmp.path().join("x"), tmp.path().join("y")];
    for d in &dirs {
        assert!(run_in(d, &["solve", "--config", cfg.to_str().unwrap()]).status.success());
    }
    for name in ["solution.json", "curve.csv", "curve.json", "certificate.json", "curve.svg"] {
        assert_eq!(fs::read(dirs[0].join(name)).unwrap(), fs::read(dirs[1].join(name)).unwrap(), "{name}");
    }
}

#[test]
fn non_convergence_reports_history() {
    // A bisection budget of one cannot reach the default r0 tolerance.
    let cfg_dir = tempfile::tempdir().unwrap();
    let cfg = cfg_dir.path().join("run.conf");
    fs::write(&cfg, "max_bisections = 1\n").unwrap();
    let out = run_in(
        cfg_dir.path(),
        &["solve", "--n", "2", "--lambda", "1", "--config", cfg.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_json(&out);
    assert_eq!(err["kind"], "non-convergence");
    assert!(!err["history"].as_array().unwrap().is_empty());
}
