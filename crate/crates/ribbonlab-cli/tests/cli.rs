//! End-to-end tests that drive the compiled binary the way a user would:
//! worked examples for every subcommand, exit-code classes, output
//! determinism, and the config-echo round trip.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

/// Curvature scale of the twist target, `6 / pi^2` for unit activation.
fn twist_curvature() -> f64 {
    6.0 / (PI * PI)
}

/// Transverse-shear remainder of the twist profile for `mu = 1`.
fn twist_residual() -> f64 {
    (PI.powi(4) - 4.0 * PI * PI - 48.0) / (4.0 * PI.powi(4))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ribbonlab"))
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "expected success for {:?}\nstdout:\n{}\nstderr:\n{}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code, not a signal")
}

fn report_from(path: &PathBuf) -> Value {
    let text = fs::read_to_string(path).expect("report file should exist");
    serde_json::from_str(&text).expect("report should be valid JSON")
}

fn quantity(v: &Value) -> f64 {
    v["value"].as_f64().expect("quantity should carry a value")
}

/// Extracts `key = VALUE (units)` from captured stdout.
fn stdout_value(out: &Output, key: &str) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix(&format!("{key} = ")) {
            let token = rest.split_whitespace().next().expect("value token");
            return token.parse().expect("stdout value should be numeric");
        }
    }
    panic!("missing `{key}` in stdout:\n{text}");
}

/// Extracts `# key = VALUE ...` from a CSV footer.
fn footer_value(csv: &str, key: &str) -> f64 {
    for line in csv.lines() {
        if let Some(rest) = line.strip_prefix(&format!("# {key} = ")) {
            let token = rest.split_whitespace().next().expect("footer token");
            return token.parse().expect("footer value should be numeric");
        }
    }
    panic!("missing footer `{key}` in:\n{csv}");
}

/// Data rows of a ribbonlab CSV: everything that is neither comment nor header.
fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|line| !line.starts_with('#') && !line.is_empty())
        .skip(1)
        .map(|line| line.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn derive_twist_defaults_match_reference_values() {
    let path = tmp("derive_twist.json");
    run_ok(&["derive", "--out", path.to_str().unwrap()]);
    let report = report_from(&path);

    assert_eq!(report["schema_version"], "ribbonlab-report/1");
    assert_eq!(report["command"], "derive");
    assert!(report["timestamp_utc"].as_str().is_some());
    assert_eq!(report["alpha_coeff"]["units"], "dimensionless");

    assert!((quantity(&report["alpha_coeff"]) - 1.0 / 12.0).abs() < 1e-15);

    let k = twist_curvature();
    let target = &report["target_curvature"]["value"];
    assert!((target[0][0].as_f64().unwrap() + k).abs() < 1e-12);
    assert!((target[1][1].as_f64().unwrap() - k).abs() < 1e-12);
    assert!(target[0][1].as_f64().unwrap().abs() < 1e-12);

    assert!((quantity(&report["residual"]) - twist_residual()).abs() < 1e-12);

    assert!(quantity(&report["oracle_alpha_gap"]) < 1e-8);
    assert!(quantity(&report["oracle_target_gap"]) < 1e-8);
    assert!(quantity(&report["oracle_residual_gap"]) < 1e-8);
    assert_eq!(report["reference_comparison"]["any_discrepancy"], false);
}

#[test]
fn derive_bilayer_example_flags_recorded_residual() {
    let config = tmp("bilayer.json");
    fs::write(
        &config,
        r#"{
            "texture": "bilayer",
            "bilayer_m1": [0.1, 0.0, 0.0, 0.0, 0.0, 0.0],
            "bilayer_m2": [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        }"#,
    )
    .unwrap();
    let path = tmp("derive_bilayer.json");
    run_ok(&[
        "derive",
        "--config",
        config.to_str().unwrap(),
        "--out",
        path.to_str().unwrap(),
    ]);
    let report = report_from(&path);

    let target = &report["target_curvature"]["value"];
    assert!((target[0][0].as_f64().unwrap() + 0.15).abs() < 1e-12);
    assert!(target[1][1].as_f64().unwrap().abs() < 1e-12);
    assert!(target[0][1].as_f64().unwrap().abs() < 1e-12);

    // (1/16) * 2 mu (|sym|^2 + gamma tr^2) of diag(0.1, 0) with gamma = 0.3.
    assert!((quantity(&report["residual"]) - 0.001625).abs() < 1e-12);

    // The recorded closed form differs from the computed residual by a sign
    // inside the quadratic argument; the comparison must say so.
    let entries = report["reference_comparison"]["entries"].as_array().unwrap();
    let residual_entry = entries
        .iter()
        .find(|e| e["quantity"] == "residual")
        .expect("residual comparison entry");
    assert_eq!(residual_entry["discrepancy"], true);
    assert_eq!(report["reference_comparison"]["any_discrepancy"], true);
}

#[test]
fn derive_constant_director_relaxes_exactly() {
    let path = tmp("derive_director.json");
    run_ok(&["derive", "--texture", "director", "--out", path.to_str().unwrap()]);
    let report = report_from(&path);

    // Constant director: target -(1/6) I, residual identically zero, and the
    // recorded values agree so no discrepancy is flagged.
    let target = &report["target_curvature"]["value"];
    assert!((target[0][0].as_f64().unwrap() + 1.0 / 6.0).abs() < 1e-12);
    assert!((target[1][1].as_f64().unwrap() + 1.0 / 6.0).abs() < 1e-12);
    assert_eq!(quantity(&report["residual"]), 0.0);
    assert_eq!(report["reference_comparison"]["any_discrepancy"], false);
}

#[test]
fn rod_grid_minimum_matches_min_set_value() {
    let k = twist_curvature();
    let grid = format!("{}:{}:601", -3.0 * k, 3.0 * k);
    let path = tmp("rod_theta0.csv");
    run_ok(&["rod", "--grid", &grid, "--out", path.to_str().unwrap()]);
    let csv = fs::read_to_string(&path).unwrap();

    assert!(csv.starts_with("# ribbonlab-csv/1 rod\n"));
    assert_eq!(data_rows(&csv).len(), 601 * 601);

    let grid_min = footer_value(&csv, "grid_min");
    let min_value = footer_value(&csv, "min_set_value");
    // The grid straddles the flat minimum set, so the sampled minimum sits on
    // it up to quadratic interpolation error.
    assert!(grid_min >= min_value - 1e-12);
    assert!(grid_min - min_value < 1e-4);
}

#[test]
fn rod_pure_torsion_angle_has_no_disk_region() {
    let path = tmp("rod_theta45.csv");
    run_ok(&["rod", "--theta", "deg:45", "--out", path.to_str().unwrap()]);
    let csv = fs::read_to_string(&path).unwrap();

    // At theta = pi/4 the disk region degenerates to a point, so no sample
    // may be classified as "D".
    let rows = data_rows(&csv);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|row| row[3] != "D"));

    let half_width = twist_curvature() / (2.0 * 1.3);
    let interval_line = csv
        .lines()
        .find_map(|line| line.strip_prefix("# min_set_alpha_interval = ["))
        .expect("alpha interval footer");
    let (lo, rest) = interval_line.split_once(", ").unwrap();
    let hi = rest.split(']').next().unwrap();
    let lo: f64 = lo.parse().unwrap();
    let hi: f64 = hi.parse().unwrap();
    assert!((lo + half_width).abs() < 1e-12);
    assert!((hi - half_width).abs() < 1e-12);
    assert!((footer_value(&csv, "min_set_beta") - half_width).abs() < 1e-12);
}

#[test]
fn shape_from_min_set_attains_theoretical_minimum_and_is_deterministic() {
    let first = tmp("band_first");
    let second = tmp("band_second");
    let base = ["shape", "--theta", "deg:45", "--from-min-set", "0.5", "--out"];

    let mut first_args = base.to_vec();
    first_args.push(first.to_str().unwrap());
    let out = run_ok(&first_args);

    // Midpoint of the pure-torsion minimum set: flexure vanishes and the rod
    // energy meets length * min_set_value.
    assert!(stdout_value(&out, "flexure").abs() < 1e-12);
    let half_width = twist_curvature() / (2.0 * 1.3);
    assert!((stdout_value(&out, "torsion") - half_width).abs() < 1e-12);
    assert!(stdout_value(&out, "gap").abs() < 1e-6);

    let mut second_args = base.to_vec();
    second_args.push(second.to_str().unwrap());
    run_ok(&second_args);

    // Re-running the same request reproduces both artifacts byte for byte.
    let obj_a = fs::read(first.with_extension("obj")).unwrap();
    let obj_b = fs::read(second.with_extension("obj")).unwrap();
    assert_eq!(obj_a, obj_b);
    let csv_a = fs::read(first.with_extension("csv")).unwrap();
    let csv_b = fs::read(second.with_extension("csv")).unwrap();
    assert_eq!(csv_a, csv_b);

    let obj_text = String::from_utf8(obj_a).unwrap();
    assert!(obj_text.contains("# schema: ribbonlab-obj/1"));
    assert!(obj_text.contains("# width: 0.5"));
}

#[test]
fn shape_straight_band_traces_a_segment() {
    let stem = tmp("straight");
    let out = run_ok(&[
        "shape",
        "--from-min-set",
        "1",
        "--out",
        stem.to_str().unwrap(),
    ]);

    // theta = 0: the right endpoint of the minimum interval is the origin of
    // rate space, so the band is an unbent flat strip.
    assert_eq!(stdout_value(&out, "flexure"), 0.0);
    assert_eq!(stdout_value(&out, "torsion"), 0.0);
    assert!(stdout_value(&out, "gap").abs() < 1e-12);

    let csv = fs::read_to_string(stem.with_extension("csv")).unwrap();
    let rows = data_rows(&csv);
    let last = rows.last().expect("trajectory rows");
    let x1: f64 = last[1].parse().unwrap();
    let x2: f64 = last[2].parse().unwrap();
    let x3: f64 = last[3].parse().unwrap();
    assert!((x1 - 2.0).abs() < 1e-12);
    assert!(x2.abs() < 1e-12);
    assert!(x3.abs() < 1e-12);
}

#[test]
fn gamma_check_gap_shrinks_with_thickness() {
    let path = tmp("sweep.csv");
    run_ok(&["gamma-check", "--out", path.to_str().unwrap()]);
    let csv = fs::read_to_string(&path).unwrap();

    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 5);
    let gaps: Vec<f64> = rows.iter().map(|row| row[2].parse().unwrap()).collect();
    for pair in gaps.windows(2) {
        assert!(pair[1].abs() < pair[0].abs(), "gap magnitudes must shrink");
    }

    assert!(footer_value(&csv, "fitted_slope") >= 0.8);
    assert!(csv.contains("# pass = true"));
}

#[test]
fn gamma_check_inactive_material_is_converged() {
    let path = tmp("sweep_zero.csv");
    run_ok(&["gamma-check", "--alpha0", "0", "--out", path.to_str().unwrap()]);
    let csv = fs::read_to_string(&path).unwrap();

    // Without activation the ansatz is an exact minimizer at every thickness,
    // so each gap is identically zero and no decay slope exists.
    for row in data_rows(&csv) {
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
    }
    assert!(csv.contains("# fitted_slope = n/a"));
    assert!(csv.contains("# pass = true"));
}

#[test]
fn verify_runs_every_check_and_supports_filtering() {
    let path = tmp("verify.json");
    let out = run_ok(&["verify", "--out", path.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("acceptance: 10/10 checks passed"));
    // Ten criteria plus the deliberately broken negative control.
    assert_eq!(text.matches("PASS criterion").count(), 11);
    assert!(!text.contains("FAIL"));

    let report = report_from(&path);
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 10);
    assert_eq!(report["negative_control"]["passed"], true);

    let filtered = run_ok(&["verify", "symmetr"]);
    let text = String::from_utf8_lossy(&filtered.stdout);
    assert!(text.contains("acceptance: 1/1 checks passed"));
}

#[test]
fn error_classes_map_to_exit_codes() {
    let bad_key = tmp("bad_key.json");
    fs::write(&bad_key, r#"{"mu": 1.0, "bogus_key": 3}"#).unwrap();
    assert_eq!(exit_code(&["derive", "--config", bad_key.to_str().unwrap()]), 2);

    let missing = tmp("does_not_exist.json");
    assert_eq!(exit_code(&["derive", "--config", missing.to_str().unwrap()]), 1);

    assert_eq!(exit_code(&["derive", "--gamma", "1.5"]), 2);
    assert_eq!(exit_code(&["rod", "--grid", "1:0:50"]), 2);
    assert_eq!(exit_code(&["rod", "--theta", "grad:45"]), 2);
    assert_eq!(exit_code(&["derive", "--texture", "bilayer"]), 2);
    assert_eq!(exit_code(&["shape", "--theta", "deg:45"]), 2);
    assert_eq!(exit_code(&["verify", "nosuchcheck"]), 2);
}

#[test]
fn config_echo_reproduces_the_run() {
    let config = tmp("roundtrip_in.json");
    fs::write(&config, r#"{"gamma": 0.25, "alpha0": 2.0, "length": 3.0}"#).unwrap();
    let first = tmp("roundtrip_first.json");
    run_ok(&[
        "derive",
        "--config",
        config.to_str().unwrap(),
        "--mu",
        "2",
        "--out",
        first.to_str().unwrap(),
    ]);
    let mut first_report = report_from(&first);

    // Feed the echoed config back with no flags: the run must reproduce
    // itself exactly, timestamp aside.
    let echoed = tmp("roundtrip_echo.json");
    fs::write(
        &echoed,
        serde_json::to_string_pretty(&first_report["config"]).unwrap(),
    )
    .unwrap();
    let second = tmp("roundtrip_second.json");
    run_ok(&[
        "derive",
        "--config",
        echoed.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    let mut second_report = report_from(&second);

    // The echoed output path necessarily tracks --out; everything else,
    // including every numeric result, must reproduce exactly.
    for report in [&mut first_report, &mut second_report] {
        report.as_object_mut().unwrap().remove("timestamp_utc");
        report["config"].as_object_mut().unwrap().remove("out");
    }
    assert_eq!(first_report, second_report);
}

#[test]
fn derive_report_is_deterministic_up_to_timestamp() {
    let first = tmp("det_first.json");
    let second = tmp("det_second.json");
    run_ok(&["derive", "--texture", "splaybend", "--out", first.to_str().unwrap()]);
    run_ok(&["derive", "--texture", "splaybend", "--out", second.to_str().unwrap()]);

    let mut a = report_from(&first);
    let mut b = report_from(&second);
    for report in [&mut a, &mut b] {
        report.as_object_mut().unwrap().remove("timestamp_utc");
        report["config"].as_object_mut().unwrap().remove("out");
    }
    assert_eq!(a, b);
}
