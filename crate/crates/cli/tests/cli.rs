//! End-to-end runs of the binary against small configs.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
    out: PathBuf,
    report: Option<Value>,
}

fn pcmlax(dir: &Path, command: &str, config: &Value, extra: &[&str]) -> Outcome {
    let cfg = dir.join(format!("{command}.json"));
    std::fs::write(&cfg, serde_json::to_vec_pretty(config).unwrap()).unwrap();
    let out = dir.join("out");
    let res = Command::new(env!("CARGO_BIN_EXE_pcmlax"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .expect("binary runs");
    let report = std::fs::read(out.join(format!("{command}.report.json")))
        .ok()
        .map(|b| serde_json::from_slice(&b).unwrap());
    Outcome {
        code: res.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&res.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&res.stderr).into_owned(),
        out,
        report,
    }
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

fn lattice(n: usize, d0: f64, d1: f64) -> Value {
    json!({"extents": [n, n], "spacing": [d0, d1], "boundary": "periodic"})
}

fn small_verify(algebra: Value) -> Value {
    json!({
        "algebra": algebra,
        "lattice": lattice(8, 0.125, 0.125),
        "options": {"seed": 3, "ensemble": {"metrics": 10, "hodge_extent": 8, "fields": 4, "field_extent": 8, "matrix_pairs": 50}}
    })
}

#[test]
fn verify_identities_su2_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = pcmlax(dir.path(), "verify-identities", &small_verify(json!({"preset": "su2"})), &[]);
    assert_eq!(o.code, 0, "{}{}", o.stdout, o.stderr);
    let r = o.report.unwrap();
    assert_eq!(r["passed"], true);
    assert_eq!(r["schema_version"], 1);
    assert!(r["config_digest"].as_str().unwrap().starts_with("sha256:"));
    assert!(o.stdout.contains("hodge_involution") && o.stdout.contains("PASS"));
}

#[test]
fn verify_identities_abelian_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = pcmlax(dir.path(), "verify-identities", &small_verify(json!({"preset": "abelian", "dim": 2})), &[]);
    assert_eq!(o.code, 0, "{}", o.stdout);
}

#[test]
fn corrupted_structure_constants_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let alg = json!({"name": "broken", "dim": 3, "structure_constants": [[0, 1, 2, 1.0], [0, 2, 1, 1.0]]});
    let o = pcmlax(dir.path(), "verify-identities", &small_verify(alg), &[]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("fails validation"), "{}", o.stderr);
    assert!(o.report.is_none());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        json!({"algebra": {"preset": "su2"}, "lattice": lattice(8, 0.1, 0.1), "fields": {"dual": {"expressions": ["tan(x0)", "0", "0"]}}}),
        json!({"algebra": {"preset": "su2"}, "lattice": lattice(8, 0.1, 0.1), "fields": {"dual": {"file": "missing.dense"}}}),
        json!({"algebra": {"preset": "su2"}, "lattice": lattice(8, 0.1, 0.1), "colour": 1}),
        json!({"algebra": {"preset": "su2"}, "lattice": {"extents": [8, 8], "spacing": [0.1, 0.1], "boundary": "periodic", "metric": [[1, 0], [0, 1]]}}),
        json!({"algebra": {"preset": "su2"}, "lattice": lattice(8, 0.1, 0.1), "fields": {"dual": {"expressions": ["x0"]}}}),
    ];
    for cfg in &bad {
        let o = pcmlax(dir.path(), "residuals", cfg, &[]);
        assert_eq!(o.code, 2, "{cfg} -> {}", o.stderr);
    }
    let no_dual = json!({"algebra": {"preset": "su2"}, "lattice": lattice(8, 0.1, 0.1)});
    let o = pcmlax(dir.path(), "residuals", &no_dual, &[]);
    assert_eq!(o.code, 2);
    assert!(o.report.unwrap()["error"].as_str().unwrap().contains("fields.dual"));
}

#[test]
fn residuals_wave_flatness_ratio_near_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "algebra": {"preset": "abelian", "dim": 1},
        "lattice": lattice(32, 1.0 / 32.0, 2.0 / 32.0),
        "fields": {"dual": {"expressions": ["sin(2*pi*(x0 - x1))"]}}
    });
    let o = pcmlax(dir.path(), "residuals", &cfg, &[]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    let ratio = check(o.report.as_ref().unwrap(), "flatness_convergence")["value"].as_f64().unwrap();
    assert!((ratio - 4.0).abs() < 0.5, "{ratio}");
    // refinement by 3 expects 9
    let o = pcmlax(dir.path(), "residuals", &cfg, &["--resolution-factor", "3"]);
    let ratio = check(o.report.as_ref().unwrap(), "flatness_convergence")["value"].as_f64().unwrap();
    assert!((ratio - 9.0).abs() < 9.0 * 0.125, "{ratio}");
}

#[test]
fn residuals_constant_fields_are_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "algebra": {"preset": "su2"},
        "lattice": lattice(8, 0.125, 0.125),
        "fields": {"dual": {"expressions": ["0.2", "-0.1", "0.3"]}, "original": {"expressions": ["0.5", "0.1", "0"]}}
    });
    let o = pcmlax(dir.path(), "residuals", &cfg, &[]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    let r = o.report.unwrap();
    for level in r["data"]["levels"].as_array().unwrap() {
        for key in ["first_order", "flatness", "bianchi"] {
            assert_eq!(level[key]["max_norm"], 0.0, "{key}");
        }
    }
}

#[test]
fn residuals_near_pole_exit_3_with_sites() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "algebra": {"preset": "scalar"},
        "lattice": lattice(8, 0.125, 0.125),
        "fields": {"dual": {"expressions": ["1 + 0.000000001*sin(2*pi*x0)"]}}
    });
    let o = pcmlax(dir.path(), "residuals", &cfg, &[]);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("(0, 0)"), "{}", o.stderr);
    let r = o.report.unwrap();
    assert_eq!(r["exit_code"], 3);
    assert!(r["outputs"].as_array().unwrap().is_empty());
}

#[test]
fn integrate_zero_connection_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "algebra": {"preset": "su2"},
        "lattice": {"extents": [6, 6], "spacing": [0.2, 0.2], "boundary": "clamped"},
        "fields": {"lax": {"alpha0": ["0", "0", "0"], "alpha1": ["0", "0", "0"]}},
        "options": {"paths": [{"start": [0, 0], "moves": ["+0", "+1", "+1"]}]}
    });
    let o = pcmlax(dir.path(), "integrate", &cfg, &[]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    let g = pcmlax_core::dense::DenseArray::read_file(o.out.join("transport.dense")).unwrap();
    assert_eq!(g.shape, [1, 2, 2]);
    assert_eq!(g.data, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    assert_eq!(g.meta("algebra"), Some("su2"));
}

#[test]
fn integrate_constant_commuting_and_flat_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "algebra": {"preset": "su2"},
        "lattice": {"extents": [12, 12], "spacing": [0.1, 0.1], "boundary": "clamped"},
        "fields": {"lax": {"alpha0": ["0.4", "-0.8", "1.2"], "alpha1": ["-0.2", "0.4", "-0.6"]}},
        "options": {"paths": [{"start": [2, 2], "moves": ["+0", "+0", "+1", "-0", "+1", "+1"]}], "random_loop_pairs": 3, "seed": 5}
    });
    let o = pcmlax(dir.path(), "integrate", &cfg, &[]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    let r = o.report.unwrap();
    assert_eq!(check(&r, "transport_closed_form[0]")["status"], "pass");
    for i in 0..3 {
        assert_eq!(check(&r, &format!("path_gap[{i}]"))["status"], "pass");
    }
}

#[test]
fn integrate_without_representation_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "algebra": {"dim": 1, "structure_constants": []},
        "lattice": lattice(8, 0.1, 0.1),
        "fields": {"dual": {"expressions": ["0.1"]}}
    });
    let o = pcmlax(dir.path(), "integrate", &cfg, &[]);
    assert_eq!(o.code, 2, "{}", o.stderr);
}

#[test]
fn lagrangian_direct_matches_split_and_terms_are_emitted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "algebra": {"preset": "su2"},
        "lattice": lattice(16, 1.0 / 16.0, 1.0 / 16.0),
        "fields": {"dual": {"expressions": ["0.3*sin(2*pi*x0)", "0.2*cos(2*pi*(x0 + x1))", "0.1 + 0.2*sin(2*pi*x1)"]}}
    });
    let o = pcmlax(dir.path(), "lagrangian", &cfg, &["--terms"]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    let r = o.report.unwrap();
    assert!(check(&r, "direct_vs_split")["value"].as_f64().unwrap() <= 1e-12);
    let outputs: Vec<&str> = r["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.contains(&"lagrangian_split_gt_kinetic.dense"));
    let d = pcmlax_core::dense::DenseArray::read_file(o.out.join("lagrangian_direct.dense")).unwrap();
    assert_eq!(d.shape, [16, 16]);
}

#[test]
fn lagrangian_constant_and_abelian_cases() {
    let dir = tempfile::tempdir().unwrap();
    let constant = json!({
        "algebra": {"preset": "su2"},
        "lattice": lattice(8, 0.125, 0.125),
        "fields": {"dual": {"expressions": ["0.2", "0.1", "-0.3"]}}
    });
    let o = pcmlax(dir.path(), "lagrangian", &constant, &[]);
    assert_eq!(o.code, 0);
    let d = &o.report.unwrap()["data"]["densities"];
    for k in ["direct", "split", "pcm"] {
        assert_eq!(d[k]["max_abs"], 0.0, "{k}");
    }

    let abelian = json!({
        "algebra": {"preset": "abelian", "dim": 2},
        "lattice": lattice(8, 0.125, 0.125),
        "fields": {"dual": {"expressions": ["0.3*sin(2*pi*x0)", "0.2*cos(2*pi*x1)"]}}
    });
    let o = pcmlax(dir.path(), "lagrangian", &abelian, &[]);
    assert_eq!(o.code, 0);
    let terms = &o.report.unwrap()["data"]["densities"]["split"]["terms"];
    for t in ["gt_kinetic", "gt_bracket", "gt_coupling"] {
        assert_eq!(terms[t], 0.0, "{t}");
    }
    assert!(terms["g_kinetic"].as_f64().unwrap() > 0.0);
}

fn frob_cfg(exprs: [&str; 3], thresholds: Value) -> Value {
    json!({
        "algebra": {"preset": "su2"},
        "lattice": lattice(32, 1.0 / 32.0, 1.0 / 32.0),
        "fields": {"dual": {"expressions": exprs}},
        "options": {"thresholds": thresholds}
    })
}

#[test]
fn frobenius_effective_abelian_emits_phi() {
    let dir = tempfile::tempdir().unwrap();
    let o = pcmlax(dir.path(), "frobenius", &frob_cfg(["0.5*sin(2*pi*(x0 - x1))", "0", "0"], json!({})), &[]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    let phi = pcmlax_core::dense::DenseArray::read_file(o.out.join("phi.dense")).unwrap();
    assert_eq!(phi.shape, [32, 32, 3]);
}

#[test]
fn frobenius_failure_codes() {
    let dir = tempfile::tempdir().unwrap();
    let generic = ["0.3*sin(2*pi*x0)*cos(2*pi*x1)", "0.25*cos(2*pi*(x0 + 2*x1))", "0.2*sin(2*pi*(2*x0 - x1))"];
    let o = pcmlax(dir.path(), "frobenius", &frob_cfg(generic, json!({})), &[]);
    assert_eq!(o.code, 1);
    let r = o.report.unwrap();
    assert_eq!(check(&r, "closedness")["status"], "fail");
    assert_eq!(check(&r, "commutation")["status"], "skipped");
    assert!(!o.out.join("phi.dense").exists());

    let o = pcmlax(dir.path(), "frobenius", &frob_cfg(generic, json!({"closedness": 10.0})), &[]);
    assert_eq!(o.code, 4);
    let r = o.report.unwrap();
    assert_eq!(check(&r, "commutation")["status"], "fail");
    assert_eq!(check(&r, "recovery")["status"], "skipped");
}

#[test]
fn frobenius_zero_field_passes_trivially() {
    let dir = tempfile::tempdir().unwrap();
    let o = pcmlax(dir.path(), "frobenius", &frob_cfg(["0", "0", "0"], json!({})), &[]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    let phi = pcmlax_core::dense::DenseArray::read_file(o.out.join("phi.dense")).unwrap();
    assert!(phi.data.iter().all(|&x| x == 0.0));
}

#[test]
fn dense_file_fields_round_trip_through_frobenius() {
    let dir = tempfile::tempdir().unwrap();
    let o = pcmlax(dir.path(), "frobenius", &frob_cfg(["0.5*sin(2*pi*(x0 - x1))", "0", "0"], json!({})), &[]);
    assert_eq!(o.code, 0);
    let from_expr = o.report.unwrap();

    // Feed the sampled dual field back in as a dense file.
    let lat = pcmlax_core::geometry::Lattice2D::periodic_square(32, [1.0, 1.0]).unwrap();
    let a = pcmlax_core::expr::sample_field::<f64>(
        lat,
        &["0.5*sin(2*pi*(x0 - x1))".into(), "0".into(), "0".into()],
        pcmlax_core::geometry::FieldRole::Dual,
    )
    .unwrap();
    let arr = pcmlax_core::dense::DenseArray::new(pcmlax_core::dense::DType::F64, vec![32, 32, 3], "site-major i0 i1 generator", a.as_slice().to_vec()).unwrap();
    arr.write_file(dir.path().join("a.dense")).unwrap();
    let mut cfg = frob_cfg(["0", "0", "0"], json!({}));
    cfg["fields"]["dual"] = json!({"file": "a.dense"});
    let o = pcmlax(dir.path(), "frobenius", &cfg, &[]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let from_file = o.report.unwrap();
    assert_eq!(from_expr["checks"], from_file["checks"]);

    // residuals cannot refine a file field; convergence is skipped, not failed
    let o = pcmlax(dir.path(), "residuals", &cfg, &[]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    assert_eq!(check(o.report.as_ref().unwrap(), "flatness_convergence")["status"], "skipped");
}

#[test]
fn seed_flag_changes_ensemble_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_verify(json!({"preset": "su2"}));
    let a = pcmlax(dir.path(), "verify-identities", &cfg, &["--seed", "1"]).report.unwrap();
    let b = pcmlax(dir.path(), "verify-identities", &cfg, &["--seed", "2"]).report.unwrap();
    assert_eq!(a["seed"], 1);
    assert_ne!(a["checks"], b["checks"]);
}

#[test]
fn report_has_no_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let o = pcmlax(dir.path(), "frobenius", &frob_cfg(["0", "0", "0"], json!({})), &[]);
    assert!(o.stdout.contains("wall time"));
    let text = std::fs::read_to_string(o.out.join("frobenius.report.json")).unwrap();
    assert!(!text.contains("wall") && !text.contains("time"));
}
