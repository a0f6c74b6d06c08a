//! End-to-end tests of the `dbar` binary: exit codes, file outputs,
//! determinism, and the self-test report.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dbar"))
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dbar-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

const TINY_CONSTANT: &str = r#"
[domain]
grid = 32
boundary_nodes = 16

[phantom]
preset = "constant"

[lambda]
radius = 2.5
nodes = 8

[solver]
b_delta = 0.002
"#;

#[test]
fn constant_phantom_pipeline_reconstructs_unity() {
    let dir = tmpdir("const");
    let cfg = write_config(&dir, TINY_CONSTANT);
    let out_dir = dir.join("out");
    let out = bin()
        .args(["--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .arg("pipeline")
        .output()
        .unwrap();
    assert_exit(&out, 0);

    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["rel_linf"].as_f64().unwrap() < 1e-3);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["completed"], serde_json::json!(true));
    let scatter = manifest["stages"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["name"] == "scatter")
        .unwrap();
    assert_eq!(scatter["diagnostics"]["b_zero"], serde_json::json!(true));
    fs::remove_dir_all(dir).ok();
}

#[test]
fn invalid_lambda_sweep_is_rejected_before_compute() {
    let dir = tmpdir("badcfg");
    let cfg = write_config(
        &dir,
        "[lambda]\nsweep_radii = 2\nsweep_angles = 3\n",
    );
    let out_dir = dir.join("out");
    let out = bin()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .arg("pipeline")
        .output()
        .unwrap();
    assert_exit(&out, 2);
    assert!(!out_dir.exists(), "validation must run before any compute");
    fs::remove_dir_all(dir).ok();
}

#[test]
fn missing_stage_input_is_a_config_error() {
    let dir = tmpdir("missing");
    let out = bin()
        .arg("--out")
        .arg(dir.join("empty"))
        .arg("reconstruct")
        .output()
        .unwrap();
    assert_exit(&out, 2);
    fs::remove_dir_all(dir).ok();
}

#[test]
fn pipeline_outputs_are_deterministic() {
    let dir = tmpdir("det");
    let cfg = write_config(&dir, TINY_CONSTANT);
    for tag in ["a", "b"] {
        let out = bin()
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(dir.join(tag))
            .args(["--noise", "0.005", "--seed", "42"])
            .arg("pipeline")
            .output()
            .unwrap();
        assert_exit(&out, 0);
    }
    for f in ["sigma_rec.bin", "q_rec.bin", "scatter_b.bin", "dtn_phi.bin"] {
        let a = fs::read(dir.join("a").join(f)).unwrap();
        let b = fs::read(dir.join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
    fs::remove_dir_all(dir).ok();
}

#[test]
fn selftest_quick_passes_and_reports_json() {
    let out = bin().args(["selftest", "quick"]).output().unwrap();
    assert_exit(&out, 0);
    let checks: Vec<serde_json::Value> =
        serde_json::from_slice(&out.stdout).expect("stdout is a JSON report");
    assert!(checks.len() >= 4);
    assert!(checks.iter().all(|c| c["passed"] == serde_json::json!(true)));
}

#[test]
fn validate_curve_reports_conditions() {
    let dir = tmpdir("curve");
    let path = dir.join("cubic.txt");
    fs::write(&path, "# perturbed cubic\n3 0 1 0\n0 3 1 0\n0 1 1 0\n0 0 -1 0\n").unwrap();
    let out = bin().arg("validate-curve").arg(&path).output().unwrap();
    assert_exit(&out, 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["condition_i"]["passed"], serde_json::json!(true));
    assert_eq!(report["condition_iii"]["passed"], serde_json::json!(true));

    fs::write(&path, "3 0 1.0\n").unwrap();
    let out = bin().arg("validate-curve").arg(&path).output().unwrap();
    assert_exit(&out, 2);
    fs::remove_dir_all(dir).ok();
}
