//! End-to-end smoke tests of the binary: file formats, output shapes, and the
//! exit-code contract (0 success, 2 argument error, 3 domain error).

use std::path::Path;
use std::process::{Command, Output};

use pidtrunc::{DiscreteJointDistribution, LogBase, MaskPolicy};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pidtrunc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_xor_dist(path: &Path) {
    // Y = X1 ⊕ X2 over i.i.d. uniform bits.
    let mut probs = vec![0.0; 8];
    for x1 in 0..2usize {
        for x2 in 0..2usize {
            probs[x1 * 4 + x2 * 2 + (x1 ^ x2)] = 0.25;
        }
    }
    let d = DiscreteJointDistribution::new(
        &[("X1", 2), ("X2", 2), ("Y", 2)],
        probs,
        LogBase::Nats,
    )
    .unwrap();
    d.write_json(std::fs::File::create(path).unwrap()).unwrap();
}

#[test]
fn model_gen_then_exact_profile_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("weak.json");
    let out = run(&[
        "model-gen",
        "--m",
        "8",
        "--seed",
        "5",
        "--out",
        spec_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&[
        "exact",
        "--model",
        spec_path.to_str().unwrap(),
        "--kmax",
        "5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,I_k,delta");
    assert_eq!(lines.len(), 6, "expected a 5-row profile:\n{text}");
    // Values non-decreasing in k.
    let values: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

#[test]
fn exact_json_profile_has_schema_fields() {
    let dir = tempfile::tempdir().unwrap();
    let dist_path = dir.path().join("xor.json");
    write_xor_dist(&dist_path);
    let out = run(&[
        "exact",
        "--dist",
        dist_path.to_str().unwrap(),
        "--target",
        "Y",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["k"], 2);
    assert_eq!(parsed["units"], "nats");
    assert_eq!(parsed["I_k"].as_array().unwrap().len(), 2);
    assert_eq!(parsed["delta"].as_array().unwrap().len(), 2);
}

#[test]
fn estimate_emits_one_csv_row() {
    let dir = tempfile::tempdir().unwrap();
    let dist_path = dir.path().join("xor.json");
    write_xor_dist(&dist_path);
    let samples_path = dir.path().join("s.csv");
    {
        let d = DiscreteJointDistribution::read_json(
            std::fs::File::open(&dist_path).unwrap(),
        )
        .unwrap();
        let s = d.sample(2000, 31).unwrap();
        s.write_csv(std::fs::File::create(&samples_path).unwrap())
            .unwrap();
    }
    let out = run(&[
        "estimate",
        "--samples",
        samples_path.to_str().unwrap(),
        "--target",
        "Y",
        "--k",
        "2",
        "--dist",
        dist_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N_s,k,raw,corrected,exact,i_hat");
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[0], "2000");
    assert_eq!(fields[1], "2");
    let corrected: f64 = fields[3].parse().unwrap();
    assert!((corrected - std::f64::consts::LN_2).abs() < 0.1);
}

#[test]
fn select_returns_the_xor_pair() {
    let dir = tempfile::tempdir().unwrap();
    let dist_path = dir.path().join("xor.json");
    write_xor_dist(&dist_path);
    let out = run(&[
        "select",
        "--dist",
        dist_path.to_str().unwrap(),
        "--target",
        "Y",
        "--k",
        "2",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["relevant"], serde_json::json!(["X1", "X2"]));
}

#[test]
fn missing_source_is_an_argument_error() {
    let out = run(&["exact", "--kmax", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_file_is_an_argument_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("garbage.json");
    std::fs::write(&path, "not json").unwrap();
    let out = run(&["exact", "--dist", path.to_str().unwrap(), "--target", "Y"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn zero_information_model_is_a_domain_error_in_sampling() {
    // All couplings zero: the table is uniform, every exact I^(k) vanishes
    // and the normalized deviation is undefined.
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("flat.json");
    let spec = pidtrunc::generate_spec(8, 0.0, 0.0, 0.0, 1, MaskPolicy::None).unwrap();
    spec.write_json(std::fs::File::create(&spec_path).unwrap())
        .unwrap();
    let out = run(&[
        "exp-sampling",
        "--model",
        spec_path.to_str().unwrap(),
        "--ns-grid",
        "16,32",
        "--resamples",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("I^(1)"));
}

#[test]
fn unknown_target_is_an_argument_error() {
    let dir = tempfile::tempdir().unwrap();
    let dist_path = dir.path().join("xor.json");
    write_xor_dist(&dist_path);
    let out = run(&[
        "select",
        "--dist",
        dist_path.to_str().unwrap(),
        "--target",
        "Z",
        "--k",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiments_write_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("weak.csv");
    let out = run(&[
        "exp-weak",
        "--seed",
        "9",
        "--num-seeds",
        "2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("# pidtrunc "));
    assert!(text.lines().nth(1).unwrap() == "experiment,seed,k,N_s,kind,value");
    assert!(text.lines().count() > 10);
}
