use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_q2ma")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(bin())
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("Q2MA_TOL")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn listing(dir: &Path) -> Vec<String> {
    if !dir.exists() {
        return Vec::new();
    }
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn malformed_json_exits_1_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", "{\"hamiltonian\": ");
    let out = tmp.path().join("out");
    let o = run(&["chain"], &cfg, &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(listing(&out).is_empty());
}

#[test]
fn unknown_keys_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"hamiltonian": {"model": "ising", "n": 2}, "beta": 1.0, "temperature": 3}"#,
    );
    let o = run(&["chain"], &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("temperature"));
}

#[test]
fn identity_kick_is_a_structural_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"hamiltonian": {"model": "ising", "n": 2}, "kick": "identity", "beta": 1.0}"#,
    );
    let out = tmp.path().join("out");
    let o = run(&["chain"], &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(listing(&out).is_empty());
}

#[test]
fn five_qubit_walk_needs_the_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"hamiltonian": {"model": "ising", "n": 5}, "kick": {"spin_flip": 0}, "beta": 0.0}"#,
    );
    assert_eq!(run(&["walk"], &cfg, &tmp.path().join("a")).status.code(), Some(1));
    // With the flag the size is accepted; a single-site flip then leaves the chain disconnected.
    assert_eq!(run(&["walk", "--allow-large"], &cfg, &tmp.path().join("c")).status.code(), Some(2));
    // Chain-only analysis has no walk-space cap.
    let cfg = write_config(tmp.path(), "d.json", r#"{"hamiltonian": {"model": "ising", "n": 5}, "beta": 0.5}"#);
    assert_eq!(run(&["chain"], &cfg, &tmp.path().join("b")).status.code(), Some(0));
}

#[test]
fn two_state_chain_matches_hand_values() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["chain"], &configs().join("two_state.json"), &out);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("chain.csv")).unwrap();
    assert_eq!(csv, "i,j,m_ij\n0,0,0.5\n0,1,0.5\n1,0,1\n1,1,0\n");
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join("chain_summary.json")).unwrap()).unwrap();
    assert!((summary["delta"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert!((summary["mixing_time_estimate"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(summary["warnings"].as_array().unwrap().len(), 1);
    for key in ["beta", "delta", "eigenvalues", "detailed_balance_residual"] {
        assert!(summary.get(key).is_some(), "{key}");
    }
}

#[test]
fn walk_summary_has_the_documented_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["walk"], &configs().join("two_state.json"), &out);
    assert_eq!(o.status.code(), Some(0));
    let s: serde_json::Value = serde_json::from_slice(&fs::read(out.join("walk_summary.json")).unwrap()).unwrap();
    for key in ["delta_min", "two_sqrt_delta", "fixed_point_residual", "eigenphases", "pass"] {
        assert!(s.get(key).is_some(), "{key}");
    }
    let phases: Vec<f64> = s["eigenphases"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let target = 2.0 * (-0.5f64).acos();
    let wrapped = target - 2.0 * std::f64::consts::PI;
    assert!(phases.iter().any(|p| (p - wrapped).abs() < 1e-7 || (p - target).abs() < 1e-7));
}

#[test]
fn anneal_writes_trace_and_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["anneal"], &configs().join("tfim2_anneal.json"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(listing(&out), vec!["anneal_metadata.json", "trace.csv"]);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,beta_j,overlap_sq,outcome,cum_success,fidelity_to_exact,delta_min_j,cw_budget_j"
    );
    assert_eq!(lines.count(), 64);
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(out.join("anneal_metadata.json")).unwrap()).unwrap();
    assert!(meta["runs"][0]["final_fidelity"].as_f64().unwrap() >= 0.999);
    assert_eq!(meta["policy"], "post_select");
    assert_eq!(meta["seed"], 7);
}

#[test]
fn step_sweep_writes_one_trace_per_d() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["anneal"], &configs().join("tfim2_zeno.json"), &out);
    assert_eq!(o.status.code(), Some(0));
    let names = listing(&out);
    for d in [8, 16, 32, 64, 128, 256] {
        assert!(names.contains(&format!("trace_d{d}.csv")), "{names:?}");
    }
}

#[test]
fn aborted_anneal_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"hamiltonian": {"model": "tfim", "n": 2, "J": 1.0, "h": 0.5}, "kick": "uniform_flips_xz", "beta": 8.0,
            "anneal": {"steps": 1, "policy": "abort"}}"#,
    );
    let codes: Vec<i32> = (0..8)
        .map(|seed| {
            let out = tmp.path().join(format!("out{seed}"));
            let o = run(&["anneal", "--seed", &seed.to_string()], &cfg, &out);
            let code = o.status.code().unwrap();
            if code == 3 {
                assert!(listing(&out).is_empty());
            }
            code
        })
        .collect();
    assert!(codes.iter().all(|&c| c == 0 || c == 3));
    assert!(codes.contains(&3), "{codes:?}");
}

#[test]
fn pea_mode_flag_overrides_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["anneal", "--mode", "pea"], &configs().join("tfim2_anneal.json"), &out);
    assert_eq!(o.status.code(), Some(0));
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(out.join("anneal_metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["mode"], "pea");
    assert!(meta["pea"]["window"].as_f64().unwrap() > 0.0);
}

#[test]
fn sweep_edge_cases() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("empty");
    assert_eq!(run(&["sweep"], &configs().join("sweep_empty.json"), &out).status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(out.join("sweep.csv")).unwrap(),
        "instance,beta,delta,delta_min,ratio,pass,all_nonnegative,error\n"
    );
    let out = tmp.path().join("poisoned");
    assert_eq!(run(&["sweep"], &configs().join("sweep50_poisoned.json"), &out).status.code(), Some(0));
    let mut reader = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 50);
    assert_eq!(rows.iter().filter(|r| r[7].is_empty()).count(), 49);
    assert_eq!(rows.iter().filter(|r| r[7].contains("disconnected")).count(), 1);
}

#[test]
fn leakage_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("c");
    assert_eq!(run(&["leakage"], &configs().join("leakage_constant.json"), &out).status.code(), Some(0));
    let mut reader = csv::Reader::from_path(out.join("leakage.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().take(4).map(String::from).collect();
    assert_eq!(header.join(","), "i,E_i_normalized,eta_i,omega_i");
    for r in reader.records() {
        assert_eq!(&r.unwrap()[2], "1");
    }
    let out = tmp.path().join("r");
    assert_eq!(run(&["leakage"], &configs().join("leakage_r2l3.json"), &out).status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join("leakage_config.json")).unwrap()).unwrap();
    let finest = summary["windows"].as_array().unwrap().last().unwrap().clone();
    assert!(finest["max_eta"].as_f64().unwrap() < 0.1);
}

#[test]
fn tolerance_overrides_are_checked() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("two_state.json");
    let o = Command::new(bin())
        .args(["chain", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("a"))
        .env("Q2MA_TOL", "warp_factor=1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(bin())
        .args(["chain", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("b"))
        .env("Q2MA_TOL", "disconnected=1e-10,block_match=1e-5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn outputs_leave_no_temporary_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run(&["leakage"], &configs().join("leakage_ising3.json"), &out).status.code(), Some(0));
    assert_eq!(listing(&out), vec!["leakage.csv", "leakage_config.json"]);
}
