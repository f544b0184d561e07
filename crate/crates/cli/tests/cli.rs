//! End-to-end tests of the `mubcert` binary: subcommand wiring, exit codes,
//! stdin/stdout composition, manifests, and output determinism.

use std::io::Write as _;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

use mubcert_core::consys::{mub_fixture, PolySystem};
use mubcert_core::polyring::parse_polynomial;
use mubcert_core::sdp::sdpa::parse_sdpa;

const BIN: &str = env!("CARGO_BIN_EXE_mubcert");

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).stdout(Stdio::piped()).stderr(Stdio::piped());
    cmd.stdin(if stdin.is_some() { Stdio::piped() } else { Stdio::null() });
    let mut child = cmd.spawn().expect("binary spawns");
    if let Some(text) = stdin {
        child
            .stdin
            .take()
            .expect("stdin piped")
            .write_all(text.as_bytes())
            .expect("stdin writes");
    }
    child.wait_with_output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// The manifest is the last JSON line on stderr.
fn manifest(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("stderr has a manifest line");
    let v: Value = serde_json::from_str(line).expect("manifest line is JSON");
    assert_eq!(v["type"], "manifest");
    v
}

/// A trivially feasible one-constraint system: the unit circle.
fn circle_system_json() -> String {
    let sys = PolySystem {
        spec: "circle".into(),
        nvars: 2,
        vars: vec!["x".into(), "y".into()],
        constraints: vec![parse_polynomial(2, &["x", "y"], "x^2 + y^2 - 1").unwrap()],
        objective: None,
    };
    serde_json::to_string(&sys).unwrap()
}

// ---------------------------------------------------------------------------
// gen | groebner

#[test]
fn gen_piped_into_groebner_reports_infeasibility() {
    let gen = run(&["gen", "--spec", "1,1,1,1@2"], None);
    assert_eq!(exit_code(&gen), 0);
    let sys: Value = stdout_json(&gen);
    assert_eq!(sys["nvars"], 4);
    assert_eq!(sys["constraints"].as_array().unwrap().len(), 5);

    let gb = run(
        &["groebner", "--in", "-"],
        Some(&String::from_utf8_lossy(&gen.stdout)),
    );
    assert_eq!(exit_code(&gb), 0);
    let out = stdout_json(&gb);
    assert_eq!(out["infeasible_over_C"], true);
    let basis = out["reduced_basis"].as_array().unwrap();
    assert_eq!(basis.len(), 1);
    let stats = &out["stats"];
    assert!(stats["pairs"].as_u64().unwrap() > 0);
    assert!(stats["max_degree_seen"].as_u64().unwrap() >= 4);
}

#[test]
fn groebner_under_lex_agrees() {
    let gen = run(&["gen", "--spec", "1,1,1,1@2"], None);
    let gb = run(
        &["groebner", "--in", "-", "--order", "lex"],
        Some(&String::from_utf8_lossy(&gen.stdout)),
    );
    assert_eq!(exit_code(&gb), 0);
    assert_eq!(stdout_json(&gb)["infeasible_over_C"], true);
}

#[test]
fn groebner_on_a_feasible_system_is_a_success_with_a_negative_verdict() {
    let gb = run(&["groebner", "--in", "-"], Some(&circle_system_json()));
    assert_eq!(exit_code(&gb), 0, "computation succeeded; verdict is data");
    let out = stdout_json(&gb);
    assert_eq!(out["infeasible_over_C"], false);
}

// ---------------------------------------------------------------------------
// determinism and manifests

#[test]
fn generated_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, _) in [(&a, 0), (&b, 1)] {
        let out = run(
            &["gen", "--spec", "5,5,5,1@6", "--out", path.to_str().unwrap()],
            None,
        );
        assert_eq!(exit_code(&out), 0);
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, bytes_b);
}

#[test]
fn every_run_emits_a_manifest_with_digests_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("sys.json");
    let out = run(
        &["gen", "--spec", "1,1,1,1@2", "--out", sys.to_str().unwrap()],
        None,
    );
    let m = manifest(&out);
    assert_eq!(m["subcommand"], "gen");
    assert_eq!(m["artifacts"][0], sys.to_str().unwrap());
    assert!(m["wall_ms"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["options"]["spec"], "1,1,1,1@2");

    // A consuming run digests its input file.
    let gb = run(&["groebner", "--in", sys.to_str().unwrap()], None);
    let m = manifest(&gb);
    assert_eq!(m["inputs"][0]["source"], sys.to_str().unwrap());
    let digest = m["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert!(digest.chars().all(|c| c.is_ascii_hexdigit()));

    // Identical input via stdin digests identically.
    let text = std::fs::read_to_string(&sys).unwrap();
    let gb2 = run(&["groebner", "--in", "-"], Some(&text));
    let m2 = manifest(&gb2);
    assert_eq!(m2["inputs"][0]["source"], "-");
    assert_eq!(m2["inputs"][0]["sha256"], digest);

    // All stderr lines are JSON (diagnostics contract).
    for line in String::from_utf8_lossy(&gb.stderr).lines() {
        serde_json::from_str::<Value>(line).expect("stderr line is JSON");
    }
}

// ---------------------------------------------------------------------------
// nulla and verify

#[test]
fn nulla_certificate_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("sys.json");
    let cert = dir.path().join("cert.json");
    run(
        &["gen", "--spec", "1,1,1,1@2", "--out", sys.to_str().unwrap()],
        None,
    );

    let search = run(
        &[
            "nulla",
            "--in",
            sys.to_str().unwrap(),
            "--dmax",
            "6",
            "--out",
            cert.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(exit_code(&search), 0);
    let out = stdout_json(&search);
    assert_eq!(out["verified"], true);
    assert_eq!(out["degree"], 6);
    assert!(out["certificate"].is_object());

    let verify = run(
        &[
            "verify",
            "--sys",
            sys.to_str().unwrap(),
            "--cert",
            cert.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(exit_code(&verify), 0);
    assert_eq!(stdout_json(&verify)["verified"], true);

    // Corrupt one cofactor coefficient: the identity must fail, exit 1.
    let mut c: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let num = c["cofactors"][0]["terms"][0]["num"].as_str().unwrap().to_string();
    let bumped: i64 = num.parse::<i64>().unwrap() + 1;
    c["cofactors"][0]["terms"][0]["num"] = Value::String(bumped.to_string());
    std::fs::write(&cert, serde_json::to_string(&c).unwrap()).unwrap();
    let verify = run(
        &[
            "verify",
            "--sys",
            sys.to_str().unwrap(),
            "--cert",
            cert.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(exit_code(&verify), 1);
    assert_eq!(stdout_json(&verify)["verified"], false);
}

#[test]
fn nulla_on_a_feasible_system_returns_null_with_exhausted_bounds() {
    let out = run(&["nulla", "--in", "-", "--dmax", "6"], Some(&circle_system_json()));
    assert_eq!(exit_code(&out), 1);
    let v = stdout_json(&out);
    assert!(v["certificate"].is_null());
    assert_eq!(v["exhausted"]["dmax"], 6);
}

#[test]
fn nulla_resource_caps_exit_three_with_the_tripped_bound() {
    // Full-scale systems trip the row caps: {5,5,4,1}@6 immediately, the
    // {5,3,3,3}@6 density system after completing degree 2.
    let gen = run(&["gen", "--spec", "5,5,4,1@6"], None);
    let out = run(
        &["nulla", "--in", "-", "--dmax", "8"],
        Some(&String::from_utf8_lossy(&gen.stdout)),
    );
    assert_eq!(exit_code(&out), 3);
    let v = stdout_json(&out);
    assert!(v["certificate"].is_null());
    assert!(v["resource_cap"]["last_completed_degree"].is_null());
    assert!(v["resource_cap"]["message"]
        .as_str()
        .unwrap()
        .contains("4598126"));

    // Tiny explicit caps trip even the toy system.
    let gen = run(&["gen", "--spec", "1,1,1,1@2"], None);
    let out = run(
        &["nulla", "--in", "-", "--dmax", "6", "--max-rows", "10"],
        Some(&String::from_utf8_lossy(&gen.stdout)),
    );
    assert_eq!(exit_code(&out), 3);
}

// ---------------------------------------------------------------------------
// grassmann

#[test]
fn grassmann_reports_the_mub_distances_for_the_qubit_fixture() {
    let bases = mub_fixture(2).unwrap();
    let as_json: Vec<Vec<Vec<[f64; 2]>>> = bases
        .iter()
        .map(|m| {
            (0..m.ncols())
                .map(|j| (0..m.nrows()).map(|i| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect()
        })
        .collect();
    let file = serde_json::json!({ "bases": as_json }).to_string();

    let out = run(&["grassmann", "--bases", "-"], Some(&file));
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["d"], 2);
    assert_eq!(v["bases"], 3);
    let pairs = v["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 3);
    for p in pairs {
        assert!((p["d2"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    }
    assert!((v["dbar2"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
}

// ---------------------------------------------------------------------------
// citer

#[test]
fn seeded_citer_converges_and_decodes_a_mub_pair() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.json");
    let out = run(
        &[
            "citer",
            "--spec",
            "2,1@2",
            "--max-iter",
            "500",
            "--tol",
            "1e-7",
            "--seed",
            "1",
            "--out",
            trace.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["status"], "converged");
    assert!(v["tau_final"].as_f64().unwrap() <= 1e-7);
    assert_eq!(v["mu_check"]["pass"], true);

    // The trace file carries the per-iteration residuals, non-increasing.
    let t: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    let tau: Vec<f64> = t["tau"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!(!tau.is_empty());
    for w in tau.windows(2) {
        assert!(w[1] <= w[0] + 1e-5, "tau increased: {w:?}");
    }
    assert_eq!(t["seed"], 1);
}

#[test]
fn unseeded_citer_stall_is_a_negative_result_with_bounds() {
    let out = run(&["citer", "--spec", "2,1@2"], None);
    assert_eq!(exit_code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["status"], "stalled");
    assert_eq!(v["max_iter"], 500);
    assert!(v["tau_final"].as_f64().unwrap() > 1e-6);
    assert!(v["mu_check"].is_null());
}

// ---------------------------------------------------------------------------
// emit-qmp, lasserre, sdp

#[test]
fn emitted_qmp_parses_back_with_the_documented_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("problem.dat-s");
    let out = run(
        &["emit-qmp", "--spec", "5,3,3,3@6", "--out", path.to_str().unwrap()],
        None,
    );
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["size"], 114);
    assert_eq!(v["rank_bound"], 6);

    let text = std::fs::read_to_string(&path).unwrap();
    assert!(
        text.lines().take(2).any(|l| l.starts_with('"') && l.contains("rank bound r = 6")),
        "rank bound must be recorded in a leading comment"
    );
    let problem = parse_sdpa(&path).unwrap();
    assert_eq!(problem.blocks, vec![114]);
    assert_eq!(problem.constraints.len(), 758);
}

#[test]
fn lasserre_structure_bound_and_emitted_sdp_agree() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("sys.json");
    run(
        &["gen", "--spec", "1,1,1,1@2", "--out", sys.to_str().unwrap()],
        None,
    );
    let sys = sys.to_str().unwrap();

    // Structure only (no --solve/--emit): the moment-table metadata.
    let meta = run(
        &["lasserre", "--in", sys, "--order", "2", "--promote-squared", "0"],
        None,
    );
    assert_eq!(exit_code(&meta), 0);
    let m = stdout_json(&meta);
    assert_eq!(m["meta"]["matrix_size"], 15);
    assert_eq!(m["meta"]["moment_count"], 70);

    // Solved: the first-level bound is numerically zero.
    let solved = run(
        &[
            "lasserre", "--in", sys, "--order", "2", "--promote-squared", "0", "--solve",
        ],
        None,
    );
    assert_eq!(exit_code(&solved), 0);
    let s = stdout_json(&solved);
    assert_eq!(s["status"], "optimal");
    assert!(s["bound"].as_f64().unwrap().abs() <= 1e-4);

    // Emitted and re-solved through the sdp subcommand: same bound.
    let dats = dir.path().join("relax.dat-s");
    let emitted = run(
        &[
            "lasserre", "--in", sys, "--order", "2", "--promote-squared", "0", "--emit",
            dats.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(exit_code(&emitted), 0);
    let solved2 = run(&["sdp", "--in", dats.to_str().unwrap()], None);
    assert_eq!(exit_code(&solved2), 0);
    let s2 = stdout_json(&solved2);
    assert_eq!(s2["status"], "optimal");
    let d = (s["bound"].as_f64().unwrap() - s2["primal_value"].as_f64().unwrap()).abs();
    assert!(d <= 1e-9, "same relaxation, same solve: {d}");
}

#[test]
fn sdp_solves_a_handwritten_problem_from_stdin() {
    // minimize tr{X} s.t. X_11 = 1, X >= 0 (2x2): optimum 1 at X = E_11.
    let dats = "1\n1\n2\n1\n0 1 1 1 1\n0 1 2 2 1\n1 1 1 1 1\n";
    let out = run(&["sdp", "--in", "-"], Some(dats));
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["status"], "optimal");
    assert!((v["primal_value"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
}

// ---------------------------------------------------------------------------
// exit codes and the environment contract

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["gen", "--spec", "banana"],
        vec!["gen", "--spec", "2,2@2", "--gauge", "reduced"],
        vec!["gen", "--spec", "2,1@2", "--param", "density"],
        vec!["verify", "--sys", "-", "--cert", "-"],
        vec!["no-such-subcommand"],
    ] {
        let out = run(&args, None);
        assert_eq!(exit_code(&out), 2, "args {args:?}");
    }
    let out = run(&["groebner", "--in", "-"], Some("not json"));
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn groebner_degree_cap_exits_three() {
    let gen = run(&["gen", "--spec", "5,3,3,3@6", "--param", "density"], None);
    assert_eq!(exit_code(&gen), 0);
    let out = run(
        &["groebner", "--in", "-", "--max-degree", "2"],
        Some(&String::from_utf8_lossy(&gen.stdout)),
    );
    assert_eq!(exit_code(&out), 3);
    let v = stdout_json(&out);
    assert!(v["reduced_basis"].is_null());
    assert_eq!(v["resource_cap"]["max_degree"], 2);
}

#[test]
fn thread_cap_environment_variable_is_honored() {
    let gen = run(&["gen", "--spec", "1,1,1,1@2"], None);
    let mut cmd = Command::new(BIN);
    cmd.args(["nulla", "--in", "-", "--dmax", "6"])
        .env("MUBCERT_THREADS", "1")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn().unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(&gen.stdout)
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));

    let mut cmd = Command::new(BIN);
    cmd.args(["gen", "--spec", "1,1,1,1@2"]).env("MUBCERT_THREADS", "zero");
    let out = cmd.output().unwrap();
    assert_eq!(out.status.code(), Some(2), "malformed thread cap is a usage error");
}
