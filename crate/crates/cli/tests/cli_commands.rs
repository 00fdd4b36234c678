use std::path::PathBuf;
use std::process::Command;

use serde_json::{json, Value};

fn dir() -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli_commands");
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn write(name: &str, v: &Value) -> String {
    let p = dir().join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.display().to_string()
}

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Out {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn geq_env(args: &[&str], env: &[(&str, &str)]) -> Out {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_geq"));
    cmd.args(args).env_remove("GEQ_TOL_SCALE");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let o = cmd.output().unwrap();
    Out {
        code: o.status.code().unwrap(),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn geq(args: &[&str]) -> Out {
    geq_env(args, &[])
}

fn scene(dim: usize, lo: f64, hi: f64, g: Value, gbar: Value) -> Value {
    json!({
        "dim": dim,
        "box": vec![[lo, hi]; dim],
        "base_point": vec![0.5 * (lo + hi); dim],
        "g": g,
        "gbar": gbar,
    })
}

fn close(v: &Value, want: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - want).abs() <= tol
}

fn lc3() -> String {
    let spec = write(
        "lc3-spec.json",
        &json!({
            "dim": 3,
            "box": [[0.2, 1.2], [0.2, 1.2], [0.2, 1.2]],
            "base_point": [0.6, 0.6, 0.6],
            "simple": ["1 + 0.2*x0", "3 + 0.3*sin(x1)", "5 + 0.1*x2^2"],
        }),
    );
    let out = geq(&["generate", &spec]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let p = dir().join("lc3-scene.json");
    std::fs::write(&p, out.stdout).unwrap();
    p.display().to_string()
}

#[test]
fn check_levi_civita_scene_passes() {
    let s = lc3();
    let out = geq(&["check", &s]);
    assert_eq!(out.code, 0);
    let r = out.json();
    assert_eq!(r["pass"], true);
    assert!(r["checks"]["residual"]["max"].as_f64().unwrap() <= 1e-9);
    assert_eq!(r["checks"]["residual"]["count"], 100);
    assert_eq!(r["seed"], 42);
}

#[test]
fn check_of_proportional_metrics_reports_scaled_identity() {
    let g = json!([
        ["1 + x0^2", "0.1", "0"],
        [null, "2", "0"],
        [null, null, "1 + x2^2"]
    ]);
    let gbar = json!([["2*(1 + x0^2)", "0.2", "0"], ["4", "0"], ["2*(1 + x2^2)"]]);
    let s = write("proportional.json", &scene(3, 0.0, 1.0, g, gbar));
    let r = geq(&["check", &s, "--points", "20"]).json();
    assert_eq!(r["pass"], true);
    let c = 2f64.powf(-0.25);
    for i in 0..3 {
        for j in 0..3 {
            assert!(close(
                &r["info"]["l_base"][i][j],
                if i == j { c } else { 0.0 },
                1e-14
            ));
        }
    }
}

#[test]
fn check_of_unrelated_pair_fails_with_code_2() {
    let s = write(
        "unrelated.json",
        &scene(
            2,
            0.0,
            1.0,
            json!([["1", "0"], ["1"]]),
            json!([["1 + x0^2", "0.5*x1"], ["2 + sin(3*x0)"]]),
        ),
    );
    let out = geq(&["check", &s]);
    assert_eq!(out.code, 2);
    let r = out.json();
    assert_eq!(r["pass"], false);
    assert!(r["checks"]["residual"]["max"].as_f64().unwrap() > 1e-3);
}

#[test]
fn tolerance_scale_is_honoured() {
    let s = lc3();
    let strict = geq_env(&["check", &s], &[("GEQ_TOL_SCALE", "1e-9")]);
    assert_eq!(strict.code, 2);
    assert!(close(
        &strict.json()["checks"]["residual"]["limit"],
        1e-18,
        1e-30
    ));
    assert_eq!(
        geq_env(&["check", &s], &[("GEQ_TOL_SCALE", "oops")]).code,
        3
    );
}

#[test]
fn invalid_scenes_name_the_offending_entry() {
    let s = write(
        "bad-expr.json",
        &scene(
            2,
            0.0,
            1.0,
            json!([["1", "0"], ["1 +"]]),
            json!([["1", "0"], ["1"]]),
        ),
    );
    let out = geq(&["check", &s]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("g[1][0]"), "{}", out.stderr);
    let s = write(
        "bad-var.json",
        &scene(
            2,
            0.0,
            1.0,
            json!([["1", "0"], ["1"]]),
            json!([["1", "x2"], ["1"]]),
        ),
    );
    let out = geq(&["check", &s]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("gbar[0][1]"), "{}", out.stderr);
    let s = write(
        "degenerate.json",
        &scene(
            2,
            0.0,
            1.0,
            json!([["1", "1"], ["1"]]),
            json!([["1", "0"], ["1"]]),
        ),
    );
    assert_eq!(geq(&["check", &s]).code, 3);
    assert_eq!(geq(&["check", "/nonexistent/scene.json"]).code, 3);
}

#[test]
fn split_of_diagonal_example() {
    let s = write(
        "diag.json",
        &scene(
            2,
            -1.0,
            1.0,
            json!([["1", "0"], ["1"]]),
            json!([["1/20", "0"], ["1/50"]]),
        ),
    );
    let out = geq(&["split", &s, "--groups", "0|1", "--points", "20"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let r = out.json();
    assert!(close(&r["info"]["h_base"][0][0], -1.0 / 3.0, 1e-12));
    assert!(close(&r["info"]["h_base"][1][1], 1.0 / 3.0, 1e-12));
    assert!(close(&r["info"]["hbar_base"][0][0], 1.0 / 12.0, 1e-12));
    assert!(close(&r["info"]["hbar_base"][1][1], -1.0 / 75.0, 1e-12));
    assert_eq!(r["flags"]["shift_applied"], json!(0.0));
}

#[test]
fn split_shifts_a_vanishing_eigenvalue() {
    // g = I, L = diag(1e-11, 1)
    let s = write(
        "near-singular.json",
        &scene(
            2,
            0.0,
            1.0,
            json!([["1", "0"], ["1"]]),
            json!([["1e22", "0"], ["1e11"]]),
        ),
    );
    let out = geq(&["split", &s, "--groups", "0|1", "--points", "10"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let r = out.json();
    assert!(close(&r["flags"]["shift_applied"], 2.0, 1e-9));
    assert!(close(&r["info"]["h_base"][0][0], -1.0, 1e-9));
}

#[test]
fn split_exports_a_grid_and_rejects_bad_groupings() {
    let s = lc3();
    let grid = dir().join("split-grid.json");
    let out = geq(&[
        "split",
        &s,
        "--groups",
        "0|1,2",
        "--export",
        grid.to_str().unwrap(),
        "--grid",
        "3",
    ]);
    assert_eq!(out.code, 0);
    let r = out.json();
    assert!(r["checks"]["nabla_h_p1"]["max"].as_f64().unwrap() <= 1e-4);
    let g: Value = serde_json::from_str(&std::fs::read_to_string(&grid).unwrap()).unwrap();
    assert_eq!(g["nodes"].as_array().unwrap().len(), 27);
    assert_eq!(g["nodes"][0]["p1"].as_array().unwrap().len(), 9);
    assert_eq!(geq(&["split", &s, "--groups", "0|1"]).code, 3);
    assert_eq!(geq(&["split", &s, "--groups", "0,0|1,2"]).code, 3);

    // L = diag(2) (+) rotation block, so indices 0, 1 are the conjugate pair 1 -+ i
    let g = json!([["1", "0", "0"], ["0", "1"], ["0"]]);
    let gbar = constant_gbar();
    let c = write("complex.json", &scene(3, -1.0, 1.0, g, gbar));
    let out = geq(&["split", &c, "--groups", "0|1,2", "--points", "10"]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("conjugat"), "{}", out.stderr);
    assert_eq!(
        geq(&["split", &c, "--groups", "0,1|2", "--points", "10"]).code,
        0
    );
}

/// `gbar` for `g = diag(1) (+) [[0, 1], [1, 0]]` and `L = diag(2) (+) [[1, -1], [1, 1]]`.
fn constant_gbar() -> Value {
    // gbar = (1/det L) g L^-1 with det L = 4 and L^-1 = diag(1/2) (+) [[1, 1], [-1, 1]]/2
    json!([["1/8", "0", "0"], ["-1/8", "1/8"], ["1/8"]])
}

#[test]
fn glue_of_one_dimensional_blocks() {
    let a = write(
        "a1.json",
        &json!({"dim": 1, "box": [[-1, 1]], "base_point": [0], "g": [["1"]], "gbar": [["1"]]}),
    );
    let b = write(
        "b1.json",
        &json!({"dim": 1, "box": [[-1, 1]], "base_point": [0], "g": [["1"]], "gbar": [["1/16"]]}),
    );
    let out = geq(&["glue", &a, &b, "--points", "20", "--trajectories", "5"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let r = out.json();
    assert!(close(&r["info"]["g_base"][0][0], -3.0, 1e-12));
    assert!(close(&r["info"]["g_base"][1][1], 3.0, 1e-12));
    assert!(close(&r["info"]["gbar_base"][0][0], 0.75, 1e-12));
    assert!(close(&r["info"]["gbar_base"][1][1], -3.0 / 16.0, 1e-12));
    let out = geq(&["glue", &a, &a]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("spectra"), "{}", out.stderr);
}

#[test]
fn ts_identity_matches_check_and_domain_is_enforced() {
    let s = lc3();
    let mut ts = geq(&["ts", &s, "--f", "id"]).json();
    let check = geq(&["check", &s]).json();
    ts["command"] = json!("check");
    ts["info"].as_object_mut().unwrap().remove("f");
    assert_eq!(ts, check);
    let out = geq(&["ts", &s, "--f", "poly:0,1", "--points", "30"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert_eq!(geq(&["ts", &s, "--f", "recip:1.12"]).code, 3);
    assert_eq!(geq(&["ts", &s, "--f", "sqrt"]).code, 3);
}

#[test]
fn generate_rejects_invalid_specs() {
    let spec = write(
        "collide.json",
        &json!({"dim": 2, "box": [[0, 1], [0, 1]], "base_point": [0.5, 0.5], "simple": ["1 + x0", "1.5"]}),
    );
    assert_eq!(geq(&["generate", &spec]).code, 3);
    let spec = write(
        "multiple.json",
        &json!({
            "dim": 3, "box": [[0, 1], [0, 1], [0, 1]], "base_point": [0.5, 0.5, 0.5],
            "simple": ["1 + 0.2*x0"],
            "multiple": [{"lambda": 4, "metric": [["1 + x1^2", "0.1*x2"], ["2 + sin(x1)"]]}],
        }),
    );
    let out = geq(&["generate", &spec]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let s = dir().join("multiple-scene.json");
    std::fs::write(&s, out.stdout).unwrap();
    assert_eq!(geq(&["check", s.to_str().unwrap()]).code, 0);
}

#[test]
fn oracle_command() {
    let s = lc3();
    let out = geq(&["oracle", &s, "--trajectories", "6", "--seed", "9"]);
    assert_eq!(out.code, 0);
    let r = out.json();
    assert_eq!(r["checks"]["oracle_defect"]["count"], 6);
    assert_eq!(r["seed"], 9);
}
