use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isturm"))
}

fn run(dir: &Path, args: &[&str]) -> i32 {
    let out = bin().current_dir(dir).args(args).output().unwrap();
    out.status.code().unwrap()
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

/// Flat `(λ, α)` list from a spectral data document.
fn flat(doc: &Value) -> Vec<((f64, f64), (f64, f64))> {
    let mut out = Vec::new();
    for e in doc["eigs"].as_array().unwrap() {
        for a in e["alpha"].as_array().unwrap() {
            out.push((complex(&e["lambda"]), complex(a)));
        }
    }
    out
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn forward_model_problem() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.json", r#"{"sigma":{"kind":"zero"},"r1":[[0,0],[1,0]],"r2":[]}"#);
    assert_eq!(run(dir.path(), &["forward", "p.json", "--K", "5", "--out", "sd.json"]), 0);
    let doc = read(&dir.path().join("sd.json"));
    let f = flat(&doc);
    let lam = [0.0, 0.0, 1.0, 4.0, 9.0];
    let alpha = [1.0 / PI, 0.0, 2.0 / PI, 2.0 / PI, 2.0 / PI];
    assert_eq!(f.len(), 5);
    for (i, (l, a)) in f.iter().enumerate() {
        assert!((l.0 - lam[i]).abs() < 1e-10 && l.1.abs() < 1e-10, "λ{} = {l:?}", i + 1);
        assert!((a.0 - alpha[i]).abs() < 1e-10 && a.1.abs() < 1e-10, "α{} = {a:?}", i + 1);
    }
    assert!(dir.path().join("sd.diag.json").exists());
}

#[test]
fn forward_dirichlet_type_condition() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.json", r#"{"sigma":{"kind":"zero"},"r1":[[1,0]],"r2":[]}"#);
    assert_eq!(run(dir.path(), &["forward", "p.json", "--K", "3"]), 0);
    let f = flat(&read(&dir.path().join("spectral_data.json")));
    for (l, want) in f.iter().zip([0.0, 1.0, 4.0]) {
        assert!((l.0 .0 - want).abs() < 1e-10);
    }
}

/// Roots of `ρ tan ρπ = 1` on `(n, n + ½)` by bisection.
fn robin_rho(n: usize) -> f64 {
    let f = |r: f64| r * (r * PI).sin() - (r * PI).cos();
    let (mut a, mut b) = (n as f64, n as f64 + 0.5 - 1e-15);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(a) * f(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn forward_robin_matches_bisection() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.json", r#"{"sigma":{"kind":"zero"},"r1":[[1,0]],"r2":[[1,0]]}"#);
    assert_eq!(run(dir.path(), &["forward", "p.json", "--K", "12"]), 0);
    let f = flat(&read(&dir.path().join("spectral_data.json")));
    for (n, (l, _)) in f.iter().enumerate() {
        let want = robin_rho(n).powi(2);
        assert!((l.0 - want).abs() < 1e-9 * (1.0 + want), "n = {n}: {} vs {want}", l.0);
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "p.json",
        r#"{"sigma":{"kind":"step","height":[1,0],"jump_point":1.5707963267948966},"r1":[[1,0]],"r2":[[1,0]]}"#,
    );
    assert_eq!(run(dir.path(), &["forward", "p.json", "--K", "20", "--out", "a.json"]), 0);
    assert_eq!(run(dir.path(), &["forward", "p.json", "--K", "20", "--out", "b.json", "--threads", "1"]), 0);
    let a = fs::read(dir.path().join("a.json")).unwrap();
    let b = fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invert_model_data() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["model", "--M1", "1", "--K", "30", "--out", "m.json"]), 0);
    assert_eq!(run(dir.path(), &["invert", "m.json", "--nx", "129", "--out", "rec.json"]), 0);
    let rec = read(&dir.path().join("rec.json"));
    let sigma_max = rec["sigma"]["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| complex(v).0.hypot(complex(v).1))
        .fold(0.0, f64::max);
    assert!(sigma_max < 1e-8);
    let r1: Vec<_> = rec["r1"].as_array().unwrap().iter().map(complex).collect();
    assert_eq!(r1.len(), 2);
    assert!(r1[0].0.abs() < 1e-8 && (r1[1].0 - 1.0).abs() < 1e-12);
    let r2_max = rec["r2"].as_array().unwrap().iter().map(|v| complex(v).0.abs()).fold(0.0, f64::max);
    assert!(r2_max < 1e-8);
    let diag = read(&dir.path().join("rec.diag.json"));
    assert_eq!(diag["status"], "ok");
    assert_eq!(diag["reconstruction"]["M1"], 1);
}

#[test]
fn roundtrip_polynomial_condition() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.json", r#"{"sigma":{"kind":"zero"},"r1":[[1,0],[1,0]],"r2":[[1,0]]}"#);
    assert_eq!(run(dir.path(), &["roundtrip", "p.json", "--K", "40"]), 0);
    let rep = read(&dir.path().join("roundtrip.json"));
    assert_eq!(rep["within_tolerances"], true);
    assert!(rep["sigma_l2_error"].as_f64().unwrap() < 1e-3);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.json", r#"{"sigma":{"kind":"zero"},"r1":[[1,0]],"r2":[]}"#);
    write(dir.path(), "run.toml", "K = 4\nnx = 65\nout = \"cfg.json\"\n");
    assert_eq!(run(dir.path(), &["forward", "p.json", "--config", "run.toml"]), 0);
    assert_eq!(flat(&read(&dir.path().join("cfg.json"))).len(), 4);
    // flags win over the file
    assert_eq!(run(dir.path(), &["forward", "p.json", "--config", "run.toml", "--K", "6"]), 0);
    assert_eq!(flat(&read(&dir.path().join("cfg.json"))).len(), 6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["invert", "missing.json"]), 3);
    let diag = read(&dir.path().join("reconstruction.diag.json"));
    assert_eq!(diag["status"], "error");
    assert_eq!(diag["exit_code"], 3);

    assert_eq!(run(dir.path(), &["model", "--N", "three"]), 1);
    assert_eq!(run(dir.path(), &["model", "--nx", "8"]), 1);
    assert_eq!(run(dir.path(), &["model", "--K", "5", "--N", "4"]), 1);

    // ρₙ = n − 1.25: offset a quarter away from both classes
    let eigs: Vec<String> = (1..=30)
        .map(|n| {
            let r = n as f64 - 1.25;
            format!(r#"{{"lambda":[{},0],"multiplicity":1,"alpha":[[0.6366197723675814,0]]}}"#, r * r)
        })
        .collect();
    write(dir.path(), "amb.json", &format!(r#"{{"M1":0,"case":"M1=M2","eigs":[{}]}}"#, eigs.join(",")));
    assert_eq!(run(dir.path(), &["invert", "amb.json", "--out", "amb_rec.json"]), 4);
    assert_eq!(read(&dir.path().join("amb_rec.diag.json"))["exit_code"], 4);
}

#[test]
fn regular_inversion_recovers_constant_potential() {
    let dir = tempfile::tempdir().unwrap();
    let r2 = 1.0 + PI;
    write(
        dir.path(),
        "q1.json",
        &format!(
            r#"{{"sigma":{{"kind":"polynomial","coeffs":[[0,0],[1,0]]}},"r1":[[1,0]],"r2":[[{r2},0]],"p1":[[1,0]],"p2":[[1,0]]}}"#
        ),
    );
    assert_eq!(run(dir.path(), &["invert", "q1.json", "--regular", "--K", "40", "--out", "rec.json"]), 0);
    let rec = read(&dir.path().join("rec.json"));
    let q: Vec<f64> = rec["regular"]["q"]["values"].as_array().unwrap().iter().map(|v| complex(v).0).collect();
    let n = q.len();
    let err = q[n / 20..n * 3 / 4].iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    assert!(err < 0.1, "q error {err}");
    let b = complex(&rec["regular"]["summary"]["b_n2"]);
    assert!((b.0 - 1.0).abs() < 2e-2, "b = {b:?}");
}
