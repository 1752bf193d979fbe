use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn currentkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_currentkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_json(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn unit_square() -> Value {
    json!({
        "complex": {
            "vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            "triangles": [[0, 1, 2], [0, 2, 3]]
        },
        "k": 2,
        "coeffs": [1.0, 1.0]
    })
}

#[test]
fn mass_of_two_plane_sum() {
    let dir = tempfile::tempdir().unwrap();
    let xi = json!({"d": 4, "k": 2, "coeffs": {"1,2": 1.0, "3,4": 1.0}});
    let input = write_json(dir.path(), "xi.json", &xi);
    let v = stdout_json(&currentkit(&["algebra", &input, "--op", "mass"]));
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    assert!((v["euclidean"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-10);
    let c = stdout_json(&currentkit(&["algebra", &input, "--op", "comass"]));
    assert!((c["value"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn wedge_of_basis_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let pair = json!([
        {"d": 3, "k": 1, "coeffs": {"1": 1.0}},
        {"d": 3, "k": 1, "coeffs": {"2": 1.0}}
    ]);
    let input = write_json(dir.path(), "pair.json", &pair);
    let v = stdout_json(&currentkit(&["algebra", &input, "--op", "wedge"]));
    assert_eq!(v, json!({"d": 3, "k": 2, "coeffs": {"1,2": 1.0}}));
    let ip = stdout_json(&currentkit(&["algebra", &input, "--op", "inner"]));
    assert_eq!(ip["value"].as_f64(), Some(0.0));
}

#[test]
fn comass_estimate_matches_exact() {
    let dir = tempfile::tempdir().unwrap();
    let w = json!({"d": 4, "k": 2, "coeffs": {"1,2": 0.7, "1,3": -0.2, "2,4": 0.4, "3,4": 1.1}});
    let input = write_json(dir.path(), "w.json", &w);
    let exact = stdout_json(&currentkit(&["algebra", &input, "--op", "comass"]));
    let est = stdout_json(&currentkit(&[
        "algebra", &input, "--op", "comass", "--estimate", "--restarts", "64",
    ]));
    let (e, s) = (exact["value"].as_f64().unwrap(), est["value"].as_f64().unwrap());
    assert!((e - s).abs() < 1e-6, "{e} vs {s}");
}

#[test]
fn unsupported_exact_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let xi = json!({"d": 6, "k": 3, "coeffs": {"1,2,3": 1.0, "4,5,6": 1.0}});
    let input = write_json(dir.path(), "xi.json", &xi);
    assert_eq!(currentkit(&["algebra", &input, "--op", "mass"]).status.code(), Some(3));
    let bounds = stdout_json(&currentkit(&["algebra", &input, "--op", "mass", "--estimate"]));
    assert!(bounds["lower"].as_f64().unwrap() <= bounds["upper"].as_f64().unwrap() + 1e-12);
}

#[test]
fn parse_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let bad = bad.to_str().unwrap();
    assert_eq!(currentkit(&["algebra", bad, "--op", "mass"]).status.code(), Some(2));
    assert_eq!(currentkit(&["flatnorm", bad]).status.code(), Some(2));
    assert_eq!(currentkit(&["flatnorm", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(currentkit(&["algebra", "--op", "nope", bad]).status.code(), Some(2));
}

#[test]
fn help_documents_exit_codes() {
    let out = currentkit(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in ["2  parse", "3  capability", "4  solver", "5  training divergence"] {
        assert!(text.contains(line), "missing {line:?} in help");
    }
}

#[test]
fn two_dirac_flat_norm() {
    let dir = tempfile::tempdir().unwrap();
    let pair = json!({
        "s": {"d": 1, "k": 0, "atoms": [{"x": [0.5], "w": 1.0}]},
        "t": {"d": 1, "k": 0, "atoms": [{"x": [0.0], "w": 1.0}]}
    });
    let input = write_json(dir.path(), "pair.json", &pair);
    let v = stdout_json(&currentkit(&["flatnorm", &input, "--lambda", "1"]));
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    let parsed: currentkit::flatnorm::FlatNormResult = serde_json::from_value(v.clone()).unwrap();
    assert_eq!(serde_json::to_value(&parsed).unwrap(), v);
}

#[test]
fn zero_current_has_zero_flat_norm() {
    let dir = tempfile::tempdir().unwrap();
    let t = json!({"d": 2, "k": 0, "atoms": []});
    let input = write_json(dir.path(), "zero.json", &t);
    let v = stdout_json(&currentkit(&["flatnorm", &input]));
    assert_eq!(v["value"].as_f64(), Some(0.0));
}

#[test]
fn scale_sweep_traces_truncated_cone() {
    let dir = tempfile::tempdir().unwrap();
    let pair = json!({
        "s": {"d": 1, "k": 0, "atoms": [{"x": [1.0], "w": 1.0}]},
        "t": {"d": 1, "k": 0, "atoms": [{"x": [0.0], "w": 1.0}]}
    });
    let input = write_json(dir.path(), "pair.json", &pair);
    for lambda in [0.1, 0.25, 0.5, 0.75, 1.0, 2.0] {
        let v = stdout_json(&currentkit(&["flatnorm", &input, "--lambda", &lambda.to_string()]));
        let expected = f64::min(1.0, 2.0 * lambda);
        assert!((v["value"].as_f64().unwrap() - expected).abs() < 1e-9);
    }
}

#[test]
fn exact_mode_on_grade_one_is_a_capability_error() {
    let dir = tempfile::tempdir().unwrap();
    let t = json!({"d": 2, "k": 1, "atoms": [{"x": [0.0, 0.0], "w": 1.0, "frame": [[1.0, 0.0]]}]});
    let input = write_json(dir.path(), "t.json", &t);
    assert_eq!(currentkit(&["flatnorm", &input]).status.code(), Some(3));
}

#[test]
fn dual_mode_bounds_exact_value() {
    let dir = tempfile::tempdir().unwrap();
    let pair = json!({
        "s": {"d": 2, "k": 0, "atoms": [{"x": [0.5, 0.0], "w": 1.0}]},
        "t": {"d": 2, "k": 0, "atoms": [{"x": [0.0, 0.0], "w": 1.0}]}
    });
    let input = write_json(dir.path(), "pair.json", &pair);
    let args = ["flatnorm", &input, "--mode", "dual", "--steps", "400", "--seed", "3"];
    let a = stdout_json(&currentkit(&args));
    let b = stdout_json(&currentkit(&args));
    assert_eq!(a, b);
    let v = a["value"].as_f64().unwrap();
    assert!(v <= 0.5 + 1e-9 && v > 0.3, "{v}");
}

fn assert_svg(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed XML");
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.attribute("viewBox"), Some("0 0 800 800"));
    assert!(text.contains("data-to-view transform"));
    text
}

#[test]
fn point_witness_svg() {
    let dir = tempfile::tempdir().unwrap();
    let t = json!({"d": 2, "k": 0, "atoms": [
        {"x": [0.0, 0.0], "w": 1.0},
        {"x": [0.3, 0.1], "w": -1.0},
        {"x": [4.0, 4.0], "w": 0.5}
    ]});
    let input = write_json(dir.path(), "t.json", &t);
    let svg = dir.path().join("w.svg");
    let out = currentkit(&["flatnorm", &input, "--lambda", "1", "--emit-svg", svg.to_str().unwrap()]);
    stdout_json(&out);
    let text = assert_svg(&svg);
    assert!(text.contains(r#"class="b""#));
    assert!(text.contains(r#"class="a-pos""#));
}

#[test]
fn simplicial_witness_svg() {
    let dir = tempfile::tempdir().unwrap();
    let boundary = json!({
        "complex": {
            "vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            "triangles": [[0, 1, 2], [0, 2, 3]]
        },
        "k": 1,
        "coeffs": [1.0, 1.0, 0.0, 1.0, -1.0]
    });
    let input = write_json(dir.path(), "loop.json", &boundary);
    let svg = dir.path().join("s.svg");
    let v = stdout_json(&currentkit(&[
        "flatnorm", &input, "--mode", "simplicial", "--lambda", "2", "--emit-svg", svg.to_str().unwrap(),
    ]));
    assert!(v["value"].as_f64().unwrap() > 0.0);
    let text = assert_svg(&svg);
    assert!(text.contains(r#"class="b-fill""#));
}

#[test]
fn stokes_on_unit_square() {
    let dir = tempfile::tempdir().unwrap();
    let form = json!({"d": 2, "k": 1, "terms": [
        {"index": "2", "monomials": [{"exps": [1, 0], "coef": 1.0}]}
    ]});
    let f = write_json(dir.path(), "form.json", &form);
    let c = write_json(dir.path(), "chain.json", &unit_square());
    let v = stdout_json(&currentkit(&["stokes-check", &f, &c]));
    assert!((v["lhs"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["rhs"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["diff"].as_f64().unwrap() < 1e-6);
}

#[test]
fn stokes_on_zero_form() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_json(dir.path(), "form.json", &json!({"d": 2, "k": 1, "terms": []}));
    let c = write_json(dir.path(), "chain.json", &unit_square());
    let v = stdout_json(&currentkit(&["stokes-check", &f, &c]));
    assert_eq!((v["lhs"].as_f64(), v["rhs"].as_f64()), (Some(0.0), Some(0.0)));
}

#[test]
fn stokes_on_random_cubic_forms() {
    use rand::SeedableRng;
    let dir = tempfile::tempdir().unwrap();
    let c = write_json(dir.path(), "chain.json", &unit_square());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let form = currentkit::forms::PolynomialForm::random(2, 1, 3, &mut rng).unwrap();
        let path = dir.path().join(format!("form{trial}.json"));
        std::fs::write(&path, form.to_json().unwrap()).unwrap();
        let v = stdout_json(&currentkit(&["stokes-check", path.to_str().unwrap(), &c]));
        worst = worst.max(v["diff"].as_f64().unwrap());
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn one_epoch_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut metrics = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = currentkit(&[
            "train2d", "--epochs", "1", "--seed", "0", "--out", out.to_str().unwrap(),
        ]);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        let line = String::from_utf8(status.stdout).unwrap();
        assert!(line.starts_with("k=1 seed=0 epochs=1 "), "{line}");
        metrics.push(std::fs::read(out.join("metrics.csv")).unwrap());
    }
    assert_eq!(metrics[0], metrics[1]);
}

#[test]
fn training_svg_and_config_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(dir.path(), "cfg.json", &json!({"epochs": 3, "snapshots": [2], "eval_samples": 50}));
    let out = dir.path().join("run");
    let status = currentkit(&[
        "train2d", "--config", &cfg, "--k", "0", "--rho", "5", "--out", out.to_str().unwrap(), "--emit-svg",
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(saved["k"], 0);
    assert_eq!(saved["rho"], 5.0);
    assert_eq!(saved["lambda"], 1.0);
    for e in [2, 3] {
        let text = assert_svg(&out.join(format!("svg/epoch_{e}.svg")));
        assert!(text.contains(r#"class="walk""#) && text.contains(r#"class="data""#));
    }
}

#[test]
fn divergence_exits_with_five() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(dir.path(), "cfg.json", &json!({"epochs": 5, "lr": 1e300}));
    let out = dir.path().join("run");
    let status = currentkit(&["train2d", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(5), "{}", String::from_utf8_lossy(&status.stderr));
}
