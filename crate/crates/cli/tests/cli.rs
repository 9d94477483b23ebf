use std::path::{Path, PathBuf};
use std::process::Command;

use relcharge::output::g17;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relcharge"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("relcharge-test-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> (i32, String) {
    let o = bin()
        .args([cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(extra)
        .output()
        .unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn float_formatting_matches_printf() {
    // reference strings from C printf("%.17g")
    let cases = [
        (0.1, "0.10000000000000001"),
        (1.0, "1"),
        (20.0, "20"),
        (1e-10, "1e-10"),
        (123456789.123, "123456789.123"),
        (1.5e17, "1.5e+17"),
        (1e16, "10000000000000000"),
        (-2.5e-5, "-2.5000000000000001e-05"),
        (0.0001, "0.0001"),
        (1.0 / 3.0, "0.33333333333333331"),
        (6.42368797043602e-11, "6.4236879704360206e-11"),
        (1e300, "1.0000000000000001e+300"),
        (5e-324, "4.9406564584124654e-324"),
        (0.0, "0"),
    ];
    for (v, s) in cases {
        assert_eq!(g17(v), s);
    }
}

#[test]
fn simulate_plane_wave() {
    let out = scratch("sim");
    let (code, err) = run("simulate", &config("plane_wave.json"), &out, &[]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x_plus,x_minus,x,y,p_minus,p1,p2,Q1,Q2,Q3,Q4,Q5");
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["status"], "ok");
    for q in ["Q1", "Q2", "Q3", "Q4", "Q5"] {
        assert!(summary["drift"][q].as_f64().unwrap() <= 1e-8);
    }
    assert!(summary["steps"].as_u64().unwrap() > 0);
    assert!(summary["wall_time_s"].as_f64().is_some());
}

#[test]
fn config_errors_exit_two() {
    let out = scratch("cfg");
    let text = std::fs::read_to_string(config("plane_wave.json")).unwrap();
    let bad = out.join("bad.json");
    std::fs::write(&bad, text.replace("\"plane_wave\"", "\"plane_wav\"")).unwrap();
    let (code, err) = run("simulate", &bad, &out, &[]);
    assert_eq!(code, 2);
    for name in ["free", "plane_wave", "tm_mode", "undulator", "helical_boost", "vortex"] {
        assert!(err.contains(name), "{err}");
    }
    std::fs::write(&bad, text.replace("\"seed\": 1", "\"seed\": 1, \"extra\": true")).unwrap();
    assert_eq!(run("simulate", &bad, &out, &[]).0, 2);
    std::fs::write(&bad, text.replace("\"schema\": 1", "\"schema\": 2")).unwrap();
    assert_eq!(run("simulate", &bad, &out, &[]).0, 2);
    std::fs::write(&bad, text.replace("\"Q5\"]", "\"Q9\"]")).unwrap();
    assert_eq!(run("simulate", &bad, &out, &[]).0, 2);
    let tm = std::fs::read_to_string(config("tm_mode.json")).unwrap();
    std::fs::write(&bad, tm.replace("[1.0, 10.0]", "[-1.0, 10.0]")).unwrap();
    assert_eq!(run("simulate", &bad, &out, &[]).0, 2);
    let hb = std::fs::read_to_string(config("helical_boost.json")).unwrap();
    std::fs::write(&bad, hb.replace("\"p_minus\": 0.5", "\"p_minus\": -0.5")).unwrap();
    assert_eq!(run("simulate", &bad, &out, &[]).0, 2);
    assert_eq!(run("simulate", &out.join("missing.json"), &out, &[]).0, 2);
}

#[test]
fn integration_failure_exits_three_with_diagnostics() {
    let out = scratch("dom");
    let cfg = out.join("tm_instant.json");
    std::fs::write(
        &cfg,
        r#"{
  "schema": 1,
  "field": { "name": "tm_mode", "f": { "kind": "cosine", "amplitude": 0.3, "omega": 1.0 } },
  "form": "instant",
  "initial": { "x": 0.2, "y": -0.1, "z": 0.0, "p1": 0.1, "p2": 0.05, "p3": 0.0 },
  "time_span": [-1.0, 2.0]
}"#,
    )
    .unwrap();
    let (code, _) = run("simulate", &cfg, &out, &[]);
    assert_eq!(code, 3);
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["status"], "error");
    assert_eq!(summary["error"]["last_state"].as_array().unwrap().len(), 7);
}

#[test]
fn scan_dimensions() {
    let expected = [
        ("free.json", 10),
        ("plane_wave.json", 5),
        ("tm_mode.json", 4),
        ("undulator.json", 4),
        ("helical_boost.json", 2),
        ("vortex.json", 2),
    ];
    for (name, dim) in expected {
        let out = scratch(&format!("scan-{name}"));
        let (code, err) = run("scan", &config(name), &out, &[]);
        assert_eq!(code, 0, "{err}");
        let r = read_json(&out.join("scan.json"));
        assert_eq!(r["dimension"], dim, "{name}");
        assert_eq!(r["singular_values"].as_array().unwrap().len(), 10);
        assert_eq!(r["basis"].as_array().unwrap().len(), dim);
    }
}

#[test]
fn compare_closed_forms() {
    for name in ["plane_wave.json", "tm_mode.json", "vortex.json"] {
        let out = scratch(&format!("cmp-{name}"));
        let (code, err) = run("compare", &config(name), &out, &[]);
        assert_eq!(code, 0, "{err}");
        let r = read_json(&out.join("compare.json"));
        assert_eq!(r["pass"], true);
        assert!(r["max_state_deviation"].as_f64().unwrap() <= 1e-6);
    }
    for name in ["undulator.json", "helical_boost.json"] {
        let out = scratch(&format!("cmp-{name}"));
        assert_eq!(run("compare", &config(name), &out, &[]).0, 4);
    }
}

#[test]
fn sweep_is_deterministic() {
    let (a, b, c) = (scratch("sw1"), scratch("sw2"), scratch("sw3"));
    assert_eq!(run("sweep", &config("plane_wave_sweep.json"), &a, &["--threads", "1"]).0, 0);
    assert_eq!(run("sweep", &config("plane_wave_sweep.json"), &b, &["--threads", "1"]).0, 0);
    assert_eq!(run("sweep", &config("plane_wave_sweep.json"), &c, &["--threads", "3"]).0, 0);
    let ra = std::fs::read(a.join("sweep.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("sweep.json")).unwrap());
    assert_eq!(ra, std::fs::read(c.join("sweep.json")).unwrap());
    let r = read_json(&a.join("sweep.json"));
    assert_eq!(r["points"], 100);
    assert_eq!(r["records"].as_array().unwrap().len(), 100);
    assert_eq!(r["failures"], 0);
    let text = String::from_utf8(ra).unwrap();
    // keys are written sorted
    let command = text.find("\"command\"").unwrap();
    let drift = text.find("\"drift\"").unwrap();
    let schema = text.rfind("\"schema\"").unwrap();
    assert!(command < drift && drift < schema);
}

#[test]
fn sweep_rejects_unknown_parameter() {
    let out = scratch("swbad");
    let text = std::fs::read_to_string(config("plane_wave_sweep.json")).unwrap();
    let bad = out.join("bad.json");
    std::fs::write(&bad, text.replace("field.f1.amplitude", "field.f1.amplitud")).unwrap();
    assert_eq!(run("sweep", &bad, &out, &[]).0, 2);
}

#[test]
fn seed_override_changes_sampled_launch() {
    let out = scratch("seed");
    let text = std::fs::read_to_string(config("free.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let mut v = v.as_object().unwrap().clone();
    v.remove("initial");
    let cfg = out.join("sampled.json");
    std::fs::write(&cfg, serde_json::to_string(&v).unwrap()).unwrap();
    let initial = |seed: &str| {
        assert_eq!(run("simulate", &cfg, &out, &["--seed", seed]).0, 0);
        read_json(&out.join("summary.json"))["initial_state"].clone()
    };
    let (a, b) = (initial("1"), initial("2"));
    assert_ne!(a, b);
    assert_eq!(a, initial("1"));
}
