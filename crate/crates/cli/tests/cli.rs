//! End-to-end checks of the command-line surface: exit codes, file formats,
//! and the documented output invariants.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const PI: f64 = std::f64::consts::PI;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fracspec")
}

fn write_config(dir: &Path, name: &str, potential: Option<&str>, extra: &str) -> String {
    let a2 = PI / 2f64.sqrt();
    let pot = match potential {
        Some(p) => format!("\"potential\": \"{}\",", dir.join(p).display()),
        None => String::new(),
    };
    let text = format!(
        r#"{{
  "sides": [{PI}, {a2}],
  "ell": 0.75,
  "r": 10.0,
  "p": 2,
  "kmax": 1,
  {pot}
  "cutoff": 15.0,
  "seed": 42,
  "samples": 2000,
  "out_dir": "{}"{extra}
}}
"#,
        dir.join("out").display()
    );
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

#[test]
fn spectrum_free_operator_matches_fractional_norms() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "run.json", None, "");
    let out = run(&["--config", &cfg, "spectrum"]);
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/spectrum.json")).unwrap(),
    )
    .unwrap();
    let eigenvalues: Vec<f64> = json["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(!eigenvalues.is_empty());
    // every eigenvalue is (n1^2 + 2 n2^2)^0.75 for some mode
    for xi in &eigenvalues {
        let mut hit = false;
        for n1 in 0..20i64 {
            for n2 in 0..15i64 {
                let mu = (n1 * n1) as f64 + 2.0 * (n2 * n2) as f64;
                if (mu.powf(0.75) - xi).abs() < 1e-9 {
                    hit = true;
                }
            }
        }
        assert!(hit, "eigenvalue {xi} matches no free mode");
    }
    // free operator: matched h is a unit coefficient
    let matches = json["matches"].as_array().unwrap();
    assert!(!matches.is_empty());
    for m in matches {
        assert!((m["h"].as_f64().unwrap().abs() - 1.0).abs() < 1e-10);
    }
    assert_eq!(json["meta"]["override_active"], serde_json::json!(false));
    assert!(dir.path().join("out/spectrum.csv").exists());
}

#[test]
fn series_scales_quadratically_and_rejects_resonant_modes() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("q1.pot"), "m=2\n1 0 0.05\n0 1 0.05\n").unwrap();
    std::fs::write(dir.path().join("q2.pot"), "m=2\n1 0 0.1\n0 1 0.1\n").unwrap();

    let cfg1 = write_config(dir.path(), "run1.json", Some("q1.pot"), "");
    let out1 = run(&["--config", &cfg1, "series", "--beta", "2,1"]);
    assert_eq!(
        exit_code(&out1),
        0,
        "{}",
        String::from_utf8_lossy(&out1.stderr)
    );
    let j1: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/series.json")).unwrap())
            .unwrap();

    let cfg2 = write_config(dir.path(), "run2.json", Some("q2.pot"), "");
    let out2 = run(&["--config", &cfg2, "series", "--beta", "2,1"]);
    assert_eq!(exit_code(&out2), 0);
    let j2: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/series.json")).unwrap())
            .unwrap();

    let f1 = j1["F"][1].as_f64().unwrap();
    let f2 = j2["F"][1].as_f64().unwrap();
    assert!(f1 != 0.0);
    assert_eq!(f2, 4.0 * f1, "doubled amplitude quadruples F_1 exactly");

    // zero potential: the predictor stays at the free eigenvalue
    let cfg0 = write_config(dir.path(), "run0.json", None, "");
    let out0 = run(&["--config", &cfg0, "series", "--beta", "2,1"]);
    assert_eq!(exit_code(&out0), 0);
    let j0: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/series.json")).unwrap())
            .unwrap();
    assert_eq!(j0["F"][0].as_f64().unwrap(), 0.0);
    assert_eq!(j0["F"][1].as_f64().unwrap(), 0.0);
    assert!((j0["predicted"].as_f64().unwrap() - 6f64.powf(0.75)).abs() < 1e-12);

    // a mode sitting in a resonance band is rejected with exit 4
    let out4 = run(&["--config", &cfg1, "series", "--beta", "1,1"]);
    assert_eq!(exit_code(&out4), 4);
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out4.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "ResonanceMode");
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();

    // missing potential file
    let cfg = write_config(dir.path(), "gone.json", Some("nope.pot"), "");
    let out = run(&["--config", &cfg, "spectrum"]);
    assert_eq!(exit_code(&out), 2);
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "ConfigError");

    // unknown key is a hard error
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        format!(
            r#"{{"sides":[{PI},{PI}],"ell":0.75,"r":10.0,"p":2,"kmax":1,"cutoff":5.0,
              "seed":1,"samples":2000,"out_dir":"{}","exponent":0.3}}"#,
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    let out2 = run(&["--config", bad.to_str().unwrap(), "spectrum"]);
    assert_eq!(exit_code(&out2), 2);

    // order outside the admitted interval
    let worse = dir.path().join("worse.json");
    std::fs::write(
        &worse,
        format!(
            r#"{{"sides":[{PI},{PI}],"ell":0.4,"r":10.0,"p":2,"kmax":1,"cutoff":5.0,
              "seed":1,"samples":2000,"out_dir":"{}"}}"#,
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    let out3 = run(&["--config", worse.to_str().unwrap(), "spectrum"]);
    assert_eq!(exit_code(&out3), 2);

    // missing config file entirely
    let out4 = run(&[
        "--config",
        dir.path().join("absent.json").to_str().unwrap(),
        "spectrum",
    ]);
    assert_eq!(exit_code(&out4), 2);
}

#[test]
fn oversized_basis_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "big.json",
        None,
        ",\n  \"tolerance_scale\": 1.0",
    );
    // rewrite with a cutoff that overflows the mode cap
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("15.0", "500.0");
    std::fs::write(&cfg, text).unwrap();
    let out = run(&["--config", &cfg, "spectrum"]);
    assert_eq!(exit_code(&out), 3);
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "BasisTooLarge");
}

#[test]
fn classify_emits_figure_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "fig.json",
        None,
        ",\n  \"threshold_override\": 1.5",
    );
    let out = run(&[
        "--config",
        &cfg,
        "classify",
        "--origin=-3.0,3.0",
        "--spacing=0.25,0.25",
        "--counts=17,9",
        "--betas=2,0;0,2",
    ]);
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("out/classify.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x1,x2,gap_min,witness_count,in_resonance");
    assert_eq!(lines.len(), 1 + 17 * 9);
    assert!(dir.path().join("out/classify.meta.json").exists());
}

#[test]
fn measure_is_reproducible_and_embeds_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "m.json", None, "");
    let out1 = run(&["--config", &cfg, "measure"]);
    assert_eq!(exit_code(&out1), 0);
    let first = std::fs::read_to_string(dir.path().join("out/measure.json")).unwrap();
    let out2 = run(&["--config", &cfg, "measure"]);
    assert_eq!(exit_code(&out2), 0);
    let second = std::fs::read_to_string(dir.path().join("out/measure.json")).unwrap();
    assert_eq!(first, second, "reruns are byte-identical");
    let j: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(j["meta"]["config"]["seed"], serde_json::json!(42));
    assert!(j["fraction"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_with_empty_potential_passes_and_reports() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("empty.pot"), "m=0\n").unwrap();
    let cfg = write_config(dir.path(), "v.json", Some("empty.pot"), "");
    let out = run(&["--config", &cfg, "verify"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(exit_code(&out), 0, "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.contains("[pass]")).count(), 11);
    let j: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/verify.json")).unwrap())
            .unwrap();
    assert_eq!(j["all_passed"], serde_json::json!(true));
}

#[test]
fn verify_with_zero_tolerance_fails() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("empty.pot"), "m=0\n").unwrap();
    let cfg = write_config(
        dir.path(),
        "v0.json",
        Some("empty.pot"),
        ",\n  \"tolerance_scale\": 0.0",
    );
    let out = run(&["--config", &cfg, "verify"]);
    assert_eq!(exit_code(&out), 1);
}
