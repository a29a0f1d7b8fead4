use std::process::Command;

use gravac_cli::{parse_config, run, Scenario};

fn gravac(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gravac")).args(args).output().expect("binary runs")
}

fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn every_scenario_is_byte_identical_across_runs() {
    let configs = [
        "scenario=coeffs\nlambda_cut=50\ngamma_bar=0.01",
        "scenario=evolve\nvariant=xi_rwa\ndim=8\nt_final=2\ndt=0.01\nrecord_every=0.5",
        "scenario=steady\nvariant=x_rwa\ndim=8\ngamma_bar=0.05",
        "scenario=ladder\nvariant=xi_rwa\ndim=12\ngamma_bar=0.05\nlambda_cut=100",
        "scenario=sweep-cutoff\nobservable=x\nlambda_points=12\njobs=3",
        "scenario=free-particle\nobservable=x\nt_final=2\ndelta=0.01",
        "scenario=validity\nlambda_cut=10\ngamma_t=0.001",
        "scenario=discriminate\ndim=5\nt_final=5",
    ];
    let mut seen = Vec::new();
    for text in configs {
        let cfg = parse_config(text).unwrap();
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a, b, "{text}");
        assert!(a.failure.is_none(), "{text}");
        assert!(a.csv.starts_with(&cfg.header()));
        assert!(!a.csv.contains('\r'));
        seen.push(cfg.scenario);
    }
    assert_eq!(seen, Scenario::ALL);
}

#[test]
fn jobs_do_not_change_results() {
    let one = run(&parse_config("scenario=sweep-cutoff\nlambda_points=20\njobs=1").unwrap()).unwrap();
    let four = run(&parse_config("scenario=sweep-cutoff\nlambda_points=20\njobs=4").unwrap()).unwrap();
    assert_eq!(body(&one.csv), body(&four.csv));
    assert_eq!(body(&four.csv).len(), 21);
}

#[test]
fn parse_serialize_round_trip() {
    for s in Scenario::ALL {
        let cfg = parse_config(&format!("scenario={}\ndim=9\namplitudes=0.6,0,0.8", s.name())).unwrap();
        assert_eq!(parse_config(&cfg.to_kv()).unwrap(), cfg);
        let json = format!("{{\"scenario\": \"{}\", \"dim\": 9, \"amplitudes\": [0.6, 0, 0.8]}}", s.name());
        assert_eq!(parse_config(&json).unwrap(), cfg);
    }
}

#[test]
fn steady_reports_two_rows_matching_parity_sums() {
    let cfg = parse_config("scenario=steady\nvariant=x_rwa\ninitial=thermal\ndim=10\ngamma_bar=0.05").unwrap();
    let r = run(&cfg).unwrap();
    let rows = body(&r.csv);
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        let f: Vec<f64> = row.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        assert!((f[0] - f[1]).abs() < 1e-10, "{row}");
    }
}

#[test]
fn ladder_rates_grow_quadratically() {
    let cfg = parse_config("scenario=ladder\nvariant=xi_rwa\ndim=12\ngamma_bar=0.05\nlambda_cut=100").unwrap();
    let csv = run(&cfg).unwrap().csv;
    for row in body(&csv).iter().skip(1) {
        let f: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((f[2] - 0.05 * f[0] * f[0]).abs() < 1e-12, "{row}");
    }
}

#[test]
fn exit_codes_and_error_lines() {
    let cases: [(&[&str], i32, &str); 5] = [
        (&[], 2, "scenario required"),
        (&["--scenario", "evolve", "--dim", "1"], 2, "Fock"),
        (&["--scenario", "coeffs", "--lambda-cut", "1"], 2, "lambda_cut"),
        (&["--scenario", "coeffs", "--variant", "bogus"], 2, "variant"),
        (&["--scenario", "evolve", "--variant", "xi_full", "--gamma-bar", "0.5", "--dim", "6", "--t-final", "20", "--dt", "0.5"], 3, "invariant"),
    ];
    for (args, code, needle) in cases {
        let out = gravac(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        let line: serde_json::Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
        assert_eq!(line["code"], code);
        assert!(line["message"].as_str().unwrap().contains(needle), "{err}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = std::env::temp_dir().join(format!("gravac-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("c.json");
    let out = dir.join("o.csv");
    std::fs::write(&cfg, r#"{"scenario": "coeffs", "lambda_cut": 20}"#).unwrap();
    let res = gravac(&["--config", cfg.to_str().unwrap(), "--lambda-cut", "30", "--output", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("# lambda_cut=30\n"));
    assert!(body(&csv)[1].starts_with("3.0000000000000000e1,"));
    std::fs::remove_dir_all(&dir).unwrap();
}
