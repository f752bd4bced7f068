use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lathide(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lathide"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn record() -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/synth_ecg");
    format!("wfdb:{}", p.display())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn info_payload_and_rate() {
    for (code, m, r) in [("A2:2", 4, 1.0), ("Z:4", 4, 2.0), ("E8:2", 256, 1.0)] {
        let v = stdout_json(&lathide(&["info", "--code", code, "--json"]));
        assert_eq!(v["payload"], m, "{code}");
        assert_eq!(v["rate"], r, "{code}");
    }
    let v = stdout_json(&lathide(&["info", "--code", "A2:2", "--json"]));
    assert_eq!(v["representatives"].as_array().unwrap().len(), 4);
}

#[test]
fn exit_codes() {
    assert_eq!(lathide(&["--help"]).status.code(), Some(0));
    assert_eq!(lathide(&["--version"]).status.code(), Some(0));
    assert_eq!(lathide(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lathide(&["info"]).status.code(), Some(1));
    assert_eq!(lathide(&["info", "--code", "A2"]).status.code(), Some(1));
    assert_eq!(
        lathide(&["bound", "--code", "Z:2", "--epsilon", "0.7"])
            .status
            .code(),
        Some(1)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1\nx\n").unwrap();
    let out = lathide(&[
        "embed",
        "--code",
        "Z:2",
        "--host",
        &format!("csv:{}", s(&bad)),
        "--message",
        "random:1",
        "--out",
        s(&dir.path().join("o.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
}

#[test]
fn bound_scalar_code() {
    let out = lathide(&["bound", "--code", "Z:2", "--trials", "100000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.166666666667"), "{text}");
    assert!(text.contains("bound above oracle"));
    let v = stdout_json(&lathide(&[
        "bound",
        "--code",
        "Z:2",
        "--epsilon",
        "0.5",
        "--json",
    ]));
    let b = v["theory"]["mdqim_mse_bound"].as_f64().unwrap();
    assert!((b - (1.0 / 3.0 - 1.0 / 24.0)).abs() < 1e-15);
    let v = stdout_json(&lathide(&[
        "bound", "--code", "A2:2", "--json", "--trials", "100000",
    ]));
    let t = &v["theory"];
    assert!(t["qim_mse"].is_f64() && t["mdqim_mse_bound"].is_f64());
    assert!(t["oracle"]["mdqim_mse_estimate"].is_f64());
}

#[test]
fn embed_extract_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let payload = dir.path().join("msg.bin");
    let bytes: Vec<u8> = (0..1024u32).map(|i| (i * 37 % 251) as u8).collect();
    std::fs::write(&payload, &bytes).unwrap();
    let marked = dir.path().join("marked.csv");
    let meta = stdout_json(&lathide(&[
        "embed",
        "--code",
        "A2:2",
        "--host",
        "uniform:-40,40,65536",
        "--message",
        s(&payload),
        "--out",
        s(&marked),
    ]));
    assert_eq!(meta["blocks_used"], 4096);
    assert!(meta["metrics"]["mse"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("marked.csv.json").exists());

    let recovered = dir.path().join("rec.bin");
    let r = stdout_json(&lathide(&[
        "extract",
        "--input",
        s(&marked),
        "--out",
        s(&recovered),
        "--reference",
        s(&payload),
    ]));
    assert_eq!(r["symbol_errors"], 0);
    assert_eq!(std::fs::read(&recovered).unwrap(), bytes);

    let wrong = stdout_json(&lathide(&[
        "extract",
        "--input",
        s(&marked),
        "--code",
        "Z:4",
        "--reference",
        s(&payload),
    ]));
    assert!(wrong["symbol_errors"].as_u64().unwrap() > 0);

    std::fs::remove_file(dir.path().join("marked.csv.json")).unwrap();
    assert_eq!(
        lathide(&["extract", "--input", s(&marked)]).status.code(),
        Some(2)
    );
}

#[test]
fn embed_into_ecg_record() {
    let dir = tempfile::tempdir().unwrap();
    let marked = dir.path().join("ecg.csv");
    let meta = stdout_json(&lathide(&[
        "embed",
        "--code",
        "Z:2",
        "--host",
        &record(),
        "--message",
        "random:5",
        "--message-len",
        "64",
        "--host-scale",
        "200",
        "--out",
        s(&marked),
    ]));
    assert_eq!(meta["blocks_used"], 512);
    assert_eq!(meta["samples_written"], 10_800);
    let out = lathide(&[
        "embed",
        "--code",
        "Z:2",
        "--host",
        &record(),
        "--message",
        "random:5",
        "--message-len",
        "100000",
        "--out",
        s(&marked),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("800000") && err.contains("10800"), "{err}");
}

#[test]
fn simulate_report_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let series = dir.path().join("s.csv");
    let args = [
        "simulate",
        "--code",
        "Z:2",
        "--trials",
        "20000",
        "--oracle-trials",
        "20000",
        "--seed",
        "7",
        "--sweep-sigma",
        "0,0.2",
        "--out",
        s(&report),
        "--series",
        s(&series),
    ];
    assert!(lathide(&args).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    assert!(v["paired_dominance"]["holds"].as_bool().unwrap());
    assert_eq!(std::fs::read_to_string(&series).unwrap().lines().count(), 3);

    // The config echo reruns to the same figures.
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, v["config"].to_string()).unwrap();
    let mut again = stdout_json(&lathide(&["simulate", "--config", s(&cfg)]));
    let mut first = v.clone();
    first["wall_clock_seconds"] = Value::Null;
    again["wall_clock_seconds"] = Value::Null;
    assert_eq!(first, again);

    assert_eq!(
        lathide(&["simulate", "--series", s(&series)]).status.code(),
        Some(1)
    );
}
