use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use stezcr::io::{save_signal, SignalFormat};
use stezcr::report::{EvalReport, EventFile};
use stezcr_core::SampledSignal;

fn stezcr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stezcr"))
        .args(args)
        .env_remove("STEZCR_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = stezcr(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn synth_single_clean_event() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    ok(&["synth", "--events", "1", "--snr", "inf", "--out-dir", s(&out)]);
    let names: Vec<String> = read_dir_sorted(&out).into_iter().map(|(n, _)| n).collect();
    assert_eq!(
        names,
        [
            "event_0000_clean.f32",
            "event_0000_clean.f32.rate",
            "event_0000_clean.f32.truth.csv",
            "manifest.json"
        ]
    );
    let truth = fs::read_to_string(out.join("event_0000_clean.f32.truth.csv")).unwrap();
    assert_eq!(truth.lines().count(), 2);
}

#[test]
fn synth_counts_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let args = ["synth", "--events", "100", "--snr", "20,15,10", "--frame-ms", "20", "--out-dir", s(&a)];
    ok(&args);
    let first = read_dir_sorted(&a);
    let signals = first.iter().filter(|(n, _)| n.ends_with(".f32")).count();
    assert_eq!(signals, 400);
    fs::remove_dir_all(&a).unwrap();
    ok(&args);
    assert!(first == read_dir_sorted(&a), "reruns differ");
}

#[test]
fn seed_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let st = Command::new(env!("CARGO_BIN_EXE_stezcr"))
            .args(["synth", "--events", "1", "--snr", "inf", "--frame-ms", "20", "--out-dir", s(&out)])
            .env("STEZCR_SEED", seed)
            .status()
            .unwrap();
        assert!(st.success());
        fs::read(out.join("event_0000_clean.f32")).unwrap()
    };
    assert_eq!(run("a", "5"), run("b", "5"));
    assert_ne!(run("c", "5"), run("d", "6"));
}

#[test]
fn zero_signal_gives_no_events() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("zero.csv");
    save_signal(&p, &SampledSignal::zeros(20_000, 5e6).unwrap(), SignalFormat::Csv).unwrap();
    let stdout = ok(&["detect", s(&p)]);
    let file: EventFile = serde_json::from_str(&stdout).unwrap();
    assert!(file.events.is_empty());
    assert_eq!(file.manifest.unwrap().inputs, [s(&p)]);
}

#[test]
fn single_event_detect_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    ok(&["synth", "--events", "1", "--snr", "inf", "--out-dir", s(&data)]);
    let input = data.join("event_0000_clean.f32");
    let out = dir.path().join("o");
    ok(&["detect", s(&input), "--out-dir", s(&out), "--csv", "--dump-cf", "--hop", "3"]);
    let file = EventFile::load(&out.join("event_0000_clean.f32.ste-zcr.json")).unwrap();
    assert_eq!(file.events.len(), 1);
    let from_csv = EventFile::load(&out.join("event_0000_clean.f32.ste-zcr.csv")).unwrap();
    assert_eq!(from_csv, file);
    // 45 ms at 5 MHz, hop 3
    let rows = 225_000usize.div_ceil(3);
    for series in ["ste", "stzcr"] {
        let text = fs::read_to_string(out.join(format!("event_0000_clean.f32.{series}.csv"))).unwrap();
        assert_eq!(text.lines().count(), rows + 1, "{series}");
    }
}

#[test]
fn detect_then_evaluate_composes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    ok(&["synth", "--events", "3", "--snr", "inf", "--out-dir", s(&data)]);
    let out = dir.path().join("o");
    let inputs: Vec<String> = (0..3)
        .map(|i| s(&data.join(format!("event_{i:04}_clean.f32"))).to_string())
        .collect();
    let mut args = vec!["detect", "--method", "ia", "--out-dir", s(&out)];
    args.extend(inputs.iter().map(String::as_str));
    ok(&args);
    let mut args = vec!["evaluate".to_string()];
    for i in 0..3 {
        args.push("--detected".into());
        args.push(s(&out.join(format!("event_{i:04}_clean.f32.ia.json"))).into());
    }
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let report: EvalReport = serde_json::from_str(&ok(&args)).unwrap();
    let r = &report.results["ia"][0];
    assert_eq!(r.tp + r.fn_, 3);
}

#[test]
fn truth_as_detections_scores_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("t.csv");
    fs::write(&truth, "onset_s,endpoint_s\n0.001,0.002\n0.004,0.0055\n").unwrap();
    let det = dir.path().join("e.json");
    fs::write(
        &det,
        r#"[{"method":"aic","onset_s":0.001,"endpoint_s":0.002,"lifespan_s":0.001,"onset_idx":5000,"endpoint_idx":10000,"truncated":false},
            {"method":"aic","onset_s":0.004,"endpoint_s":0.0055,"lifespan_s":0.0015,"onset_idx":20000,"endpoint_idx":27500,"truncated":false}]"#,
    )
    .unwrap();
    let report: EvalReport =
        serde_json::from_str(&ok(&["evaluate", "--detected", s(&det), "--truth", s(&truth)])).unwrap();
    let m = report.results["aic"][0].metrics.unwrap();
    assert_eq!((m.precision_pct, m.sensitivity_pct), (100.0, 100.0));
    assert_eq!(report.results["aic"][0].errors.unwrap().onset.mean_abs_us, 0.0);
}

#[test]
fn counts_mode_reproduces_percentages() {
    let csv = ok(&["evaluate", "--counts", "338,29,42", "--csv"]);
    let row: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    let pct: Vec<f64> = row[5..11].iter().map(|v| v.parse().unwrap()).collect();
    for (got, want) in pct.iter().zip([82.64, 92.10, 88.95, 90.50, 7.90, 11.05]) {
        assert!((got - want).abs() <= 0.01, "{got} vs {want}");
    }
}

#[test]
fn campaign_report_has_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    ok(&[
        "evaluate", "--campaign", "--events", "3", "--frame-ms", "20", "--decay-ms", "0.5,1",
        "--snr", "20,15,10", "--out-dir", s(&out),
    ]);
    let report: EvalReport = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.results.len(), 4);
    for rounds in report.results.values() {
        let snrs: Vec<f64> = rounds.iter().map(|r| r.snr_db.unwrap()).collect();
        assert_eq!(snrs, [27.1, 20.0, 15.0, 10.0]);
    }
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 16);
    assert!(csv.lines().nth(1).unwrap().starts_with("method,snr_db,tp,fp,fn,accuracy_pct,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| stezcr(args).status.code().unwrap();
    assert_eq!(code(&["detect", "missing.f32", "--rate", "5e6"]), 3);
    assert_eq!(code(&["frobnicate"]), 2);
    let p = dir.path().join("z.csv");
    save_signal(&p, &SampledSignal::zeros(20_000, 5e6).unwrap(), SignalFormat::Csv).unwrap();
    assert_eq!(code(&["detect", s(&p), "--method", "cwt"]), 2);
    assert_eq!(code(&["detect", s(&p), "--izct-pct", "150"]), 2);
    assert_eq!(code(&["detect", s(&p), "--window", "kaiser"]), 2);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "0.1\nx\n").unwrap();
    fs::write(dir.path().join("bad.csv.rate"), "5e6").unwrap();
    assert_eq!(code(&["detect", s(&bad)]), 3);
    // constant input has no AIC minimum
    let c = dir.path().join("c.csv");
    save_signal(&c, &SampledSignal::new(vec![0.5; 4], 5e6).unwrap(), SignalFormat::Csv).unwrap();
    assert_eq!(code(&["detect", s(&c)]), 4);
}
