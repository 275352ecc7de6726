//! Acceptance criteria A1-A8. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion not listed in `KNOWN_FAILURES` fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use stezcr::bench::BenchSpec;
use stezcr::campaign::run_campaign;
use stezcr::report::{EvalReport, RoundReport, RunManifest};
use stezcr::settings::{Method, Settings};
use stezcr_core::campaign::CampaignSpec;
use stezcr_core::detector::detect_traced;
use stezcr_core::eval::{match_events, quality_metrics, ConfusionCounts, GroundTruth, Interval};
use stezcr_core::noise::add_awgn;
use stezcr_core::short_time::{estimate_noise, ste, ste_derivative, stzcr};
use stezcr_core::synth::{synth_ae, AeSourceParams};
use stezcr_core::{detect, SampledSignal, StezcrConfig, WindowFamily, WindowSpec};

/// Criteria whose failure is recorded rather than fatal.
const KNOWN_FAILURES: &[&str] = &["A3"];

/// Name, `(tp, fp, fn)` and the six expected percentages.
type Row = (&'static str, (usize, usize, usize), [f64; 6]);

type Criterion = (&'static str, &'static str, Box<dyn Fn() -> Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// A1

fn a1() -> Outcome {
    let start = Instant::now();
    let table: [Row; 5] = [
        ("ia", (322, 51, 58), [74.71, 86.33, 84.74, 85.52, 13.67, 15.26]),
        ("sta-lta", (324, 56, 56), [74.31, 85.26, 85.26, 85.26, 14.74, 14.74]),
        ("aic", (299, 73, 81), [66.00, 80.38, 78.68, 79.52, 19.62, 21.32]),
        ("cwt-otsu", (299, 73, 81), [66.00, 80.38, 78.68, 79.52, 19.62, 21.32]),
        ("ste-zcr", (338, 29, 42), [82.64, 92.10, 88.95, 90.50, 7.90, 11.05]),
    ];
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (name, (tp, fp, fn_), want) in table {
        let m = quality_metrics(&ConfusionCounts { tp, fp, fn_ }).unwrap();
        let got = [m.accuracy, m.precision, m.sensitivity, m.f1, m.fdr, m.fnr];
        for (g, w) in got.iter().zip(want) {
            let d = (g - w).abs();
            worst = worst.max(d);
            if d > 0.01 + 1e-9 {
                bad.push(format!("{name}: {g:.4} vs {w}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 1.0,
        format!("30 percentages, worst |diff| {worst:.4}, {secs:.3} s {}", bad.join("; ")),
    )
}

// A2-A4 campaigns

fn onset_index_zero(spec: &CampaignSpec, round: usize, settings: &Settings) -> usize {
    let pop = spec.population().unwrap();
    let cfg = settings.ste_zcr_config(spec.sample_rate).unwrap();
    pop.iter()
        .enumerate()
        .map(|(i, p)| {
            let f = spec.render(i, p, round).unwrap();
            detect(&f.signal, &cfg).unwrap().iter().filter(|e| e.onset == 0).count()
        })
        .sum()
}

fn a2(settings: &Settings) -> Outcome {
    let spec = CampaignSpec {
        rounds_db: vec![],
        ..CampaignSpec::default()
    };
    let start = Instant::now();
    let r = run_campaign(&spec, &[Method::SteZcr], settings, 0.0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let c = &r["ste-zcr"][0];
    let onset = c.errors.map_or(f64::INFINITY, |e| e.onset.mean_abs_us);
    outcome(
        c.tp == 100 && c.fp == 0 && onset <= 50.0 && secs < 60.0,
        format!("TP {} FP {} FN {}, mean |onset| {onset:.2} us, {secs:.1} s", c.tp, c.fp, c.fn_),
    )
}

fn a3(settings: &Settings) -> Outcome {
    let spec = CampaignSpec::default();
    let r = run_campaign(&spec, &[Method::SteZcr], settings, 0.0).unwrap();
    let rounds = &r["ste-zcr"];
    let at = |snr: f64| rounds.iter().find(|x| x.snr_db == Some(snr)).unwrap();
    let (r20, r10) = (at(20.0), at(10.0));
    let zero = onset_index_zero(&spec, 3, settings);
    let abs = |x: &RoundReport| x.errors.map_or(f64::NAN, |e| e.onset.mean_abs_us);
    let matched = r10.tp as f64 / (r10.tp + r10.fn_) as f64;
    let saturation = zero == 0;
    let recall = matched >= 0.90;
    let monotone = abs(r10) >= abs(r20);
    outcome(
        saturation && recall && monotone,
        format!(
            "10 dB: onsets at index 0 {zero} [{}], matched {:.0} % [{}]; mean |onset| 20 dB {:.2} us, 10 dB {:.2} us [{}]",
            ok(saturation),
            100.0 * matched,
            ok(recall),
            abs(r20),
            abs(r10),
            ok(monotone)
        ),
    )
}

fn a4(settings: &Settings) -> Outcome {
    let spec = CampaignSpec {
        rounds_db: vec![],
        ..CampaignSpec::default()
    };
    let r = run_campaign(&spec, &[Method::SteZcr, Method::Ia, Method::StaLta], settings, 0.0).unwrap();
    let life = |m: &str| r[m][0].errors.map_or(f64::INFINITY, |e| e.lifespan.mean_abs_us);
    let (z, ia, sl) = (life("ste-zcr"), life("ia"), life("sta-lta"));
    outcome(
        z < ia && z < sl,
        format!("mean |lifespan error| ste-zcr {z:.1} us, ia {ia:.1} us, sta-lta {sl:.1} us"),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "fail"
    }
}

// A5 oracles

fn window_value(family: WindowFamily, j: usize, n: usize) -> f64 {
    let phase = 2.0 * std::f64::consts::PI * j as f64 / (n - 1) as f64;
    match family {
        WindowFamily::Rectangular => 1.0,
        WindowFamily::Hamming => 0.54 - 0.46 * phase.cos(),
        WindowFamily::Hann => 0.5 - 0.5 * phase.cos(),
    }
}

fn sgn(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn windowed_sum(x: &[f64], win: &WindowSpec, term: impl Fn(i64) -> f64) -> Vec<f64> {
    let n = win.length as i64;
    (0..x.len().div_ceil(win.hop))
        .map(|k| {
            let c = (k * win.hop) as i64;
            (c - n + 1..=c)
                .filter(|&m| m >= 0)
                .map(|m| term(m) * window_value(win.family, (c - m) as usize, win.length))
                .sum()
        })
        .collect()
}

fn ste_oracle(x: &[f64], win: &WindowSpec) -> Vec<f64> {
    windowed_sum(x, win, |m| x[m as usize] * x[m as usize])
}

fn stzcr_oracle(x: &[f64], win: &WindowSpec) -> Vec<f64> {
    let at = |m: i64| if m < 0 { 0.0 } else { x[m as usize] };
    windowed_sum(x, win, |m| (sgn(at(m)) - sgn(at(m - 1))).abs())
        .into_iter()
        .map(|v| v / (2.0 * win.length as f64))
        .collect()
}

fn best_assignment(det: &[Interval], truth: &[Interval], used: &mut [bool], t: usize) -> usize {
    if t == truth.len() {
        return 0;
    }
    let mut best = best_assignment(det, truth, used, t + 1);
    for d in 0..det.len() {
        if !used[d] && det[d].overlap(&truth[t]) > 0.0 {
            used[d] = true;
            best = best.max(1 + best_assignment(det, truth, used, t + 1));
            used[d] = false;
        }
    }
    best
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale.max(1.0)
}

fn random_instance(rng: &mut ChaCha20Rng) -> (Vec<f64>, WindowSpec) {
    let len = rng.random_range(8..120usize);
    let family = [WindowFamily::Rectangular, WindowFamily::Hamming, WindowFamily::Hann][rng.random_range(0..3)];
    let n = rng.random_range(2..=len.min(40));
    let hop = rng.random_range(1..n);
    let x = (0..len)
        .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(-2.0..2.0) })
        .collect();
    (x, WindowSpec::new(family, n, hop).unwrap())
}

fn random_intervals(rng: &mut ChaCha20Rng, max: usize) -> Vec<Interval> {
    let mut t = 0.0;
    (0..rng.random_range(0..=max))
        .map(|_| {
            let onset = t + rng.random_range(0..4) as f64 + 1.0;
            t = onset + rng.random_range(1..5) as f64;
            Interval::new(onset, t)
        })
        .collect()
}

fn a5() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(0xA5);
    let mut fails: BTreeMap<&str, usize> = ["ste", "stzcr", "derivative", "noise", "matching"]
        .into_iter()
        .map(|k| (k, 0))
        .collect();
    const CASES: usize = 1000;
    for _ in 0..CASES {
        let (x, win) = random_instance(&mut rng);
        let s = SampledSignal::new(x.clone(), 1e6).unwrap();
        let e = ste(&s, &win).unwrap();
        let eo = ste_oracle(&x, &win);
        if e.len() != eo.len() || e.values.iter().zip(&eo).any(|(g, w)| !close(*g, *w, w.abs())) {
            *fails.get_mut("ste").unwrap() += 1;
        }
        let z = stzcr(&s, &win).unwrap();
        let zo = stzcr_oracle(&x, &win);
        if z.len() != zo.len() || z.values.iter().zip(&zo).any(|(g, w)| !close(*g, *w, 1.0)) {
            *fails.get_mut("stzcr").unwrap() += 1;
        }
        if eo.len() >= 2 {
            let d = ste_derivative(&e).unwrap();
            let scale = eo.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let good = d.values[0] == 0.0 && (1..eo.len()).all(|i| close(d.values[i], eo[i] - eo[i - 1], scale));
            if !good {
                *fails.get_mut("derivative").unwrap() += 1;
            }
            let start = rng.random_range(0..eo.len() - 1);
            let span = rng.random_range(2..=eo.len() - start);
            let alpha = rng.random_range(0.0..6.0);
            let got = estimate_noise(&e, start, span, alpha).unwrap();
            let seg = &eo[start..start + span];
            let mean = seg.iter().sum::<f64>() / span as f64;
            let std = (seg.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / span as f64).sqrt();
            let sc = mean.abs() + std;
            if !(close(got.mean, mean, sc) && close(got.std, std, sc)) {
                *fails.get_mut("noise").unwrap() += 1;
            }
        }
        let det = random_intervals(&mut rng, 6);
        let truth = random_intervals(&mut rng, 5);
        let m = match_events(&det, &GroundTruth::new(truth.clone()).unwrap(), 0.0);
        if m.counts.tp != best_assignment(&det, &truth, &mut vec![false; det.len()], 0) {
            *fails.get_mut("matching").unwrap() += 1;
        }
    }
    let total: usize = fails.values().sum();
    let detail = fails.iter().map(|(k, v)| format!("{k} {v}")).collect::<Vec<_>>().join(", ");
    outcome(total == 0, format!("{CASES} instances, mismatches: {detail}"))
}

// A6 cascades

fn a6() -> Outcome {
    const FS: f64 = 5e6;
    const CASES: usize = 100;
    let cfg = StezcrConfig::hsu_nielsen(FS);
    let mut rng = ChaCha20Rng::seed_from_u64(0xA6);
    let mut good = 0;
    let mut notes = Vec::new();
    for case in 0..CASES {
        let first = AeSourceParams {
            amplitude: rng.random_range(0.1..=1.0),
            arrival: 5e-3,
            decay: rng.random_range(0.5e-3..=3e-3),
            frequency: rng.random_range(100e3..=500e3),
            duration: 60e-3,
        };
        let noisy = add_awgn(&synth_ae(&first, FS).unwrap(), 27.1, 1000 + case as u64).unwrap();
        let alone = detect(&noisy, &cfg).unwrap();
        let Some(e1) = alone.first() else {
            notes.push(format!("#{case}: first burst undetected"));
            continue;
        };
        let core_end = e1.core_end.unwrap() as f64 / FS;
        let end = e1.endpoint as f64 / FS;
        let f2 = loop {
            let f = rng.random_range(100e3..=500e3);
            if (f - first.frequency).abs() >= 100e3 {
                break f;
            }
        };
        let second = AeSourceParams {
            amplitude: rng.random_range(first.amplitude..=1.0),
            arrival: core_end + rng.random_range(0.2..0.8) * (end - core_end),
            decay: rng.random_range(0.5e-3..=3e-3),
            frequency: f2,
            duration: first.duration,
        };
        let mut x = noisy.samples().to_vec();
        second.render_into(&mut x, FS);
        let stream = SampledSignal::new(x, FS).unwrap();
        let events = detect_traced(&stream, &cfg).unwrap().events;
        let arrival2 = (second.arrival * FS).ceil() as usize;
        let disjoint = events.windows(2).all(|w| w[0].endpoint < w[1].onset);
        let pass = events.len() >= 2
            && disjoint
            && events[0].endpoint + 1 == events[1].onset
            && events[0].truncated
            && events[1].onset.abs_diff(arrival2) <= cfg.window.length;
        if pass {
            good += 1;
        } else if notes.len() < 3 {
            notes.push(format!(
                "#{case}: {:?} vs second arrival {arrival2}",
                events.iter().map(|e| (e.onset, e.endpoint, e.truncated)).collect::<Vec<_>>()
            ));
        }
    }
    outcome(good == CASES, format!("{good}/{CASES} cascades clipped at the second onset {}", notes.join("; ")))
}

// A7 throughput

fn a7(settings: &Settings) -> Outcome {
    let spec = BenchSpec::default();
    let signal = spec.render().unwrap();
    let events = spec.sources().len();
    let cfg = settings.ste_zcr_config(signal.sample_rate()).unwrap();
    let start = Instant::now();
    let found = detect(&signal, &cfg).unwrap().len();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        secs < 10.0 && cfg.window.length == 100 && cfg.window.hop == 1,
        format!(
            "{} samples, N {} hop {}: {secs:.2} s, {:.1} Msamples/s, {found}/{events} events, {:.2e} s per event (reference 0.013 s)",
            signal.len(),
            cfg.window.length,
            cfg.window.hop,
            signal.len() as f64 / secs / 1e6,
            secs / events as f64
        ),
    )
}

// A8 determinism

fn cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_stezcr")).args(args).env_remove("STEZCR_SEED").output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
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

fn a8(settings: &Settings) -> Outcome {
    let spec = CampaignSpec {
        events: 12,
        seed: 8,
        ..CampaignSpec::default()
    };
    let in_pool = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let results = pool.install(|| run_campaign(&spec, &Method::ALL, settings, 0.0).unwrap());
        EvalReport {
            manifest: RunManifest::new("evaluate", *settings),
            results,
        }
        .without_timing()
        .to_json()
    };
    let one = in_pool(1);
    let campaign_threads = one == in_pool(4) && one == in_pool(1);

    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let d = data.to_str().unwrap();
    cli(&["synth", "--events", "3", "--snr", "10", "--seed", "8", "--out-dir", d]);
    let inputs: Vec<String> = fs::read_dir(&data)
        .unwrap()
        .map(|e| e.unwrap().path().to_str().unwrap().to_string())
        .filter(|p| p.ends_with(".f32"))
        .collect();
    let mut detect_same = true;
    for method in Method::ALL {
        let mut runs = Vec::new();
        for (k, threads) in ["1", "1", "4"].into_iter().enumerate() {
            let out = tmp.path().join(format!("{method}-{k}"));
            let mut args = vec!["--threads", threads, "detect", "--method", method.name(), "--csv", "--out-dir"];
            let o = out.to_str().unwrap().to_string();
            let o_ref: &str = &o;
            args.push(o_ref);
            args.extend(inputs.iter().map(String::as_str));
            cli(&args);
            // manifests name the output directory; compare without it
            runs.push(
                dir_bytes(&out)
                    .into_iter()
                    .map(|(n, b)| (n, String::from_utf8(b).unwrap().replace(o_ref, "OUT")))
                    .collect::<Vec<_>>(),
            );
        }
        detect_same &= runs[0] == runs[1] && runs[0] == runs[2];
    }
    let eval = |threads: &str| {
        cli(&[
            "--threads", threads, "evaluate", "--campaign", "--events", "4", "--frame-ms", "25", "--decay-ms", "0.5,2",
            "--no-timing", "--csv",
        ])
    };
    let e1 = eval("1");
    let evaluate_same = e1 == eval("1") && e1 == eval("4");
    outcome(
        campaign_threads && detect_same && evaluate_same,
        format!(
            "campaign 1 vs 4 threads [{}], detect x4 methods rerun and 1 vs 4 threads [{}], evaluate CLI [{}]",
            ok(campaign_threads),
            ok(detect_same),
            ok(evaluate_same)
        ),
    )
}

fn main() {
    // `cargo test -- --list` and filters from the harness protocol
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let settings = Settings::default();
    let criteria: Vec<Criterion> = vec![
        ("A1", "metric reproduction", Box::new(a1)),
        ("A2", "clean campaign", Box::new(move || a2(&settings))),
        ("A3", "noise robustness", Box::new(move || a3(&settings))),
        ("A4", "endpoint contribution", Box::new(move || a4(&settings))),
        ("A5", "oracle equivalence", Box::new(a5)),
        ("A6", "overlap guard", Box::new(a6)),
        ("A7", "throughput", Box::new(move || a7(&settings))),
        ("A8", "determinism", Box::new(move || a8(&settings))),
    ];
    let mut fatal = Vec::new();
    for (id, name, run) in criteria {
        let o = run();
        let known = KNOWN_FAILURES.contains(&id);
        let verdict = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("{id} {name}: {verdict}: {}", o.detail.trim_end());
        if !o.pass && !known {
            fatal.push(id);
        }
    }
    if !fatal.is_empty() {
        eprintln!("failed: {}", fatal.join(", "));
        std::process::exit(1);
    }
}
