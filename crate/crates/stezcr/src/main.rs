use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use stezcr::bench::{run_bench, BenchSpec};
use stezcr::campaign::{run_campaign, CampaignSettings};
use stezcr::io::{load_signal, load_truth, save_signal, save_truth, truth_sidecar, SignalFormat};
use stezcr::report::{EvalReport, EventFile, EventRecord, RoundReport, RunManifest};
use stezcr::settings::{parse_methods, run_method, Method, Preset, Settings, Window};
use stezcr::{Error, Result};
use stezcr_core::eval::{match_events, ConfusionCounts, GroundTruth, MatchedPair};
use stezcr_core::{ste, stzcr, SampledSignal};

#[derive(Parser)]
#[command(name = "stezcr", version, about = "Acoustic-emission hit detection")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a synthetic campaign: one clean file per event plus one per SNR round.
    Synth(SynthArgs),
    /// Detect events in waveform files.
    Detect(DetectArgs),
    /// Score events against ground truth, or run a whole campaign.
    Evaluate(EvaluateArgs),
    /// Time the detectors on one long multi-event frame.
    Bench(BenchArgs),
}

/// Detector settings. Each flag applies to every selected method that has
/// the parameter.
#[derive(Args, Clone, Default)]
struct Tuning {
    /// Starting calibration: hsu-nielsen or field-data.
    #[arg(long, default_value = "hsu-nielsen")]
    preset: String,
    /// JSON settings file (as echoed in manifests); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// STE-ZCR upper threshold, window-mean power in V².
    #[arg(long)]
    itu: Option<f64>,
    /// STE-ZCR zero-crossing threshold, percent of the noise level.
    #[arg(long)]
    izct_pct: Option<f64>,
    /// STE-ZCR zero-crossing threshold as an absolute rate instead.
    #[arg(long)]
    izct_abs: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    early_noise_us: Option<f64>,
    /// Short window: STE/STZCR length, STA span, AIC CF short span.
    #[arg(long)]
    sta_us: Option<f64>,
    #[arg(long)]
    lta_us: Option<f64>,
    #[arg(long)]
    hdt_us: Option<f64>,
    #[arg(long)]
    hlt_us: Option<f64>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    hop: Option<usize>,
    #[arg(long)]
    min_event_us: Option<f64>,
    #[arg(long)]
    retrigger_ratio: Option<f64>,
    /// IA amplitude (V), STA/LTA trigger ratio or AIC coarse ratio.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    detrigger: Option<f64>,
    #[arg(long)]
    pre_us: Option<f64>,
    #[arg(long)]
    post_us: Option<f64>,
    #[arg(long)]
    window1_us: Option<f64>,
    #[arg(long)]
    end_delay1_us: Option<f64>,
    #[arg(long)]
    start_delay2_us: Option<f64>,
    #[arg(long)]
    end_delay2_us: Option<f64>,
    #[arg(long)]
    weighting_r: Option<f64>,
}

impl Tuning {
    fn settings(&self, methods: &[Method]) -> Result<Settings> {
        let mut s = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| Error::format(p, e.to_string()))?
            }
            None => Settings::preset(self.preset.parse::<Preset>()?),
        };
        let has = |m| methods.contains(&m);
        fn set<T: Copy>(dst: &mut T, v: Option<T>) {
            if let Some(v) = v {
                *dst = v;
            }
        }
        if has(Method::SteZcr) {
            let z = &mut s.ste_zcr;
            set(&mut z.itu, self.itu);
            if let Some(p) = self.izct_pct {
                z.izct_pct = p;
                z.izct_abs = None;
            }
            if self.izct_abs.is_some() {
                z.izct_abs = self.izct_abs;
            }
            set(&mut z.alpha, self.alpha);
            set(&mut z.early_noise_us, self.early_noise_us);
            set(&mut z.sta_us, self.sta_us);
            set(&mut z.hop, self.hop);
            set(&mut z.min_event_us, self.min_event_us);
            set(&mut z.retrigger_ratio, self.retrigger_ratio);
            if let Some(w) = &self.window {
                z.window = w.parse::<Window>()?;
            }
        }
        if has(Method::Ia) {
            set(&mut s.ia.threshold, self.threshold);
            set(&mut s.ia.hdt_us, self.hdt_us);
            set(&mut s.ia.hlt_us, self.hlt_us);
        }
        if has(Method::StaLta) {
            let l = &mut s.sta_lta;
            set(&mut l.trigger, self.threshold);
            set(&mut l.detrigger, self.detrigger);
            set(&mut l.sta_us, self.sta_us);
            set(&mut l.lta_us, self.lta_us);
            set(&mut l.pre_us, self.pre_us);
            set(&mut l.post_us, self.post_us);
        }
        if has(Method::Aic) {
            let a = &mut s.aic;
            set(&mut a.threshold, self.threshold);
            set(&mut a.sta_us, self.sta_us);
            set(&mut a.lta_us, self.lta_us);
            set(&mut a.hdt_us, self.hdt_us);
            set(&mut a.hlt_us, self.hlt_us);
            set(&mut a.window1_us, self.window1_us);
            set(&mut a.end_delay1_us, self.end_delay1_us);
            set(&mut a.start_delay2_us, self.start_delay2_us);
            set(&mut a.end_delay2_us, self.end_delay2_us);
            set(&mut a.weighting_r, self.weighting_r);
        }
        Ok(s)
    }
}

/// Campaign population and noise rounds.
#[derive(Args, Clone)]
struct CampaignArgs {
    #[arg(long, default_value_t = 100)]
    events: usize,
    /// Extra SNR rounds in dB, comma separated; `inf` writes the clean round only.
    #[arg(long, default_value = "20,15,10")]
    snr: String,
    /// SNR of the clean round in dB, or `inf` for noiseless.
    #[arg(long, default_value = "27.1")]
    floor_snr: String,
    #[arg(long, default_value_t = 5e6)]
    sample_rate: f64,
    #[arg(long, default_value_t = 45.0)]
    frame_ms: f64,
    #[arg(long, default_value_t = 5.0)]
    arrival_ms: f64,
    /// Amplitude range in volts, `lo,hi`.
    #[arg(long, default_value = "0.1,1")]
    amplitude: String,
    /// Decay constant range in ms.
    #[arg(long, default_value = "0.5,3")]
    decay_ms: String,
    /// Resonant frequency range in kHz.
    #[arg(long, default_value = "100,500")]
    freq_khz: String,
    #[arg(long, env = "STEZCR_SEED", default_value_t = 0)]
    seed: u64,
}

fn parse_snr(s: &str) -> Result<f64> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Usage(format!("bad SNR `{s}`")))
}

fn parse_range(name: &str, s: &str) -> Result<(f64, f64)> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Usage(format!("--{name}: expected `lo,hi`")))?;
    match v[..] {
        [lo, hi] => Ok((lo, hi)),
        [x] => Ok((x, x)),
        _ => Err(Error::Usage(format!("--{name}: expected `lo,hi`"))),
    }
}

impl CampaignArgs {
    fn settings(&self) -> Result<CampaignSettings> {
        let rounds = if self.snr.trim().eq_ignore_ascii_case("inf") {
            Vec::new()
        } else {
            self.snr.split(',').map(parse_snr).collect::<Result<Vec<_>>>()?
        };
        if rounds.iter().any(|r| r.is_infinite()) {
            return Err(Error::Usage("`inf` cannot be mixed with finite rounds".into()));
        }
        let floor = parse_snr(&self.floor_snr)?;
        let c = CampaignSettings {
            events: self.events,
            sample_rate_hz: self.sample_rate,
            frame_ms: self.frame_ms,
            arrival_ms: self.arrival_ms,
            amplitude_v: parse_range("amplitude", &self.amplitude)?,
            decay_ms: parse_range("decay-ms", &self.decay_ms)?,
            frequency_khz: parse_range("freq-khz", &self.freq_khz)?,
            floor_snr_db: Some(floor).filter(|v| v.is_finite()),
            rounds_db: rounds,
        };
        c.to_spec(self.seed)?;
        Ok(c)
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    campaign: CampaignArgs,
    #[arg(long)]
    out_dir: PathBuf,
    /// wav16, csv or raw-f32.
    #[arg(long, default_value = "raw-f32")]
    format: String,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "ste-zcr")]
    method: String,
    /// Input format; guessed from the extension when absent.
    #[arg(long)]
    format: Option<String>,
    /// Sample rate in Hz, overriding the file or sidecar.
    #[arg(long)]
    rate: Option<f64>,
    /// Write `<input>.<method>.json` here; stdout when absent (one input only).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write the CSV projection next to the JSON.
    #[arg(long)]
    csv: bool,
    /// Write the STE (V²·s) and STZCR series as `<input>.ste.csv` and `<input>.stzcr.csv`.
    #[arg(long)]
    dump_cf: bool,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Score raw confusion counts `tp,fp,fn`.
    #[arg(long, conflicts_with_all = ["detected", "campaign"])]
    counts: Option<String>,
    /// Event files written by `detect`; repeatable.
    #[arg(long)]
    detected: Vec<PathBuf>,
    /// Truth CSVs paired with --detected; defaults to the input's truth sidecar.
    #[arg(long)]
    truth: Vec<PathBuf>,
    /// Generate and score a synthetic campaign.
    #[arg(long, conflicts_with = "detected")]
    campaign: bool,
    #[command(flatten)]
    campaign_args: CampaignArgs,
    /// Methods for --campaign: comma separated or `all`.
    #[arg(long, default_value = "all")]
    method: String,
    /// Minimum overlap as a fraction of the truth interval.
    #[arg(long, default_value_t = 0.0)]
    min_overlap: f64,
    /// Write report.json and report.csv here; JSON to stdout when absent.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Print CSV instead of JSON to stdout.
    #[arg(long)]
    csv: bool,
    /// Drop wall-clock timings from the report.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 25_000_000)]
    samples: usize,
    #[arg(long, default_value = "all")]
    method: String,
    #[arg(long, env = "STEZCR_SEED", default_value_t = 0)]
    seed: u64,
    /// Also write bench.json here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into())
}

fn round_tag(snr: f64) -> String {
    format!("snr{snr}")
}

fn synth(a: SynthArgs) -> Result<()> {
    let format: SignalFormat = a.format.parse()?;
    let cs = a.campaign.settings()?;
    let spec = cs.to_spec(a.campaign.seed)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let population = spec.population()?;
    let files: Vec<Vec<String>> = population
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            (0..spec.round_count())
                .map(|r| {
                    let frame = spec.render(i, p, r)?;
                    let tag = if r == 0 { "clean".to_string() } else { round_tag(spec.round_snr(r)) };
                    let name = format!("event_{i:04}_{tag}.{}", format.extension());
                    let path = a.out_dir.join(&name);
                    save_signal(&path, &frame.signal, format)?;
                    save_truth(&truth_sidecar(&path), &frame.truth)?;
                    Ok(name)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut m = RunManifest::new("synth", Settings::default());
    m.output = Some(display(&a.out_dir));
    m.seed = Some(a.campaign.seed);
    m.extra.insert("campaign".into(), serde_json::to_value(&cs)?);
    m.extra.insert("format".into(), serde_json::to_value(format)?);
    m.extra.insert("files".into(), serde_json::to_value(files.concat())?);
    write_file(&a.out_dir.join("manifest.json"), &(serde_json::to_string_pretty(&m)? + "\n"))
}

fn dump_cf(dir: &Path, input: &Path, signal: &SampledSignal, settings: &Settings) -> Result<()> {
    let cfg = settings.ste_zcr_config(signal.sample_rate())?;
    let fs_hz = signal.sample_rate();
    let e = ste(signal, &cfg.window)?;
    let z = stzcr(signal, &cfg.zcr_window)?;
    for (suffix, series, scale) in [("ste", &e, 1.0 / fs_hz), ("stzcr", &z, 1.0)] {
        let mut out = String::from("index,value\n");
        for (k, v) in series.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", series.sample_index(k), v * scale));
        }
        write_file(&dir.join(format!("{}.{suffix}.csv", file_name(input))), &out)?;
    }
    Ok(())
}

fn detect_cmd(a: DetectArgs) -> Result<()> {
    let method: Method = a.method.parse()?;
    let settings = a.tuning.settings(&[method])?;
    if a.out_dir.is_none() && (a.inputs.len() > 1 || a.csv || a.dump_cf) {
        return Err(Error::Usage("--out-dir is needed for several inputs, --csv or --dump-cf".into()));
    }
    let format = a.format.as_deref().map(str::parse::<SignalFormat>).transpose()?;
    if let Some(d) = &a.out_dir {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let outputs: Vec<String> = a
        .inputs
        .par_iter()
        .map(|input| {
            let signal = load_signal(input, format.unwrap_or_else(|| SignalFormat::from_path(input)), a.rate)?;
            settings.validate(method, signal.sample_rate())?;
            let events = run_method(method, &settings, &signal)?;
            let mut m = RunManifest::new("detect", settings);
            m.inputs.push(display(input));
            m.methods.push(method);
            let fs_hz = signal.sample_rate();
            let Some(dir) = &a.out_dir else {
                let file = EventFile {
                    manifest: Some(m),
                    events: events.iter().map(|e| EventRecord::new(method, e, fs_hz)).collect(),
                };
                return Ok(file.to_json());
            };
            let stem = dir.join(format!("{}.{method}", file_name(input)));
            m.output = Some(display(&stem.with_extension(format!("{method}.json"))));
            let file = EventFile {
                manifest: Some(m),
                events: events.iter().map(|e| EventRecord::new(method, e, fs_hz)).collect(),
            };
            let json_path = PathBuf::from(format!("{}.json", stem.display()));
            write_file(&json_path, &file.to_json())?;
            if a.csv {
                write_file(&PathBuf::from(format!("{}.csv", stem.display())), &file.to_csv())?;
            }
            if a.dump_cf {
                dump_cf(dir, input, &signal, &settings)?;
            }
            Ok(String::new())
        })
        .collect::<Result<_>>()?;
    for o in outputs {
        print!("{o}");
    }
    Ok(())
}

fn parse_counts(s: &str) -> Result<ConfusionCounts> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Usage("--counts: expected `tp,fp,fn`".into()))?;
    match v[..] {
        [tp, fp, fn_] => Ok(ConfusionCounts { tp, fp, fn_ }),
        _ => Err(Error::Usage("--counts: expected `tp,fp,fn`".into())),
    }
}

fn truth_for(file: &EventFile, events_path: &Path) -> Result<PathBuf> {
    file.manifest
        .as_ref()
        .and_then(|m| m.inputs.first())
        .map(|i| truth_sidecar(Path::new(i)))
        .ok_or_else(|| Error::Usage(format!("{}: no --truth given and no input recorded", events_path.display())))
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    if !(a.min_overlap.is_finite() && (0.0..=1.0).contains(&a.min_overlap)) {
        return Err(Error::Usage("--min-overlap must be in [0, 1]".into()));
    }
    let mut results = std::collections::BTreeMap::new();
    let mut manifest;
    if let Some(c) = &a.counts {
        manifest = RunManifest::new("evaluate", Settings::default());
        manifest.extra.insert("counts".into(), c.as_str().into());
        results.insert("counts".to_string(), vec![RoundReport::new(None, parse_counts(c)?, &[])]);
    } else if a.campaign {
        let methods = parse_methods(&a.method)?;
        let settings = a.tuning.settings(&methods)?;
        let cs = a.campaign_args.settings()?;
        let spec = cs.to_spec(a.campaign_args.seed)?;
        manifest = RunManifest::new("evaluate", settings);
        manifest.methods = methods.clone();
        manifest.seed = Some(spec.seed);
        manifest.extra.insert("campaign".into(), serde_json::to_value(&cs)?);
        results = run_campaign(&spec, &methods, &settings, a.min_overlap)?;
    } else if !a.detected.is_empty() {
        if !a.truth.is_empty() && a.truth.len() != a.detected.len() {
            return Err(Error::Usage("--truth must be given once per --detected file".into()));
        }
        manifest = RunManifest::new("evaluate", Settings::default());
        let mut cells: std::collections::BTreeMap<Method, (ConfusionCounts, Vec<MatchedPair>)> = Default::default();
        for (k, path) in a.detected.iter().enumerate() {
            let file = EventFile::load(path)?;
            let truth_path = match a.truth.get(k) {
                Some(t) => t.clone(),
                None => truth_for(&file, path)?,
            };
            let truth: GroundTruth = load_truth(&truth_path)?;
            if let Some(m) = &file.manifest {
                manifest.settings = m.settings;
                for method in &m.methods {
                    if !manifest.methods.contains(method) {
                        manifest.methods.push(*method);
                    }
                }
            }
            manifest.inputs.push(display(path));
            manifest.inputs.push(display(&truth_path));
            let mut by_method: std::collections::BTreeMap<Method, Vec<_>> = Default::default();
            for e in &file.events {
                by_method.entry(e.method).or_default().push(e.interval());
            }
            if by_method.is_empty() {
                let m = file.manifest.as_ref().and_then(|m| m.methods.first().copied()).unwrap_or(Method::SteZcr);
                by_method.insert(m, Vec::new());
            }
            for (method, detected) in by_method {
                let matching = match_events(&detected, &truth, a.min_overlap);
                let cell = cells.entry(method).or_default();
                cell.0 += matching.counts;
                cell.1.extend(matching.pairs);
            }
        }
        for (method, (counts, pairs)) in cells {
            results.insert(method.to_string(), vec![RoundReport::new(None, counts, &pairs)]);
        }
    } else {
        return Err(Error::Usage("evaluate needs --counts, --detected or --campaign".into()));
    }
    manifest.extra.insert("min_overlap".into(), a.min_overlap.into());
    manifest.output = a.out_dir.as_deref().map(display);
    let mut report = EvalReport { manifest, results };
    if a.no_timing {
        report = report.without_timing();
    }
    match &a.out_dir {
        Some(d) => report.write(d),
        None => {
            print!("{}", if a.csv { report.to_csv() } else { report.to_json() });
            Ok(())
        }
    }
}

fn bench(a: BenchArgs) -> Result<()> {
    let methods = parse_methods(&a.method)?;
    let settings = a.tuning.settings(&methods)?;
    let spec = BenchSpec {
        samples: a.samples,
        seed: a.seed,
        ..BenchSpec::default()
    };
    let events = spec.sources().len();
    let signal = spec.render()?;
    let report = run_bench(&signal, events, &methods, &settings)?;
    print!("{}", report.table());
    if let Some(d) = &a.out_dir {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        let mut m = RunManifest::new("bench", settings);
        m.methods = methods;
        m.seed = Some(a.seed);
        m.extra.insert("bench".into(), serde_json::to_value(&spec)?);
        let body = serde_json::json!({ "manifest": m, "report": report });
        write_file(&d.join("bench.json"), &(serde_json::to_string_pretty(&body)? + "\n"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Synth(a) => synth(a),
        Cmd::Detect(a) => detect_cmd(a),
        Cmd::Evaluate(a) => evaluate(a),
        Cmd::Bench(a) => bench(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("stezcr: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stezcr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
