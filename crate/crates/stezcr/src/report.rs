//! Event files, evaluation reports and the run manifest embedded in both.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stezcr_core::eval::{error_stats, quality_metrics, ConfusionCounts, Interval, MatchedPair, Summary};
use stezcr_core::AeEvent;

use crate::settings::{Method, Settings};
use crate::{Error, Result};

/// Everything needed to rerun a command. No timestamps, so reruns are
/// byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub output: Option<String>,
    pub methods: Vec<Method>,
    pub settings: Settings,
    pub seed: Option<u64>,
    /// Command-specific values (campaign ranges, overlap rule, ...).
    #[serde(default)]
    pub extra: BTreeMap<String, serde_json::Value>,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, settings: Settings) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            output: None,
            methods: Vec::new(),
            settings,
            seed: None,
            extra: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    fn comment_line(&self) -> String {
        format!("# manifest: {}\n", serde_json::to_string(self).expect("manifest serializes"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub method: Method,
    pub onset_s: f64,
    pub endpoint_s: f64,
    pub lifespan_s: f64,
    pub onset_idx: usize,
    pub endpoint_idx: usize,
    pub truncated: bool,
}

impl EventRecord {
    pub fn new(method: Method, e: &AeEvent, sample_rate: f64) -> Self {
        let iv = Interval::from_event(e, sample_rate);
        Self {
            method,
            onset_s: iv.onset,
            endpoint_s: iv.endpoint,
            lifespan_s: iv.length(),
            onset_idx: e.onset,
            endpoint_idx: e.endpoint,
            truncated: e.truncated,
        }
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.onset_s, self.endpoint_s)
    }
}

const EVENT_COLUMNS: &str = "method,onset_s,endpoint_s,lifespan_s,onset_idx,endpoint_idx,truncated";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventFile {
    pub manifest: Option<RunManifest>,
    pub events: Vec<EventRecord>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EventJson {
    File(Box<EventFile>),
    Bare(Vec<EventRecord>),
}

impl EventFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("events serialize") + "\n"
    }

    /// Manifest as a `#` comment line, a header, then one row per event.
    pub fn to_csv(&self) -> String {
        let mut out = self.manifest.as_ref().map(RunManifest::comment_line).unwrap_or_default();
        out.push_str(EVENT_COLUMNS);
        out.push('\n');
        for e in &self.events {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                e.method, e.onset_s, e.endpoint_s, e.lifespan_s, e.onset_idx, e.endpoint_idx, e.truncated
            );
        }
        out
    }

    /// Reads what [`EventFile::to_json`] or [`EventFile::to_csv`] wrote; a
    /// bare JSON array of events is accepted too.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if is_csv {
            Self::parse_csv(&text).map_err(|m| Error::format(path, m))
        } else {
            match serde_json::from_str::<EventJson>(&text) {
                Ok(EventJson::File(f)) => Ok(*f),
                Ok(EventJson::Bare(events)) => Ok(EventFile { manifest: None, events }),
                Err(e) => Err(Error::format(path, e.to_string())),
            }
        }
    }

    fn parse_csv(text: &str) -> std::result::Result<Self, String> {
        let mut manifest = None;
        let mut body = String::new();
        for line in text.lines() {
            if let Some(json) = line.strip_prefix("# manifest: ") {
                manifest = Some(serde_json::from_str(json).map_err(|e| e.to_string())?);
            } else if !line.starts_with('#') {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let events = reader
            .deserialize()
            .collect::<std::result::Result<Vec<EventRecord>, _>>()
            .map_err(|e| e.to_string())?;
        Ok(EventFile { manifest, events })
    }
}

/// The six quality percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsPct {
    pub accuracy_pct: f64,
    pub precision_pct: f64,
    pub sensitivity_pct: f64,
    pub f1_pct: f64,
    pub fdr_pct: f64,
    pub fnr_pct: f64,
}

/// Signed error summary in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrUs {
    pub mean_us: f64,
    pub std_us: f64,
    pub mean_abs_us: f64,
}

impl From<Summary> for ErrUs {
    fn from(s: Summary) -> Self {
        Self {
            mean_us: s.mean * 1e6,
            std_us: s.std * 1e6,
            mean_abs_us: s.mean_abs * 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorsUs {
    pub onset: ErrUs,
    pub endpoint: ErrUs,
    pub lifespan: ErrUs,
    pub pairs: usize,
}

/// Wall-clock cost of the detect calls in one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub time_per_event_s: Option<f64>,
    pub time_per_frame_s: Option<f64>,
}

mod snr {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_infinite() => Repr::Text("inf".into()).serialize(s),
            Some(x) => Repr::Num(*x).serialize(s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Num(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) if t == "inf" => Ok(Some(f64::INFINITY)),
            Some(Repr::Text(t)) => Err(serde::de::Error::custom(format!("bad snr `{t}`"))),
        }
    }
}

/// Results of one method on one SNR round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    /// `None` when the data carries no SNR label; `"inf"` when noiseless.
    #[serde(with = "snr")]
    pub snr_db: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub metrics: Option<MetricsPct>,
    /// Why `metrics` or `errors` is missing.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub undefined: Vec<String>,
    pub errors: Option<ErrorsUs>,
    pub timing: Option<Timing>,
}

impl RoundReport {
    pub fn new(snr_db: Option<f64>, counts: ConfusionCounts, pairs: &[MatchedPair]) -> Self {
        let mut undefined = Vec::new();
        let metrics = match quality_metrics(&counts) {
            Ok(m) => Some(MetricsPct {
                accuracy_pct: m.accuracy,
                precision_pct: m.precision,
                sensitivity_pct: m.sensitivity,
                f1_pct: m.f1,
                fdr_pct: m.fdr,
                fnr_pct: m.fnr,
            }),
            Err(e) => {
                undefined.push(e.to_string());
                None
            }
        };
        let errors = match error_stats(pairs) {
            Ok(s) => Some(ErrorsUs {
                onset: s.onset.into(),
                endpoint: s.endpoint.into(),
                lifespan: s.lifespan.into(),
                pairs: s.pairs,
            }),
            Err(e) => {
                undefined.push(e.to_string());
                None
            }
        };
        Self {
            snr_db,
            tp: counts.tp,
            fp: counts.fp,
            fn_: counts.fn_,
            metrics,
            undefined,
            errors,
            timing: None,
        }
    }

    pub fn counts(&self) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
        }
    }
}

const REPORT_COLUMNS: &str = "method,snr_db,tp,fp,fn,accuracy_pct,precision_pct,sensitivity_pct,f1_pct,fdr_pct,fnr_pct,\
onset_err_mean_us,onset_err_std_us,onset_err_mean_abs_us,\
endpoint_err_mean_us,endpoint_err_std_us,endpoint_err_mean_abs_us,\
lifespan_err_mean_us,lifespan_err_std_us,lifespan_err_mean_abs_us,\
time_per_event_s,time_per_frame_s";

/// Results nested by method, then round in configured order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub manifest: RunManifest,
    pub results: BTreeMap<String, Vec<RoundReport>>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One row per method and round; undefined values are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = self.manifest.comment_line();
        out.push_str(REPORT_COLUMNS);
        out.push('\n');
        for (method, rounds) in &self.results {
            for r in rounds {
                let snr = match r.snr_db {
                    Some(x) if x.is_infinite() => "inf".to_string(),
                    v => cell(v),
                };
                let mut row = vec![method.clone(), snr, r.tp.to_string(), r.fp.to_string(), r.fn_.to_string()];
                let m = r.metrics;
                row.extend(
                    [
                        m.map(|m| m.accuracy_pct),
                        m.map(|m| m.precision_pct),
                        m.map(|m| m.sensitivity_pct),
                        m.map(|m| m.f1_pct),
                        m.map(|m| m.fdr_pct),
                        m.map(|m| m.fnr_pct),
                    ]
                    .map(cell),
                );
                for pick in [
                    |e: &ErrorsUs| e.onset,
                    |e: &ErrorsUs| e.endpoint,
                    |e: &ErrorsUs| e.lifespan,
                ] {
                    let s = r.errors.as_ref().map(pick);
                    row.extend([s.map(|s| s.mean_us), s.map(|s| s.std_us), s.map(|s| s.mean_abs_us)].map(cell));
                }
                let t = r.timing;
                row.push(cell(t.and_then(|t| t.time_per_event_s)));
                row.push(cell(t.and_then(|t| t.time_per_frame_s)));
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        out
    }

    /// The same report with timings removed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for rounds in r.results.values_mut() {
            for round in rounds {
                round.timing = None;
            }
        }
        r
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [("report.json", self.to_json()), ("report.csv", self.to_csv())] {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> RunManifest {
        let mut m = RunManifest::new("detect", Settings::default());
        m.inputs.push("a.f32".into());
        m.methods.push(Method::SteZcr);
        m
    }

    fn file() -> EventFile {
        let e = AeEvent {
            onset: 25_000,
            endpoint: 30_000,
            core_end: Some(26_000),
            truncated: true,
        };
        EventFile {
            manifest: Some(manifest()),
            events: vec![EventRecord::new(Method::SteZcr, &e, 5e6)],
        }
    }

    #[test]
    fn event_record_fields() {
        let r = &file().events[0];
        assert_eq!(r.onset_s, 5e-3);
        assert_eq!(r.endpoint_s, 6e-3);
        assert_eq!(r.lifespan_s, r.endpoint_s - r.onset_s);
        let v = serde_json::to_value(r).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 7);
        assert_eq!(v["method"], "ste-zcr");
    }

    #[test]
    fn event_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let f = file();
        let j = dir.path().join("e.json");
        let c = dir.path().join("e.csv");
        fs::write(&j, f.to_json()).unwrap();
        fs::write(&c, f.to_csv()).unwrap();
        assert_eq!(EventFile::load(&j).unwrap(), f);
        assert_eq!(EventFile::load(&c).unwrap(), f);
        fs::write(&j, serde_json::to_string(&f.events).unwrap()).unwrap();
        assert_eq!(EventFile::load(&j).unwrap().events, f.events);
    }

    #[test]
    fn undefined_metrics_are_explicit() {
        let r = RoundReport::new(Some(f64::INFINITY), ConfusionCounts { tp: 0, fp: 3, fn_: 0 }, &[]);
        assert!(r.metrics.is_none() && r.errors.is_none());
        assert_eq!(r.undefined.len(), 2);
        let mut results = BTreeMap::new();
        results.insert("ia".to_string(), vec![r]);
        let rep = EvalReport {
            manifest: manifest(),
            results,
        };
        let csv = rep.to_csv();
        let row = csv.lines().last().unwrap();
        assert!(row.starts_with("ia,inf,0,3,0,,"), "{row}");
        assert_eq!(row.split(',').count(), REPORT_COLUMNS.split(',').count());
        let back: EvalReport = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
        assert!(!rep.to_json().contains("NaN"));
    }
}
