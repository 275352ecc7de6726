//! Waveform and ground-truth files.
//!
//! Signals are read from 16-bit PCM mono WAV (full scale = ±1 V), headerless
//! CSV of amplitudes, or raw little-endian `f32`. CSV and raw files carry
//! their sample rate in a sidecar `<file>.rate` holding one number in Hz.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use stezcr_core::eval::{GroundTruth, Interval};
use stezcr_core::SampledSignal;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalFormat {
    Wav16,
    Csv,
    RawF32,
}

impl SignalFormat {
    /// Guess from the extension: `.wav`, `.csv`, anything else is raw `f32`.
    pub fn from_path(path: &Path) -> Self {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("wav") => SignalFormat::Wav16,
            Some("csv") => SignalFormat::Csv,
            _ => SignalFormat::RawF32,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            SignalFormat::Wav16 => "wav",
            SignalFormat::Csv => "csv",
            SignalFormat::RawF32 => "f32",
        }
    }
}

impl FromStr for SignalFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wav" | "wav16" => Ok(SignalFormat::Wav16),
            "csv" => Ok(SignalFormat::Csv),
            "raw" | "f32" | "raw-f32" => Ok(SignalFormat::RawF32),
            _ => Err(Error::Usage(format!("unknown signal format `{s}` (wav16, csv, raw-f32)"))),
        }
    }
}

pub fn rate_sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".rate");
    PathBuf::from(s)
}

pub fn truth_sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".truth.csv");
    PathBuf::from(s)
}

fn read_rate(path: &Path) -> Result<f64> {
    let side = rate_sidecar(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::format(&side, format!("bad sample rate `{}`", text.trim())))
}

/// Loads a waveform. `rate` overrides the sidecar for CSV and raw input.
pub fn load_signal(path: &Path, format: SignalFormat, rate: Option<f64>) -> Result<SampledSignal> {
    let (samples, fs) = match format {
        SignalFormat::Wav16 => {
            let mut reader = hound::WavReader::open(path).map_err(|e| wav_error(path, e))?;
            let spec = reader.spec();
            if spec.channels != 1 {
                return Err(Error::format(path, format!("expected mono, found {} channels", spec.channels)));
            }
            if spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
                return Err(Error::format(path, "expected 16-bit integer PCM"));
            }
            let samples = reader
                .samples::<i16>()
                .map(|s| s.map(|v| v as f64 / 32768.0))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| wav_error(path, e))?;
            (samples, rate.unwrap_or(spec.sample_rate as f64))
        }
        SignalFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .comment(Some(b'#'))
                .trim(csv::Trim::All)
                .from_path(path)
                .map_err(|e| csv_error(path, e))?;
            let mut samples = Vec::new();
            for record in reader.records() {
                let record = record.map_err(|e| csv_error(path, e))?;
                for cell in record.iter().filter(|c| !c.is_empty()) {
                    let v = cell
                        .parse::<f64>()
                        .map_err(|_| Error::format(path, format!("non-numeric cell `{cell}`")))?;
                    samples.push(v);
                }
            }
            (samples, rate.map_or_else(|| read_rate(path), Ok)?)
        }
        SignalFormat::RawF32 => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            if bytes.len() % 4 != 0 {
                return Err(Error::format(path, format!("{} bytes is not a whole number of f32", bytes.len())));
            }
            let samples = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            (samples, rate.map_or_else(|| read_rate(path), Ok)?)
        }
    };
    Ok(SampledSignal::new(samples, fs)?)
}

/// Writes a waveform plus, for CSV and raw output, its `.rate` sidecar.
/// WAV output clips to ±1 V.
pub fn save_signal(path: &Path, signal: &SampledSignal, format: SignalFormat) -> Result<()> {
    let io = |e| Error::io(path, e);
    match format {
        SignalFormat::Wav16 => {
            let spec = hound::WavSpec {
                channels: 1,
                sample_rate: signal.sample_rate().round() as u32,
                bits_per_sample: 16,
                sample_format: hound::SampleFormat::Int,
            };
            let mut w = hound::WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
            for &v in signal.samples() {
                let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                w.write_sample(q).map_err(|e| wav_error(path, e))?;
            }
            w.finalize().map_err(|e| wav_error(path, e))?;
            return Ok(());
        }
        SignalFormat::Csv => {
            let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
            for v in signal.samples() {
                writeln!(w, "{v}").map_err(io)?;
            }
            w.flush().map_err(io)?;
        }
        SignalFormat::RawF32 => {
            let bytes: Vec<u8> = signal
                .samples()
                .iter()
                .flat_map(|&v| (v as f32).to_le_bytes())
                .collect();
            fs::write(path, bytes).map_err(io)?;
        }
    }
    let side = rate_sidecar(path);
    fs::write(&side, format!("{}\n", signal.sample_rate())).map_err(|e| Error::io(&side, e))
}

/// Truth CSV: an `onset_s,endpoint_s` header, then one row per event.
pub fn save_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    let mut out = String::from("onset_s,endpoint_s\n");
    for e in truth.events() {
        out.push_str(&format!("{},{}\n", e.onset, e.endpoint));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads `onset,endpoint` rows in seconds; a non-numeric first row is taken
/// as a header and `#` lines are skipped.
pub fn load_truth(path: &Path) -> Result<GroundTruth> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut events = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() < 2 {
            return Err(Error::format(path, format!("row {} needs onset and endpoint", i + 1)));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => events.push(Interval::new(a, b)),
            _ if i == 0 => continue,
            _ => return Err(Error::format(path, format!("row {} is not numeric", i + 1))),
        }
    }
    GroundTruth::new(events).map_err(|e| Error::format(path, e.to_string()))
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::format(path, format!("{other:?}")),
        }
    } else {
        Error::format(path, e.to_string())
    }
}
