//! Serializable method settings in the units used on the command line
//! (microseconds, percent), with the two calibration presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use stezcr_core::detector::{CoreExit, IzctMode};
use stezcr_core::units::micros_to_samples;
use stezcr_core::{
    aic_detect, detect, ia_detect, stalta_detect, AeEvent, AicConfig, IaConfig, SampledSignal,
    StaLtaConfig, StezcrConfig, WindowFamily, WindowSpec,
};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "ste-zcr")]
    SteZcr,
    #[serde(rename = "ia")]
    Ia,
    #[serde(rename = "sta-lta")]
    StaLta,
    #[serde(rename = "aic")]
    Aic,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::SteZcr, Method::Ia, Method::StaLta, Method::Aic];

    pub fn name(self) -> &'static str {
        match self {
            Method::SteZcr => "ste-zcr",
            Method::Ia => "ia",
            Method::StaLta => "sta-lta",
            Method::Aic => "aic",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown method `{s}` (ste-zcr, ia, sta-lta, aic)")))
    }
}

/// Parses a comma-separated method list; `all` selects every method.
pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    if s == "all" {
        return Ok(Method::ALL.to_vec());
    }
    let mut out: Vec<Method> = s.split(',').map(|m| m.trim().parse()).collect::<Result<_>>()?;
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Hamming,
    Hann,
    Rect,
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamming" => Ok(Window::Hamming),
            "hann" => Ok(Window::Hann),
            "rect" | "rectangular" => Ok(Window::Rect),
            _ => Err(Error::Usage(format!("unknown window `{s}` (hamming, hann, rect)"))),
        }
    }
}

impl From<Window> for WindowFamily {
    fn from(w: Window) -> Self {
        match w {
            Window::Hamming => WindowFamily::Hamming,
            Window::Hann => WindowFamily::Hann,
            Window::Rect => WindowFamily::Rectangular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteZcrSettings {
    /// Window-mean power, V².
    pub itu: f64,
    /// Percent of the noise ZCR level; ignored when `izct_abs` is set.
    pub izct_pct: f64,
    /// Absolute zero-crossing threshold (crossings per sample).
    pub izct_abs: Option<f64>,
    pub alpha: f64,
    pub early_noise_us: f64,
    /// STE and STZCR window length.
    pub sta_us: f64,
    pub window: Window,
    pub hop: usize,
    pub min_event_us: f64,
    pub retrigger_ratio: f64,
    /// Close the provisional core on the bare preset instead of the
    /// noise-adjusted ITU.
    pub preset_core_exit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IaSettings {
    /// Volts.
    pub threshold: f64,
    pub hdt_us: f64,
    pub hlt_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaLtaSettings {
    pub trigger: f64,
    pub detrigger: f64,
    pub sta_us: f64,
    pub lta_us: f64,
    pub pre_us: f64,
    pub post_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AicSettings {
    pub threshold: f64,
    pub window1_us: f64,
    pub end_delay1_us: f64,
    pub start_delay2_us: f64,
    pub end_delay2_us: f64,
    pub weighting_r: f64,
    pub hdt_us: f64,
    pub hlt_us: f64,
    pub sta_us: f64,
    pub lta_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    HsuNielsen,
    FieldData,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hsu-nielsen" => Ok(Preset::HsuNielsen),
            "field-data" => Ok(Preset::FieldData),
            _ => Err(Error::Usage(format!("unknown preset `{s}` (hsu-nielsen, field-data)"))),
        }
    }
}

/// Settings of all four methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub ste_zcr: SteZcrSettings,
    pub ia: IaSettings,
    pub sta_lta: StaLtaSettings,
    pub aic: AicSettings,
}

impl Default for Settings {
    fn default() -> Self {
        Settings::preset(Preset::HsuNielsen)
    }
}

fn secs(us: f64) -> f64 {
    us / 1e6
}

impl Settings {
    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::HsuNielsen => Settings {
                ste_zcr: SteZcrSettings {
                    itu: 2e-4,
                    izct_pct: 70.0,
                    izct_abs: None,
                    alpha: 4.0,
                    early_noise_us: 2000.0,
                    sta_us: 20.0,
                    window: Window::Hamming,
                    hop: 1,
                    min_event_us: 0.0,
                    retrigger_ratio: 2.0,
                    preset_core_exit: false,
                },
                ia: IaSettings {
                    threshold: 3e-3,
                    hdt_us: 1000.0,
                    hlt_us: 10_000.0,
                },
                sta_lta: StaLtaSettings {
                    trigger: 4.0,
                    detrigger: 1.5,
                    sta_us: 75.0,
                    lta_us: 1e6,
                    pre_us: 15.0,
                    post_us: 10_000.0,
                },
                aic: AicSettings {
                    threshold: 4.0,
                    window1_us: 1500.0,
                    end_delay1_us: 25.0,
                    start_delay2_us: 100.0,
                    end_delay2_us: 10.0,
                    weighting_r: 4.0,
                    hdt_us: 100.0,
                    hlt_us: 10_000.0,
                    sta_us: 75.0,
                    lta_us: 1e6,
                },
            },
            Preset::FieldData => Settings {
                ste_zcr: SteZcrSettings {
                    itu: 55e-6,
                    izct_pct: 80.0,
                    izct_abs: None,
                    alpha: 1.0,
                    early_noise_us: 5.0,
                    sta_us: 15.0,
                    window: Window::Hamming,
                    hop: 1,
                    min_event_us: 0.0,
                    retrigger_ratio: 2.0,
                    preset_core_exit: false,
                },
                ia: IaSettings {
                    threshold: 2.25e-3,
                    hdt_us: 100.0,
                    hlt_us: 15.0,
                },
                sta_lta: StaLtaSettings {
                    trigger: 4.0,
                    detrigger: 1.5,
                    sta_us: 25.0,
                    lta_us: 10_000.0,
                    pre_us: 1.0,
                    post_us: 0.5,
                },
                aic: AicSettings {
                    threshold: 4.0,
                    window1_us: 75.0,
                    end_delay1_us: 10.0,
                    start_delay2_us: 20.0,
                    end_delay2_us: 5.0,
                    weighting_r: 4.0,
                    hdt_us: 100.0,
                    hlt_us: 15.0,
                    sta_us: 25.0,
                    lta_us: 10_000.0,
                },
            },
        }
    }

    pub fn ste_zcr_config(&self, sample_rate: f64) -> Result<StezcrConfig> {
        let s = &self.ste_zcr;
        let n = micros_to_samples(s.sta_us, sample_rate);
        let window = WindowSpec::new(s.window.into(), n, s.hop)?;
        let (izct_mode, izct) = match s.izct_abs {
            Some(v) => (IzctMode::Absolute, v),
            None => (IzctMode::PercentOfNoise, s.izct_pct / 100.0),
        };
        let cfg = StezcrConfig {
            itu: s.itu,
            izct_mode,
            izct,
            alpha: s.alpha,
            early_noise_span: secs(s.early_noise_us),
            window,
            zcr_window: window,
            min_event_span: secs(s.min_event_us),
            core_exit: if s.preset_core_exit {
                CoreExit::Preset
            } else {
                CoreExit::Adjusted
            },
            retrigger_ratio: s.retrigger_ratio,
        };
        cfg.validate(sample_rate)?;
        Ok(cfg)
    }

    pub fn ia_config(&self) -> Result<IaConfig> {
        let cfg = IaConfig {
            threshold: self.ia.threshold,
            hdt: secs(self.ia.hdt_us),
            hlt: secs(self.ia.hlt_us),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sta_lta_config(&self) -> Result<StaLtaConfig> {
        let s = &self.sta_lta;
        let cfg = StaLtaConfig {
            trigger: s.trigger,
            detrigger: s.detrigger,
            sta_span: secs(s.sta_us),
            lta_span: secs(s.lta_us),
            pre_event: secs(s.pre_us),
            post_event: secs(s.post_us),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn aic_config(&self) -> Result<AicConfig> {
        let s = &self.aic;
        let cfg = AicConfig {
            coarse_threshold: s.threshold,
            window1_span: secs(s.window1_us),
            end_delay1: secs(s.end_delay1_us),
            start_delay2: secs(s.start_delay2_us),
            end_delay2: secs(s.end_delay2_us),
            weighting_r: s.weighting_r,
            hdt: secs(s.hdt_us),
            hlt: secs(s.hlt_us),
            cf_sta_span: secs(s.sta_us),
            cf_lta_span: secs(s.lta_us),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every value that `method` will use.
    pub fn validate(&self, method: Method, sample_rate: f64) -> Result<()> {
        match method {
            Method::SteZcr => self.ste_zcr_config(sample_rate).map(drop),
            Method::Ia => self.ia_config().map(drop),
            Method::StaLta => self.sta_lta_config().map(drop),
            Method::Aic => self.aic_config().map(drop),
        }
    }

    /// The settings block of one method, for manifests.
    pub fn for_method(&self, method: Method) -> serde_json::Value {
        let v = match method {
            Method::SteZcr => serde_json::to_value(self.ste_zcr),
            Method::Ia => serde_json::to_value(self.ia),
            Method::StaLta => serde_json::to_value(self.sta_lta),
            Method::Aic => serde_json::to_value(self.aic),
        };
        v.expect("settings serialize")
    }
}

/// Runs one detector with these settings.
pub fn run_method(method: Method, settings: &Settings, signal: &SampledSignal) -> Result<Vec<AeEvent>> {
    let fs = signal.sample_rate();
    Ok(match method {
        Method::SteZcr => detect(signal, &settings.ste_zcr_config(fs)?)?,
        Method::Ia => ia_detect(signal, &settings.ia_config()?)?,
        Method::StaLta => stalta_detect(signal, &settings.sta_lta_config()?)?,
        Method::Aic => aic_detect(signal, &settings.aic_config()?)?,
    })
}
