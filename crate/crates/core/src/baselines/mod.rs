//! Comparison detectors sharing the [`AeEvent`](crate::AeEvent) contract:
//! instantaneous-amplitude thresholding, STA/LTA, and a two-step AIC picker.

mod aic;
mod ia;
mod stalta;
mod timer;

pub use aic::{aic_detect, aic_pick, allen_cf, AicConfig};
pub use ia::{envelope, ia_detect, IaConfig};
pub use stalta::{sta_lta_ratio, stalta_detect, StaLtaConfig};
pub use timer::{timer_hits, TimerHit};
