//! File IO, campaign runner and reports around `stezcr-core`.

pub mod bench;
pub mod campaign;
mod error;
pub mod io;
pub mod report;
pub mod settings;

pub use error::{Error, Result};
pub use settings::{Method, Preset, Settings};
