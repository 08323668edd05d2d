//! Artin-Schreier-Witt extensions of F_p((t)): ramification data, the
//! determinant normal-basis generator, and Galois scaffold verification.

pub mod config;
pub mod error;
pub mod field;
pub mod pipeline;
pub mod ramification;
pub mod report;
pub mod scaffold;
pub mod series;
pub mod tower;
pub mod witt;

pub use config::{load_config, parse_config, Case, CaseConfig};
pub use error::{Error, Result};
pub use pipeline::analyze;
pub use report::{Format, Report};
pub use field::{Fp, PrimeField};
pub use series::{parse_series, LaurentSeries, Valuation};
