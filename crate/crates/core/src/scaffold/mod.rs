//! Digit maps, the generator `Y` and its normalized versions, the candidate
//! Galois scaffold and its verification, and the freeness/Hopf verdicts.

pub mod digits;
pub mod generator;
pub mod group_ring;
pub mod verdict;
pub mod verify;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ramification::BreakData;
use crate::series::Valuation;

pub use digits::DigitMaps;
pub use generator::GeneratorData;
pub use group_ring::GroupRingElement;
pub use verdict::{gms_verdict, hopf_verdict, GmsOutcome, GmsVerdict, HopfOutcome, HopfVerdict};
pub use verify::{verify_scaffold, AxiomRecord, PsiChoice, ScaffoldCertificate, ScaffoldInputs};

/// One named identity or inequality with what was expected and what was found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub holds: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, expected: impl Into<String>, actual: impl Into<String>, holds: bool) -> Self {
        CheckRecord { name: name.into(), expected: expected.into(), actual: actual.into(), holds }
    }

    pub fn equal(name: impl Into<String>, expected: i64, actual: i64) -> Self {
        Self::new(name, expected.to_string(), actual.to_string(), expected == actual)
    }

    /// `value >= bound`; a precision error when the tracked precision cannot decide.
    pub fn at_least(name: impl Into<String>, bound: i64, value: Valuation) -> Result<Self> {
        let name = name.into();
        match value.known_ge(bound) {
            Some(holds) => Ok(Self::new(name, format!(">= {bound}"), value.to_string(), holds)),
            None => Err(Error::precision(format!("{name}: value {value} cannot be compared with {bound}"))),
        }
    }
}

/// Scaffold precision: `min(b_{i+1} - p^n u_i)`, unbounded for `n = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Bounded(i64),
    Unbounded,
}

impl Precision {
    pub fn bounded(self) -> Option<i64> {
        match self {
            Precision::Bounded(c) => Some(c),
            Precision::Unbounded => None,
        }
    }
}

impl Serialize for Precision {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Precision::Bounded(c) => serializer.serialize_i64(*c),
            Precision::Unbounded => serializer.serialize_str("unbounded"),
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Precision::Bounded(c) => write!(f, "{c}"),
            Precision::Unbounded => f.write_str("unbounded"),
        }
    }
}

pub fn scaffold_precision(breaks: &BreakData) -> Precision {
    let q = breaks.degree();
    (1..breaks.n)
        .map(|i| breaks.b[i] - q * breaks.u[i - 1])
        .min()
        .map_or(Precision::Unbounded, Precision::Bounded)
}
