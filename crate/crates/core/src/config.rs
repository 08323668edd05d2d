//! Case configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::scaffold::PsiChoice;
use crate::series::{parse_series, LaurentSeries};
use crate::tower::MAX_TOWER_DEGREE;
use crate::witt::MAX_WITT_DEGREE;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_true")]
    pub scaffold: bool,
    /// Half-open range `[lo, hi)` of valuations; default `[-p^n, 2p^n)`.
    #[serde(default)]
    pub window: Option<[i64; 2]>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { scaffold: true, window: None }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub p: u32,
    pub n: usize,
    pub beta: Vec<String>,
    #[serde(default)]
    pub omega: Option<Vec<String>>,
    #[serde(default)]
    pub series_precision: Option<i64>,
    #[serde(default)]
    pub verify: VerifyConfig,
    /// Scaffold precision to test when `n = 1`; default `b_1`.
    #[serde(default)]
    pub c_test: Option<i64>,
    #[serde(default)]
    pub psi_choice: PsiChoice,
}

/// A validated configuration with its series parsed.
#[derive(Clone, Debug)]
pub struct Case {
    pub config: CaseConfig,
    pub field: PrimeField,
    pub beta: Vec<LaurentSeries>,
    pub omega: Option<Vec<LaurentSeries>>,
}

impl<'de> Deserialize<'de> for PsiChoice {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match String::deserialize(deserializer)?.as_str() {
            "plain" => Ok(PsiChoice::Plain),
            "corrected" => Ok(PsiChoice::Corrected),
            other => Err(serde::de::Error::custom(format!("unknown psi_choice `{other}` (expected plain or corrected)"))),
        }
    }
}

pub fn parse_config(text: &str) -> Result<CaseConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { String::new() } else { path };
        Error::config(field, e.into_inner().to_string())
    })
}

pub fn load_config(path: &Path) -> Result<Case> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)?.validate()
}

impl CaseConfig {
    pub fn validate(self) -> Result<Case> {
        let field = PrimeField::new(self.p).map_err(|_| Error::config("p", "p must be prime"))?;
        if self.n == 0 {
            return Err(Error::config("n", "n must be at least 1"));
        }
        let degree = (self.p as u64).checked_pow(self.n as u32).unwrap_or(u64::MAX);
        let cap = if self.verify.scaffold { MAX_TOWER_DEGREE } else { MAX_WITT_DEGREE };
        if degree > cap {
            let which = if self.verify.scaffold { "with verify.scaffold" } else { "without verify.scaffold" };
            return Err(Error::config("n", format!("p^n = {degree} exceeds {cap} {which}")));
        }
        if self.beta.len() != self.n {
            return Err(Error::config("beta", format!("expected {} entries, found {}", self.n, self.beta.len())));
        }
        let parse_list = |name: &str, list: &[String]| -> Result<Vec<LaurentSeries>> {
            list.iter()
                .enumerate()
                .map(|(i, s)| parse_series(s, field).map_err(|e| Error::config(format!("{name}[{i}]"), e.to_string())))
                .collect()
        };
        let beta = parse_list("beta", &self.beta)?;
        let omega = match &self.omega {
            Some(list) if list.len() != self.n => {
                return Err(Error::config("omega", format!("expected {} entries, found {}", self.n, list.len())));
            }
            Some(list) => Some(parse_list("omega", list)?),
            None => None,
        };
        if let Some(n) = self.series_precision {
            if n < 1 {
                return Err(Error::config("series_precision", "must be positive"));
            }
        }
        if let Some([lo, hi]) = self.verify.window {
            if lo >= hi {
                return Err(Error::config("verify.window", "window must satisfy lo < hi"));
            }
        }
        if let Some(c) = self.c_test {
            if self.n != 1 {
                return Err(Error::config("c_test", "only allowed when n = 1"));
            }
            if c < 1 {
                return Err(Error::config("c_test", "must be at least 1"));
            }
        }
        Ok(Case { config: self, field, beta, omega })
    }
}
