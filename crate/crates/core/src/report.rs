//! Analysis reports and their JSON and text renderings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::CaseConfig;
use crate::ramification::AssumptionReport;
use crate::scaffold::{CheckRecord, GmsVerdict, HopfVerdict, Precision, ScaffoldCertificate};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub config: CaseConfig,
    pub reduced: bool,
    pub u: Vec<i64>,
    pub b: Vec<i64>,
    pub m: Option<Vec<i64>>,
    pub assumption_report: Option<AssumptionReport>,
    pub eligible: bool,
    /// Tower precision the final attempt ran at.
    pub series_precision: Option<i64>,
    #[serde(rename = "vLY")]
    pub v_l_y: Option<i64>,
    pub cofactor_valuations: Option<Vec<i64>>,
    pub precision_c: Option<Precision>,
    pub generator_checks: Vec<CheckRecord>,
    pub normal_basis: Vec<CheckRecord>,
    pub certificate: Option<ScaffoldCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gms: Option<GmsVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hopf: Option<HopfVerdict>,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Text,
}

impl Report {
    /// Sorted keys, two-space indentation, trailing newline.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        let c = &self.config;
        let _ = writeln!(s, "case: p = {}, n = {}, beta = ({})", c.p, c.n, c.beta.join(", "));
        let _ = writeln!(s, "reduced: {}", self.reduced);
        let _ = writeln!(s, "upper breaks: {}", join(&self.u));
        let _ = writeln!(s, "lower breaks: {}", join(&self.b));
        match &self.m {
            Some(m) => { let _ = writeln!(s, "m: {}", join(m)); }
            None => { let _ = writeln!(s, "m: not integral"); }
        }
        let _ = writeln!(s, "eligible: {}", self.eligible);
        if let Some(a) = &self.assumption_report {
            for r in &a.reasons {
                let _ = writeln!(s, "  reason: {r}");
            }
        }
        if let Some(n) = self.series_precision {
            let _ = writeln!(s, "series precision: {n}");
        }
        if let Some(v) = self.v_l_y {
            let _ = writeln!(s, "v_L(Y): {v}");
        }
        if let Some(t) = &self.cofactor_valuations {
            let _ = writeln!(s, "cofactor valuations: {}", join(t));
        }
        if let Some(c) = self.precision_c {
            let _ = writeln!(s, "precision c: {c}");
        }
        if !self.generator_checks.is_empty() {
            let ok = self.generator_checks.iter().filter(|r| r.holds).count();
            let _ = writeln!(s, "generator checks: {ok}/{} hold", self.generator_checks.len());
        }
        for r in &self.normal_basis {
            let _ = writeln!(s, "normal basis: {}: {} ({})", r.name, if r.holds { "yes" } else { "no" }, r.actual);
        }
        match &self.certificate {
            Some(cert) => {
                let _ = writeln!(
                    s,
                    "scaffold: {} at c = {} ({} checks, psi {}, window [{}, {}))",
                    if cert.valid { "valid" } else { "invalid" },
                    cert.precision_c,
                    cert.checks,
                    cert.psi_choice,
                    cert.window[0],
                    cert.window[1]
                );
                for f in &cert.failures {
                    let _ = writeln!(s, "  failure: {f}");
                }
            }
            None => { let _ = writeln!(s, "scaffold: not verified"); }
        }
        if let Some(g) = &self.gms {
            let _ = writeln!(
                s,
                "verdict: {} (r(u_1) = {}, strengthened bound {}, divisibility {})",
                serde_plain(&g.verdict),
                g.r_u1,
                ok(g.strengthened_ok),
                ok(g.divisor_ok)
            );
        }
        if let Some(h) = &self.hopf {
            let _ = writeln!(s, "hopf verdict: {} (u_1 = -1 mod p^n: {})", serde_plain(&h.verdict), ok(h.congruence_ok));
        }
        for d in &self.diagnostics {
            let _ = writeln!(s, "diagnostic: {d}");
        }
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
        }
    }
}

fn ok(b: bool) -> &'static str {
    if b { "ok" } else { "fails" }
}

fn serde_plain<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}
