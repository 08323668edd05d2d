//! The analysis pipeline: reduce-check, breaks, decomposition, assumptions,
//! tower, generator, precision, scaffold verification, verdicts.

use crate::config::Case;
use crate::error::{Error, Result};
use crate::ramification::{check_assumptions, check_reduced, decompose, BreakData, Decomposition};
use crate::report::Report;
use crate::scaffold::{
    gms_verdict, hopf_verdict, scaffold_precision, verify_scaffold, CheckRecord, DigitMaps, GeneratorData, Precision,
    ScaffoldCertificate, ScaffoldInputs,
};
use crate::series::Valuation;
use crate::tower::{Tower, TowerConfig, MAX_TOWER_DEGREE};

/// Retries after the first attempt, each at double the precision.
pub const MAX_PRECISION_RETRIES: u32 = 3;

pub fn default_precision(breaks: &BreakData) -> i64 {
    4 * breaks.degree() * breaks.u[breaks.n - 1] + 64
}

struct Diagnostics(Vec<String>);

impl Diagnostics {
    fn stage(&mut self, name: &str, message: impl std::fmt::Display) {
        self.0.push(format!("stage {name}: {message}"));
    }
}

struct TowerOutcome {
    v_l_y: i64,
    cofactor_valuations: Vec<i64>,
    generator_checks: Vec<CheckRecord>,
    normal_basis: Vec<CheckRecord>,
    certificate: Option<ScaffoldCertificate>,
    log: Vec<(&'static str, String)>,
}

pub fn analyze(case: &Case) -> Result<Report> {
    let cfg = &case.config;
    let p = cfg.p;
    let mut diag = Diagnostics(Vec::new());
    diag.stage("parse", format!("p = {p}, n = {}, beta parsed", cfg.n));
    let reduced = check_reduced(&case.beta, p);
    let mut report = Report {
        config: cfg.clone(),
        reduced: reduced.reduced,
        u: Vec::new(),
        b: Vec::new(),
        m: None,
        assumption_report: None,
        eligible: false,
        series_precision: None,
        v_l_y: None,
        cofactor_valuations: None,
        precision_c: None,
        generator_checks: Vec::new(),
        normal_basis: Vec::new(),
        certificate: None,
        gms: None,
        hopf: None,
        diagnostics: Vec::new(),
    };
    if !reduced.reduced {
        let bad: Vec<String> = reduced.failures.iter().map(|(i, v)| format!("beta[{i}] has valuation {v}")).collect();
        diag.stage("reduce-check", format!("not reduced: {}", bad.join(", ")));
        report.diagnostics = diag.0;
        return Ok(report);
    }
    diag.stage("reduce-check", "reduced");

    let breaks = match BreakData::from_beta(&case.beta, p) {
        Ok(b) => b,
        Err(Error::InvalidInput(msg)) => {
            diag.stage("breaks", format!("not computed: {msg}"));
            report.diagnostics = diag.0;
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    diag.stage("breaks", format!("u = {:?}, b = {:?}", breaks.u, breaks.b));
    report.u = breaks.u.clone();
    report.b = breaks.b.clone();
    report.m = breaks.m.clone();

    let dec = match decompose(&case.beta, p, case.omega.as_deref()) {
        Ok(d) => {
            diag.stage("decompose", format!("omega = ({})", d.omega.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(", ")));
            Some(d)
        }
        Err(e) => {
            diag.stage("decompose", e);
            None
        }
    };
    let assumptions = check_assumptions(&case.beta, &breaks, dec.as_ref());
    report.eligible = assumptions.eligible;
    if assumptions.eligible {
        diag.stage("assumptions", "eligible");
    } else {
        diag.stage("assumptions", format!("ineligible: {}", assumptions.reasons.join("; ")));
    }
    report.assumption_report = Some(assumptions);
    let Some(dec) = dec.filter(|_| report.eligible) else {
        report.diagnostics = diag.0;
        return Ok(report);
    };

    let c = scaffold_precision(&breaks);
    report.precision_c = Some(c);
    if breaks.degree() as u64 > MAX_TOWER_DEGREE {
        diag.stage("tower", format!("skipped: p^n = {} exceeds {MAX_TOWER_DEGREE}", breaks.degree()));
        diag.stage("precision", format!("c = {c}"));
    } else {
        let start = cfg.series_precision.unwrap_or_else(|| default_precision(&breaks));
        let (precision, outcome) = with_precision_retries(start, &mut diag.0, |n| tower_stage(case, &breaks, &dec, c, n))?;
        for (stage, msg) in &outcome.log {
            diag.stage(stage, msg);
        }
        report.series_precision = Some(precision);
        report.v_l_y = Some(outcome.v_l_y);
        report.cofactor_valuations = Some(outcome.cofactor_valuations);
        report.generator_checks = outcome.generator_checks;
        report.normal_basis = outcome.normal_basis;
        report.certificate = outcome.certificate;
    }

    let gms = gms_verdict(&breaks, c);
    let hopf = hopf_verdict(&breaks, &gms);
    diag.stage("verdicts", format!("gms {:?}, hopf {:?}", gms.verdict, hopf.verdict).to_lowercase());
    report.gms = Some(gms);
    report.hopf = Some(hopf);
    report.diagnostics = diag.0;
    Ok(report)
}

/// Runs `attempt` at `start`, doubling the precision after each precision
/// exhaustion, at most `MAX_PRECISION_RETRIES` times.
pub fn with_precision_retries<T>(
    start: i64,
    log: &mut Vec<String>,
    mut attempt: impl FnMut(i64) -> Result<T>,
) -> Result<(i64, T)> {
    let mut precision = start;
    let mut retries = 0;
    loop {
        match attempt(precision) {
            Ok(out) => return Ok((precision, out)),
            Err(Error::PrecisionExhausted(msg)) if retries < MAX_PRECISION_RETRIES => {
                log.push(format!("stage tower: precision {precision} exhausted ({msg}); retrying at {}", 2 * precision));
                precision *= 2;
                retries += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn require_all(records: &[CheckRecord], what: &str) -> Result<()> {
    let failed: Vec<String> = records
        .iter()
        .filter(|r| !r.holds)
        .map(|r| format!("{} (expected {}, found {})", r.name, r.expected, r.actual))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::contract(format!("{what}: {}", failed.join("; "))))
    }
}

fn tower_stage(case: &Case, breaks: &BreakData, dec: &Decomposition, c: Precision, precision: i64) -> Result<TowerOutcome> {
    let cfg = &case.config;
    let mut log = Vec::new();
    let tower = Tower::build(&TowerConfig::new(case.field, case.beta.clone(), precision))?;
    log.push(("tower", format!("degree {}, series precision {precision}", tower.degree())));

    let gen = GeneratorData::build(&tower, dec)?;
    let mut generator_checks = gen.check_generator(&tower, breaks)?;
    let c_used = c.bounded().unwrap_or_else(|| cfg.c_test.unwrap_or(breaks.b[0]));
    let bounds = gen.check_normalized(&tower, breaks, Some(c_used))?;
    require_all(&generator_checks, "generator identity failed")?;
    require_all(&bounds, "main/error term bound failed")?;
    let v_l_y = gen.y.valuation_l()?;
    let cofactor_valuations = gen
        .top_cofactors()
        .iter()
        .map(|t| match t.valuation() {
            Valuation::Finite(v) => Ok(v),
            other => Err(Error::precision(format!("cofactor valuation {other}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let normal_basis = gen.normal_basis_checks()?;
    let nb = if normal_basis.first().is_some_and(|r| r.holds) {
        "conjugates of Y are independent".to_string()
    } else {
        "conjugates of Y are dependent".to_string()
    };
    log.push(("generator", format!("v_L(Y) = {v_l_y}, {} identities hold, {nb}", generator_checks.len())));
    log.push(("precision", format!("c = {c}")));

    let certificate = if cfg.verify.scaffold {
        let digits = DigitMaps::new(&breaks.b, cfg.p)?;
        let q = breaks.degree();
        let window = cfg.verify.window.map_or((-q, 2 * q), |[lo, hi]| (lo, hi));
        let inputs = ScaffoldInputs { tower: &tower, generator: &gen, digits: &digits, mu_eps_bounds: bounds };
        let cert = verify_scaffold(inputs, c_used, window, cfg.psi_choice, &breaks.b)?;
        log.push((
            "verification",
            format!("{} at c = {c_used}, {} checks, {} failures", if cert.valid { "valid" } else { "invalid" }, cert.checks, cert.failures.len()),
        ));
        Some(cert)
    } else {
        generator_checks.extend(bounds);
        log.push(("verification", "skipped".to_string()));
        None
    };
    Ok(TowerOutcome { v_l_y, cofactor_valuations, generator_checks, normal_basis, certificate, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::scaffold::{GmsOutcome, HopfOutcome};

    fn run(text: &str) -> Report {
        analyze(&parse_config(text).unwrap().validate().unwrap()).unwrap()
    }

    #[test]
    fn family_a_and_b() {
        let a = run(r#"{"p": 2, "n": 2, "beta": ["t^-1", "t^-3"]}"#);
        assert!(a.eligible);
        assert_eq!(a.precision_c, Some(Precision::Bounded(1)));
        assert_eq!(a.v_l_y, Some(-5));
        assert!(a.certificate.as_ref().unwrap().valid);
        assert_eq!(a.gms.as_ref().unwrap().verdict, GmsOutcome::Free);
        assert_eq!(a.hopf.as_ref().unwrap().verdict, HopfOutcome::Unknown);
        let b = run(r#"{"p": 2, "n": 2, "beta": ["t^-3", "t^-9"]}"#);
        assert_eq!(b.precision_c, Some(Precision::Bounded(3)));
        assert_eq!(b.hopf.as_ref().unwrap().verdict, HopfOutcome::Hopf);
    }

    #[test]
    fn ineligible_stops_after_assumptions() {
        let r = run(r#"{"p": 2, "n": 2, "beta": ["t^-3", "t^-5"]}"#);
        assert!(!r.eligible);
        assert_eq!(r.u, vec![3, 6]);
        assert!(r.gms.is_none() && r.certificate.is_none());
        assert!(r.diagnostics.last().unwrap().starts_with("stage assumptions"));
    }

    #[test]
    fn stage_order() {
        let r = run(r#"{"p": 2, "n": 2, "beta": ["t^-1", "t^-3"]}"#);
        let stages: Vec<&str> =
            r.diagnostics.iter().map(|d| d.trim_start_matches("stage ").split(':').next().unwrap()).collect();
        assert_eq!(
            stages,
            ["parse", "reduce-check", "breaks", "decompose", "assumptions", "tower", "generator", "precision", "verification", "verdicts"]
        );
    }

    #[test]
    fn precision_retries() {
        let mut log = Vec::new();
        let need = |n: i64| if n >= 40 { Ok(n) } else { Err(Error::precision("short")) };
        assert_eq!(with_precision_retries(10, &mut log, need).unwrap(), (40, 40));
        assert_eq!(log.len(), 2);
        let mut log = Vec::new();
        assert!(matches!(with_precision_retries(1, &mut log, need), Err(Error::PrecisionExhausted(_))));
        assert_eq!(log.len(), 3);
        let mut log = Vec::new();
        let broken = |_: i64| -> Result<()> { Err(Error::contract("bad")) };
        assert!(matches!(with_precision_retries(1, &mut log, broken), Err(Error::ContractViolation(_))));
        assert!(log.is_empty());
    }

    #[test]
    fn family_d_at_low_precision() {
        let r = run(r#"{"p": 2, "n": 3, "beta": ["t^-1", "t^-5", "t^-13"], "series_precision": 4}"#);
        assert!(r.certificate.unwrap().valid);
    }

    #[test]
    fn degree_one_uses_test_precision() {
        let r = run(r#"{"p": 3, "n": 1, "beta": ["t^-2"]}"#);
        assert_eq!(r.precision_c, Some(Precision::Unbounded));
        assert_eq!(r.certificate.unwrap().precision_c, 2);
    }

    #[test]
    fn deterministic_json() {
        let text = r#"{"p": 3, "n": 2, "beta": ["t^-1", "t^-4"]}"#;
        assert_eq!(run(text).to_json(), run(text).to_json());
    }
}
