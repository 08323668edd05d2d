//! Candidate scaffold `(Psi_i, lambda_t)` and a direct check of the scaffold
//! axioms over a window of valuations.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{LaurentSeries, Valuation};
use crate::tower::{Tower, TowerElement};

use super::{CheckRecord, DigitMaps, GeneratorData, GroupRingElement};

/// How the operators `Psi_i` are built.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiChoice {
    /// `Psi_i = sigma^{p^{i-1}} - 1`.
    Plain,
    /// `Psi_i = log(Theta_i)`, truncated below degree p, with
    /// `Theta_n = sigma^{p^{n-1}}` and
    /// `Theta_i = sigma^{p^{i-1}} * prod_{j>i} Theta_j^{[-mu_ij]}`, where
    /// `Theta^{[x]}` is the truncated binomial power. `Theta_i` shifts `X_i`
    /// by 1 while cancelling the main terms `mu_ij` on the higher `X_j`, and
    /// the logarithm turns the shift into `d/dX_i` on powers below p.
    #[default]
    Corrected,
}

impl std::fmt::Display for PsiChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PsiChoice::Plain => "plain",
            PsiChoice::Corrected => "corrected",
        })
    }
}

pub fn build_psi(choice: PsiChoice, tower: &Tower, gen: &GeneratorData) -> Vec<GroupRingElement> {
    let n = tower.n();
    let q = tower.degree() as usize;
    let field = tower.field();
    let sigma = |i: usize| GroupRingElement::sigma_power(field, q, (tower.p() as u64).pow(i as u32 - 1));
    let one = GroupRingElement::one(field, q);
    match choice {
        PsiChoice::Plain => (1..=n).map(|i| sigma(i).sub(&one)).collect(),
        PsiChoice::Corrected => {
            let mut theta: Vec<GroupRingElement> = vec![one.clone(); n];
            for i in (1..=n).rev() {
                let mut th = sigma(i);
                for j in i + 1..=n {
                    th = th.mul(&theta[j - 1].truncated_power(&gen.main_terms[i - 1][j - 1].neg()));
                }
                theta[i - 1] = th;
            }
            theta.iter().map(GroupRingElement::truncated_log).collect()
        }
    }
}

/// One scaffold-axiom check. `i` and `t` are set when the check concerns
/// that operator index or valuation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomRecord {
    pub axiom: String,
    pub i: Option<usize>,
    pub t: Option<i64>,
    pub expected: String,
    pub actual: String,
    pub holds: bool,
    /// The unit `u_it` when the check located one.
    pub unit: Option<LaurentSeries>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicityRecord {
    pub i: usize,
    pub t: i64,
    /// Whether `u_it = u_{i,t+p^n}`.
    pub periodic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaffoldCertificate {
    pub precision_c: i64,
    pub psi_choice: PsiChoice,
    pub window: [i64; 2],
    pub lambda_table: BTreeMap<i64, String>,
    pub axiom_results: Vec<AxiomRecord>,
    pub mu_eps_bounds: Vec<CheckRecord>,
    pub unit_periodicity: Vec<PeriodicityRecord>,
    pub checks: usize,
    pub failures: Vec<String>,
    pub valid: bool,
}

/// Everything the verification needs, built once per case.
pub struct ScaffoldInputs<'a> {
    pub tower: &'a Arc<Tower>,
    pub generator: &'a GeneratorData,
    pub digits: &'a DigitMaps,
    pub mu_eps_bounds: Vec<CheckRecord>,
}

struct Lambdas {
    /// `prod_i X_i^{s_(n-i)}` for every `s`.
    monomials: Vec<TowerElement>,
}

impl Lambdas {
    fn new(tower: &Arc<Tower>, gen: &GeneratorData, digits: &DigitMaps) -> Self {
        let n = tower.n();
        let monomials = (0..digits.modulus() as usize)
            .map(|s| {
                (1..=n).fold(tower.one(), |acc, i| {
                    acc.mul(&gen.normalized_in_top[i - 1].pow(digits.digit(s, n - i) as u64))
                })
            })
            .collect();
        Lambdas { monomials }
    }

    /// `(s, w)` with `lambda_t = t^w * monomials[s]`.
    fn shape(digits: &DigitMaps, t: i64) -> Result<(usize, i64)> {
        let s = digits.exponents_for(t);
        let num = t + digits.break_sum(s);
        if num.rem_euclid(digits.modulus()) != 0 {
            return Err(Error::contract(format!("lambda exponent for t = {t} is not integral")));
        }
        Ok((s, num / digits.modulus()))
    }

    fn lambda(&self, digits: &DigitMaps, t: i64) -> Result<TowerElement> {
        let (s, w) = Self::shape(digits, t)?;
        Ok(self.monomials[s].shift(w))
    }
}

/// Coordinates of `z` in the basis of X-monomials `monomials[s]`. The
/// leading term of `monomials[s]` is the tower basis monomial whose x_k
/// exponent is `s_(n-1-k)`, and all its other terms sit lower in the
/// mixed-radix order, so the coordinates come out by back substitution.
fn monomial_coordinates(z: &TowerElement, lambdas: &Lambdas, digits: &DigitMaps) -> Vec<LaurentSeries> {
    let tower = z.tower();
    let n = tower.n();
    let field = tower.field();
    let mut rest = z.clone();
    let mut coords = vec![LaurentSeries::zero(field); lambdas.monomials.len()];
    for idx in (0..tower.degree() as usize).rev() {
        let c = rest.coefficient(&tower.exponents(idx)).clone();
        if c.has_no_known_terms() {
            continue;
        }
        let e = tower.exponents(idx);
        let s: usize = (0..n).map(|k| e[k] as usize * (digits.p() as usize).pow((n - 1 - k) as u32)).sum();
        rest = rest.sub(&lambdas.monomials[s].scale(&c));
        let mut cleared = rest.coefficients().to_vec();
        cleared[idx] = LaurentSeries::zero(field);
        rest = TowerElement::from_coefficients(tower, cleared);
        coords[s] = c;
    }
    coords
}

fn valuation_record(axiom: &str, i: Option<usize>, t: i64, bound: i64, v: Valuation, unit: Option<LaurentSeries>) -> Result<AxiomRecord> {
    let holds = v.known_ge(bound).ok_or_else(|| {
        Error::precision(format!("{axiom} at i = {i:?}, t = {t}: valuation {v} cannot be compared with {bound}"))
    })?;
    Ok(AxiomRecord {
        axiom: axiom.into(),
        i,
        t: Some(t),
        expected: format!(">= {bound}"),
        actual: v.to_string(),
        holds,
        unit,
    })
}

fn check_congruence(
    i: usize,
    t: i64,
    c: i64,
    psi: &GroupRingElement,
    lambdas: &Lambdas,
    digits: &DigitMaps,
    breaks_b: &[i64],
) -> Result<AxiomRecord> {
    let n = digits.n();
    let p = digits.p() as i64;
    let image = psi.apply(&lambdas.lambda(digits, t)?)?;
    let target = t + p.pow((n - i) as u32) * breaks_b[i - 1];
    let s = digits.exponents_for(t);
    if digits.digit(s, n - i) == 0 {
        return valuation_record("vanishing", Some(i), t, target + c, image.valuation()?, None);
    }
    let (s_target, w_target) = Lambdas::shape(digits, target)?;
    let coords = monomial_coordinates(&image, lambdas, digits);
    let unit = coords[s_target].shift(-w_target);
    if unit.valuation() != Valuation::Finite(0) {
        return Ok(AxiomRecord {
            axiom: "congruence".into(),
            i: Some(i),
            t: Some(t),
            expected: "unit of valuation 0".into(),
            actual: format!("coordinate {unit} of valuation {}", unit.valuation()),
            holds: false,
            unit: Some(unit),
        });
    }
    let residual = image.sub(&lambdas.lambda(digits, target)?.scale(&unit));
    valuation_record("congruence", Some(i), t, target + c, residual.valuation()?, Some(unit))
}

/// Checks the scaffold axioms at precision `c` for every `t` in
/// `[window.0, window.1)` and every operator index.
pub fn verify_scaffold(inputs: ScaffoldInputs<'_>, c: i64, window: (i64, i64), choice: PsiChoice, lower_breaks: &[i64]) -> Result<ScaffoldCertificate> {
    let ScaffoldInputs { tower, generator, digits, mu_eps_bounds } = inputs;
    let n = tower.n();
    let q = tower.degree() as i64;
    let lambdas = Lambdas::new(tower, generator, digits);
    let psi = build_psi(choice, tower, generator);
    let ts: Vec<i64> = (window.0..window.1).collect();

    let mut records: Vec<AxiomRecord> = ts
        .par_iter()
        .map(|&t| -> Result<Vec<AxiomRecord>> {
            let lambda = lambdas.lambda(digits, t)?;
            let v = lambda.valuation_l()?;
            let mut out = vec![AxiomRecord {
                axiom: "valuation".into(),
                i: None,
                t: Some(t),
                expected: t.to_string(),
                actual: v.to_string(),
                holds: v == t,
                unit: None,
            }];
            let next = lambdas.lambda(digits, t + q)?;
            let periodic = next == lambda.shift(1);
            out.push(AxiomRecord {
                axiom: "periodicity".into(),
                i: None,
                t: Some(t),
                expected: "lambda_{t+p^n} = t * lambda_t".into(),
                actual: if periodic { "equal".into() } else { next.to_string() },
                holds: periodic,
                unit: None,
            });
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    for (i, op) in psi.iter().enumerate() {
        let aug = op.augmentation();
        records.push(AxiomRecord {
            axiom: "augmentation".into(),
            i: Some(i + 1),
            t: None,
            expected: "0".into(),
            actual: aug.to_string(),
            holds: aug.has_no_known_terms(),
            unit: None,
        });
    }

    let pairs: Vec<(usize, i64)> = (1..=n).flat_map(|i| ts.iter().map(move |&t| (i, t))).collect();
    let congruences: Vec<AxiomRecord> = pairs
        .par_iter()
        .map(|&(i, t)| check_congruence(i, t, c, &psi[i - 1], &lambdas, digits, lower_breaks))
        .collect::<Result<_>>()?;

    let units: BTreeMap<(usize, i64), &LaurentSeries> = congruences
        .iter()
        .filter_map(|r| Some(((r.i?, r.t?), r.unit.as_ref()?)))
        .collect();
    let unit_periodicity = units
        .iter()
        .filter_map(|(&(i, t), u)| units.get(&(i, t + q)).map(|v| PeriodicityRecord { i, t, periodic: u == v }))
        .collect();
    records.extend(congruences);

    let lambda_table = ts
        .iter()
        .map(|&t| Ok((t, lambdas.lambda(digits, t)?.to_string())))
        .collect::<Result<_>>()?;
    let mut failures: Vec<String> = records
        .iter()
        .filter(|r| !r.holds)
        .map(|r| format!("{} failed at i = {}, t = {}", r.axiom, fmt_opt(r.i), fmt_opt(r.t)))
        .collect();
    failures.extend(mu_eps_bounds.iter().filter(|r| !r.holds).map(|r| format!("{} failed", r.name)));
    let valid = failures.is_empty() && c >= 1;
    Ok(ScaffoldCertificate {
        precision_c: c,
        psi_choice: choice,
        window: [window.0, window.1],
        lambda_table,
        checks: records.len(),
        axiom_results: records,
        mu_eps_bounds,
        unit_periodicity,
        failures,
        valid,
    })
}

fn fmt_opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.to_string())
}
