//! Ramification breaks of the extension given by a reduced Witt vector, the
//! main-term/error-term split of its coordinates, and the eligibility
//! conditions for the scaffold construction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::series::{LaurentSeries, Valuation};

/// Per-coordinate outcome of the reducedness test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedCheck {
    pub reduced: bool,
    /// `(index, valuation)` of coordinates with negative valuation divisible by p.
    pub failures: Vec<(usize, i64)>,
}

pub fn check_reduced(beta: &[LaurentSeries], p: u32) -> ReducedCheck {
    let failures: Vec<(usize, i64)> = beta
        .iter()
        .enumerate()
        .filter_map(|(i, b)| match b.valuation() {
            Valuation::Finite(v) if v < 0 && v % p as i64 == 0 => Some((i, v)),
            _ => None,
        })
        .collect();
    ReducedCheck { reduced: failures.is_empty(), failures }
}

fn exact_valuation(s: &LaurentSeries, what: &str) -> Result<Option<i64>> {
    match s.valuation() {
        Valuation::Finite(v) => Ok(Some(v)),
        Valuation::Infinite => Ok(None),
        Valuation::AtLeast(b) => Err(Error::precision(format!("v({what}) only known to be >= {b}"))),
    }
}

/// `u_i = max_k -p^{i-1-k} v(beta_k)` for `i = 1..n`.
pub fn upper_breaks(beta: &[LaurentSeries], p: u32) -> Result<Vec<i64>> {
    let vals: Vec<Option<i64>> = beta
        .iter()
        .enumerate()
        .map(|(k, b)| exact_valuation(b, &format!("beta_{k}")))
        .collect::<Result<_>>()?;
    match vals.first() {
        Some(Some(v)) if *v < 0 => {}
        _ => return Err(Error::InvalidInput("upper breaks need v(beta_0) < 0".into())),
    }
    let p = p as i64;
    Ok((1..=beta.len())
        .map(|i| {
            (0..i)
                .filter_map(|k| vals[k].map(|v| -p.pow((i - 1 - k) as u32) * v))
                .max()
                .expect("beta_0 is nonzero")
        })
        .collect())
}

fn check_increasing(u: &[i64]) -> Result<()> {
    match u.first() {
        Some(&u1) if u1 >= 1 => {}
        _ => return Err(Error::InvalidInput("breaks need u_1 >= 1".into())),
    }
    if u.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!("upper breaks {u:?} are not strictly increasing")));
    }
    Ok(())
}

/// `b_1 = u_1`, `b_{i+1} = b_i + p^i (u_{i+1} - u_i)`.
pub fn lower_breaks(u: &[i64], p: u32) -> Result<Vec<i64>> {
    check_increasing(u)?;
    let p = p as i64;
    let mut b = vec![u[0]];
    for i in 1..u.len() {
        b.push(b[i - 1] + p.pow(i as u32) * (u[i] - u[i - 1]));
    }
    Ok(b)
}

/// `m_i = (u_{i+1} - u_1) / p^{n-1}`; an error when some `m_i` is not integral.
pub fn stable_m(u: &[i64], p: u32, n: usize) -> Result<Vec<i64>> {
    check_increasing(u)?;
    let q = (p as i64).pow(n as u32 - 1);
    u.iter()
        .enumerate()
        .map(|(i, &ui)| {
            let diff = ui - u[0];
            if diff % q != 0 {
                Err(Error::InvalidInput(format!("m_{i} = ({ui} - {}) / {q} is not an integer", u[0])))
            } else {
                Ok(diff / q)
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BreakData {
    pub p: u32,
    pub n: usize,
    pub u: Vec<i64>,
    pub b: Vec<i64>,
    /// `None` when some `m_i` is not integral.
    pub m: Option<Vec<i64>>,
}

impl BreakData {
    pub fn from_beta(beta: &[LaurentSeries], p: u32) -> Result<Self> {
        let u = upper_breaks(beta, p)?;
        Self::from_upper(u, p)
    }

    pub fn from_upper(u: Vec<i64>, p: u32) -> Result<Self> {
        let n = u.len();
        let b = lower_breaks(&u, p)?;
        let m = stable_m(&u, p, n).ok();
        let data = BreakData { p, n, u, b, m };
        data.assert_invariants()?;
        Ok(data)
    }

    /// The relations that hold for every break sequence: the lower/upper
    /// relation and `b_j <= p^{j-1} u_j`.
    fn assert_invariants(&self) -> Result<()> {
        let p = self.p as i64;
        if self.b[0] != self.u[0] {
            return Err(Error::contract("b_1 != u_1"));
        }
        for i in 1..self.n {
            if self.b[i] - self.b[i - 1] != p.pow(i as u32) * (self.u[i] - self.u[i - 1]) {
                return Err(Error::contract(format!("lower/upper relation fails at {i}")));
            }
        }
        for j in 0..self.n {
            if self.b[j] > p.pow(j as u32) * self.u[j] {
                return Err(Error::contract(format!("b_{} > p^{} u_{}", j + 1, j, j + 1)));
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> i64 {
        (self.p as i64).pow(self.n as u32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    /// `beta_0`.
    pub beta: LaurentSeries,
    pub omega: Vec<LaurentSeries>,
    pub delta: Vec<LaurentSeries>,
}

impl Decomposition {
    /// `beta * omega_i^{p^{n-1}} + delta_i`.
    pub fn recompose(&self, p: u32) -> Vec<LaurentSeries> {
        let q = (p as u64).pow(self.omega.len() as u32 - 1);
        self.omega
            .iter()
            .zip(&self.delta)
            .map(|(w, d)| self.beta.mul(&w.pow(q)).add(d))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoordinateFailure {
    pub index: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no main-term decomposition: {}", .failures.iter().map(|f| format!("coordinate {}: {}", f.index, f.reason)).collect::<Vec<_>>().join("; "))]
pub struct DecompositionError {
    pub failures: Vec<CoordinateFailure>,
}

/// Splits `beta_i = beta * omega_i^{p^{n-1}} + delta_i` with
/// `v(delta_i) > v(beta_i)`. Without `omega`, each `omega_i` is taken to be
/// the monomial matching leading terms.
pub fn decompose(
    beta: &[LaurentSeries],
    p: u32,
    omega: Option<&[LaurentSeries]>,
) -> std::result::Result<Decomposition, DecompositionError> {
    let n = beta.len();
    let field: PrimeField = beta[0].field();
    let q = (p as u64).pow(n as u32 - 1);
    let b0 = beta[0].clone();
    let mut failures = Vec::new();
    let fail = |failures: &mut Vec<CoordinateFailure>, index, reason: String| {
        failures.push(CoordinateFailure { index, reason })
    };
    let Some((v0, c0)) = b0.leading() else {
        return Err(DecompositionError {
            failures: vec![CoordinateFailure { index: 0, reason: "beta_0 has no leading term".into() }],
        });
    };
    let omegas: Vec<LaurentSeries> = match omega {
        Some(w) => {
            if w.len() != n {
                return Err(DecompositionError {
                    failures: vec![CoordinateFailure {
                        index: 0,
                        reason: format!("omega has {} coordinates, beta has {n}", w.len()),
                    }],
                });
            }
            if !w[0].is_one() {
                fail(&mut failures, 0, format!("omega_0 must be 1, got {}", w[0]));
            }
            w.to_vec()
        }
        None => beta
            .iter()
            .enumerate()
            .map(|(i, bi)| {
                if i == 0 {
                    return LaurentSeries::one(field);
                }
                match bi.leading() {
                    None => {
                        fail(&mut failures, i, "beta_i has no leading term".into());
                        LaurentSeries::zero(field)
                    }
                    Some((vi, ci)) => {
                        let diff = v0 - vi;
                        if diff % q as i64 != 0 {
                            fail(&mut failures, i, format!("({v0} - {vi}) / {q} is not an integer"));
                            return LaurentSeries::zero(field);
                        }
                        let c = field.mul(ci, field.inv(c0));
                        LaurentSeries::monomial(field, c as i64, -(diff / q as i64))
                    }
                }
            })
            .collect(),
    };
    if !failures.is_empty() {
        return Err(DecompositionError { failures });
    }
    let mut delta = Vec::with_capacity(n);
    for (i, (bi, wi)) in beta.iter().zip(&omegas).enumerate() {
        let d = bi.sub(&b0.mul(&wi.pow(q)));
        let strict = match (d.valuation(), bi.valuation()) {
            (Valuation::Infinite, Valuation::Finite(_)) => true,
            (Valuation::Finite(dv), Valuation::Finite(bv)) => dv > bv,
            (Valuation::AtLeast(dv), Valuation::Finite(bv)) if dv > bv => true,
            _ => false,
        };
        if !strict && i > 0 {
            fail(&mut failures, i, format!("v(delta_{i}) = {} is not > v(beta_{i}) = {}", d.valuation(), bi.valuation()));
        }
        delta.push(d);
    }
    if !failures.is_empty() {
        return Err(DecompositionError { failures });
    }
    Ok(Decomposition { beta: b0, omega: omegas, delta })
}

/// One inequality `lhs > rhs` at index `i` (1-based as in the break indices).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Inequality {
    pub i: usize,
    pub lhs: i64,
    /// `None` stands for minus infinity (the inequality holds vacuously).
    pub rhs: Option<i64>,
    pub holds: bool,
}

impl Inequality {
    fn new(i: usize, lhs: i64, rhs: Option<i64>) -> Self {
        Inequality { i, lhs, rhs, holds: rhs.is_none_or(|r| lhs > r) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssumptionReport {
    pub reduced: bool,
    pub breaks_increasing: bool,
    pub m_integral: bool,
    pub decomposition: bool,
    /// `b_{i+1} > p^n u_i`.
    pub lower_break_growth: Vec<Inequality>,
    /// `b_{i+1} > -p^{n-1} v(delta_i)`.
    pub error_term_bound: Vec<Inequality>,
    /// `u_{i+1} > p u_i`.
    pub upper_break_growth: Vec<Inequality>,
    pub lower_breaks_prime_to_p: bool,
    pub lower_breaks_congruent: bool,
    /// `v(beta_{i-1}) = -u_i` for all i.
    pub main_term_valuations: bool,
    pub eligible: bool,
    pub reasons: Vec<String>,
}

pub fn check_assumptions(
    beta: &[LaurentSeries],
    breaks: &BreakData,
    dec: Option<&Decomposition>,
) -> AssumptionReport {
    let p = breaks.p as i64;
    let n = breaks.n;
    let q = breaks.degree();
    let (u, b) = (&breaks.u, &breaks.b);
    let mut reasons = Vec::new();

    let reduced = check_reduced(beta, breaks.p).reduced;
    if !reduced {
        reasons.push("beta is not reduced".to_string());
    }
    let breaks_increasing = u.windows(2).all(|w| w[0] < w[1]) && b.windows(2).all(|w| w[0] < w[1]);
    if !breaks_increasing {
        reasons.push("breaks are not strictly increasing".to_string());
    }
    let m_integral = breaks.m.is_some();
    if !m_integral {
        reasons.push("some m_i is not an integer".to_string());
    }
    let decomposition = dec.is_some();
    if !decomposition {
        reasons.push("no main-term decomposition".to_string());
    }

    let lower_break_growth: Vec<Inequality> =
        (1..n).map(|i| Inequality::new(i, b[i], Some(q * u[i - 1]))).collect();
    let error_term_bound: Vec<Inequality> = (1..n)
        .map(|i| {
            let rhs = dec.map_or(Some(i64::MAX), |d| {
                d.delta[i].valuation().lower_bound().map(|v| -(q / p) * v)
            });
            Inequality::new(i, b[i], rhs)
        })
        .collect();
    let upper_break_growth: Vec<Inequality> =
        (1..n).map(|i| Inequality::new(i, u[i], Some(p * u[i - 1]))).collect();
    for (name, list) in [
        ("b_{i+1} > p^n u_i", &lower_break_growth),
        ("b_{i+1} > -p^{n-1} v(delta_i)", &error_term_bound),
        ("u_{i+1} > p u_i", &upper_break_growth),
    ] {
        for c in list.iter().filter(|c| !c.holds) {
            reasons.push(format!("{name} fails at i = {}", c.i));
        }
    }

    let lower_breaks_prime_to_p = b.iter().all(|x| x % p != 0);
    if !lower_breaks_prime_to_p {
        reasons.push("some lower break is divisible by p".to_string());
    }
    let lower_breaks_congruent = b.iter().all(|x| (x - b[0]) % q == 0);
    if !lower_breaks_congruent {
        reasons.push("lower breaks are not congruent mod p^n".to_string());
    }
    let main_term_valuations = beta
        .iter()
        .zip(u)
        .all(|(bi, ui)| bi.valuation() == Valuation::Finite(-ui));
    if !main_term_valuations {
        reasons.push("v(beta_{i-1}) != -u_i for some i".to_string());
    }

    let eligible = reasons.is_empty();
    AssumptionReport {
        reduced,
        breaks_increasing,
        m_integral,
        decomposition,
        lower_break_growth,
        error_term_bound,
        upper_break_growth,
        lower_breaks_prime_to_p,
        lower_breaks_congruent,
        main_term_valuations,
        eligible,
        reasons,
    }
}
