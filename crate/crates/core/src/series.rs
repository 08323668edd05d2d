//! Truncated Laurent series over F_p, the model of K = F_p((t)).
//!
//! A series is a sparse list of `(exponent, coefficient)` pairs together with
//! an optional absolute precision `N`: coefficients are known exactly for all
//! exponents below `N`. Series without a precision are finitely supported and
//! exact. Arithmetic propagates precision the usual way, so a series that is
//! zero only up to its precision (`O(t^N)`) never masquerades as exact zero.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::PrimeField;

/// Valuation of a series (or of a tower element), with an exactness tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    /// Zero up to the known precision; the true valuation is at least this.
    AtLeast(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_exact(self) -> bool {
        !matches!(self, Valuation::AtLeast(_))
    }

    /// `None` stands for +infinity.
    pub fn lower_bound(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// Whether the valuation is provably `>= bound`; `None` when the
    /// tracked precision cannot decide.
    pub fn known_ge(self, bound: i64) -> Option<bool> {
        match self {
            Valuation::Finite(v) => Some(v >= bound),
            Valuation::Infinite => Some(true),
            Valuation::AtLeast(n) if n >= bound => Some(true),
            Valuation::AtLeast(_) => None,
        }
    }

    pub fn scale(self, k: i64) -> Valuation {
        match self {
            Valuation::Finite(v) => Valuation::Finite(v * k),
            Valuation::AtLeast(v) => Valuation::AtLeast(v * k),
            Valuation::Infinite => Valuation::Infinite,
        }
    }

    pub fn offset(self, d: i64) -> Valuation {
        match self {
            Valuation::Finite(v) => Valuation::Finite(v + d),
            Valuation::AtLeast(v) => Valuation::AtLeast(v + d),
            Valuation::Infinite => Valuation::Infinite,
        }
    }

    /// Difference `self - other` when `other` is finite.
    pub fn minus(self, other: i64) -> Valuation {
        self.offset(-other)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">= {v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            Valuation::Finite(v) => serializer.serialize_i64(*v),
            Valuation::Infinite => serializer.serialize_str("inf"),
            Valuation::AtLeast(v) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("at_least", v)?;
                map.end()
            }
        }
    }
}

/// Element of F_p((t)) known up to an absolute precision.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentSeries {
    field: PrimeField,
    /// Strictly increasing exponents, nonzero coefficients, all below `precision`.
    terms: Vec<(i64, u32)>,
    /// `None` for exact, finitely supported series.
    precision: Option<i64>,
}

impl LaurentSeries {
    pub fn zero(field: PrimeField) -> Self {
        LaurentSeries { field, terms: Vec::new(), precision: None }
    }

    pub fn one(field: PrimeField) -> Self {
        Self::constant(field, 1)
    }

    pub fn constant(field: PrimeField, c: i64) -> Self {
        Self::monomial(field, c, 0)
    }

    /// `c * t^e`, exact.
    pub fn monomial(field: PrimeField, c: i64, e: i64) -> Self {
        let c = field.reduce(c);
        let terms = if c == 0 { Vec::new() } else { vec![(e, c)] };
        LaurentSeries { field, terms, precision: None }
    }

    /// `O(t^n)`: no known terms below `n`.
    pub fn big_o(field: PrimeField, n: i64) -> Self {
        LaurentSeries { field, terms: Vec::new(), precision: Some(n) }
    }

    /// Builds a series from arbitrary integer terms; duplicates are summed and
    /// coefficients reduced mod p.
    pub fn from_terms<I>(field: PrimeField, terms: I, precision: Option<i64>) -> Self
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        let mut acc: HashMap<i64, u32> = HashMap::new();
        for (e, c) in terms {
            if precision.is_some_and(|n| e >= n) {
                continue;
            }
            let entry = acc.entry(e).or_insert(0);
            *entry = field.add(*entry, field.reduce(c));
        }
        let mut terms: Vec<(i64, u32)> = acc.into_iter().filter(|&(_, c)| c != 0).collect();
        terms.sort_unstable_by_key(|&(e, _)| e);
        LaurentSeries { field, terms, precision }
    }

    fn from_sorted(field: PrimeField, terms: Vec<(i64, u32)>, precision: Option<i64>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(terms.iter().all(|&(_, c)| c != 0));
        debug_assert!(precision.is_none_or(|n| terms.last().is_none_or(|&(e, _)| e < n)));
        LaurentSeries { field, terms, precision }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn terms(&self) -> &[(i64, u32)] {
        &self.terms
    }

    pub fn precision(&self) -> Option<i64> {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.precision.is_none()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.precision.is_none()
    }

    /// True for exact zero and for `O(t^N)`.
    pub fn has_no_known_terms(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.precision.is_none() && self.terms == [(0, 1)]
    }

    pub fn is_monomial(&self) -> bool {
        self.precision.is_none() && self.terms.len() == 1
    }

    pub fn valuation(&self) -> Valuation {
        match (self.terms.first(), self.precision) {
            (Some(&(e, _)), _) => Valuation::Finite(e),
            (None, Some(n)) => Valuation::AtLeast(n),
            (None, None) => Valuation::Infinite,
        }
    }

    pub fn leading(&self) -> Option<(i64, u32)> {
        self.terms.first().copied()
    }

    pub fn coefficient(&self, e: i64) -> u32 {
        self.terms
            .binary_search_by_key(&e, |&(x, _)| x)
            .map(|i| self.terms[i].1)
            .unwrap_or(0)
    }

    /// Least exponent that may carry a nonzero coefficient; `None` for exact zero.
    fn lower_bound(&self) -> Option<i64> {
        self.valuation().lower_bound()
    }

    fn max_exponent(&self) -> Option<i64> {
        self.terms.last().map(|&(e, _)| e)
    }

    /// Forgets coefficients at exponents `>= n`.
    pub fn truncate(&self, n: i64) -> Self {
        let precision = Some(self.precision.map_or(n, |m| m.min(n)));
        let terms = self.terms.iter().copied().filter(|&(e, _)| e < n).collect();
        Self::from_sorted(self.field, terms, precision)
    }

    fn check_field(&self, other: &Self) {
        assert_eq!(self.field, other.field, "series over different prime fields");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_field(other);
        let precision = min_precision(self.precision, other.precision);
        let f = self.field;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&(ea, ca)), Some(&(eb, cb))) => match ea.cmp(&eb) {
                    Ordering::Less => {
                        i += 1;
                        (ea, ca)
                    }
                    Ordering::Greater => {
                        j += 1;
                        (eb, cb)
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        (ea, f.add(ca, cb))
                    }
                },
                (Some(&t), None) => {
                    i += 1;
                    t
                }
                (None, Some(&t)) => {
                    j += 1;
                    t
                }
                (None, None) => unreachable!(),
            };
            if precision.is_some_and(|n| next.0 >= n) {
                break;
            }
            if next.1 != 0 {
                out.push(next);
            }
        }
        Self::from_sorted(f, out, precision)
    }

    pub fn neg(&self) -> Self {
        let f = self.field;
        let terms = self.terms.iter().map(|&(e, c)| (e, f.neg(c))).collect();
        Self::from_sorted(f, terms, self.precision)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplication by a constant of F_p.
    pub fn scale(&self, c: u32) -> Self {
        let f = self.field;
        let c = c % f.p();
        if c == 0 {
            return Self::zero(f);
        }
        let terms = self.terms.iter().map(|&(e, x)| (e, f.mul(x, c))).collect();
        Self::from_sorted(f, terms, self.precision)
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        let terms = self.terms.iter().map(|&(e, c)| (e + k, c)).collect();
        Self::from_sorted(self.field, terms, self.precision.map(|n| n + k))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_field(other);
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::zero(self.field);
        }
        let la = self.lower_bound().expect("nonzero");
        let lb = other.lower_bound().expect("nonzero");
        let precision = match (self.precision, other.precision) {
            (None, None) => None,
            (Some(na), None) => Some(na + lb),
            (None, Some(nb)) => Some(nb + la),
            (Some(na), Some(nb)) => Some((na + lb).min(nb + la)),
        };
        let terms = convolve(self.field, &self.terms, &other.terms, precision);
        Self::from_sorted(self.field, terms, precision)
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut acc = Self::one(self.field);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// The p-power Frobenius `s -> s^p`; coefficients in F_p are fixed.
    pub fn frobenius(&self) -> Self {
        let p = self.field.p() as i64;
        let terms = self.terms.iter().map(|&(e, c)| (e * p, c)).collect();
        Self::from_sorted(self.field, terms, self.precision.map(|n| n * p))
    }

    /// Multiplicative inverse known up to absolute precision `target_precision`
    /// (less when `self` itself is not known well enough). Exact monomials
    /// invert exactly.
    pub fn invert(&self, target_precision: i64) -> Result<Self> {
        let f = self.field;
        let Some((v, c)) = self.leading() else {
            return Err(if self.is_exact() {
                Error::InvalidInput("inverse of zero".into())
            } else {
                Error::precision(format!("inverse of {self}: leading term unknown"))
            });
        };
        let cinv = f.inv(c);
        if self.is_monomial() {
            return Ok(Self::from_sorted(f, vec![(-v, cinv)], None));
        }
        // relative precision: number of coefficients of the unit part we compute
        let mut rel = target_precision + v;
        if let Some(n) = self.precision {
            rel = rel.min(n - v);
        }
        if rel <= 0 {
            return Ok(Self::big_o(f, -v + rel.max(0)));
        }
        let rel_len = rel as usize;
        // unit part a = t^{-v} s / c = 1 + sum a_k t^k
        let a: Vec<(usize, u32)> = self
            .terms
            .iter()
            .skip(1)
            .filter(|&&(e, _)| e - v < rel)
            .map(|&(e, x)| ((e - v) as usize, f.mul(x, cinv)))
            .collect();
        let mut b = vec![0u32; rel_len];
        b[0] = 1;
        let p = f.p() as u64;
        for k in 1..rel_len {
            let mut acc: u64 = 0;
            for &(i, ai) in &a {
                if i > k {
                    break;
                }
                acc += ai as u64 * b[k - i] as u64;
                if acc > (1 << 62) {
                    acc %= p;
                }
            }
            b[k] = f.neg((acc % p) as u32);
        }
        let terms = b
            .into_iter()
            .enumerate()
            .filter(|&(_, x)| x != 0)
            .map(|(k, x)| (k as i64 - v, f.mul(x, cinv)))
            .collect();
        Ok(Self::from_sorted(f, terms, Some(-v + rel)))
    }

    /// Exact division of finitely supported series in F_p[t, 1/t]; `None`
    /// when the divisor does not divide.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        assert!(self.is_exact() && divisor.is_exact(), "div_exact needs exact operands");
        self.check_field(divisor);
        let f = self.field;
        let (dv, dc) = divisor.leading()?;
        let Some(top) = self.max_exponent() else {
            return Some(Self::zero(f));
        };
        let max_q = top - divisor.max_exponent().unwrap();
        let dinv = f.inv(dc);
        let mut rem = self.clone();
        let mut q = Vec::new();
        while let Some((e, c)) = rem.leading() {
            let qe = e - dv;
            if qe > max_q {
                return None;
            }
            let qc = f.mul(c, dinv);
            q.push((qe, qc));
            rem = rem.sub(&divisor.shift(qe).scale(qc));
        }
        Some(Self::from_sorted(f, q, None))
    }
}

fn min_precision(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn convolve(f: PrimeField, a: &[(i64, u32)], b: &[(i64, u32)], precision: Option<i64>) -> Vec<(i64, u32)> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let lo = a[0].0 + b[0].0;
    let mut hi = a[a.len() - 1].0 + b[b.len() - 1].0;
    if let Some(n) = precision {
        hi = hi.min(n - 1);
    }
    if hi < lo {
        return Vec::new();
    }
    let p = f.p() as u64;
    let span = (hi - lo + 1) as u64;
    let work = (a.len() * b.len()) as u64;
    if span <= 8 * work + 4096 {
        let mut buf = vec![0u64; span as usize];
        for &(ea, ca) in a {
            if ea + b[0].0 > hi {
                break;
            }
            let ca = ca as u64;
            for &(eb, cb) in b {
                let e = ea + eb;
                if e > hi {
                    break;
                }
                buf[(e - lo) as usize] += ca * cb as u64;
            }
        }
        buf.into_iter()
            .enumerate()
            .filter_map(|(k, x)| {
                let x = (x % p) as u32;
                (x != 0).then_some((lo + k as i64, x))
            })
            .collect()
    } else {
        let mut acc: HashMap<i64, u64> = HashMap::new();
        for &(ea, ca) in a {
            for &(eb, cb) in b {
                let e = ea + eb;
                if e > hi {
                    break;
                }
                *acc.entry(e).or_insert(0) += ca as u64 * cb as u64;
            }
        }
        let mut out: Vec<(i64, u32)> = acc
            .into_iter()
            .filter_map(|(e, x)| {
                let x = (x % p) as u32;
                (x != 0).then_some((e, x))
            })
            .collect();
        out.sort_unstable_by_key(|&(e, _)| e);
        out
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inherent:ident) => {
        impl std::ops::$tr<&LaurentSeries> for &LaurentSeries {
            type Output = LaurentSeries;
            fn $method(self, rhs: &LaurentSeries) -> LaurentSeries {
                LaurentSeries::$inherent(self, rhs)
            }
        }
        impl std::ops::$tr for LaurentSeries {
            type Output = LaurentSeries;
            fn $method(self, rhs: LaurentSeries) -> LaurentSeries {
                LaurentSeries::$inherent(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);

impl std::ops::Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        LaurentSeries::neg(self)
    }
}

/// Canonical rendering: `c*t^e` terms in increasing exponent order joined by
/// ` + `, coefficient 1 and exponent 1 omitted, a trailing `O(t^N)` for
/// inexact series.
impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for &(e, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match (c, e) {
                (c, 0) => write!(f, "{c}")?,
                (1, 1) => f.write_str("t")?,
                (1, e) => write!(f, "t^{e}")?,
                (c, 1) => write!(f, "{c}*t")?,
                (c, e) => write!(f, "{c}*t^{e}")?,
            }
        }
        if let Some(n) = self.precision {
            if !first {
                f.write_str(" + ")?;
            }
            match n {
                0 => f.write_str("O(1)")?,
                1 => f.write_str("O(t)")?,
                n => write!(f, "O(t^{n})")?,
            }
        }
        Ok(())
    }
}

/// Serialized as the canonical text form.
impl Serialize for LaurentSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentSeries[p={}]({})", self.field.p(), self)
    }
}

/// Parses sums of terms `c*t^e` (`c*` and `t^e` optional), e.g. `t^-3 + 2*t^2`.
/// A trailing `O(t^N)` term sets the absolute precision.
pub fn parse_series(text: &str, field: PrimeField) -> Result<LaurentSeries> {
    Parser { s: text.as_bytes(), pos: 0 }.parse(field)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { position: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", b as char))
        }
    }

    fn unsigned(&mut self) -> Result<i64> {
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        let digits = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        digits.parse::<i64>().or_else(|_| {
            self.pos = start;
            self.err("integer out of range")
        })
    }

    fn signed(&mut self) -> Result<i64> {
        let negative = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        self.skip_ws();
        let v = self.unsigned()?;
        Ok(if negative { -v } else { v })
    }

    /// `t` or `t^e`; returns e.
    fn power_of_t(&mut self) -> Result<i64> {
        self.expect(b't')?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            self.signed()
        } else {
            Ok(1)
        }
    }

    fn parse(mut self, field: PrimeField) -> Result<LaurentSeries> {
        self.skip_ws();
        if self.pos == self.s.len() {
            return self.err("empty input");
        }
        let mut terms = Vec::new();
        let mut precision: Option<i64> = None;
        let mut first = true;
        loop {
            self.skip_ws();
            let mut sign = 1i64;
            match self.peek() {
                Some(b'+') => self.pos += 1,
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1;
                }
                _ if first => {}
                _ => return self.err("expected '+' or '-'"),
            }
            self.skip_ws();
            match self.peek() {
                Some(b'O') => {
                    self.pos += 1;
                    self.skip_ws();
                    self.expect(b'(')?;
                    self.skip_ws();
                    let n = if self.peek() == Some(b'1') {
                        self.pos += 1;
                        0
                    } else {
                        self.power_of_t()?
                    };
                    self.skip_ws();
                    self.expect(b')')?;
                    precision = Some(precision.map_or(n, |m| m.min(n)));
                }
                Some(b) if b.is_ascii_digit() => {
                    let c = self.unsigned()?;
                    self.skip_ws();
                    if self.peek() == Some(b'*') {
                        self.pos += 1;
                        self.skip_ws();
                        let e = self.power_of_t()?;
                        terms.push((e, sign * c));
                    } else {
                        terms.push((0, sign * c));
                    }
                }
                Some(b't') => {
                    let e = self.power_of_t()?;
                    terms.push((e, sign));
                }
                _ => return self.err("expected a term"),
            }
            first = false;
            self.skip_ws();
            if self.pos == self.s.len() {
                break;
            }
        }
        Ok(LaurentSeries::from_terms(field, terms, precision))
    }
}
