//! Universal Witt addition polynomials and Witt-vector addition.
//!
//! The polynomials `S_i` are computed over the integers from the defining
//! recursion (every division by `p^i` is checked to be exact) and cached per
//! `(p, n)`. All evaluation happens on the mod-p reductions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{Fp, PrimeField};
use crate::series::LaurentSeries;

/// Largest `p^n` for which addition polynomials are computed.
pub const MAX_WITT_DEGREE: u64 = 128;

pub type Monomial = Vec<u32>;

/// Multivariate polynomial with arbitrary-precision integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPolynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl IntPolynomial {
    pub fn zero(nvars: usize) -> Self {
        IntPolynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c.into());
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, 1)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut m = vec![0; nvars];
        m[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(m, BigInt::one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        let terms = self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect();
        IntPolynomial { nvars: self.nvars, terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        if let Some(out) = self.mul_packed(other) {
            return out;
        }
        let mut acc: HashMap<Monomial, BigInt> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                *acc.entry(m).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        IntPolynomial { nvars: self.nvars, terms }
    }

    fn max_exponents(&self) -> Vec<u32> {
        let mut out = vec![0; self.nvars];
        for m in self.terms.keys() {
            for (o, &e) in out.iter_mut().zip(m) {
                *o = (*o).max(e);
            }
        }
        out
    }

    /// Multiplication with monomials packed into one byte per variable, used
    /// whenever the product's exponents fit.
    fn mul_packed(&self, other: &Self) -> Option<Self> {
        if self.nvars > 16 {
            return None;
        }
        let (ea, eb) = (self.max_exponents(), other.max_exponents());
        if ea.iter().zip(&eb).any(|(a, b)| a + b > 255) {
            return None;
        }
        let pack = |m: &Monomial| m.iter().fold(0u128, |k, &e| (k << 8) | e as u128);
        let a: Vec<(u128, &BigInt)> = self.terms.iter().map(|(m, c)| (pack(m), c)).collect();
        let b: Vec<(u128, &BigInt)> = other.terms.iter().map(|(m, c)| (pack(m), c)).collect();
        let square = self == other;
        let acc = match product_i128(&a, &b, square) {
            Some(small) => small.into_iter().map(|(k, c)| (k, BigInt::from(c))).collect(),
            None => product_big(&a, &b, square),
        };
        let n = self.nvars;
        let unpack = |k: u128| -> Monomial {
            (0..n).map(|v| ((k >> (8 * (n - 1 - v))) & 0xff) as u32).collect()
        };
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (unpack(k), c))
            .collect();
        Some(IntPolynomial { nvars: n, terms })
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut acc = Self::one(self.nvars);
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

    /// Division by an integer, `None` unless every coefficient is divisible.
    pub fn div_exact(&self, d: &BigInt) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            terms.insert(m.clone(), q);
        }
        Some(IntPolynomial { nvars: self.nvars, terms })
    }

    /// Coefficient of a monomial; zero when absent.
    pub fn coefficient(&self, monomial: &[u32]) -> BigInt {
        self.terms.get(monomial).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Substitutes 0 for each listed variable.
    pub fn set_zero(&self, vars: &[usize]) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| vars.iter().all(|&v| m[v] == 0))
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        IntPolynomial { nvars: self.nvars, terms }
    }

    /// Indices of variables occurring in some monomial.
    pub fn support(&self) -> BTreeSet<usize> {
        self.terms
            .keys()
            .flat_map(|m| m.iter().enumerate().filter(|(_, &e)| e > 0).map(|(v, _)| v))
            .collect()
    }

    pub fn reduce_mod(&self, field: PrimeField) -> FpPolynomial {
        let p = BigInt::from(field.p());
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let r = c.mod_floor(&p).to_u32().unwrap();
                (r != 0).then(|| (m.clone(), r))
            })
            .collect();
        FpPolynomial { field, nvars: self.nvars, terms }
    }

    /// Terms in graded lexicographic order: total degree ascending, then
    /// exponent vectors in descending lexicographic order.
    pub fn graded_lex(&self) -> Vec<(Monomial, BigInt)> {
        let mut v: Vec<_> = self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        v.sort_by(|(a, _), (b, _)| grlex(a, b));
        v
    }
}

fn product_i128(a: &[(u128, &BigInt)], b: &[(u128, &BigInt)], square: bool) -> Option<HashMap<u128, i128>> {
    let a: Vec<(u128, i128)> = a.iter().map(|(k, c)| Some((*k, c.to_i128()?))).collect::<Option<_>>()?;
    let b: Vec<(u128, i128)> = b.iter().map(|(k, c)| Some((*k, c.to_i128()?))).collect::<Option<_>>()?;
    let mut acc: HashMap<u128, i128> = HashMap::with_capacity(a.len().max(b.len()) * 4);
    let mut bump = |k: u128, c: i128| -> Option<()> {
        let e = acc.entry(k).or_insert(0);
        *e = e.checked_add(c)?;
        Some(())
    };
    if square {
        for (i, &(ka, ca)) in a.iter().enumerate() {
            bump(ka << 1, ca.checked_mul(ca)?)?;
            for &(kb, cb) in &a[i + 1..] {
                bump(ka + kb, ca.checked_mul(cb)?.checked_mul(2)?)?;
            }
        }
    } else {
        for &(ka, ca) in &a {
            for &(kb, cb) in &b {
                bump(ka + kb, ca.checked_mul(cb)?)?;
            }
        }
    }
    Some(acc)
}

fn product_big(a: &[(u128, &BigInt)], b: &[(u128, &BigInt)], square: bool) -> HashMap<u128, BigInt> {
    let mut acc: HashMap<u128, BigInt> = HashMap::with_capacity(a.len().max(b.len()) * 4);
    if square {
        let two = BigInt::from(2);
        for (i, &(ka, ca)) in a.iter().enumerate() {
            *acc.entry(ka << 1).or_insert_with(BigInt::zero) += ca * ca;
            for &(kb, cb) in &a[i + 1..] {
                *acc.entry(ka + kb).or_insert_with(BigInt::zero) += ca * cb * &two;
            }
        }
    } else {
        for &(ka, ca) in a {
            for &(kb, cb) in b {
                *acc.entry(ka + kb).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
    }
    acc
}

fn grlex(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

/// Polynomial with coefficients in F_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpPolynomial {
    field: PrimeField,
    nvars: usize,
    terms: BTreeMap<Monomial, u32>,
}

impl FpPolynomial {
    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &u32)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, monomial: &[u32]) -> u32 {
        self.terms.get(monomial).copied().unwrap_or(0)
    }

    /// Substitutes constants of F_p for some variables.
    pub fn specialize(&self, assignments: &[(usize, u32)]) -> FpPolynomial {
        let f = self.field;
        let mut terms: BTreeMap<Monomial, u32> = BTreeMap::new();
        for (m, &c) in &self.terms {
            let mut c = c;
            let mut m = m.clone();
            for &(v, value) in assignments {
                c = f.mul(c, f.pow(value, m[v] as u64));
                m[v] = 0;
            }
            if c != 0 {
                let e = terms.entry(m).or_insert(0);
                *e = f.add(*e, c);
            }
        }
        terms.retain(|_, c| *c != 0);
        FpPolynomial { field: f, nvars: self.nvars, terms }
    }

    /// The common weighted degree of all monomials, or the offending
    /// monomials with their weights when the polynomial is not isobaric.
    pub fn isobaric_weight(&self, weights: &[u64]) -> std::result::Result<u64, Vec<(Monomial, u64)>> {
        assert_eq!(weights.len(), self.nvars);
        let weighed: Vec<(Monomial, u64)> = self
            .terms
            .keys()
            .map(|m| (m.clone(), m.iter().zip(weights).map(|(&e, &w)| e as u64 * w).sum()))
            .collect();
        let Some(&(_, w0)) = weighed.first() else {
            return Err(Vec::new());
        };
        let offending: Vec<_> = weighed.iter().filter(|(_, w)| *w != w0).cloned().collect();
        if offending.is_empty() {
            Ok(w0)
        } else {
            Err(weighed)
        }
    }

    /// Evaluates at ring values, one per variable.
    pub fn evaluate<R: WittRing>(&self, values: &[R]) -> R {
        assert_eq!(values.len(), self.nvars, "one value per variable");
        let like = &values[0];
        let mut max_deg = vec![0u32; self.nvars];
        for m in self.terms.keys() {
            for (d, &e) in max_deg.iter_mut().zip(m) {
                *d = (*d).max(e);
            }
        }
        let zero_var: Vec<bool> = values.iter().map(|v| v.is_ring_zero()).collect();
        let mut powers: Vec<Vec<R>> = vec![Vec::new(); self.nvars];
        for (v, &d) in max_deg.iter().enumerate() {
            if d == 0 || zero_var[v] {
                continue;
            }
            let mut pw = vec![like.one_like(), values[v].clone()];
            for k in 2..=d as usize {
                let next = pw[k - 1].ring_mul(&values[v]);
                pw.push(next);
            }
            powers[v] = pw;
        }
        let mut acc = like.zero_like();
        'terms: for (m, &c) in &self.terms {
            let mut prod: Option<R> = None;
            for (v, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if zero_var[v] {
                    continue 'terms;
                }
                let factor = &powers[v][e as usize];
                prod = Some(match prod {
                    None => factor.clone(),
                    Some(x) => x.ring_mul(factor),
                });
            }
            let term = match prod {
                None => like.one_like().scale_fp(c),
                Some(x) => x.scale_fp(c),
            };
            acc = acc.ring_add(&term);
        }
        acc
    }
}

/// Commutative rings of characteristic p over which Witt vectors are formed.
pub trait WittRing: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn ring_add(&self, other: &Self) -> Self;
    fn ring_mul(&self, other: &Self) -> Self;
    /// Multiplication by an element of the prime field.
    fn scale_fp(&self, c: u32) -> Self;
    fn is_ring_zero(&self) -> bool;
    fn characteristic(&self) -> u32;
    fn same_ring(&self, other: &Self) -> bool {
        self.characteristic() == other.characteristic()
    }
}

impl WittRing for Fp {
    fn zero_like(&self) -> Self {
        self.field().element(0)
    }
    fn one_like(&self) -> Self {
        self.field().element(1)
    }
    fn ring_add(&self, other: &Self) -> Self {
        *self + *other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        *self * *other
    }
    fn scale_fp(&self, c: u32) -> Self {
        *self * self.field().element(c as i64)
    }
    fn is_ring_zero(&self) -> bool {
        self.is_zero()
    }
    fn characteristic(&self) -> u32 {
        self.field().p()
    }
}

impl WittRing for LaurentSeries {
    fn zero_like(&self) -> Self {
        LaurentSeries::zero(self.field())
    }
    fn one_like(&self) -> Self {
        LaurentSeries::one(self.field())
    }
    fn ring_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn scale_fp(&self, c: u32) -> Self {
        self.scale(c)
    }
    fn is_ring_zero(&self) -> bool {
        self.is_exact_zero()
    }
    fn characteristic(&self) -> u32 {
        self.field().p()
    }
}

/// The addition polynomials `S_0..S_{n-1}` for one `(p, n)`, in variables
/// `X_0..X_{n-1}` (indices `0..n`) and `Y_0..Y_{n-1}` (indices `n..2n`).
#[derive(Debug)]
pub struct WittPolynomials {
    field: PrimeField,
    n: usize,
    sums: Vec<IntPolynomial>,
    sums_mod_p: Vec<FpPolynomial>,
    carries_mod_p: Vec<FpPolynomial>,
}

type PolyCache = Mutex<HashMap<(u32, usize), Arc<WittPolynomials>>>;

fn poly_cache() -> &'static PolyCache {
    static CACHE: OnceLock<PolyCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

impl WittPolynomials {
    /// Cached polynomials for `(p, n)`; computed once.
    pub fn get(field: PrimeField, n: usize) -> Result<Arc<Self>> {
        let key = (field.p(), n);
        if let Some(hit) = poly_cache().lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let computed = Arc::new(Self::compute(field, n)?);
        let mut cache = poly_cache().lock().unwrap();
        Ok(cache.entry(key).or_insert(computed).clone())
    }

    fn compute(field: PrimeField, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("Witt length must be at least 1".into()));
        }
        let p = field.p() as u64;
        if p.checked_pow(n as u32).is_none_or(|q| q > MAX_WITT_DEGREE) {
            return Err(Error::InvalidInput(format!(
                "p^n = {p}^{n} exceeds the supported bound {MAX_WITT_DEGREE}"
            )));
        }
        let nv = 2 * n;
        let pb = BigInt::from(p);
        let mut sums: Vec<IntPolynomial> = Vec::with_capacity(n);
        // powers[j] = S_j^{p^{i-j}} for the current i
        let mut powers: Vec<IntPolynomial> = Vec::with_capacity(n);
        for i in 0..n {
            for pw in powers.iter_mut() {
                *pw = pw.pow(p);
            }
            let mut acc = IntPolynomial::zero(nv);
            for j in 0..=i {
                let e = p.pow((i - j) as u32);
                let xy = IntPolynomial::var(nv, j).pow(e).add(&IntPolynomial::var(nv, n + j).pow(e));
                acc = acc.add(&xy.scale(&pb.pow(j as u32)));
            }
            for (j, pw) in powers.iter().enumerate() {
                acc = acc.sub(&pw.scale(&pb.pow(j as u32)));
            }
            let s = acc.div_exact(&pb.pow(i as u32)).ok_or_else(|| {
                Error::contract(format!("Witt recursion: S_{i} not divisible by {p}^{i}"))
            })?;
            powers.push(s.clone());
            sums.push(s);
        }
        let sums_mod_p: Vec<FpPolynomial> = sums.iter().map(|s| s.reduce_mod(field)).collect();
        let carries_mod_p = (0..n).map(|i| carry_of(&sums[i], n, i).reduce_mod(field)).collect();
        Ok(WittPolynomials { field, n, sums, sums_mod_p, carries_mod_p })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn nvars(&self) -> usize {
        2 * self.n
    }

    /// Variable index of `X_h`.
    pub fn x(&self, h: usize) -> usize {
        h
    }

    /// Variable index of `Y_h`.
    pub fn y(&self, h: usize) -> usize {
        self.n + h
    }

    pub fn variable_name(&self, v: usize) -> String {
        if v < self.n {
            format!("X{v}")
        } else {
            format!("Y{}", v - self.n)
        }
    }

    pub fn sums(&self) -> &[IntPolynomial] {
        &self.sums
    }

    pub fn sum(&self, i: usize) -> &IntPolynomial {
        &self.sums[i]
    }

    /// `D_i = S_i - X_i - Y_i`.
    pub fn carry(&self, i: usize) -> IntPolynomial {
        carry_of(&self.sums[i], self.n, i)
    }

    /// `E_{ij}`: `D_j` with `Y_0..Y_{i-1}` set to zero. Its support is checked
    /// to lie in `X_i..X_{j-1}, Y_i..Y_{j-1}`.
    pub fn truncated(&self, i: usize, j: usize) -> Result<IntPolynomial> {
        if !(i <= j && j < self.n) {
            return Err(Error::InvalidInput(format!("need 0 <= i <= j < n, got i={i} j={j}")));
        }
        let zeroed: Vec<usize> = (0..i).map(|h| self.y(h)).collect();
        let e = self.carry(j).set_zero(&zeroed);
        let allowed: BTreeSet<usize> = (i..j).flat_map(|h| [self.x(h), self.y(h)]).collect();
        if let Some(&bad) = e.support().difference(&allowed).next() {
            return Err(Error::contract(format!(
                "E_{{{i}{j}}} involves {} outside its expected variables",
                self.variable_name(bad)
            )));
        }
        Ok(e)
    }

    pub fn sum_mod_p(&self, i: usize) -> &FpPolynomial {
        &self.sums_mod_p[i]
    }

    pub fn carry_mod_p(&self, i: usize) -> &FpPolynomial {
        &self.carries_mod_p[i]
    }

    /// Weights `w(X_h) = w(Y_h) = p^h`.
    pub fn weights(&self) -> Vec<u64> {
        let p = self.field.p() as u64;
        (0..2 * self.n).map(|v| p.pow((v % self.n) as u32)).collect()
    }

    /// Deterministic text dump (graded lexicographic order) of a polynomial.
    pub fn dump(&self, poly: &IntPolynomial) -> String {
        let mut out = String::new();
        for (m, c) in poly.graded_lex() {
            let mono: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| {
                    if e == 1 {
                        self.variable_name(v)
                    } else {
                        format!("{}^{e}", self.variable_name(v))
                    }
                })
                .collect();
            let mono = if mono.is_empty() { "1".to_string() } else { mono.join("*") };
            out.push_str(&format!("{c} {mono}\n"));
        }
        out
    }
}

fn carry_of(s: &IntPolynomial, n: usize, i: usize) -> IntPolynomial {
    let nv = 2 * n;
    s.sub(&IntPolynomial::var(nv, i)).sub(&IntPolynomial::var(nv, n + i))
}

/// `[S_0, .., S_{n-1}]` over the integers.
pub fn addition_polynomials(p: u32, n: usize) -> Result<Vec<IntPolynomial>> {
    Ok(WittPolynomials::get(PrimeField::new(p)?, n)?.sums().to_vec())
}

/// `D_i` in the variables of length-`n` Witt vectors.
pub fn carry_polynomial(p: u32, n: usize, i: usize) -> Result<IntPolynomial> {
    let polys = WittPolynomials::get(PrimeField::new(p)?, n)?;
    if i >= n {
        return Err(Error::InvalidInput(format!("index {i} out of range for length {n}")));
    }
    Ok(polys.carry(i))
}

pub fn truncated_polynomial(p: u32, n: usize, i: usize, j: usize) -> Result<IntPolynomial> {
    WittPolynomials::get(PrimeField::new(p)?, n)?.truncated(i, j)
}

pub fn coefficient(poly: &IntPolynomial, monomial: &[u32]) -> BigInt {
    poly.coefficient(monomial)
}

/// Witt vector of fixed length over a ring of characteristic p.
#[derive(Clone, Debug, PartialEq)]
pub struct WittVector<R> {
    entries: Vec<R>,
}

impl<R: WittRing> WittVector<R> {
    pub fn new(entries: Vec<R>) -> Result<Self> {
        let Some(first) = entries.first() else {
            return Err(Error::InvalidInput("Witt vector needs at least one entry".into()));
        };
        if entries.iter().any(|e| !e.same_ring(first)) {
            return Err(Error::InvalidInput("Witt vector entries from different rings".into()));
        }
        Ok(WittVector { entries })
    }

    pub fn zero(len: usize, like: &R) -> Self {
        WittVector { entries: vec![like.zero_like(); len] }
    }

    pub fn entries(&self) -> &[R] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<R> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Witt addition: entry i is `S_i` (mod p) at `(u_0..u_i, v_0..v_i)`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let n = self.len();
        if other.len() != n {
            return Err(Error::InvalidInput(format!("Witt lengths differ: {n} vs {}", other.len())));
        }
        if !self.entries[0].same_ring(&other.entries[0]) {
            return Err(Error::InvalidInput("Witt vectors over different rings".into()));
        }
        let field = PrimeField::new(self.entries[0].characteristic())?;
        let polys = WittPolynomials::get(field, n)?;
        let values: Vec<R> = self.entries.iter().chain(&other.entries).cloned().collect();
        let entries = (0..n).map(|i| polys.sum_mod_p(i).evaluate(&values)).collect();
        Ok(WittVector { entries })
    }
}

impl<R: fmt::Display> fmt::Display for WittVector<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, e) in self.entries.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

type IntegerCache = Mutex<HashMap<(u32, usize), Vec<WittVector<Fp>>>>;

fn integer_cache() -> &'static IntegerCache {
    static CACHE: OnceLock<IntegerCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The Witt vector `k * 1` over F_p (k-fold Witt sum of the unit vector).
pub fn witt_integer(k: u64, p: u32, n: usize) -> Result<WittVector<Fp>> {
    let field = PrimeField::new(p)?;
    let key = (p, n);
    {
        let cache = integer_cache().lock().unwrap();
        if let Some(v) = cache.get(&key).and_then(|list| list.get(k as usize)) {
            return Ok(v.clone());
        }
    }
    let mut list = integer_cache().lock().unwrap().get(&key).cloned().unwrap_or_default();
    if list.is_empty() {
        list.push(WittVector::zero(n, &field.element(0)));
    }
    let mut unit = vec![field.element(0); n];
    unit[0] = field.element(1);
    let unit = WittVector::new(unit)?;
    while list.len() <= k as usize {
        let next = list.last().unwrap().add(&unit)?;
        list.push(next);
    }
    let out = list[k as usize].clone();
    let mut cache = integer_cache().lock().unwrap();
    let entry = cache.entry(key).or_default();
    if entry.len() < list.len() {
        *entry = list;
    }
    Ok(out)
}

/// Sign of an integer coefficient as `-1`, `0` or `1`.
pub fn sign(c: &BigInt) -> i32 {
    if c.is_zero() {
        0
    } else if c.is_negative() {
        -1
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polys(p: u32, n: usize) -> Arc<WittPolynomials> {
        WittPolynomials::get(PrimeField::new(p).unwrap(), n).unwrap()
    }

    /// `X_i^{p-1} .. X_{j-1}^{p-1} Y_i` in the variables of `w`.
    fn lemma_monomial(w: &WittPolynomials, p: u32, i: usize, j: usize) -> Monomial {
        let mut m = vec![0; w.nvars()];
        for h in i..j {
            m[w.x(h)] = p - 1;
        }
        m[w.y(i)] += 1;
        m
    }

    #[test]
    fn s0_is_x0_plus_y0() {
        for p in [2, 3, 5, 7] {
            let w = polys(p, 1);
            let expected = IntPolynomial::var(2, 0).add(&IntPolynomial::var(2, 1));
            assert_eq!(w.sum(0), &expected);
            assert!(w.carry(0).is_zero());
        }
    }

    #[test]
    fn s1_small_primes() {
        let w = polys(2, 2);
        let (x0, x1, y0, y1) = (w.x(0), w.x(1), w.y(0), w.y(1));
        let v = |i| IntPolynomial::var(4, i);
        // (X0^2 + Y0^2 - (X0 + Y0)^2) / 2 = -X0 Y0, so S_1 = X1 + Y1 - X0 Y0
        let expected = v(x1).add(&v(y1)).sub(&v(x0).mul(&v(y0)));
        assert_eq!(w.sum(1), &expected);
        assert_eq!(w.carry(1), v(x0).mul(&v(y0)).scale(&BigInt::from(-1)));
        // mod 2 that is X1 + Y1 + X0 Y0
        let mut m = vec![0; 4];
        m[x0] = 1;
        m[y0] = 1;
        assert_eq!(w.sum_mod_p(1).coefficient(&m), 1);

        let w = polys(3, 2);
        let v = |i| IntPolynomial::var(4, i);
        let (x0, x1, y0, y1) = (w.x(0), w.x(1), w.y(0), w.y(1));
        let expected = v(x1)
            .add(&v(y1))
            .sub(&v(x0).pow(2).mul(&v(y0)))
            .sub(&v(x0).mul(&v(y0).pow(2)));
        assert_eq!(w.sum(1), &expected);
    }

    #[test]
    fn lemma_41_coefficients() {
        for (p, n) in [(2u32, 4usize), (3, 3), (5, 3)] {
            let w = polys(p, n);
            for j in 0..n {
                for i in 0..=j {
                    let c = w.sum(j).coefficient(&lemma_monomial(&w, p, i, j));
                    let expected = if (j - i) % 2 == 0 { 1 } else { -1 };
                    assert_eq!(c, BigInt::from(expected), "p={p} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn carries_have_x_and_y_factors() {
        for (p, n) in [(2u32, 3usize), (3, 2), (5, 2)] {
            let w = polys(p, n);
            for i in 0..n {
                for (m, _) in w.carry(i).terms() {
                    assert!((0..i).any(|h| m[w.x(h)] > 0), "p={p} D_{i} monomial {m:?}");
                    assert!((0..i).any(|h| m[w.y(h)] > 0), "p={p} D_{i} monomial {m:?}");
                }
            }
        }
    }

    #[test]
    fn truncated_examples() {
        let w = polys(2, 3);
        assert_eq!(w.truncated(0, 2).unwrap(), w.carry(2));
        for i in 0..3 {
            assert!(w.truncated(i, i).unwrap().is_zero());
        }
        let e12 = w.truncated(1, 2).unwrap();
        let allowed: BTreeSet<usize> = [w.x(1), w.y(1)].into();
        assert!(e12.support().is_subset(&allowed));
        assert!(!e12.is_zero());
        assert!(w.truncated(2, 1).is_err());
    }

    #[test]
    fn isobaric_examples() {
        let w = polys(2, 2);
        assert_eq!(w.sum_mod_p(1).isobaric_weight(&w.weights()), Ok(2));
        assert_eq!(w.sum_mod_p(0).isobaric_weight(&w.weights()), Ok(1));
        let w = polys(3, 3);
        assert_eq!(w.sum_mod_p(2).isobaric_weight(&w.weights()), Ok(9));
        // X0 + X1 is not isobaric
        let bad = IntPolynomial::var(6, 0).add(&IntPolynomial::var(6, 1)).reduce_mod(w.field());
        assert!(bad.isobaric_weight(&w.weights()).is_err());
    }

    #[test]
    fn rejects_large_degree() {
        assert!(WittPolynomials::get(PrimeField::new(2).unwrap(), 8).is_err());
        assert!(WittPolynomials::get(PrimeField::new(5).unwrap(), 4).is_err());
    }

    #[test]
    fn witt_add_examples() {
        let f = PrimeField::new(2).unwrap();
        let e = |c| f.element(c);
        let a = WittVector::new(vec![e(1), e(0)]).unwrap();
        assert_eq!(a.add(&a).unwrap(), WittVector::new(vec![e(0), e(1)]).unwrap());
        let zero = WittVector::zero(2, &e(0));
        assert_eq!(a.add(&zero).unwrap(), a);
    }

    #[test]
    fn witt_integer_examples() {
        let f = PrimeField::new(2).unwrap();
        assert_eq!(witt_integer(0, 2, 2).unwrap(), WittVector::zero(2, &f.element(0)));
        assert_eq!(
            witt_integer(3, 2, 2).unwrap(),
            WittVector::new(vec![f.element(1), f.element(1)]).unwrap()
        );
        for (p, n) in [(2u32, 3usize), (3, 2), (5, 2)] {
            let field = PrimeField::new(p).unwrap();
            for i in 0..n {
                let v = witt_integer((p as u64).pow(i as u32), p, n).unwrap();
                for (h, x) in v.entries().iter().enumerate() {
                    assert_eq!(x.value(), (h == i) as u32, "p={p} i={i}");
                }
            }
            let q = (p as u64).pow(n as u32);
            assert_eq!(witt_integer(q, p, n).unwrap(), WittVector::zero(n, &field.element(0)));
        }
    }

    #[test]
    fn witt_integer_is_additive() {
        for (p, n) in [(2u32, 2usize), (2, 3), (3, 2)] {
            let q = (p as u64).pow(n as u32);
            for a in 0..q {
                for b in 0..q {
                    let lhs = witt_integer(a, p, n).unwrap().add(&witt_integer(b, p, n).unwrap()).unwrap();
                    assert_eq!(lhs, witt_integer((a + b) % q, p, n).unwrap(), "p={p} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn dump_is_graded_lex() {
        let w = polys(2, 2);
        assert_eq!(w.dump(w.sum(1)), "1 X1\n1 Y1\n-1 X0*Y0\n");
    }

    #[test]
    fn witt_add_over_series() {
        let f = PrimeField::new(2).unwrap();
        let s = |t: &str| crate::series::parse_series(t, f).unwrap();
        let a = WittVector::new(vec![s("t^-1"), s("0")]).unwrap();
        let b = WittVector::new(vec![s("t"), s("1")]).unwrap();
        // S_1 = X1 + Y1 + X0 Y0 mod 2
        assert_eq!(a.add(&b).unwrap().entries(), &[s("t^-1 + t"), s("0")]);
    }

    #[test]
    fn unit_coefficient_of_y_in_s() {
        for (p, n) in [(2u32, 4usize), (3, 3), (5, 2), (7, 2)] {
            let w = polys(p, n);
            for j in 0..n {
                let mut m = vec![0; w.nvars()];
                m[w.y(j)] = 1;
                assert_eq!(w.sum(j).coefficient(&m), BigInt::one());
            }
        }
    }

    #[test]
    fn sums_and_carries_are_isobaric() {
        for (p, n) in [(2u32, 4usize), (2, 6), (3, 3), (5, 2), (7, 2)] {
            let w = polys(p, n);
            let weights = w.weights();
            for i in 0..n {
                let expected = (p as u64).pow(i as u32);
                assert_eq!(w.sum_mod_p(i).isobaric_weight(&weights), Ok(expected), "p={p} S_{i}");
                if i > 0 {
                    assert_eq!(w.carry_mod_p(i).isobaric_weight(&weights), Ok(expected), "p={p} D_{i}");
                }
            }
        }
    }

    mod ring_axioms {
        use super::*;
        use proptest::prelude::*;

        fn vector(p: u32, n: usize) -> impl Strategy<Value = WittVector<Fp>> {
            proptest::collection::vec(0..p, n).prop_map(move |vals| {
                let f = PrimeField::new(p).unwrap();
                WittVector::new(vals.into_iter().map(|v| f.element(v as i64)).collect()).unwrap()
            })
        }

        fn triple() -> impl Strategy<Value = (WittVector<Fp>, WittVector<Fp>, WittVector<Fp>)> {
            prop_oneof![Just((2u32, 1usize)), Just((2, 2)), Just((2, 3)), Just((3, 2)), Just((5, 2))]
                .prop_flat_map(|(p, n)| (vector(p, n), vector(p, n), vector(p, n)))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(500))]
            #[test]
            fn commutative_associative_identity((a, b, c) in triple()) {
                prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
                prop_assert_eq!(
                    a.add(&b).unwrap().add(&c).unwrap(),
                    a.add(&b.add(&c).unwrap()).unwrap()
                );
                let zero = WittVector::zero(a.len(), &a.entries()[0]);
                prop_assert_eq!(a.add(&zero).unwrap(), a);
            }
        }
    }
}
