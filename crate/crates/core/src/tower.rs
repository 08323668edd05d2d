//! The extension `L = K(x_0, .., x_{n-1})` cut out by `phi(x) = x + beta` in
//! Witt vectors, as an explicit quotient ring.
//!
//! Elements are dense vectors of `p^n` series coefficients indexed by the
//! mixed-radix exponent index `a_0 + a_1 p + .. + a_{n-1} p^{n-1}`. Level `i`
//! of the tower (the first `i` variables) occupies the first `p^i` slots, so
//! subtower elements embed by padding with zeros.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::series::{LaurentSeries, Valuation};
use crate::witt::{witt_integer, WittPolynomials, WittRing};

/// Largest `p^n` for which towers are built.
pub const MAX_TOWER_DEGREE: u64 = 27;

/// Maximum number of variables supported (`2^4 <= 27`).
pub const MAX_TOWER_LENGTH: usize = 4;

/// Raw exponent tuple; exponents may exceed `p - 1`.
pub type RawMonomial = [u32; MAX_TOWER_LENGTH];

#[derive(Clone, Debug, PartialEq)]
pub struct TowerConfig {
    pub field: PrimeField,
    pub beta: Vec<LaurentSeries>,
    /// Absolute precision used when a computation has to truncate.
    pub precision: i64,
}

impl TowerConfig {
    pub fn new(field: PrimeField, beta: Vec<LaurentSeries>, precision: i64) -> Self {
        TowerConfig { field, beta, precision }
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }
}

pub struct Tower {
    field: PrimeField,
    p: usize,
    n: usize,
    dim: usize,
    beta: Vec<LaurentSeries>,
    precision: i64,
    /// `relations[i]` is `beta_i + d_i` as a level-i vector.
    relations: Vec<Vec<LaurentSeries>>,
    carries: Vec<Vec<LaurentSeries>>,
    /// `levels[j - 1]` is the tower of the first `j` variables, `j < n`.
    levels: Vec<Arc<Tower>>,
    witt: Arc<WittPolynomials>,
    sigma_images: Mutex<HashMap<u64, Arc<Vec<Vec<LaurentSeries>>>>>,
}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tower").field("p", &self.p).field("beta", &self.beta).finish()
    }
}

fn check_config(config: &TowerConfig) -> Result<()> {
    let n = config.n();
    let p = config.field.p();
    if n == 0 {
        return Err(Error::InvalidInput("beta must have at least one coordinate".into()));
    }
    if (p as u64).checked_pow(n as u32).is_none_or(|q| q > MAX_TOWER_DEGREE) {
        return Err(Error::InvalidInput(format!(
            "towers need p^n <= {MAX_TOWER_DEGREE}, got {p}^{n}"
        )));
    }
    for (i, b) in config.beta.iter().enumerate() {
        if b.field() != config.field {
            return Err(Error::InvalidInput(format!("beta_{i} is over a different field")));
        }
        match b.valuation() {
            Valuation::Finite(v) if v < 0 && v % p as i64 == 0 => {
                return Err(Error::InvalidInput(format!(
                    "beta is not reduced: v(beta_{i}) = {v} is negative and divisible by {p}"
                )))
            }
            Valuation::AtLeast(_) => {
                return Err(Error::precision(format!("valuation of beta_{i} is not known")));
            }
            _ => {}
        }
    }
    match config.beta[0].valuation() {
        Valuation::Finite(v) if v < 0 => Ok(()),
        v => Err(Error::InvalidInput(format!(
            "v(beta_0) must be negative for a totally ramified extension, got {v}"
        ))),
    }
}

impl Tower {
    pub fn build(config: &TowerConfig) -> Result<Arc<Tower>> {
        check_config(config)?;
        let field = config.field;
        let n = config.n();
        let witt = WittPolynomials::get(field, n)?;
        let mut relations = Vec::with_capacity(n);
        let mut carries = Vec::with_capacity(n);
        let mut levels: Vec<Arc<Tower>> = Vec::new();
        for i in 0..n {
            let d = if i == 0 {
                vec![LaurentSeries::zero(field)]
            } else {
                let lower = &levels[i - 1];
                let mut values: Vec<TowerElement> = (0..n)
                    .map(|h| if h < i { lower.x(h) } else { lower.zero() })
                    .collect();
                values.extend((0..n).map(|h| {
                    if h < i {
                        lower.constant(config.beta[h].clone())
                    } else {
                        lower.zero()
                    }
                }));
                witt.carry_mod_p(i).evaluate(&values).coeffs
            };
            let mut rel = d.clone();
            rel[0] = rel[0].add(&config.beta[i]);
            relations.push(rel);
            carries.push(d);
            let tower = Tower {
                field,
                p: field.p() as usize,
                n: i + 1,
                dim: (field.p() as usize).pow(i as u32 + 1),
                beta: config.beta[..=i].to_vec(),
                precision: config.precision,
                relations: relations.clone(),
                carries: carries.clone(),
                levels: levels.clone(),
                witt: WittPolynomials::get(field, i + 1)?,
                sigma_images: Mutex::new(HashMap::new()),
            };
            levels.push(Arc::new(tower));
        }
        Ok(levels.pop().unwrap())
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn p(&self) -> u32 {
        self.p as u32
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `[L : K] = p^n`.
    pub fn degree(&self) -> u64 {
        self.dim as u64
    }

    pub fn beta(&self) -> &[LaurentSeries] {
        &self.beta
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    pub fn config(&self) -> TowerConfig {
        TowerConfig::new(self.field, self.beta.clone(), self.precision)
    }

    pub fn same_as(&self, other: &Tower) -> bool {
        std::ptr::eq(self, other) || (self.field == other.field && self.beta == other.beta)
    }

    pub fn zero(self: &Arc<Self>) -> TowerElement {
        TowerElement {
            tower: self.clone(),
            coeffs: vec![LaurentSeries::zero(self.field); self.dim],
        }
    }

    pub fn one(self: &Arc<Self>) -> TowerElement {
        self.constant(LaurentSeries::one(self.field))
    }

    pub fn constant(self: &Arc<Self>, c: LaurentSeries) -> TowerElement {
        let mut e = self.zero();
        e.coeffs[0] = c;
        e
    }

    /// The generator `x_i`.
    pub fn x(self: &Arc<Self>, i: usize) -> TowerElement {
        assert!(i < self.n, "x_{i} does not exist in a tower of length {}", self.n);
        let mut exps = [0; MAX_TOWER_LENGTH];
        exps[i] = 1;
        self.monomial(&exps[..self.n], LaurentSeries::one(self.field))
    }

    /// `c * x^a` for exponents below p.
    pub fn monomial(self: &Arc<Self>, exps: &[u32], c: LaurentSeries) -> TowerElement {
        let mut e = self.zero();
        e.coeffs[self.index(exps)] = c;
        e
    }

    /// The carry `d_i` as an element of this tower.
    pub fn carry(self: &Arc<Self>, i: usize) -> TowerElement {
        self.from_level(&self.carries[i])
    }

    /// `beta_i + d_i`, the constant in `x_i^p = x_i + beta_i + d_i`.
    pub fn relation(self: &Arc<Self>, i: usize) -> TowerElement {
        self.from_level(&self.relations[i])
    }

    fn from_level(self: &Arc<Self>, v: &[LaurentSeries]) -> TowerElement {
        let mut e = self.zero();
        e.coeffs[..v.len()].clone_from_slice(v);
        e
    }

    pub fn index(&self, exps: &[u32]) -> usize {
        assert_eq!(exps.len(), self.n);
        exps.iter().rev().fold(0, |acc, &a| {
            assert!((a as usize) < self.p, "exponent {a} not reduced");
            acc * self.p + a as usize
        })
    }

    pub fn exponents(&self, mut idx: usize) -> Vec<u32> {
        (0..self.n)
            .map(|_| {
                let a = idx % self.p;
                idx /= self.p;
                a as u32
            })
            .collect()
    }

    /// The tower `K_j = K(x_0, .., x_{j-1})`.
    pub fn subtower(self: &Arc<Self>, j: usize) -> Result<Arc<Tower>> {
        if j == 0 || j > self.n {
            return Err(Error::InvalidInput(format!("subtower index {j} outside 1..={}", self.n)));
        }
        Ok(if j == self.n { self.clone() } else { self.levels[j - 1].clone() })
    }

    /// Embeds an element of a subtower.
    pub fn lift(self: &Arc<Self>, e: &TowerElement) -> Result<TowerElement> {
        let sub = &e.tower;
        if sub.n > self.n || !self.levels_prefix_matches(sub) {
            return Err(Error::InvalidInput("element is not from a subtower of this tower".into()));
        }
        Ok(self.from_level(&e.coeffs))
    }

    fn levels_prefix_matches(&self, sub: &Tower) -> bool {
        sub.field == self.field && self.beta.starts_with(&sub.beta)
    }

    fn mul_level(&self, level: usize, a: &[LaurentSeries], b: &[LaurentSeries]) -> Vec<LaurentSeries> {
        if level == 0 {
            return vec![a[0].mul(&b[0])];
        }
        if is_scalar(b) {
            return a.iter().map(|c| c.mul(&b[0])).collect();
        }
        if is_scalar(a) {
            return b.iter().map(|c| c.mul(&a[0])).collect();
        }
        let p = self.p;
        let block = a.len() / p;
        let nonzero = |v: &[LaurentSeries]| v.iter().any(|c| !c.is_exact_zero());
        let ab: Vec<&[LaurentSeries]> = a.chunks(block).collect();
        let bb: Vec<&[LaurentSeries]> = b.chunks(block).collect();
        let live_a: Vec<bool> = ab.iter().map(|c| nonzero(c)).collect();
        let live_b: Vec<bool> = bb.iter().map(|c| nonzero(c)).collect();
        let mut raw: Vec<Option<Vec<LaurentSeries>>> = vec![None; 2 * p - 1];
        for k in (0..p).filter(|&k| live_a[k]) {
            for l in (0..p).filter(|&l| live_b[l]) {
                let prod = self.mul_level(level - 1, ab[k], bb[l]);
                accumulate(&mut raw[k + l], prod);
            }
        }
        // x^{p+k} = x^{k+1} + c x^k, highest degree first
        for d in (p..2 * p - 1).rev() {
            if let Some(r) = raw[d].take() {
                let shifted = self.mul_level(level - 1, &self.relations[level - 1], &r);
                accumulate(&mut raw[d - p + 1], r);
                accumulate(&mut raw[d - p], shifted);
            }
        }
        let mut out = Vec::with_capacity(a.len());
        for slot in raw.into_iter().take(p) {
            match slot {
                Some(v) => out.extend(v),
                None => out.extend(std::iter::repeat_n(LaurentSeries::zero(self.field), block)),
            }
        }
        out
    }

    /// Images of all basis monomials under `sigma^k`, cached per `k mod p^n`.
    fn sigma_table(self: &Arc<Self>, k: u64) -> Result<Arc<Vec<Vec<LaurentSeries>>>> {
        let k = k % self.dim as u64;
        if let Some(hit) = self.sigma_images.lock().unwrap().get(&k) {
            return Ok(hit.clone());
        }
        let w = witt_integer(k, self.p as u32, self.n)?;
        let mut values: Vec<TowerElement> = (0..self.n).map(|i| self.x(i)).collect();
        values.extend(w.entries().iter().map(|c| self.constant(LaurentSeries::constant(self.field, c.value() as i64))));
        let images: Vec<TowerElement> =
            (0..self.n).map(|i| self.witt.sum_mod_p(i).evaluate(&values)).collect();
        let mut table: Vec<Vec<LaurentSeries>> = Vec::with_capacity(self.dim);
        table.push(self.one().coeffs);
        for idx in 1..self.dim {
            let exps = self.exponents(idx);
            let i = exps.iter().position(|&a| a > 0).unwrap();
            let prev = &table[idx - self.p.pow(i as u32)];
            table.push(self.mul_level(self.n, prev, &images[i].coeffs));
        }
        let table = Arc::new(table);
        let mut cache = self.sigma_images.lock().unwrap();
        Ok(cache.entry(k).or_insert(table).clone())
    }

    /// One rewriting step `x_i^p -> x_i + beta_i + d_i` on the term with
    /// monomial `m` at variable `var`. Returns `false` when nothing applies.
    pub fn rewrite_once(&self, raw: &mut RawElement, m: &RawMonomial, var: usize) -> bool {
        if m[var] < self.p as u32 {
            return false;
        }
        let Some(c) = raw.terms.remove(m) else {
            return false;
        };
        let mut base = *m;
        base[var] -= self.p as u32;
        let mut with_x = base;
        with_x[var] += 1;
        raw.add_term(with_x, c.clone());
        for (idx, r) in self.relations[var].iter().enumerate() {
            if r.is_exact_zero() {
                continue;
            }
            let mut mono = base;
            let mut rest = idx;
            for e in mono.iter_mut().take(var) {
                *e += (rest % self.p) as u32;
                rest /= self.p;
            }
            raw.add_term(mono, c.mul(r));
        }
        true
    }

    /// Reduces a raw element to normal form by evaluating each monomial in
    /// the quotient ring.
    pub fn normal_form(self: &Arc<Self>, raw: &RawElement) -> TowerElement {
        for m in raw.terms.keys() {
            assert!(m[self.n..].iter().all(|&e| e == 0), "monomial {m:?} outside a tower of length {}", self.n);
        }
        let mut acc = self.zero();
        let xs: Vec<TowerElement> = (0..self.n).map(|i| self.x(i)).collect();
        for (m, c) in &raw.terms {
            let mut term = self.constant(c.clone());
            for (i, x) in xs.iter().enumerate() {
                if m[i] > 0 {
                    term = term.mul(&x.pow(m[i] as u64));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Finds an element of `v_L = 1` of the form `t^a * prod g_j^{c_j}` over
    /// the given generators, with total degree as small as possible.
    pub fn find_uniformizer(self: &Arc<Self>, generators: &[TowerElement]) -> Result<TowerElement> {
        let q = self.dim as i64;
        let vals: Vec<i64> = generators.iter().map(|g| g.valuation_l()).collect::<Result<_>>()?;
        let gcd_ok = vals.iter().any(|v| v.rem_euclid(self.p as i64) != 0);
        if !gcd_ok {
            return Err(Error::contract("no generator has valuation prime to p"));
        }
        let k = generators.len();
        let max_total = (q as usize - 1) * k;
        for total in 1..=max_total {
            let mut found: Option<Vec<u32>> = None;
            for_each_composition(total, k, q as u32 - 1, &mut |c| {
                if found.is_none() {
                    let s: i64 = c.iter().zip(&vals).map(|(&ci, &v)| ci as i64 * v).sum();
                    if (s - 1).rem_euclid(q) == 0 {
                        found = Some(c.to_vec());
                    }
                }
            });
            if let Some(c) = found {
                let s: i64 = c.iter().zip(&vals).map(|(&ci, &v)| ci as i64 * v).sum();
                let a = (1 - s) / q;
                let mut pi = self.constant(LaurentSeries::monomial(self.field, 1, a));
                for (g, &ci) in generators.iter().zip(&c) {
                    if ci > 0 {
                        pi = pi.mul(&g.pow(ci as u64));
                    }
                }
                let v = pi.valuation_l()?;
                if v != 1 {
                    return Err(Error::contract(format!("uniformizer candidate has valuation {v}")));
                }
                return Ok(pi);
            }
        }
        Err(Error::contract("no uniformizer among products of the generators"))
    }

    /// Lower breaks measured directly: `v_L(sigma^{p^j} pi - pi) - 1`.
    pub fn lower_breaks_from_uniformizer(self: &Arc<Self>, pi: &TowerElement) -> Result<Vec<i64>> {
        (0..self.n)
            .map(|j| {
                let moved = pi.apply_sigma((self.p as u64).pow(j as u32))?.sub(pi);
                Ok(moved.valuation_l()? - 1)
            })
            .collect()
    }
}

fn for_each_composition(total: usize, parts: usize, cap: u32, f: &mut dyn FnMut(&[u32])) {
    fn go(rest: usize, slot: usize, cur: &mut Vec<u32>, cap: u32, f: &mut dyn FnMut(&[u32])) {
        if slot + 1 == cur.len() {
            if rest as u32 <= cap {
                cur[slot] = rest as u32;
                f(cur);
            }
            return;
        }
        for c in (0..=rest.min(cap as usize)).rev() {
            cur[slot] = c as u32;
            go(rest - c, slot + 1, cur, cap, f);
        }
    }
    if parts == 0 {
        return;
    }
    let mut cur = vec![0; parts];
    go(total, 0, &mut cur, cap, f);
}

fn is_scalar(v: &[LaurentSeries]) -> bool {
    v[1..].iter().all(|c| c.is_exact_zero())
}

fn accumulate(slot: &mut Option<Vec<LaurentSeries>>, v: Vec<LaurentSeries>) {
    match slot {
        None => *slot = Some(v),
        Some(acc) => {
            for (a, b) in acc.iter_mut().zip(&v) {
                if !b.is_exact_zero() {
                    *a = a.add(b);
                }
            }
        }
    }
}

/// Element with unreduced exponents, input to `normal_form`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawElement {
    terms: BTreeMap<RawMonomial, LaurentSeries>,
}

impl RawElement {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, m: RawMonomial, c: LaurentSeries) {
        if c.is_exact_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                *old = old.add(&c);
                if old.is_exact_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn from_element(e: &TowerElement) -> Self {
        let mut raw = Self::new();
        for (exps, c) in e.terms() {
            let mut m = [0; MAX_TOWER_LENGTH];
            m[..exps.len()].copy_from_slice(&exps);
            raw.add_term(m, c.clone());
        }
        raw
    }

    pub fn terms(&self) -> impl Iterator<Item = (&RawMonomial, &LaurentSeries)> {
        self.terms.iter()
    }

    /// Monomial/variable pairs where a rewrite applies.
    pub fn redexes(&self, p: u32) -> Vec<(RawMonomial, usize)> {
        self.terms
            .keys()
            .flat_map(|m| (0..MAX_TOWER_LENGTH).filter(|&v| m[v] >= p).map(move |v| (*m, v)))
            .collect()
    }
}

/// An element of `L` in normal form.
#[derive(Clone)]
pub struct TowerElement {
    tower: Arc<Tower>,
    coeffs: Vec<LaurentSeries>,
}

impl PartialEq for TowerElement {
    fn eq(&self, other: &Self) -> bool {
        self.tower.same_as(&other.tower) && self.coeffs == other.coeffs
    }
}

impl TowerElement {
    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    fn check(&self, other: &Self) {
        assert!(self.tower.same_as(&other.tower), "elements of different towers");
    }

    fn with(&self, coeffs: Vec<LaurentSeries>) -> Self {
        TowerElement { tower: self.tower.clone(), coeffs }
    }

    pub fn coefficients(&self) -> &[LaurentSeries] {
        &self.coeffs
    }

    /// Element with the given coefficients in mixed-radix basis order.
    pub fn from_coefficients(tower: &Arc<Tower>, coeffs: Vec<LaurentSeries>) -> Self {
        assert_eq!(coeffs.len() as u64, tower.degree(), "coefficient vector length");
        TowerElement { tower: tower.clone(), coeffs }
    }

    /// Coefficient of `x^a` for reduced exponents.
    pub fn coefficient(&self, exps: &[u32]) -> &LaurentSeries {
        &self.coeffs[self.tower.index(exps)]
    }

    /// Nonzero terms as (exponents, coefficient).
    pub fn terms(&self) -> Vec<(Vec<u32>, &LaurentSeries)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_exact_zero())
            .map(|(idx, c)| (self.tower.exponents(idx), c))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_exact_zero())
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_exact())
    }

    /// The K-coordinate when the element lies in K.
    pub fn as_constant(&self) -> Option<&LaurentSeries> {
        is_scalar(&self.coeffs).then(|| &self.coeffs[0])
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        self.with(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        self.with(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn neg(&self) -> Self {
        self.with(self.coeffs.iter().map(|a| a.neg()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        self.with(self.tower.mul_level(self.tower.n, &self.coeffs, &other.coeffs))
    }

    pub fn scale(&self, c: &LaurentSeries) -> Self {
        self.with(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn shift(&self, k: i64) -> Self {
        self.with(self.coeffs.iter().map(|a| a.shift(k)).collect())
    }

    pub fn truncate(&self, precision: i64) -> Self {
        self.with(self.coeffs.iter().map(|a| a.truncate(precision)).collect())
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut acc = self.tower.one();
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

    /// `sigma^k`, where `sigma(x) = x + 1` in Witt vectors.
    pub fn apply_sigma(&self, k: u64) -> Result<Self> {
        let table = self.tower.sigma_table(k)?;
        let mut out = vec![LaurentSeries::zero(self.tower.field); self.tower.dim];
        for (c, image) in self.coeffs.iter().zip(table.iter()) {
            if c.is_exact_zero() {
                continue;
            }
            for (o, m) in out.iter_mut().zip(image) {
                if !m.is_exact_zero() {
                    *o = o.add(&m.mul(c));
                }
            }
        }
        Ok(self.with(out))
    }

    /// The norm to K. Computed level by level: the product of the `p`
    /// conjugates under `sigma^{p^{j-1}}` lies in `K_{j-1}`.
    pub fn norm(&self) -> Result<LaurentSeries> {
        let mut current = self.clone();
        for j in (1..=self.tower.n).rev() {
            let tower = current.tower.clone();
            let step = (tower.p as u64).pow(j as u32 - 1);
            let mut prod = current.clone();
            let mut conj = current.clone();
            for _ in 1..tower.p {
                conj = conj.apply_sigma(step)?;
                prod = prod.mul(&conj);
            }
            let block = tower.dim / tower.p;
            for c in &prod.coeffs[block..] {
                if !c.has_no_known_terms() {
                    let msg = format!("conjugate product has a nonzero x_{} part: {c}", j - 1);
                    return Err(if self.is_exact() { Error::contract(msg) } else { Error::precision(msg) });
                }
            }
            let lower = if j == 1 {
                return Ok(prod.coeffs[0].clone());
            } else {
                tower.levels[j - 2].clone()
            };
            current = TowerElement { tower: lower, coeffs: prod.coeffs[..block].to_vec() };
        }
        unreachable!()
    }

    /// `v_L` with an exactness tag; `v_L = v_K o N_{L/K}`.
    pub fn valuation(&self) -> Result<Valuation> {
        if self.is_zero() {
            return Ok(Valuation::Infinite);
        }
        if let Some(c) = self.as_constant() {
            return Ok(c.valuation().scale(self.tower.dim as i64));
        }
        Ok(self.norm()?.valuation())
    }

    /// Exact `v_L`; precision exhaustion when the norm does not determine it.
    pub fn valuation_l(&self) -> Result<i64> {
        match self.valuation()? {
            Valuation::Finite(v) => Ok(v),
            Valuation::Infinite => Err(Error::InvalidInput("valuation of zero".into())),
            Valuation::AtLeast(b) => {
                Err(Error::precision(format!("v_L is only known to be >= {b}")))
            }
        }
    }
}

impl WittRing for TowerElement {
    fn zero_like(&self) -> Self {
        self.tower.zero()
    }
    fn one_like(&self) -> Self {
        self.tower.one()
    }
    fn ring_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn scale_fp(&self, c: u32) -> Self {
        self.with(self.coeffs.iter().map(|a| a.scale(c)).collect())
    }
    fn is_ring_zero(&self) -> bool {
        self.is_zero()
    }
    fn characteristic(&self) -> u32 {
        self.tower.p as u32
    }
    fn same_ring(&self, other: &Self) -> bool {
        self.tower.same_as(&other.tower)
    }
}

impl fmt::Display for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = self.terms();
        if terms.is_empty() {
            return f.write_str("0");
        }
        terms.sort_by(|(a, _), (b, _)| {
            let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        for (k, (exps, c)) in terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let mono: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(i, &a)| if a == 1 { format!("x{i}") } else { format!("x{i}^{a}") })
                .collect();
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                f.write_str(&mono.join("*"))?;
            } else {
                write!(f, "({c})*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TowerElement({self})")
    }
}
