//! Base-p digit bookkeeping that pairs residues mod `p^n` with exponent
//! vectors of the scaffold generators.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitMaps {
    p: u32,
    n: usize,
    q: i64,
    b: Vec<i64>,
    break_sums: Vec<i64>,
    exponents: Vec<usize>,
}

impl DigitMaps {
    /// Tables for the lower breaks `b_1..b_n`; every `b_i` must be prime to p.
    pub fn new(b: &[i64], p: u32) -> Result<Self> {
        let n = b.len();
        if n == 0 {
            return Err(Error::InvalidInput("no breaks".into()));
        }
        if let Some(bad) = b.iter().find(|&&x| x % p as i64 == 0) {
            return Err(Error::InvalidInput(format!("break {bad} is divisible by p = {p}")));
        }
        let q = (p as i64).pow(n as u32);
        let mut maps = DigitMaps { p, n, q, b: b.to_vec(), break_sums: Vec::new(), exponents: Vec::new() };
        maps.break_sums = (0..q as usize).map(|s| maps.compute_break_sum(s)).collect();
        let mut exponents = vec![usize::MAX; q as usize];
        for s in 0..q as usize {
            let image = (-maps.break_sums[s]).rem_euclid(q) as usize;
            if exponents[image] != usize::MAX {
                return Err(Error::contract(format!("residue {image} is hit twice")));
            }
            exponents[image] = s;
        }
        maps.exponents = exponents;
        Ok(maps)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> i64 {
        self.q
    }

    /// Base-p digit `s_(k)`.
    pub fn digit(&self, s: usize, k: usize) -> u32 {
        ((s / (self.p as usize).pow(k as u32)) % self.p as usize) as u32
    }

    pub fn digits(&self, s: usize) -> Vec<u32> {
        (0..self.n).map(|k| self.digit(s, k)).collect()
    }

    fn compute_break_sum(&self, s: usize) -> i64 {
        (0..self.n)
            .map(|k| self.digit(s, k) as i64 * (self.p as i64).pow(k as u32) * self.b[self.n - 1 - k])
            .sum()
    }

    /// `sum_k s_(k) p^k b_{n-k}`.
    pub fn break_sum(&self, s: usize) -> i64 {
        self.break_sums[s]
    }

    /// Least nonnegative residue mod `p^n`.
    pub fn residue(&self, t: i64) -> usize {
        t.rem_euclid(self.q) as usize
    }

    /// The `s` with `t + break_sum(s) = 0 mod p^n`.
    pub fn exponents_for(&self, t: i64) -> usize {
        self.exponents[self.residue(t)]
    }
}
