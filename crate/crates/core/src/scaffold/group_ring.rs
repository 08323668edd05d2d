//! Elements of `K[G]` for `G = <sigma>` cyclic of order `p^n`, stored as the
//! coefficient of each power `sigma^k`.

use crate::error::Result;
use crate::field::PrimeField;
use crate::series::LaurentSeries;
use crate::tower::TowerElement;

#[derive(Clone, Debug, PartialEq)]
pub struct GroupRingElement {
    field: PrimeField,
    coeffs: Vec<LaurentSeries>,
}

impl GroupRingElement {
    pub fn zero(field: PrimeField, order: usize) -> Self {
        GroupRingElement { field, coeffs: vec![LaurentSeries::zero(field); order] }
    }

    /// `sigma^k`.
    pub fn sigma_power(field: PrimeField, order: usize, k: u64) -> Self {
        let mut e = Self::zero(field, order);
        e.coeffs[(k % order as u64) as usize] = LaurentSeries::one(field);
        e
    }

    pub fn one(field: PrimeField, order: usize) -> Self {
        Self::sigma_power(field, order, 0)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficients(&self) -> &[LaurentSeries] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect();
        GroupRingElement { field: self.field, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.sub(b)).collect();
        GroupRingElement { field: self.field, coeffs }
    }

    pub fn scale(&self, c: &LaurentSeries) -> Self {
        GroupRingElement { field: self.field, coeffs: self.coeffs.iter().map(|a| a.mul(c)).collect() }
    }

    /// Cyclic convolution.
    pub fn mul(&self, other: &Self) -> Self {
        let q = self.order();
        let mut out = vec![LaurentSeries::zero(self.field); q];
        for (k, a) in self.coeffs.iter().enumerate().filter(|(_, a)| !a.is_exact_zero()) {
            for (l, b) in other.coeffs.iter().enumerate().filter(|(_, b)| !b.is_exact_zero()) {
                let slot = &mut out[(k + l) % q];
                *slot = slot.add(&a.mul(b));
            }
        }
        GroupRingElement { field: self.field, coeffs: out }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.field, self.order()), |acc, _| acc.mul(self))
    }

    /// Image of 1 (the augmentation).
    pub fn augmentation(&self) -> LaurentSeries {
        self.coeffs.iter().fold(LaurentSeries::zero(self.field), |acc, c| acc.add(c))
    }

    /// `sum_k a_k sigma^k(z)`.
    pub fn apply(&self, z: &TowerElement) -> Result<TowerElement> {
        let mut acc = z.tower().zero();
        for (k, a) in self.coeffs.iter().enumerate() {
            if !a.is_exact_zero() {
                acc = acc.add(&z.apply_sigma(k as u64)?.scale(a));
            }
        }
        Ok(acc)
    }

    /// `sum_{1<=k<p} (-1)^{k-1} (self - 1)^k / k`. When `self` shifts `X` by 1
    /// this maps `X^s` to `s X^{s-1}` for `s < p`.
    pub fn truncated_log(&self) -> Self {
        let p = self.field.p();
        let one = Self::one(self.field, self.order());
        let shifted = self.sub(&one);
        let mut acc = Self::zero(self.field, self.order());
        let mut power = one;
        for k in 1..p {
            power = power.mul(&shifted);
            let c = self.field.mul(self.field.inv(k), if k % 2 == 1 { 1 } else { p - 1 });
            acc = acc.add(&power.scale(&LaurentSeries::constant(self.field, c as i64)));
        }
        acc
    }

    /// `sum_{k<p} binom(x, k) (self - 1)^k`: the truncated binomial power
    /// `self^x` for `x` in K.
    pub fn truncated_power(&self, x: &LaurentSeries) -> Self {
        let p = self.field.p();
        let one = Self::one(self.field, self.order());
        let shifted = self.sub(&one);
        let mut acc = one.clone();
        let mut power = one;
        let mut binom = LaurentSeries::one(self.field);
        for k in 1..p {
            power = power.mul(&shifted);
            // binom(x, k) = binom(x, k-1) (x - k + 1) / k
            let factor = x.sub(&LaurentSeries::constant(self.field, k as i64 - 1));
            binom = binom.mul(&factor).scale(self.field.inv(k));
            acc = acc.add(&power.scale(&binom));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_product() {
        let f = PrimeField::new(2).unwrap();
        let s = GroupRingElement::sigma_power(f, 4, 1);
        assert_eq!(s.pow(4), GroupRingElement::one(f, 4));
        assert_eq!(s.pow(3).mul(&s.pow(2)), s);
    }

    #[test]
    fn truncated_power_at_integers() {
        // for x = c in F_p the truncated power is sigma^c exactly
        let f = PrimeField::new(3).unwrap();
        let s = GroupRingElement::sigma_power(f, 9, 3);
        for c in 0..3 {
            let got = s.truncated_power(&LaurentSeries::constant(f, c));
            assert_eq!(got, s.pow(c as u32));
        }
    }

    #[test]
    fn log_differentiates_powers() {
        use crate::tower::{Tower, TowerConfig};
        let f = PrimeField::new(5).unwrap();
        let tower = Tower::build(&TowerConfig::new(f, vec![LaurentSeries::monomial(f, 1, -2)], 50)).unwrap();
        let x = tower.x(0);
        let d = GroupRingElement::sigma_power(f, 5, 1).truncated_log();
        for s in 1..5u64 {
            let expected = x.pow(s - 1).scale(&LaurentSeries::constant(f, s as i64));
            assert_eq!(d.apply(&x.pow(s)).unwrap(), expected);
        }
        assert!(d.augmentation().is_exact_zero());
    }

    #[test]
    fn augmentation_of_difference() {
        let f = PrimeField::new(5).unwrap();
        let psi = GroupRingElement::sigma_power(f, 25, 5).sub(&GroupRingElement::one(f, 25));
        assert!(psi.augmentation().is_exact_zero());
    }
}
