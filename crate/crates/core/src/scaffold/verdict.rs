//! Sufficient-condition verdicts. A failed condition gives `unknown`, never
//! a negative claim.

use serde::Serialize;

use crate::ramification::BreakData;

use super::Precision;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GmsOutcome {
    Free,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HopfOutcome {
    Hopf,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GmsVerdict {
    pub r_u1: i64,
    /// `b_{i+1} - p^n u_i >= r(u_1)` for every i.
    pub strengthened_ok: bool,
    /// `r(u_1) | p^m - 1` for some `1 <= m <= n`.
    pub divisor_ok: bool,
    pub verdict: GmsOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HopfVerdict {
    /// `u_1 = -1 mod p^n`.
    pub congruence_ok: bool,
    pub verdict: HopfOutcome,
}

pub fn gms_verdict(breaks: &BreakData, c: Precision) -> GmsVerdict {
    let q = breaks.degree();
    let p = breaks.p as i64;
    let r = breaks.u[0].rem_euclid(q);
    let strengthened_ok = c.bounded().is_none_or(|c| c >= r);
    let divisor_ok = r != 0 && (1..=breaks.n as u32).any(|m| (p.pow(m) - 1) % r == 0);
    let verdict = if strengthened_ok && divisor_ok { GmsOutcome::Free } else { GmsOutcome::Unknown };
    GmsVerdict { r_u1: r, strengthened_ok, divisor_ok, verdict }
}

pub fn hopf_verdict(breaks: &BreakData, gms: &GmsVerdict) -> HopfVerdict {
    let q = breaks.degree();
    let congruence_ok = (breaks.u[0] + 1).rem_euclid(q) == 0;
    let verdict = if congruence_ok && gms.verdict == GmsOutcome::Free { HopfOutcome::Hopf } else { HopfOutcome::Unknown };
    HopfVerdict { congruence_ok, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaffold::scaffold_precision;

    fn verdicts(u: Vec<i64>, p: u32) -> (GmsVerdict, HopfVerdict) {
        let b = BreakData::from_upper(u, p).unwrap();
        let g = gms_verdict(&b, scaffold_precision(&b));
        let h = hopf_verdict(&b, &g);
        (g, h)
    }

    #[test]
    fn families() {
        let (g, h) = verdicts(vec![1, 3], 2);
        assert_eq!((g.r_u1, g.verdict, h.verdict), (1, GmsOutcome::Free, HopfOutcome::Unknown));
        let (g, h) = verdicts(vec![3, 9], 2);
        assert_eq!((g.r_u1, g.verdict, h.verdict), (3, GmsOutcome::Free, HopfOutcome::Hopf));
    }

    #[test]
    fn divisibility_failure_is_unknown() {
        // r(u_1) = 5 divides none of 1, 3, 7
        let (g, h) = verdicts(vec![5, 45, 365], 2);
        assert!(!g.divisor_ok);
        assert_eq!(g.verdict, GmsOutcome::Unknown);
        assert_eq!(h.verdict, HopfOutcome::Unknown);
    }

    #[test]
    fn degree_two_hopf() {
        let (g, h) = verdicts(vec![1], 2);
        assert!(g.strengthened_ok && h.congruence_ok);
        assert_eq!(h.verdict, HopfOutcome::Hopf);
    }
}
