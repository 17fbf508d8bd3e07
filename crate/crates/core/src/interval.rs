//! Weak-bound intervals over exact rationals.
//!
//! An endpoint may be absent, meaning unbounded on that side. All bounds are
//! weak (closed): a value v satisfies lo <= v <= hi. There is no strict-bound
//! tracking anywhere, and exact arithmetic means no outward rounding.

use crate::rational::{ceil, floor, is_integer, Rational};
use num_traits::{Signed, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Option<Rational>,
    hi: Option<Rational>,
}

// Extended endpoint used internally by multiplication; 0 * infinity = 0,
// which is exact here because infinities only mark absent bounds and every
// member value is finite.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Ext {
    NegInf,
    Fin(Rational),
    PosInf,
}

impl Ext {
    fn mul(&self, other: &Ext) -> Ext {
        use Ext::*;
        match (self, other) {
            (Fin(a), Fin(b)) => Fin(a * b),
            (Fin(a), inf) | (inf, Fin(a)) => {
                if a.is_zero() {
                    Fin(Rational::zero())
                } else if (a.is_positive()) == (*inf == PosInf) {
                    PosInf
                } else {
                    NegInf
                }
            }
            (PosInf, PosInf) | (NegInf, NegInf) => PosInf,
            (PosInf, NegInf) | (NegInf, PosInf) => NegInf,
        }
    }
}

impl Interval {
    /// Construct from optional endpoints. Panics if lo > hi.
    pub fn new(lo: Option<Rational>, hi: Option<Rational>) -> Interval {
        if let (Some(l), Some(h)) = (&lo, &hi) {
            assert!(l <= h, "interval endpoints out of order: [{l}, {h}]");
        }
        Interval { lo, hi }
    }

    pub fn unbounded() -> Interval {
        Interval { lo: None, hi: None }
    }

    pub fn point(v: Rational) -> Interval {
        Interval {
            lo: Some(v.clone()),
            hi: Some(v),
        }
    }

    pub fn closed(lo: Rational, hi: Rational) -> Interval {
        Interval::new(Some(lo), Some(hi))
    }

    pub fn at_least(lo: Rational) -> Interval {
        Interval {
            lo: Some(lo),
            hi: None,
        }
    }

    pub fn at_most(hi: Rational) -> Interval {
        Interval {
            lo: None,
            hi: Some(hi),
        }
    }

    pub fn lo(&self) -> Option<&Rational> {
        self.lo.as_ref()
    }

    pub fn hi(&self) -> Option<&Rational> {
        self.hi.as_ref()
    }

    pub fn is_unbounded(&self) -> bool {
        self.lo.is_none() && self.hi.is_none()
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: match (&self.lo, &other.lo) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
            hi: match (&self.hi, &other.hi) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: self.hi.as_ref().map(|h| -h),
            hi: self.lo.as_ref().map(|l| -l),
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let a_lo = self.lo.clone().map_or(Ext::NegInf, Ext::Fin);
        let a_hi = self.hi.clone().map_or(Ext::PosInf, Ext::Fin);
        let b_lo = other.lo.clone().map_or(Ext::NegInf, Ext::Fin);
        let b_hi = other.hi.clone().map_or(Ext::PosInf, Ext::Fin);
        let products = [
            a_lo.mul(&b_lo),
            a_lo.mul(&b_hi),
            a_hi.mul(&b_lo),
            a_hi.mul(&b_hi),
        ];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        Interval {
            lo: match lo {
                Ext::NegInf => None,
                Ext::Fin(v) => Some(v),
                Ext::PosInf => unreachable!("product minimum cannot be +inf"),
            },
            hi: match hi {
                Ext::PosInf => None,
                Ext::Fin(v) => Some(v),
                Ext::NegInf => unreachable!("product maximum cannot be -inf"),
            },
        }
    }

    /// Range of v * v for v in self. The lower bound is never absent and
    /// never negative, even for unbounded inputs.
    pub fn square(&self) -> Interval {
        let sq = |r: &Rational| r * r;
        match (&self.lo, &self.hi) {
            (Some(l), hi) if !l.is_negative() => Interval {
                lo: Some(sq(l)),
                hi: hi.as_ref().map(sq),
            },
            (lo, Some(h)) if !h.is_positive() => Interval {
                lo: Some(sq(h)),
                hi: lo.as_ref().map(sq),
            },
            (Some(l), Some(h)) => Interval {
                lo: Some(Rational::zero()),
                hi: Some(sq(l).max(sq(h))),
            },
            _ => Interval {
                lo: Some(Rational::zero()),
                hi: None,
            },
        }
    }

    /// Range of 1/v for v in self. If the interval contains or may contain
    /// zero the result is fully unbounded: a single convex range cannot say
    /// more.
    pub fn recip(&self) -> Interval {
        let one = Rational::from_integer(1.into());
        match (&self.lo, &self.hi) {
            (Some(l), hi) if l.is_positive() => Interval {
                lo: Some(hi.as_ref().map_or_else(Rational::zero, |h| &one / h)),
                hi: Some(&one / l),
            },
            (lo, Some(h)) if h.is_negative() => Interval {
                lo: Some(&one / h),
                hi: Some(lo.as_ref().map_or_else(Rational::zero, |l| &one / l)),
            },
            _ => Interval::unbounded(),
        }
    }

    pub fn union(&self, other: &Interval) -> Interval {
        Interval {
            lo: match (&self.lo, &other.lo) {
                (Some(a), Some(b)) => Some(a.min(b).clone()),
                _ => None,
            },
            hi: match (&self.hi, &other.hi) {
                (Some(a), Some(b)) => Some(a.max(b).clone()),
                _ => None,
            },
        }
    }

    /// None when the ranges do not meet.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = match (&self.lo, &other.lo) {
            (Some(a), Some(b)) => Some(a.max(b).clone()),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        let hi = match (&self.hi, &other.hi) {
            (Some(a), Some(b)) => Some(a.min(b).clone()),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if l > h {
                return None;
            }
        }
        Some(Interval { lo, hi })
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.lo.as_ref().map_or(true, |l| l <= v) && self.hi.as_ref().map_or(true, |h| v <= h)
    }

    pub fn is_subset(&self, other: &Interval) -> bool {
        let lo_ok = match (&other.lo, &self.lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(o), Some(s)) => o <= s,
        };
        let hi_ok = match (&other.hi, &self.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(o), Some(s)) => s <= o,
        };
        lo_ok && hi_ok
    }

    /// Shrink to the integers: ceil the lower endpoint, floor the upper.
    /// None when no integer survives.
    pub fn tighten_integer(&self) -> Option<Interval> {
        let lo = self.lo.as_ref().map(|l| if is_integer(l) { l.clone() } else { ceil(l) });
        let hi = self.hi.as_ref().map(|h| if is_integer(h) { h.clone() } else { floor(h) });
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if l > h {
                return None;
            }
        }
        Some(Interval { lo, hi })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lo {
            Some(l) => write!(f, "[{l}, ")?,
            None => write!(f, "[-inf, ")?,
        }
        match &self.hi {
            Some(h) => write!(f, "{h}]"),
            None => write!(f, "+inf]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};
    use proptest::prelude::*;

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::closed(rat(lo), rat(hi))
    }

    #[test]
    fn add_matches_distributed_subterm_sum() {
        // (* x x) in [4, 16] plus (- (* 3 x)) in [-12, -6]
        assert_eq!(iv(4, 16).add(&iv(-12, -6)), iv(-8, 10));
        assert_eq!(iv(0, 0).add(&iv(3, 7)), iv(3, 7));
        assert_eq!(
            Interval::at_most(rat(5)).add(&iv(1, 2)),
            Interval::at_most(rat(7))
        );
    }

    #[test]
    fn neg_swaps_endpoints() {
        assert_eq!(iv(-12, -6).neg(), iv(6, 12));
        assert_eq!(iv(6, 9).neg(), iv(-9, -6));
        assert_eq!(
            Interval::at_most(rat(0)).neg(),
            Interval::at_least(rat(0))
        );
    }

    #[test]
    fn mul_covers_sign_cases() {
        assert_eq!(iv(2, 4).mul(&iv(-1, 1)), iv(-4, 4));
        assert_eq!(iv(2, 3).mul(&iv(-1, 0)), iv(-3, 0));
        assert_eq!(
            Interval::at_least(rat(1)).mul(&iv(2, 3)),
            Interval::at_least(rat(2))
        );
        assert_eq!(
            iv(0, 0).mul(&Interval::unbounded()),
            iv(0, 0),
            "zero annihilates unbounded factors"
        );
        assert_eq!(
            Interval::at_most(rat(-1)).mul(&Interval::at_most(rat(-1))),
            Interval::at_least(rat(1))
        );
    }

    #[test]
    fn square_has_nonnegative_lower_bound() {
        assert_eq!(iv(2, 4).square(), iv(4, 16));
        assert_eq!(iv(-2, 1).square(), iv(0, 4));
        assert_eq!(iv(-3, -1).square(), iv(1, 9));
        assert_eq!(Interval::unbounded().square(), Interval::at_least(rat(0)));
        assert_eq!(
            Interval::at_most(rat(5)).square(),
            Interval::at_least(rat(0))
        );
    }

    #[test]
    fn recip_requires_a_signed_interval() {
        assert_eq!(iv(2, 4).recip(), Interval::closed(ratio(1, 4), ratio(1, 2)));
        assert_eq!(
            iv(-4, -2).recip(),
            Interval::closed(ratio(-1, 2), ratio(-1, 4))
        );
        assert_eq!(iv(-1, 1).recip(), Interval::unbounded());
        assert_eq!(iv(0, 4).recip(), Interval::unbounded());
        assert_eq!(
            Interval::at_least(rat(2)).recip(),
            Interval::closed(rat(0), ratio(1, 2))
        );
    }

    #[test]
    fn union_spans_case_results() {
        assert_eq!(iv(-5, 3).union(&iv(-3, 7)), iv(-5, 7));
        assert_eq!(iv(-3, 0).union(&iv(0, 4)), iv(-3, 4));
        assert_eq!(
            iv(1, 2).union(&Interval::at_most(rat(5))),
            Interval::at_most(rat(5))
        );
    }

    #[test]
    fn containment() {
        assert!(iv(-8, 10).contains(&rat(-2)));
        assert!(!iv(-4, 4).contains(&ratio(9, 2)));
        assert!(Interval::unbounded().contains(&rat(123456)));
    }

    #[test]
    fn intersect_and_tighten() {
        assert_eq!(iv(2, 4).intersect(&iv(3, 9)), Some(iv(3, 4)));
        assert_eq!(iv(2, 4).intersect(&iv(5, 9)), None);
        assert_eq!(
            Interval::closed(ratio(1, 2), ratio(7, 2)).tighten_integer(),
            Some(iv(1, 3))
        );
        assert_eq!(
            Interval::closed(ratio(1, 3), ratio(2, 3)).tighten_integer(),
            None
        );
    }

    #[test]
    fn display_uses_inf_tokens() {
        assert_eq!(iv(-8, 10).to_string(), "[-8, 10]");
        assert_eq!(Interval::at_most(rat(4)).to_string(), "[-inf, 4]");
        assert_eq!(Interval::unbounded().to_string(), "[-inf, +inf]");
        assert_eq!(
            Interval::closed(ratio(-131, 64), ratio(259, 64)).to_string(),
            "[-131/64, 259/64]"
        );
    }

    // -- randomized soundness / structure --

    fn arb_interval() -> impl Strategy<Value = Interval> {
        (
            proptest::option::of(-50i64..50),
            proptest::option::of(0i64..60),
            1i64..8,
        )
            .prop_map(|(lo, width, denom)| {
                let lo_r = lo.map(|l| ratio(l, denom));
                match (lo_r, width) {
                    (Some(l), Some(w)) => Interval::closed(l.clone(), l + ratio(w, denom)),
                    (Some(l), None) => Interval::at_least(l),
                    (None, Some(w)) => Interval::at_most(ratio(w, denom)),
                    (None, None) => Interval::unbounded(),
                }
            })
    }

    // deterministic points inside an interval, including the endpoints
    fn points_in(iv: &Interval) -> Vec<Rational> {
        match (iv.lo(), iv.hi()) {
            (Some(l), Some(h)) => {
                let span = h - l;
                (0..=4).map(|k| l + &span * ratio(k, 4)).collect()
            }
            (Some(l), None) => (0..4).map(|k| l + rat(k)).collect(),
            (None, Some(h)) => (0..4).map(|k| h - rat(k)).collect(),
            (None, None) => (-2..2).map(|k| ratio(2 * k + 1, 2)).collect(),
        }
    }

    proptest! {
        #[test]
        fn op_soundness(a in arb_interval(), b in arb_interval()) {
            for x in points_in(&a) {
                prop_assert!(a.neg().contains(&-x.clone()));
                prop_assert!(a.square().contains(&(&x * &x)));
                if !x.is_zero() {
                    prop_assert!(a.recip().contains(&(rat(1) / x.clone())));
                }
                for y in points_in(&b) {
                    prop_assert!(a.add(&b).contains(&(&x + &y)));
                    prop_assert!(a.mul(&b).contains(&(&x * &y)));
                    prop_assert!(a.union(&b).contains(&x));
                }
            }
        }

        #[test]
        fn inclusion_isotonicity(a in arb_interval(), b in arb_interval()) {
            // shrink each interval toward its midpoint-ish subrange
            let shrink = |iv: &Interval| -> Interval {
                let pts = points_in(iv);
                let lo = pts.iter().min().unwrap().clone();
                let hi = pts.iter().max().unwrap().clone();
                Interval::closed(lo.min(hi.clone()), hi)
            };
            let (a2, b2) = (shrink(&a), shrink(&b));
            prop_assert!(a2.is_subset(&a));
            prop_assert!(b2.is_subset(&b));
            prop_assert!(a2.add(&b2).is_subset(&a.add(&b)));
            prop_assert!(a2.mul(&b2).is_subset(&a.mul(&b)));
            prop_assert!(a2.neg().is_subset(&a.neg()));
            prop_assert!(a2.square().is_subset(&a.square()));
            prop_assert!(a2.recip().is_subset(&a.recip()));
            prop_assert!(a2.union(&b2).is_subset(&a.union(&b)));
        }

        #[test]
        fn square_refines_self_product(a in arb_interval()) {
            prop_assert!(a.square().is_subset(&a.mul(&a)));
            prop_assert!(a.square().lo().is_some());
            prop_assert!(!a.square().lo().unwrap().is_negative());
        }

        #[test]
        fn union_laws(a in arb_interval(), b in arb_interval(), c in arb_interval()) {
            prop_assert_eq!(a.union(&b), b.union(&a));
            prop_assert_eq!(a.union(&b).union(&c), a.union(&b.union(&c)));
            prop_assert!(a.is_subset(&a.union(&b)));
        }
    }
}
