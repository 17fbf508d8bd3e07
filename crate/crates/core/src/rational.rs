//! Exact rational arithmetic: the numeric substrate for every bound,
//! constant, and hypothesis endpoint.
//!
//! Values are arbitrary-precision `num_rational::BigRational`s, which keep
//! themselves in canonical form (positive denominator, gcd 1). This module
//! adds the textual syntax shared by the problem DSL and JSON reports:
//! `n`, `-n`, or `n/d` in lowest terms, with `/1` omitted.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in rational literal `{0}`")]
    ZeroDenominator(String),
}

/// Build a rational from a machine integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Build a rational from a machine-integer fraction. Panics on zero denominator.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parse `[-]?digits` or `[-]?digits/digits`.
pub fn parse_rational(text: &str) -> Result<Rational, RationalError> {
    let malformed = || RationalError::Malformed(text.to_string());
    let (sign, body) = match text.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, text),
    };
    let (num_s, den_s) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(num_s) || !den_s.map_or(true, all_digits) {
        return Err(malformed());
    }
    let numer: BigInt = num_s.parse().map_err(|_| malformed())?;
    let denom: BigInt = match den_s {
        Some(d) => d.parse().map_err(|_| malformed())?,
        None => BigInt::from(1),
    };
    if denom.is_zero() {
        return Err(RationalError::ZeroDenominator(text.to_string()));
    }
    Ok(Rational::new(numer * sign, denom))
}

/// Lowest-terms `n/d` with `/1` omitted; the single textual form used
/// everywhere (DSL, reports, certificates).
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// True iff `r` denotes an integer.
pub fn is_integer(r: &Rational) -> bool {
    r.is_integer()
}

/// Largest integer <= r, as a rational.
pub fn floor(r: &Rational) -> Rational {
    Rational::from_integer(r.floor().to_integer())
}

/// Smallest integer >= r, as a rational.
pub fn ceil(r: &Rational) -> Rational {
    Rational::from_integer(r.ceil().to_integer())
}

/// Exact sign as -1, 0, or 1.
pub fn sign(r: &Rational) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_paper_literals() {
        assert_eq!(parse_rational("1/64").unwrap(), ratio(1, 64));
        assert_eq!(parse_rational("-131/64").unwrap(), ratio(-131, 64));
        assert_eq!(parse_rational("3").unwrap(), rat(3));
    }

    #[test]
    fn parse_rejects_malformed() {
        for bad in ["", "-", "1/", "/2", "a", "1/2/3", "1.5", "+3", "3/-4", " 3"] {
            assert!(parse_rational(bad).is_err(), "accepted {bad:?}");
        }
        assert_eq!(
            parse_rational("7/0"),
            Err(RationalError::ZeroDenominator("7/0".into()))
        );
    }

    #[test]
    fn printing_omits_unit_denominator() {
        assert_eq!(format_rational(&rat(3)), "3");
        assert_eq!(format_rational(&rat(-2)), "-2");
        assert_eq!(format_rational(&ratio(390, 64)), "195/32");
    }

    #[test]
    fn arithmetic_matches_paper_width_claim() {
        // computed 128-case bounds [-131/64, 259/64] span 390/64 = (65/64) * 6
        let width = ratio(259, 64) - ratio(-131, 64);
        assert_eq!(width, ratio(195, 32));
        assert_eq!(width, ratio(65, 64) * rat(6));
        assert_eq!(rat(4) - rat(6), rat(-2));
        assert_eq!(rat(2) * rat(-1), rat(-2));
    }

    #[test]
    fn floor_ceil() {
        assert_eq!(floor(&ratio(7, 2)), rat(3));
        assert_eq!(ceil(&ratio(7, 2)), rat(4));
        assert_eq!(floor(&ratio(-7, 2)), rat(-4));
        assert_eq!(ceil(&ratio(-7, 2)), rat(-3));
        assert_eq!(floor(&rat(5)), rat(5));
        assert_eq!(ceil(&rat(5)), rat(5));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..200).prop_map(|(n, d)| ratio(n, d))
    }

    proptest! {
        #[test]
        fn canonical_after_ops(a in arb_rational(), b in arb_rational()) {
            for r in [a.clone() + b.clone(), a.clone() - b.clone(), a.clone() * b.clone()] {
                prop_assert!(r.denom().is_positive());
                prop_assert_eq!(r.clone(), Rational::new(r.numer().clone(), r.denom().clone()));
            }
        }

        #[test]
        fn field_laws(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
            prop_assert_eq!(a.clone() * b.clone(), b.clone() * a.clone());
            prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
            prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
            prop_assert_eq!(a.clone() + (-a.clone()), rat(0));
            if !a.is_zero() {
                prop_assert_eq!(a.clone() * (rat(1) / a.clone()), rat(1));
            }
        }

        #[test]
        fn print_parse_round_trip(a in arb_rational()) {
            prop_assert_eq!(parse_rational(&format_rational(&a)).unwrap(), a);
        }
    }
}
