//! Typeset reasoning: a small abstract domain of six basic categories that
//! partition the rationals — negative integer, zero, one, integer above one,
//! negative ratio, positive ratio ("ratio" meaning a non-integer rational).
//!
//! A typeset over-approximates the categories a term's value can fall in;
//! `typeset_bounds` turns one into a weak interval, which serves the bounder
//! as one of its four bound sources.

use crate::env::{Decl, HypEnv};
use crate::interval::Interval;
use crate::rational::{is_integer, sign, Rational};
use crate::term::{Op, Term};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    NegInt,
    Zero,
    One,
    IntAboveOne,
    NegRatio,
    PosRatio,
}

pub const CATEGORIES: [Category; 6] = [
    Category::NegInt,
    Category::Zero,
    Category::One,
    Category::IntAboveOne,
    Category::NegRatio,
    Category::PosRatio,
];

impl Category {
    fn bit(self) -> u8 {
        match self {
            Category::NegInt => 1,
            Category::Zero => 1 << 1,
            Category::One => 1 << 2,
            Category::IntAboveOne => 1 << 3,
            Category::NegRatio => 1 << 4,
            Category::PosRatio => 1 << 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::NegInt => "neg-int",
            Category::Zero => "zero",
            Category::One => "one",
            Category::IntAboveOne => "int>1",
            Category::NegRatio => "neg-ratio",
            Category::PosRatio => "pos-ratio",
        }
    }

    pub fn from_name(s: &str) -> Option<Category> {
        CATEGORIES.into_iter().find(|c| c.as_str() == s)
    }

    /// Weak interval hull of the category's value set.
    fn hull(self) -> Interval {
        let r = |n: i64| Rational::from_integer(n.into());
        match self {
            Category::NegInt => Interval::at_most(r(-1)),
            Category::Zero => Interval::point(r(0)),
            Category::One => Interval::point(r(1)),
            Category::IntAboveOne => Interval::at_least(r(2)),
            Category::NegRatio => Interval::at_most(r(0)),
            Category::PosRatio => Interval::at_least(r(0)),
        }
    }

    fn integrality(self) -> Integrality {
        match self {
            Category::NegRatio | Category::PosRatio => Integrality::NonInt,
            _ => Integrality::Int,
        }
    }
}

/// Exact category of a rational constant.
pub fn category_of(r: &Rational) -> Category {
    match (sign(r), is_integer(r)) {
        (0, _) => Category::Zero,
        (-1, true) => Category::NegInt,
        (-1, false) => Category::NegRatio,
        (1, false) => Category::PosRatio,
        (1, true) => {
            if *r == Rational::from_integer(1.into()) {
                Category::One
            } else {
                Category::IntAboveOne
            }
        }
        _ => unreachable!("sign is -1, 0, or 1"),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Typeset(u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Integrality {
    Int,
    NonInt,
    Unknown,
}

impl Typeset {
    pub const EMPTY: Typeset = Typeset(0);
    pub const ALL: Typeset = Typeset(0b11_1111);

    pub fn single(c: Category) -> Typeset {
        Typeset(c.bit())
    }

    pub fn of(cats: &[Category]) -> Typeset {
        Typeset(cats.iter().fold(0, |acc, c| acc | c.bit()))
    }

    pub fn contains(self, c: Category) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn union(self, other: Typeset) -> Typeset {
        Typeset(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: Typeset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Category> {
        CATEGORIES.into_iter().filter(move |c| self.contains(*c))
    }

    fn hull(self) -> Interval {
        self.iter()
            .map(Category::hull)
            .reduce(|a, b| a.union(&b))
            .unwrap_or_else(Interval::unbounded)
    }
}

impl fmt::Debug for Typeset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Typeset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", c.as_str())?;
        }
        write!(f, "}}")
    }
}

/// Every category whose value set meets the given hull under the given
/// integrality constraint. The workhorse for variables and for the sound
/// propagation of `+` and `*`.
fn cats_meeting(hull: &Interval, integ: Integrality) -> Typeset {
    let r = |n: i64| Rational::from_integer(n.into());
    let mut out = Typeset::EMPTY;
    let allow_int = integ != Integrality::NonInt;
    let allow_nonint = integ != Integrality::Int;

    if allow_int {
        if has_integer_in(hull, None, Some(r(-1))) {
            out = out.union(Typeset::single(Category::NegInt));
        }
        if hull.contains(&r(0)) {
            out = out.union(Typeset::single(Category::Zero));
        }
        if hull.contains(&r(1)) {
            out = out.union(Typeset::single(Category::One));
        }
        if has_integer_in(hull, Some(r(2)), None) {
            out = out.union(Typeset::single(Category::IntAboveOne));
        }
    }
    if allow_nonint {
        if has_nonint_in(hull, None, Some(r(0)), /*exclude_zero=*/ true) {
            out = out.union(Typeset::single(Category::NegRatio));
        }
        if has_nonint_in(hull, Some(r(0)), None, true) {
            out = out.union(Typeset::single(Category::PosRatio));
        }
    }
    out
}

// does hull ∩ [clip_lo, clip_hi] contain an integer?
fn has_integer_in(hull: &Interval, clip_lo: Option<Rational>, clip_hi: Option<Rational>) -> bool {
    let clip = Interval::new(clip_lo, clip_hi);
    match hull.intersect(&clip) {
        None => false,
        Some(iv) => iv.tighten_integer().is_some(),
    }
}

// does hull ∩ [clip_lo, clip_hi] contain a non-integer (nonzero) rational?
fn has_nonint_in(
    hull: &Interval,
    clip_lo: Option<Rational>,
    clip_hi: Option<Rational>,
    exclude_zero: bool,
) -> bool {
    let clip = Interval::new(clip_lo, clip_hi);
    let iv = match hull.intersect(&clip) {
        None => return false,
        Some(iv) => iv,
    };
    match (iv.lo(), iv.hi()) {
        (Some(l), Some(h)) => {
            if l < h {
                true // any non-degenerate rational interval is dense in non-integers
            } else {
                !is_integer(l) && !(exclude_zero && sign(l) == 0)
            }
        }
        _ => true,
    }
}

fn combine(hull: Interval, integ: Integrality) -> Typeset {
    cats_meeting(&hull, integ)
}

fn ts_add(a: Typeset, b: Typeset) -> Typeset {
    let mut out = Typeset::EMPTY;
    for ca in a.iter() {
        for cb in b.iter() {
            let integ = match (ca.integrality(), cb.integrality()) {
                (Integrality::Int, Integrality::Int) => Integrality::Int,
                (Integrality::Int, Integrality::NonInt)
                | (Integrality::NonInt, Integrality::Int) => Integrality::NonInt,
                _ => Integrality::Unknown,
            };
            out = out.union(combine(ca.hull().add(&cb.hull()), integ));
        }
    }
    out
}

fn ts_mul(a: Typeset, b: Typeset) -> Typeset {
    let mut out = Typeset::EMPTY;
    for ca in a.iter() {
        for cb in b.iter() {
            let integ = match (ca.integrality(), cb.integrality()) {
                (Integrality::Int, Integrality::Int) => Integrality::Int,
                _ => Integrality::Unknown, // 2 * 1/2 = 1
            };
            out = out.union(combine(ca.hull().mul(&cb.hull()), integ));
        }
    }
    out
}

fn ts_square(a: Typeset) -> Typeset {
    let mut out = Typeset::EMPTY;
    for c in a.iter() {
        let image = match c {
            Category::NegInt => Typeset::of(&[Category::One, Category::IntAboveOne]),
            Category::Zero => Typeset::single(Category::Zero),
            Category::One => Typeset::single(Category::One),
            Category::IntAboveOne => Typeset::single(Category::IntAboveOne),
            // (p/q)^2 in lowest terms keeps q^2 > 1
            Category::NegRatio | Category::PosRatio => Typeset::single(Category::PosRatio),
        };
        out = out.union(image);
    }
    out
}

fn ts_recip(a: Typeset) -> Typeset {
    let mut out = Typeset::EMPTY;
    for c in a.iter() {
        let image = match c {
            Category::NegInt => Typeset::of(&[Category::NegInt, Category::NegRatio]),
            Category::Zero => Typeset::EMPTY, // no value there
            Category::One => Typeset::single(Category::One),
            Category::IntAboveOne => Typeset::single(Category::PosRatio),
            Category::NegRatio => Typeset::of(&[Category::NegInt, Category::NegRatio]),
            Category::PosRatio => Typeset::of(&[Category::IntAboveOne, Category::PosRatio]),
        };
        out = out.union(image);
    }
    if out.is_empty() {
        // input could only be zero; claim nothing rather than everything false
        Typeset::ALL
    } else {
        out
    }
}

/// Sound over-approximation of the categories a normalized term can take
/// under the environment's declarations and ranges.
pub fn typeset_of(t: &Term, env: &HypEnv) -> Typeset {
    match t {
        Term::Const(c) => Typeset::single(category_of(c)),
        Term::Var(v) => match env.var(v) {
            Some(info) => {
                let integ = match info.decl {
                    Decl::Integer => Integrality::Int,
                    Decl::Rational => Integrality::Unknown,
                };
                cats_meeting(&info.range, integ)
            }
            None => Typeset::ALL,
        },
        Term::App(Op::Add, args) => args
            .iter()
            .map(|a| typeset_of(a, env))
            .reduce(ts_add)
            .unwrap_or(Typeset::ALL),
        Term::App(Op::Mul, args) => {
            let mut factors = Vec::new();
            let mut i = 0;
            while i < args.len() {
                if i + 1 < args.len() && args[i] == args[i + 1] {
                    factors.push(ts_square(typeset_of(&args[i], env)));
                    i += 2;
                } else {
                    factors.push(typeset_of(&args[i], env));
                    i += 1;
                }
            }
            factors.into_iter().reduce(ts_mul).unwrap_or(Typeset::ALL)
        }
        Term::App(Op::Recip, args) => ts_recip(typeset_of(&args[0], env)),
        // non-canonical operators and opaque calls: no claim
        Term::App(..) | Term::Call(..) => Typeset::ALL,
    }
}

/// Tightest weak interval containing every category present in the typeset.
/// Ratio categories only bound the sign (weakened to closed bounds).
pub fn typeset_bounds(ts: Typeset) -> Interval {
    if ts.is_empty() {
        return Interval::unbounded();
    }
    ts.hull()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::env_from_hyp;
    use crate::rational::{rat, ratio};
    use crate::term::{normalize, parse_term};

    fn env(src: &str) -> HypEnv {
        env_from_hyp(&parse_term(src).unwrap()).unwrap()
    }

    fn ts_of(term: &str, hyp: &str) -> Typeset {
        typeset_of(&normalize(&parse_term(term).unwrap()), &env(hyp))
    }

    #[test]
    fn constants_are_exact() {
        assert_eq!(category_of(&rat(0)), Category::Zero);
        assert_eq!(category_of(&rat(1)), Category::One);
        assert_eq!(category_of(&rat(7)), Category::IntAboveOne);
        assert_eq!(category_of(&rat(-3)), Category::NegInt);
        assert_eq!(category_of(&ratio(-1, 2)), Category::NegRatio);
        assert_eq!(category_of(&ratio(5, 2)), Category::PosRatio);
        assert_eq!(
            ts_of("0", "t"),
            Typeset::single(Category::Zero)
        );
    }

    #[test]
    fn rational_variable_in_positive_range() {
        // derived by enumerating category membership of [2,4] ∩ Q:
        // the integers 2, 3, 4 and a dense set of positive ratios
        let expected = Typeset::of(&[Category::IntAboveOne, Category::PosRatio]);
        assert_eq!(ts_of("x", "(and (rationalp x) (<= 2 x) (<= x 4))"), expected);
    }

    #[test]
    fn integer_variable_excludes_ratios() {
        let ts = ts_of("n", "(and (integerp n) (<= -3 n) (<= n 1))");
        assert_eq!(
            ts,
            Typeset::of(&[Category::NegInt, Category::Zero, Category::One])
        );
    }

    #[test]
    fn product_of_negative_integers() {
        // sign/magnitude oracle over small samples: {-1,-2,-3} x {-1,-2,-3}
        // gives {1, 2, 3, 4, 6, 9}, i.e. exactly {one, int>1}
        let mut seen = Typeset::EMPTY;
        for a in -3i64..=-1 {
            for b in -3i64..=-1 {
                seen = seen.union(Typeset::single(category_of(&rat(a * b))));
            }
        }
        let expected = Typeset::of(&[Category::One, Category::IntAboveOne]);
        assert_eq!(seen, expected);

        let got = ts_mul(
            Typeset::single(Category::NegInt),
            Typeset::single(Category::NegInt),
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn bounds_of_typesets() {
        assert_eq!(
            typeset_bounds(Typeset::of(&[Category::Zero, Category::NegRatio])),
            Interval::at_most(rat(0))
        );
        assert_eq!(
            typeset_bounds(Typeset::of(&[Category::Zero, Category::One])),
            Interval::closed(rat(0), rat(1))
        );
        assert_eq!(
            typeset_bounds(Typeset::single(Category::NegInt)),
            Interval::at_most(rat(-1))
        );
        assert_eq!(typeset_bounds(Typeset::ALL), Interval::unbounded());
    }

    #[test]
    fn leaf_with_zero_or_negative_ratio_typeset() {
        // rational y in [-1/2, 0]: only zero and negative ratios fit
        let ts = ts_of("y", "(and (rationalp y) (<= -1/2 y) (<= y 0))");
        assert_eq!(ts, Typeset::of(&[Category::Zero, Category::NegRatio]));
        assert_eq!(typeset_bounds(ts), Interval::at_most(rat(0)));
    }

    #[test]
    fn squares_and_recips() {
        let ts = ts_of("(* x x)", "(and (rationalp x) (<= -1 x) (<= x 1))");
        assert!(!ts.contains(Category::NegInt));
        assert!(!ts.contains(Category::NegRatio));

        // reciprocal of a nonpositive range cannot be positive
        let ts = ts_of("(/ y)", "(and (rationalp y) (<= -2 y) (<= y 0))");
        assert_eq!(ts, Typeset::of(&[Category::NegInt, Category::NegRatio]));
        assert_eq!(typeset_bounds(ts), Interval::at_most(rat(0)));

        // reciprocal of something that is only zero: no claim
        assert_eq!(ts_recip(Typeset::single(Category::Zero)), Typeset::ALL);
    }

    #[test]
    fn soundness_on_sampled_assignments() {
        use crate::term::{substitute, Substitution};
        let e = env("(and (rationalp x) (<= -2 x) (<= x 3) (integerp n) (<= 0 n) (<= n 4))");
        let terms = [
            "(+ x n)",
            "(* x n)",
            "(* x x)",
            "(* x x n)",
            "(+ (* x x) (* -1 n))",
            "(/ (+ n 1))",
            "(+ 1/2 x)",
        ];
        let xs = [rat(-2), ratio(-1, 2), rat(0), ratio(5, 4), rat(3)];
        let ns = [rat(0), rat(1), rat(2), rat(4)];
        for src in terms {
            let t = normalize(&parse_term(src).unwrap());
            let ts = typeset_of(&t, &e);
            for xv in &xs {
                for nv in &ns {
                    let mut s = Substitution::new();
                    s.insert("x".into(), Term::Const(xv.clone()));
                    s.insert("n".into(), Term::Const(nv.clone()));
                    if let Ok(v) = crate::term::eval_ground(&substitute(&t, &s)) {
                        assert!(
                            ts.contains(category_of(&v)),
                            "{src} at x={xv}, n={nv}: value {v} outside {ts}"
                        );
                    }
                }
            }
        }
    }
}
