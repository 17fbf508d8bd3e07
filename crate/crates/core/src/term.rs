//! Arithmetic term AST: s-expression parsing and printing, canonical
//! normalization, one-way pattern matching, substitution, and ground
//! evaluation.
//!
//! Surface terms may use `-` and `/`; normalization eliminates both
//! (x - y becomes x + (* -1 y), (/ x y) becomes (* x (/ y))) so that
//! downstream passes see only n-ary `+` and `*`, unary reciprocal,
//! constants, variables, and opaque calls. `+`/`*` argument lists are
//! flattened, constant-folded, and sorted under a fixed total term order,
//! so equal terms are syntactically equal.

use crate::rational::{parse_rational, rat, Rational};
use crate::sexp::{self, Pos, Sexp, SexpError};
use num_traits::Zero;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Mul,
    Sub,
    Div,
    Recip,
}

impl Op {
    pub fn symbol(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Mul => "*",
            Op::Sub => "-",
            Op::Div | Op::Recip => "/",
        }
    }

    fn rank(self) -> u8 {
        match self {
            Op::Add => 0,
            Op::Mul => 1,
            Op::Recip => 2,
            Op::Sub => 3,
            Op::Div => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Rational),
    Var(String),
    App(Op, Vec<Term>),
    Call(String, Vec<Term>),
}

/// Binding of pattern variables produced by `match_term`.
pub type Substitution = BTreeMap<String, Term>;

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn int(n: i64) -> Term {
        Term::Const(rat(n))
    }

    pub fn add(args: Vec<Term>) -> Term {
        Term::App(Op::Add, args)
    }

    pub fn mul(args: Vec<Term>) -> Term {
        Term::App(Op::Mul, args)
    }

    pub fn recip(arg: Term) -> Term {
        Term::App(Op::Recip, vec![arg])
    }

    pub fn call(name: &str, args: Vec<Term>) -> Term {
        Term::Call(name.to_string(), args)
    }

    pub fn children(&self) -> &[Term] {
        match self {
            Term::Const(_) | Term::Var(_) => &[],
            Term::App(_, args) | Term::Call(_, args) => args,
        }
    }

    /// Rebuild this node with new children; arity must match.
    pub fn with_children(&self, args: Vec<Term>) -> Term {
        debug_assert_eq!(args.len(), self.children().len());
        match self {
            Term::Const(_) | Term::Var(_) => self.clone(),
            Term::App(op, _) => Term::App(*op, args),
            Term::Call(f, _) => Term::Call(f.clone(), args),
        }
    }

    /// Subterm at a child-index path; None if the path is invalid.
    pub fn at_path(&self, path: &[usize]) -> Option<&Term> {
        let mut cur = self;
        for &i in path {
            cur = cur.children().get(i)?;
        }
        Some(cur)
    }

    /// Replace the subterm at `path`; None if the path is invalid.
    pub fn replace_at_path(&self, path: &[usize], replacement: Term) -> Option<Term> {
        match path.split_first() {
            None => Some(replacement),
            Some((&i, rest)) => {
                let kids = self.children();
                if i >= kids.len() {
                    return None;
                }
                let mut new_kids = kids.to_vec();
                new_kids[i] = kids[i].replace_at_path(rest, replacement)?;
                Some(self.with_children(new_kids))
            }
        }
    }

    /// All variable names occurring in the term.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) | Term::Call(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }
}

// Total term order: constants first (by value), then variables
// (lexicographic), then applications, then calls; compound terms compare by
// head, then arity, then arguments left to right.
impl Ord for Term {
    fn cmp(&self, other: &Term) -> Ordering {
        fn kind(t: &Term) -> u8 {
            match t {
                Term::Const(_) => 0,
                Term::Var(_) => 1,
                Term::App(..) => 2,
                Term::Call(..) => 3,
            }
        }
        kind(self).cmp(&kind(other)).then_with(|| match (self, other) {
            (Term::Const(a), Term::Const(b)) => a.cmp(b),
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (Term::App(op1, a1), Term::App(op2, a2)) => op1
                .rank()
                .cmp(&op2.rank())
                .then_with(|| a1.len().cmp(&a2.len()))
                .then_with(|| a1.cmp(a2)),
            (Term::Call(f, a1), Term::Call(g, a2)) => f
                .cmp(g)
                .then_with(|| a1.len().cmp(&a2.len()))
                .then_with(|| a1.cmp(a2)),
            _ => unreachable!("kind rank covered all cross-variant cases"),
        })
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Term) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Canonical s-expression syntax; reparseable for normalized terms.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::App(op, args) => {
                write!(f, "({}", op.symbol())?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Term::Call(name, args) => {
                write!(f, "({name}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermParseError {
    #[error("{0}")]
    Sexp(#[from] SexpError),
    #[error("{pos}: empty application")]
    EmptyList { pos: Pos },
    #[error("{pos}: operator position must be a symbol")]
    BadHead { pos: Pos },
    #[error("{pos}: `{op}` expects at least {min} argument(s), got {got}")]
    BadArity {
        pos: Pos,
        op: String,
        min: usize,
        got: usize,
    },
    #[error("{pos}: keyword `{kw}` is not a term")]
    Keyword { pos: Pos, kw: String },
}

/// Parse one term from text. Argument order is preserved; no normalization.
pub fn parse_term(text: &str) -> Result<Term, TermParseError> {
    term_from_sexp(&sexp::read_one(text)?)
}

/// Interpret an already-read s-expression as a term.
pub fn term_from_sexp(s: &Sexp) -> Result<Term, TermParseError> {
    match s {
        Sexp::Atom(a, pos) => {
            if a.starts_with(':') {
                return Err(TermParseError::Keyword {
                    pos: *pos,
                    kw: a.clone(),
                });
            }
            match parse_rational(a) {
                Ok(r) => Ok(Term::Const(r)),
                Err(_) => Ok(Term::Var(a.clone())),
            }
        }
        Sexp::List(items, pos) => {
            let (head, rest) = items
                .split_first()
                .ok_or(TermParseError::EmptyList { pos: *pos })?;
            let head_sym = head.as_atom().ok_or(TermParseError::BadHead { pos: *pos })?;
            if head_sym.starts_with(':') {
                return Err(TermParseError::Keyword {
                    pos: *pos,
                    kw: head_sym.to_string(),
                });
            }
            let args = rest
                .iter()
                .map(term_from_sexp)
                .collect::<Result<Vec<_>, _>>()?;
            let arity_check = |op: &str, min: usize| {
                if args.len() < min {
                    Err(TermParseError::BadArity {
                        pos: *pos,
                        op: op.to_string(),
                        min,
                        got: args.len(),
                    })
                } else {
                    Ok(())
                }
            };
            match head_sym {
                "+" => {
                    arity_check("+", 2)?;
                    Ok(Term::App(Op::Add, args))
                }
                "*" => {
                    arity_check("*", 2)?;
                    Ok(Term::App(Op::Mul, args))
                }
                "-" => {
                    arity_check("-", 1)?;
                    Ok(Term::App(Op::Sub, args))
                }
                "/" => {
                    arity_check("/", 1)?;
                    if args.len() == 1 {
                        Ok(Term::App(Op::Recip, args))
                    } else {
                        Ok(Term::App(Op::Div, args))
                    }
                }
                _ => Ok(Term::Call(head_sym.to_string(), args)),
            }
        }
    }
}

/// Canonical form: `-`, `/` eliminated; `+`/`*` flattened, constant-folded,
/// and sorted; constant reciprocals folded. Idempotent.
pub fn normalize(t: &Term) -> Term {
    match t {
        Term::Const(_) | Term::Var(_) => t.clone(),
        Term::Call(f, args) => Term::Call(f.clone(), args.iter().map(normalize).collect()),
        Term::App(op, args) => {
            let args: Vec<Term> = args.iter().map(normalize).collect();
            match op {
                Op::Add => norm_add(args),
                Op::Mul => norm_mul(args),
                Op::Recip => norm_recip(args.into_iter().next().expect("recip arity")),
                Op::Sub => {
                    let mut it = args.into_iter();
                    let first = it.next().expect("sub arity");
                    let negated: Vec<Term> = it
                        .map(|a| norm_mul(vec![Term::int(-1), a]))
                        .collect();
                    if negated.is_empty() {
                        // unary minus
                        norm_mul(vec![Term::int(-1), first])
                    } else {
                        let mut sum = vec![first];
                        sum.extend(negated);
                        norm_add(sum)
                    }
                }
                Op::Div => {
                    let mut it = args.into_iter();
                    let first = it.next().expect("div arity");
                    let mut prod = vec![first];
                    prod.extend(it.map(norm_recip));
                    norm_mul(prod)
                }
            }
        }
    }
}

fn norm_add(args: Vec<Term>) -> Term {
    let mut acc = rat(0);
    let mut rest: Vec<Term> = Vec::new();
    for a in args {
        match a {
            Term::App(Op::Add, inner) => {
                for x in inner {
                    match x {
                        Term::Const(c) => acc += c,
                        other => rest.push(other),
                    }
                }
            }
            Term::Const(c) => acc += c,
            other => rest.push(other),
        }
    }
    if rest.is_empty() {
        return Term::Const(acc);
    }
    if !acc.is_zero() {
        rest.push(Term::Const(acc));
    }
    rest.sort();
    if rest.len() == 1 {
        rest.pop().unwrap()
    } else {
        Term::App(Op::Add, rest)
    }
}

fn norm_mul(args: Vec<Term>) -> Term {
    let mut acc = rat(1);
    let mut rest: Vec<Term> = Vec::new();
    for a in args {
        match a {
            Term::App(Op::Mul, inner) => {
                for x in inner {
                    match x {
                        Term::Const(c) => acc *= c,
                        other => rest.push(other),
                    }
                }
            }
            Term::Const(c) => acc *= c,
            other => rest.push(other),
        }
    }
    if rest.is_empty() {
        return Term::Const(acc);
    }
    // a zero coefficient is kept: (* 0 x) still bounds to [0, 0] downstream
    // without asserting that x is defined everywhere
    if acc != rat(1) {
        rest.push(Term::Const(acc));
    }
    rest.sort();
    if rest.len() == 1 {
        rest.pop().unwrap()
    } else {
        Term::App(Op::Mul, rest)
    }
}

fn norm_recip(arg: Term) -> Term {
    match arg {
        Term::Const(c) if !c.is_zero() => Term::Const(rat(1) / c),
        other => Term::App(Op::Recip, vec![other]),
    }
}

/// One-way matching: find a substitution over `free_vars` making the pattern
/// syntactically equal to the target. Both sides are expected in canonical
/// form; variables outside `free_vars` match only themselves.
pub fn match_term(
    pattern: &Term,
    target: &Term,
    free_vars: &BTreeSet<String>,
) -> Option<Substitution> {
    let mut subst = Substitution::new();
    if match_into(pattern, target, free_vars, &mut subst) {
        Some(subst)
    } else {
        None
    }
}

fn match_into(
    pattern: &Term,
    target: &Term,
    free: &BTreeSet<String>,
    subst: &mut Substitution,
) -> bool {
    match (pattern, target) {
        (Term::Var(v), _) if free.contains(v) => match subst.get(v) {
            Some(bound) => bound == target,
            None => {
                subst.insert(v.clone(), target.clone());
                true
            }
        },
        (Term::Var(a), Term::Var(b)) => a == b,
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::App(op1, a1), Term::App(op2, a2)) => {
            op1 == op2
                && a1.len() == a2.len()
                && a1
                    .iter()
                    .zip(a2)
                    .all(|(p, t)| match_into(p, t, free, subst))
        }
        (Term::Call(f, a1), Term::Call(g, a2)) => {
            f == g
                && a1.len() == a2.len()
                && a1
                    .iter()
                    .zip(a2)
                    .all(|(p, t)| match_into(p, t, free, subst))
        }
        _ => false,
    }
}

/// Simultaneous variable replacement followed by normalization.
pub fn substitute(t: &Term, subst: &Substitution) -> Term {
    fn replace(t: &Term, subst: &Substitution) -> Term {
        match t {
            Term::Var(v) => subst.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
            Term::App(op, args) => {
                Term::App(*op, args.iter().map(|a| replace(a, subst)).collect())
            }
            Term::Call(f, args) => {
                Term::Call(f.clone(), args.iter().map(|a| replace(a, subst)).collect())
            }
        }
    }
    normalize(&replace(t, subst))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("term is not ground")]
    NotGround,
    #[error("division by zero")]
    DivByZero,
}

/// Exact value of a variable-free, call-free term.
pub fn eval_ground(t: &Term) -> Result<Rational, EvalError> {
    match t {
        Term::Const(c) => Ok(c.clone()),
        Term::Var(_) | Term::Call(..) => Err(EvalError::NotGround),
        Term::App(op, args) => {
            let vals = args
                .iter()
                .map(eval_ground)
                .collect::<Result<Vec<_>, _>>()?;
            match op {
                Op::Add => Ok(vals.into_iter().sum()),
                Op::Mul => Ok(vals.into_iter().product()),
                Op::Recip => {
                    let v = vals.into_iter().next().expect("recip arity");
                    if v.is_zero() {
                        Err(EvalError::DivByZero)
                    } else {
                        Ok(rat(1) / v)
                    }
                }
                Op::Sub => {
                    let mut it = vals.into_iter();
                    let first = it.next().expect("sub arity");
                    let rest: Rational = it.sum();
                    if args.len() == 1 {
                        Ok(-first)
                    } else {
                        Ok(first - rest)
                    }
                }
                Op::Div => {
                    let mut it = vals.into_iter();
                    let first = it.next().expect("div arity");
                    let mut out = if args.len() == 1 { rat(1) } else { first.clone() };
                    let divisors: Vec<Rational> =
                        if args.len() == 1 { vec![first] } else { it.collect() };
                    for d in divisors {
                        if d.is_zero() {
                            return Err(EvalError::DivByZero);
                        }
                        out /= d;
                    }
                    Ok(out)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn norm(text: &str) -> Term {
        normalize(&parse_term(text).unwrap())
    }

    #[test]
    fn parses_function_body_terms() {
        let t = parse_term("(- (* x x) (* 3 x))").unwrap();
        assert_eq!(
            t,
            Term::App(
                Op::Sub,
                vec![
                    Term::mul(vec![Term::var("x"), Term::var("x")]),
                    Term::mul(vec![Term::int(3), Term::var("x")]),
                ]
            )
        );
        let t = parse_term("(* x (- x 3))").unwrap();
        assert_eq!(
            t,
            Term::mul(vec![
                Term::var("x"),
                Term::App(Op::Sub, vec![Term::var("x"), Term::int(3)])
            ])
        );
        assert_eq!(parse_term("x").unwrap(), Term::var("x"));
    }

    #[test]
    fn parse_rejects_bad_arity_and_keywords() {
        assert!(matches!(
            parse_term("(* x)"),
            Err(TermParseError::BadArity { .. })
        ));
        assert!(matches!(
            parse_term("(+ x)"),
            Err(TermParseError::BadArity { .. })
        ));
        assert!(matches!(
            parse_term(":hyp"),
            Err(TermParseError::Keyword { .. })
        ));
        assert!(parse_term("(- (* x x").is_err());
    }

    #[test]
    fn subtraction_forms_share_one_canonical_term() {
        // binary-minus body vs. sum-of-negation form
        let a = norm("(- (* x x) (* 3 x))");
        let b = norm("(+ (- (* 3 x)) (* x x))");
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "(+ (* -3 x) (* x x))");
    }

    #[test]
    fn normalize_folds_constants() {
        assert_eq!(norm("(+ 1 2)"), Term::int(3));
        assert_eq!(norm("(* 2 3 x)"), Term::mul(vec![Term::int(6), Term::var("x")]));
        assert_eq!(norm("(+ x 0)"), Term::var("x"));
        assert_eq!(norm("(* x 1)"), Term::var("x"));
        assert_eq!(norm("(/ 2)"), Term::Const(ratio(1, 2)));
        assert_eq!(norm("(/ x 2)"), norm("(* 1/2 x)"));
    }

    #[test]
    fn division_normalizes_to_reciprocal() {
        assert_eq!(norm("(/ x)"), Term::recip(Term::var("x")));
        assert_eq!(
            norm("(/ 1 x)"),
            Term::recip(Term::var("x")),
            "unit numerator folds away"
        );
    }

    #[test]
    fn matching_binds_free_variables() {
        let free: BTreeSet<String> = ["c".to_string()].into();
        let pat = norm("(bar c)");
        let target = norm("(bar (+ x 1))");
        let subst = match_term(&pat, &target, &free).unwrap();
        assert_eq!(subst["c"], norm("(+ x 1)"));

        // fixed variables match only themselves
        let none: BTreeSet<String> = BTreeSet::new();
        assert!(match_term(&Term::var("a"), &Term::var("a"), &none).is_some());
        assert!(match_term(&Term::var("a"), &Term::var("b"), &none).is_none());

        let free_y: BTreeSet<String> = ["y".to_string()].into();
        let subst = match_term(&norm("(* y y)"), &norm("(* x x)"), &free_y).unwrap();
        assert_eq!(subst["y"], Term::var("x"));
        // inconsistent repeat binding fails
        assert!(match_term(&norm("(* y y)"), &norm("(* x z)"), &free_y).is_none());
    }

    #[test]
    fn substitution_replaces_and_normalizes() {
        let mut subst = Substitution::new();
        subst.insert("c".to_string(), Term::var("x"));
        let t = norm("(<= (bar c) 10)");
        assert_eq!(substitute(&t, &subst), norm("(<= (bar x) 10)"));
        assert_eq!(substitute(&parse_term("(- x y)").unwrap(), &Substitution::new()),
                   norm("(- x y)"));
    }

    #[test]
    fn match_substitute_round_trip() {
        let free: BTreeSet<String> = ["y".to_string()].into();
        let pat = norm("(* y y)");
        let target = norm("(* (+ 1 x) (+ 1 x))");
        let subst = match_term(&pat, &target, &free).unwrap();
        assert_eq!(substitute(&pat, &subst), target);
    }

    #[test]
    fn ground_evaluation() {
        assert_eq!(eval_ground(&norm("(* 3 4)")), Ok(rat(12)));
        // foo at x = 2: the low end of the actual range
        assert_eq!(eval_ground(&norm("(- (* 2 2) (* 3 2))")), Ok(rat(-2)));
        assert_eq!(eval_ground(&norm("(* 3 x)")), Err(EvalError::NotGround));
        assert_eq!(eval_ground(&norm("(/ 1 0)")), Err(EvalError::DivByZero));
        assert_eq!(eval_ground(&parse_term("(/ 0)").unwrap()), Err(EvalError::DivByZero));
        assert_eq!(eval_ground(&norm("(foo 3)")), Err(EvalError::NotGround));
    }

    // -- randomized structure --

    fn arb_ground() -> impl Strategy<Value = Term> {
        let leaf = (-20i64..20).prop_map(Term::int);
        leaf.prop_recursive(4, 64, 4, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Term::add(vec![a, b])),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Term::mul(vec![a, b])),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Term::App(Op::Sub, vec![a, b])),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Term::App(Op::Div, vec![a, b])),
                inner
                    .clone()
                    .prop_map(|a| Term::App(Op::Sub, vec![a])),
            ]
        })
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (-20i64..20).prop_map(Term::int),
            prop_oneof![Just("x"), Just("y"), Just("z")].prop_map(Term::var),
        ];
        leaf.prop_recursive(4, 48, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(vec![a, b])),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::mul(vec![a, b])),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::App(Op::Sub, vec![a, b])),
                inner.clone().prop_map(|a| Term::App(Op::Recip, vec![a])),
            ]
        })
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(t in arb_term()) {
            let once = normalize(&t);
            prop_assert_eq!(normalize(&once), once);
        }

        #[test]
        fn normalize_preserves_ground_value(t in arb_ground()) {
            if let Ok(v) = eval_ground(&t) {
                prop_assert_eq!(eval_ground(&normalize(&t)), Ok(v));
            }
        }

        #[test]
        fn print_parse_round_trip(t in arb_term()) {
            let n = normalize(&t);
            prop_assert_eq!(parse_term(&n.to_string()).unwrap(), n);
        }

        #[test]
        fn term_order_is_total(a in arb_term(), b in arb_term()) {
            let (a, b) = (normalize(&a), normalize(&b));
            if a != b {
                prop_assert_ne!(a.cmp(&b), Ordering::Equal);
                prop_assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
            } else {
                prop_assert_eq!(a.cmp(&b), Ordering::Equal);
            }
        }
    }
}
