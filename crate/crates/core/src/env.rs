//! Hypothesis environments: per-variable type declarations and ranges
//! extracted from a hypothesis conjunction.
//!
//! Accepted atoms are `(rationalp v)`, `(integerp v)`, binary inequalities
//! with one variable side and one ground side, and the literal `t`. Strict
//! inequalities contribute the same weak bound as their non-strict forms;
//! the engine never tracks strictness.

use crate::interval::Interval;
use crate::rational::format_rational;
use crate::term::{eval_ground, normalize, Term};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decl {
    Rational,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub decl: Decl,
    pub range: Interval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypEnv {
    vars: BTreeMap<String, VarInfo>,
    conjuncts: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("unrecognized hypothesis atom `{0}`")]
    UnrecognizedAtom(String),
    #[error("variable `{0}` is bounded but never declared")]
    UndeclaredVar(String),
    #[error("contradictory bounds for `{var}`: lo {lo} > hi {hi}")]
    Contradictory { var: String, lo: String, hi: String },
    #[error("case range for `{0}` lies outside its hypothesis range")]
    CaseOutsideRange(String),
}

/// Rewrite `>`/`>=` to the flipped `<`/`<=`, then `<` to `<=`: every
/// comparison atom gets one canonical weak spelling.
pub fn canon_cmp(t: &Term) -> Term {
    if let Term::Call(op, args) = t {
        if args.len() == 2 {
            match op.as_str() {
                ">" | ">=" => {
                    return Term::Call("<=".into(), vec![args[1].clone(), args[0].clone()])
                }
                "<" => return Term::Call("<=".into(), args.clone()),
                _ => {}
            }
        }
    }
    t.clone()
}

fn is_true_literal(t: &Term) -> bool {
    matches!(t, Term::Var(v) if v == "t")
}

fn collect_conjuncts(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::Call(op, args) if op == "and" => {
            for a in args {
                collect_conjuncts(a, out);
            }
        }
        _ => {
            if !is_true_literal(t) {
                out.push(t.clone());
            }
        }
    }
}

/// Build the per-variable declaration and tightest implied range from a
/// hypothesis conjunction.
pub fn env_from_hyp(hyp: &Term) -> Result<HypEnv, EnvError> {
    let hyp = normalize(hyp);
    let mut atoms = Vec::new();
    collect_conjuncts(&hyp, &mut atoms);

    let mut decls: BTreeMap<String, Decl> = BTreeMap::new();
    for atom in &atoms {
        if let Term::Call(op, args) = atom {
            if args.len() == 1 {
                if let Term::Var(v) = &args[0] {
                    match op.as_str() {
                        "rationalp" => {
                            decls.entry(v.clone()).or_insert(Decl::Rational);
                        }
                        "integerp" => {
                            decls.insert(v.clone(), Decl::Integer);
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    let mut vars: BTreeMap<String, VarInfo> = decls
        .iter()
        .map(|(v, d)| {
            (
                v.clone(),
                VarInfo {
                    decl: *d,
                    range: Interval::unbounded(),
                },
            )
        })
        .collect();

    for atom in &atoms {
        let canon = canon_cmp(atom);
        match &canon {
            Term::Call(op, args) if args.len() == 1 => match op.as_str() {
                "rationalp" | "integerp" if matches!(args[0], Term::Var(_)) => {}
                _ => return Err(EnvError::UnrecognizedAtom(atom.to_string())),
            },
            Term::Call(op, args) if op == "<=" && args.len() == 2 => {
                let (lhs, rhs) = (&args[0], &args[1]);
                let bound = match (lhs, rhs) {
                    (Term::Var(v), ground) => {
                        eval_ground(ground).ok().map(|c| (v.clone(), Interval::at_most(c)))
                    }
                    (ground, Term::Var(v)) => {
                        eval_ground(ground).ok().map(|c| (v.clone(), Interval::at_least(c)))
                    }
                    _ => None,
                };
                let (v, contribution) =
                    bound.ok_or_else(|| EnvError::UnrecognizedAtom(atom.to_string()))?;
                let info = vars
                    .get_mut(&v)
                    .ok_or_else(|| EnvError::UndeclaredVar(v.clone()))?;
                info.range = info.range.intersect(&contribution).ok_or_else(|| {
                    contradiction(&v, &info.range, &contribution)
                })?;
            }
            _ => return Err(EnvError::UnrecognizedAtom(atom.to_string())),
        }
    }

    for (v, info) in vars.iter_mut() {
        if info.decl == Decl::Integer {
            info.range = info.range.tighten_integer().ok_or_else(|| {
                EnvError::Contradictory {
                    var: v.clone(),
                    lo: info.range.lo().map(format_rational).unwrap_or_default(),
                    hi: info.range.hi().map(format_rational).unwrap_or_default(),
                }
            })?;
        }
    }

    Ok(HypEnv {
        vars,
        conjuncts: atoms.iter().map(canon_cmp).collect(),
    })
}

fn contradiction(v: &str, a: &Interval, b: &Interval) -> EnvError {
    let lo = match (a.lo(), b.lo()) {
        (Some(x), Some(y)) => x.max(y).clone(),
        (Some(x), None) | (None, Some(x)) => x.clone(),
        (None, None) => unreachable!("empty intersection needs both endpoints"),
    };
    let hi = match (a.hi(), b.hi()) {
        (Some(x), Some(y)) => x.min(y).clone(),
        (Some(x), None) | (None, Some(x)) => x.clone(),
        (None, None) => unreachable!("empty intersection needs both endpoints"),
    };
    EnvError::Contradictory {
        var: v.to_string(),
        lo: format_rational(&lo),
        hi: format_rational(&hi),
    }
}

impl HypEnv {
    pub fn var(&self, name: &str) -> Option<&VarInfo> {
        self.vars.get(name)
    }

    pub fn vars(&self) -> impl Iterator<Item = (&String, &VarInfo)> {
        self.vars.iter()
    }

    pub fn conjuncts(&self) -> &[Term] {
        &self.conjuncts
    }

    /// Syntactic presence of an atom among the hypothesis conjuncts, modulo
    /// the canonical weak spelling of comparisons.
    pub fn entails_syntactically(&self, atom: &Term) -> bool {
        let canon = canon_cmp(atom);
        self.conjuncts.contains(&canon)
    }

    /// Strengthen for one case: intersect each listed variable's range with
    /// its segment and record the segment inequalities as extra conjuncts.
    pub fn with_case_ranges(
        &self,
        segments: &[(String, Interval)],
    ) -> Result<HypEnv, EnvError> {
        let mut out = self.clone();
        for (v, seg) in segments {
            let info = out
                .vars
                .get_mut(v)
                .ok_or_else(|| EnvError::UndeclaredVar(v.clone()))?;
            let mut range = info
                .range
                .intersect(seg)
                .ok_or_else(|| EnvError::CaseOutsideRange(v.clone()))?;
            if info.decl == Decl::Integer {
                range = range
                    .tighten_integer()
                    .ok_or_else(|| EnvError::CaseOutsideRange(v.clone()))?;
            }
            info.range = range;
            if let Some(lo) = seg.lo() {
                out.conjuncts.push(Term::Call(
                    "<=".into(),
                    vec![Term::Const(lo.clone()), Term::Var(v.clone())],
                ));
            }
            if let Some(hi) = seg.hi() {
                out.conjuncts.push(Term::Call(
                    "<=".into(),
                    vec![Term::Var(v.clone()), Term::Const(hi.clone())],
                ));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::term::parse_term;

    fn env(src: &str) -> Result<HypEnv, EnvError> {
        env_from_hyp(&parse_term(src).unwrap())
    }

    #[test]
    fn extracts_declaration_and_range() {
        let e = env("(and (rationalp x) (<= 2 x) (<= x 4))").unwrap();
        let info = e.var("x").unwrap();
        assert_eq!(info.decl, Decl::Rational);
        assert_eq!(info.range, Interval::closed(rat(2), rat(4)));
    }

    #[test]
    fn integer_declaration_without_bounds() {
        let e = env("(integerp n)").unwrap();
        let info = e.var("n").unwrap();
        assert_eq!(info.decl, Decl::Integer);
        assert_eq!(info.range, Interval::unbounded());
    }

    #[test]
    fn strict_bounds_weaken() {
        let e = env("(and (rationalp x) (< x 4))").unwrap();
        assert_eq!(e.var("x").unwrap().range, Interval::at_most(rat(4)));
        let e = env("(and (rationalp x) (> x 1))").unwrap();
        assert_eq!(e.var("x").unwrap().range, Interval::at_least(rat(1)));
    }

    #[test]
    fn integer_ranges_tighten_to_integers() {
        let e = env("(and (integerp n) (<= 1/2 n) (<= n 7/2))").unwrap();
        assert_eq!(e.var("n").unwrap().range, Interval::closed(rat(1), rat(3)));
    }

    #[test]
    fn rejects_bad_hypotheses() {
        assert!(matches!(
            env("(and (rationalp x) (<= x 4) (<= 5 x))"),
            Err(EnvError::Contradictory { .. })
        ));
        assert!(matches!(env("(<= 2 x)"), Err(EnvError::UndeclaredVar(_))));
        assert!(matches!(
            env("(and (rationalp x) (foo x))"),
            Err(EnvError::UnrecognizedAtom(_))
        ));
        assert!(matches!(
            env("(and (integerp n) (<= 1/3 n) (<= n 2/3))"),
            Err(EnvError::Contradictory { .. })
        ));
    }

    #[test]
    fn literal_true_and_nested_and() {
        let e = env("(and t (and (rationalp x) (<= 2 x)) t)").unwrap();
        assert_eq!(e.var("x").unwrap().range, Interval::at_least(rat(2)));
    }

    #[test]
    fn syntactic_entailment_is_weak_canonical() {
        let e = env("(and (rationalp x) (<= 2 x) (< x 4))").unwrap();
        assert!(e.entails_syntactically(&parse_term("(<= x 4)").unwrap()));
        assert!(e.entails_syntactically(&parse_term("(< x 4)").unwrap()));
        assert!(e.entails_syntactically(&parse_term("(>= x 2)").unwrap()));
        assert!(!e.entails_syntactically(&parse_term("(<= x 5)").unwrap()));
        assert!(e.entails_syntactically(&parse_term("(rationalp x)").unwrap()));
    }

    #[test]
    fn case_strengthening_intersects() {
        let e = env("(and (rationalp x) (<= 2 x) (<= x 4))").unwrap();
        let seg = Interval::closed(rat(3), rat(9));
        let e2 = e
            .with_case_ranges(&[("x".to_string(), seg)])
            .unwrap();
        assert_eq!(e2.var("x").unwrap().range, Interval::closed(rat(3), rat(4)));
        assert!(e2.entails_syntactically(&parse_term("(<= 3 x)").unwrap()));
        let gone = e.with_case_ranges(&[("x".to_string(), Interval::closed(rat(5), rat(6)))]);
        assert!(matches!(gone, Err(EnvError::CaseOutsideRange(_))));
    }
}
