//! The core abstract interpreter: recursive bounding of a normalized term,
//! taking at every node the componentwise best of four bound sources —
//! typeset reasoning, user suggestions, linear rules, and structural
//! operator recursion.
//!
//! Suggestions and linear rules are validated by backchaining: an inequality
//! is established by syntactic presence among the hypothesis conjuncts, by
//! ground evaluation, by recursive bounding at reduced depth, or (for
//! recognizers) by typesets. Every accepted candidate carries a proof object
//! that the certificate checker can replay without redoing the search.

use crate::env::{canon_cmp, HypEnv};
use crate::interval::Interval;
use crate::rational::Rational;
use crate::term::{eval_ground, match_term, normalize, substitute, Op, Substitution, Term};
use crate::typeset::{typeset_of, typeset_bounds, Category, Typeset};
use std::collections::{BTreeSet, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

/// A user-provided candidate bound: for subterms matching `pattern`, try to
/// prove them below (Upper) or above (Lower) the instantiated `rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suggestion {
    pub pattern: Term,
    pub free_vars: BTreeSet<String>,
    pub direction: Direction,
    pub rhs: Term,
}

/// A named inequality lemma `hyps => lhs <= rhs`, usable in either
/// orientation: matching the lhs yields an upper bound from the rhs, and
/// matching the rhs yields a lower bound from the lhs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRule {
    pub name: String,
    pub lhs: Term,
    pub rhs: Term,
    pub hyps: Vec<Term>,
    pub enabled: bool,
}

impl LinearRule {
    fn free_vars(&self) -> BTreeSet<String> {
        let mut vs = self.lhs.vars();
        vs.extend(self.rhs.vars());
        for h in &self.hyps {
            vs.extend(h.vars());
        }
        vs
    }
}

#[derive(Debug, Clone)]
pub struct BounderCfg {
    pub suggestions: Vec<Suggestion>,
    pub linear_rules: Vec<LinearRule>,
    /// Backchain budget; exhaustion silently drops a candidate.
    pub depth: u32,
    pub memo: bool,
}

impl Default for BounderCfg {
    fn default() -> Self {
        BounderCfg {
            suggestions: Vec::new(),
            linear_rules: Vec::new(),
            depth: 3,
            memo: true,
        }
    }
}

/// Replayable evidence that one hypothesis instance holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HypProof {
    /// Canonically present among the environment's conjuncts.
    EnvConjunct,
    /// Closed comparison or recognizer that evaluates to true.
    Ground,
    /// Recognizer established by the term's typeset.
    Recognizer { ts: Typeset },
    /// Inequality established by bounding both sides: lhs.hi <= rhs.lo.
    ByBounds {
        lhs: Box<BoundTrace>,
        rhs: Box<BoundTrace>,
    },
}

/// Why one endpoint of a node's interval holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// Declared variable leaf: the environment's range.
    Hypothesis { var: String },
    Constant,
    Typeset { ts: Typeset },
    /// Recomputable from the children's intervals by this node's operator.
    Structural,
    Suggestion {
        index: usize,
        value: Rational,
        proof: Box<HypProof>,
    },
    Linear {
        name: String,
        value: Rational,
        proofs: Vec<HypProof>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundTrace {
    pub term: Term,
    pub result: Interval,
    pub lo_just: Option<Justification>,
    pub hi_just: Option<Justification>,
    pub children: Vec<BoundTrace>,
}

type Memo = HashMap<(Term, u32), (Interval, BoundTrace)>;

/// Bound a term under the hypothesis environment. The result may be
/// one-sided or fully absent; unboundable terms are never an error.
pub fn bound_term(t: &Term, env: &HypEnv, cfg: &BounderCfg) -> (Interval, BoundTrace) {
    let mut memo = Memo::new();
    bound_rec(&normalize(t), env, cfg, cfg.depth, &mut memo)
}

fn bound_rec(
    t: &Term,
    env: &HypEnv,
    cfg: &BounderCfg,
    depth: u32,
    memo: &mut Memo,
) -> (Interval, BoundTrace) {
    if cfg.memo {
        if let Some(hit) = memo.get(&(t.clone(), depth)) {
            return hit.clone();
        }
    }

    let mut lo_cands: Vec<(Rational, Justification)> = Vec::new();
    let mut hi_cands: Vec<(Rational, Justification)> = Vec::new();

    // 1. typeset reasoning
    let ts = typeset_of(t, env);
    let ts_iv = typeset_bounds(ts);
    if let Some(l) = ts_iv.lo() {
        lo_cands.push((l.clone(), Justification::Typeset { ts }));
    }
    if let Some(h) = ts_iv.hi() {
        hi_cands.push((h.clone(), Justification::Typeset { ts }));
    }

    // 2. user suggestions
    for (dir, value, just) in suggestion_candidates(t, env, cfg, depth, memo) {
        match dir {
            Direction::Lower => lo_cands.push((value, just)),
            Direction::Upper => hi_cands.push((value, just)),
        }
    }

    // 3. linear rules, filtered against the best bound found so far
    let best_so_far = Interval::new(
        lo_cands.iter().map(|(v, _)| v).max().cloned(),
        hi_cands.iter().map(|(v, _)| v).min().cloned(),
    );
    for (dir, value, just) in linear_candidates(t, env, cfg, depth, &best_so_far, memo) {
        match dir {
            Direction::Lower => lo_cands.push((value, just)),
            Direction::Upper => hi_cands.push((value, just)),
        }
    }

    // 4. structural recursion through the operators
    let (structural, children) = structural_bounds(t, env, cfg, depth, memo);
    if let Some(iv) = &structural {
        let leaf_just = || match t {
            Term::Const(_) => Justification::Constant,
            Term::Var(v) => Justification::Hypothesis { var: v.clone() },
            _ => Justification::Structural,
        };
        if let Some(l) = iv.lo() {
            lo_cands.push((l.clone(), leaf_just()));
        }
        if let Some(h) = iv.hi() {
            hi_cands.push((h.clone(), leaf_just()));
        }
    }

    // componentwise best; ties keep the earliest source
    let best_lo = lo_cands
        .iter()
        .max_by(|a, b| a.0.cmp(&b.0))
        .map(|(v, _)| v.clone());
    let lo_just = best_lo.as_ref().and_then(|v| {
        lo_cands
            .iter()
            .find(|(c, _)| c == v)
            .map(|(_, j)| j.clone())
    });
    // with an inconsistent rule database upper candidates could cross the
    // chosen lower bound; drop those rather than form an invalid interval
    let hi_floor = best_lo.clone();
    let best_hi = hi_cands
        .iter()
        .filter(|(v, _)| hi_floor.as_ref().map_or(true, |l| v >= l))
        .min_by(|a, b| a.0.cmp(&b.0))
        .map(|(v, _)| v.clone());
    let hi_just = best_hi.as_ref().and_then(|v| {
        hi_cands
            .iter()
            .find(|(c, _)| c == v)
            .map(|(_, j)| j.clone())
    });

    let result = Interval::new(best_lo, best_hi);
    let trace = BoundTrace {
        term: t.clone(),
        result: result.clone(),
        lo_just,
        hi_just,
        children,
    };

    if cfg.memo {
        memo.insert((t.clone(), depth), (result.clone(), trace.clone()));
    }
    (result, trace)
}

fn structural_bounds(
    t: &Term,
    env: &HypEnv,
    cfg: &BounderCfg,
    depth: u32,
    memo: &mut Memo,
) -> (Option<Interval>, Vec<BoundTrace>) {
    match t {
        Term::Const(c) => (Some(Interval::point(c.clone())), Vec::new()),
        Term::Var(v) => match env.var(v) {
            Some(info) => (Some(info.range.clone()), Vec::new()),
            None => (None, Vec::new()),
        },
        Term::Call(..) => (None, Vec::new()),
        Term::App(op, args) => {
            let children: Vec<BoundTrace> = args
                .iter()
                .map(|a| bound_rec(a, env, cfg, depth, memo).1)
                .collect();
            let ivs: Vec<&Interval> = children.iter().map(|c| &c.result).collect();
            let iv = match op {
                Op::Add => ivs
                    .iter()
                    .map(|iv| (*iv).clone())
                    .reduce(|a, b| a.add(&b)),
                Op::Mul => Some(fold_product(args, &ivs)),
                Op::Recip => Some(ivs[0].recip()),
                Op::Sub | Op::Div => unreachable!("normalized terms have no {op:?}"),
            };
            (iv, children)
        }
    }
}

/// Left fold of interval multiplication with square grouping: adjacent equal
/// factors (adjacent by canonical sorting) are bounded as squares, so
/// (* x x y) is treated as (* (* x x) y).
pub(crate) fn fold_product(args: &[Term], ivs: &[&Interval]) -> Interval {
    let mut acc: Option<Interval> = None;
    let mut i = 0;
    while i < args.len() {
        let factor = if i + 1 < args.len() && args[i] == args[i + 1] {
            let sq = ivs[i].square();
            i += 2;
            sq
        } else {
            let f = ivs[i].clone();
            i += 1;
            f
        };
        acc = Some(match acc {
            None => factor,
            Some(a) => a.mul(&factor),
        });
    }
    acc.expect("product has at least one factor")
}

fn suggestion_candidates(
    t: &Term,
    env: &HypEnv,
    cfg: &BounderCfg,
    depth: u32,
    memo: &mut Memo,
) -> Vec<(Direction, Rational, Justification)> {
    let mut out = Vec::new();
    for (index, s) in cfg.suggestions.iter().enumerate() {
        let Some(subst) = match_term(&s.pattern, t, &s.free_vars) else {
            continue;
        };
        let inst = substitute(&s.rhs, &subst);
        let Ok(value) = eval_ground(&inst) else {
            continue; // rhs must instantiate to a ground rational
        };
        let ineq = match s.direction {
            Direction::Upper => Term::Call(
                "<=".into(),
                vec![t.clone(), Term::Const(value.clone())],
            ),
            Direction::Lower => Term::Call(
                "<=".into(),
                vec![Term::Const(value.clone()), t.clone()],
            ),
        };
        let Some(proof) = relieve_one(&ineq, env, cfg, depth, memo) else {
            continue;
        };
        out.push((
            s.direction,
            value.clone(),
            Justification::Suggestion {
                index,
                value,
                proof: Box::new(proof),
            },
        ));
    }
    out
}

fn improves(dir: Direction, value: &Rational, best: &Interval) -> bool {
    match dir {
        Direction::Upper => best.hi().map_or(true, |h| value < h),
        Direction::Lower => best.lo().map_or(true, |l| value > l),
    }
}

fn linear_candidates(
    t: &Term,
    env: &HypEnv,
    cfg: &BounderCfg,
    depth: u32,
    best_so_far: &Interval,
    memo: &mut Memo,
) -> Vec<(Direction, Rational, Justification)> {
    let mut out = Vec::new();
    for rule in cfg.linear_rules.iter().filter(|r| r.enabled) {
        let free = rule.free_vars();
        for (pattern, bound_side, dir) in [
            (&rule.lhs, &rule.rhs, Direction::Upper),
            (&rule.rhs, &rule.lhs, Direction::Lower),
        ] {
            let Some(subst) = match_term(pattern, t, &free) else {
                continue;
            };
            let Ok(value) = eval_ground(&substitute(bound_side, &subst)) else {
                continue;
            };
            if !improves(dir, &value, best_so_far) {
                continue;
            }
            let Some(proofs) = relieve_hyps_rec(&rule.hyps, &subst, env, cfg, depth, memo) else {
                continue;
            };
            out.push((
                dir,
                value.clone(),
                Justification::Linear {
                    name: rule.name.clone(),
                    value,
                    proofs,
                },
            ));
        }
    }
    out
}

/// Establish every substituted hypothesis, returning one proof per
/// hypothesis on success.
pub fn relieve_hyps(
    hyps: &[Term],
    subst: &Substitution,
    env: &HypEnv,
    cfg: &BounderCfg,
    depth: u32,
) -> Option<Vec<HypProof>> {
    let mut memo = Memo::new();
    relieve_hyps_rec(hyps, subst, env, cfg, depth, &mut memo)
}

fn relieve_hyps_rec(
    hyps: &[Term],
    subst: &Substitution,
    env: &HypEnv,
    cfg: &BounderCfg,
    depth: u32,
    memo: &mut Memo,
) -> Option<Vec<HypProof>> {
    hyps.iter()
        .map(|h| relieve_one(&substitute(h, subst), env, cfg, depth, memo))
        .collect()
}

// One hypothesis instance, already substituted. Routes, in order:
// (a) syntactic presence among the env conjuncts; (b) ground evaluation;
// (c) inequalities via recursive bounding at depth - 1;
// (d) recognizers via typesets. Depth 0 permits only (a) and (b).
fn relieve_one(
    atom: &Term,
    env: &HypEnv,
    cfg: &BounderCfg,
    depth: u32,
    memo: &mut Memo,
) -> Option<HypProof> {
    let atom = canon_cmp(&normalize(atom));

    if env.entails_syntactically(&atom) {
        return Some(HypProof::EnvConjunct);
    }

    if let Some(truth) = eval_ground_atom(&atom) {
        return if truth { Some(HypProof::Ground) } else { None };
    }

    if depth == 0 {
        return None;
    }

    if let Term::Call(op, args) = &atom {
        match (op.as_str(), args.len()) {
            ("<=", 2) => {
                let (lhs_iv, lhs_tr) = bound_rec(&args[0], env, cfg, depth - 1, memo);
                let (rhs_iv, rhs_tr) = bound_rec(&args[1], env, cfg, depth - 1, memo);
                if let (Some(h), Some(l)) = (lhs_iv.hi(), rhs_iv.lo()) {
                    if h <= l {
                        return Some(HypProof::ByBounds {
                            lhs: Box::new(lhs_tr),
                            rhs: Box::new(rhs_tr),
                        });
                    }
                }
            }
            ("rationalp", 1) => {
                // the term language denotes rationals wherever defined
                let ts = typeset_of(&args[0], env);
                return Some(HypProof::Recognizer { ts });
            }
            ("integerp", 1) => {
                let ts = typeset_of(&args[0], env);
                let ints = Typeset::of(&[
                    Category::NegInt,
                    Category::Zero,
                    Category::One,
                    Category::IntAboveOne,
                ]);
                if ts.is_subset(ints) {
                    return Some(HypProof::Recognizer { ts });
                }
            }
            _ => {}
        }
    }
    None
}

/// Ground truth value of a closed atom, if decidable by evaluation.
pub(crate) fn eval_ground_atom(atom: &Term) -> Option<bool> {
    if let Term::Call(op, args) = atom {
        match (op.as_str(), args.len()) {
            ("<=", 2) => {
                let a = eval_ground(&args[0]).ok()?;
                let b = eval_ground(&args[1]).ok()?;
                Some(a <= b)
            }
            ("rationalp", 1) => {
                eval_ground(&args[0]).ok()?;
                Some(true)
            }
            ("integerp", 1) => {
                let v = eval_ground(&args[0]).ok()?;
                Some(crate::rational::is_integer(&v))
            }
            _ => None,
        }
    } else {
        None
    }
}
