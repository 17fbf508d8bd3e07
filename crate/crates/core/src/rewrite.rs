//! Phased simplification: named rewrite rules and function definitions,
//! enabled or disabled per phase, applied leftmost-innermost to a fixpoint
//! before bounding.
//!
//! Rule selection is first-match in database order, with the built-in
//! `distributivity` rule (x*(y+z) => x*y + x*z) ahead of user rules.
//! Conditional rules relieve their hypotheses through the bounder's
//! backchaining. Every application renormalizes the whole term, and a hard
//! budget caps the number of steps per phase; exhaustion is reported, not
//! an error.

use crate::bounder::{relieve_hyps, BounderCfg, HypProof};
use crate::env::HypEnv;
use crate::term::{match_term, normalize, substitute, Op, Term};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub const DISTRIBUTIVITY: &str = "distributivity";
pub const DEFAULT_REWRITE_BUDGET: u64 = 10_000;

/// A (non-recursive) function definition. `defund`-style definitions start
/// disabled and only open when a phase enables them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Term,
    pub default_enabled: bool,
}

/// A named equality `hyps => lhs = rhs`, oriented left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    pub name: String,
    pub lhs: Term,
    pub rhs: Term,
    pub hyps: Vec<Term>,
    pub default_enabled: bool,
}

/// One simplification phase: enable/disable adjustments over the database
/// defaults, plus call patterns to expand regardless of enablement.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Phase {
    pub enables: BTreeSet<String>,
    pub disables: BTreeSet<String>,
    pub expands: Vec<Term>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleDb {
    pub rules: Vec<RewriteRule>,
    pub defs: Vec<FnDef>,
}

impl RuleDb {
    pub fn rule(&self, name: &str) -> Option<&RewriteRule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn def(&self, name: &str) -> Option<&FnDef> {
        self.defs.iter().find(|d| d.name == name)
    }

    pub fn knows(&self, name: &str) -> bool {
        name == DISTRIBUTIVITY || self.rule(name).is_some() || self.def(name).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("unknown rule or definition `{0}`")]
    UnknownName(String),
    #[error("`:expand` target `{0}` does not name a defined function")]
    ExpandUnknownFn(String),
}

/// Rules and definitions active during one phase.
#[derive(Debug, Clone)]
pub struct ActiveSet<'a> {
    pub distributivity: bool,
    pub rules: Vec<&'a RewriteRule>,
    pub defs: BTreeMap<&'a str, &'a FnDef>,
    /// Call terms forced open regardless of enablement, with their defs.
    pub expands: Vec<(Term, &'a FnDef)>,
}

impl<'a> ActiveSet<'a> {
    /// Database defaults adjusted by one phase's enables/disables.
    pub fn for_phase(db: &'a RuleDb, phase: &Phase) -> Result<ActiveSet<'a>, RewriteError> {
        for name in phase.enables.iter().chain(phase.disables.iter()) {
            if !db.knows(name) {
                return Err(RewriteError::UnknownName(name.clone()));
            }
        }
        let on = |name: &str, default: bool| {
            if phase.enables.contains(name) {
                true
            } else if phase.disables.contains(name) {
                false
            } else {
                default
            }
        };
        let mut expands = Vec::new();
        for e in &phase.expands {
            let e = normalize(e);
            match &e {
                Term::Call(f, _) => match db.def(f) {
                    Some(def) => expands.push((e.clone(), def)),
                    None => return Err(RewriteError::ExpandUnknownFn(f.clone())),
                },
                other => return Err(RewriteError::ExpandUnknownFn(other.to_string())),
            }
        }
        Ok(ActiveSet {
            distributivity: on(DISTRIBUTIVITY, true),
            rules: db
                .rules
                .iter()
                .filter(|r| on(&r.name, r.default_enabled))
                .collect(),
            defs: db
                .defs
                .iter()
                .filter(|d| on(&d.name, d.default_enabled))
                .map(|d| (d.name.as_str(), d))
                .collect(),
            expands,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepAction {
    ExpandDef { name: String },
    Rule { name: String },
}

/// One applied rewrite: the whole-term before/after pair, the position, and
/// the hypothesis proofs that licensed a conditional rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub action: StepAction,
    pub path: Vec<usize>,
    pub before: Term,
    pub after: Term,
    pub hyp_proofs: Vec<HypProof>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseLog {
    pub steps: Vec<StepRecord>,
    pub budget_exhausted: bool,
}

/// Distribute the leftmost sum factor of a product:
/// (* a (+ b c) d) => (+ (* a b d) (* a c d)).
pub fn distribute_once(t: &Term) -> Option<Term> {
    let Term::App(Op::Mul, args) = t else {
        return None;
    };
    let idx = args
        .iter()
        .position(|a| matches!(a, Term::App(Op::Add, _)))?;
    let Term::App(Op::Add, summands) = &args[idx] else {
        unreachable!();
    };
    let terms = summands
        .iter()
        .map(|s| {
            let mut factors = args.clone();
            factors[idx] = s.clone();
            Term::App(Op::Mul, factors)
        })
        .collect();
    Some(Term::App(Op::Add, terms))
}

struct Rewriter<'a> {
    active: &'a ActiveSet<'a>,
    env: &'a HypEnv,
    bcfg: &'a BounderCfg,
}

impl Rewriter<'_> {
    // leftmost-innermost: children first, then this node
    fn find_redex(
        &self,
        t: &Term,
        path: &mut Vec<usize>,
    ) -> Option<(Vec<usize>, Term, StepAction, Vec<HypProof>)> {
        for (i, child) in t.children().iter().enumerate() {
            path.push(i);
            if let Some(found) = self.find_redex(child, path) {
                path.pop();
                return Some(found);
            }
            path.pop();
        }
        self.try_node(t, path)
    }

    fn try_node(
        &self,
        t: &Term,
        path: &[usize],
    ) -> Option<(Vec<usize>, Term, StepAction, Vec<HypProof>)> {
        if let Term::Call(f, args) = t {
            let def = self.active.defs.get(f.as_str()).copied().or_else(|| {
                self.active
                    .expands
                    .iter()
                    .find(|(pat, _)| pat == t)
                    .map(|(_, d)| *d)
            });
            if let Some(def) = def {
                if def.params.len() == args.len() {
                    let subst = def
                        .params
                        .iter()
                        .cloned()
                        .zip(args.iter().cloned())
                        .collect();
                    let body = substitute(&def.body, &subst);
                    return Some((
                        path.to_vec(),
                        body,
                        StepAction::ExpandDef { name: f.clone() },
                        Vec::new(),
                    ));
                }
            }
        }

        if self.active.distributivity {
            if let Some(distributed) = distribute_once(t) {
                return Some((
                    path.to_vec(),
                    distributed,
                    StepAction::Rule {
                        name: DISTRIBUTIVITY.to_string(),
                    },
                    Vec::new(),
                ));
            }
        }

        for rule in &self.active.rules {
            let free = rule.lhs.vars();
            let Some(subst) = match_term(&rule.lhs, t, &free) else {
                continue;
            };
            let Some(proofs) = relieve_hyps(&rule.hyps, &subst, self.env, self.bcfg, self.bcfg.depth)
            else {
                continue;
            };
            let replacement = substitute(&rule.rhs, &subst);
            return Some((
                path.to_vec(),
                replacement,
                StepAction::Rule {
                    name: rule.name.clone(),
                },
                proofs,
            ));
        }
        None
    }
}

/// Rewrite to a fixpoint (or budget exhaustion) under one active set.
pub fn rewrite_fixpoint(
    t: &Term,
    active: &ActiveSet,
    env: &HypEnv,
    bcfg: &BounderCfg,
    budget: u64,
) -> (Term, PhaseLog) {
    let rw = Rewriter { active, env, bcfg };
    let mut cur = normalize(t);
    let mut steps = Vec::new();
    let mut remaining = budget;
    loop {
        if remaining == 0 {
            return (
                cur,
                PhaseLog {
                    steps,
                    budget_exhausted: true,
                },
            );
        }
        let mut path = Vec::new();
        match rw.find_redex(&cur, &mut path) {
            None => {
                return (
                    cur,
                    PhaseLog {
                        steps,
                        budget_exhausted: false,
                    },
                )
            }
            Some((path, replacement, action, hyp_proofs)) => {
                let replaced = cur
                    .replace_at_path(&path, replacement)
                    .expect("redex path is valid");
                let after = normalize(&replaced);
                steps.push(StepRecord {
                    action,
                    path,
                    before: cur.clone(),
                    after: after.clone(),
                    hyp_proofs,
                });
                cur = after;
                remaining -= 1;
            }
        }
    }
}

/// Fold `rewrite_fixpoint` over the phases in order.
pub fn run_phases(
    t: &Term,
    phases: &[Phase],
    db: &RuleDb,
    env: &HypEnv,
    bcfg: &BounderCfg,
    budget: u64,
) -> Result<(Term, Vec<PhaseLog>), RewriteError> {
    let mut cur = normalize(t);
    let mut logs = Vec::new();
    for phase in phases {
        let active = ActiveSet::for_phase(db, phase)?;
        let (next, log) = rewrite_fixpoint(&cur, &active, env, bcfg, budget);
        cur = next;
        logs.push(log);
    }
    Ok((cur, logs))
}
