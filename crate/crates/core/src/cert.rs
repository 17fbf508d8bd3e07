//! Derivation certificates: a self-contained, replayable record of a solve
//! (rewrite steps, case tree, per-node bound justifications) and an
//! independent checker for it.
//!
//! The checker never runs the bounder's search. Every non-structural claim
//! carries an embedded proof object, every structural claim is recomputed
//! from its children by a single interval operation, and rewrite steps are
//! replayed positionally against digests. Claims looser than their
//! justifications are accepted; tighter ones are rejected.

use crate::bounder::{eval_ground_atom, BoundTrace, HypProof, Justification};
use crate::cases::{BoundsResult, Problem};
use crate::env::{canon_cmp, env_from_hyp, HypEnv};
use crate::interval::Interval;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::rewrite::{distribute_once, ActiveSet, StepAction, DISTRIBUTIVITY};
use crate::term::{eval_ground, match_term, normalize, parse_term, substitute, Op, Term};
use crate::typeset::{typeset_bounds, typeset_of, Category, Typeset};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;

pub const CERT_FORMAT: &str = "defbounds-cert-v1";

// ---------------------------------------------------------------------------
// serialized form
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalDto {
    pub lo: Option<String>,
    pub hi: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentDto {
    pub variable: String,
    pub lo: String,
    pub hi: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HypProofDto {
    EnvConjunct,
    Ground,
    Recognizer {
        categories: Vec<String>,
    },
    ByBounds {
        lhs: Box<TraceDto>,
        rhs: Box<TraceDto>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum JustificationDto {
    Hypothesis {
        var: String,
    },
    Constant,
    Typeset {
        categories: Vec<String>,
    },
    Structural,
    Suggestion {
        index: usize,
        value: String,
        proof: Box<HypProofDto>,
    },
    Linear {
        name: String,
        value: String,
        proofs: Vec<HypProofDto>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDto {
    pub term: String,
    pub bounds: IntervalDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo_just: Option<JustificationDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi_just: Option<JustificationDto>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TraceDto>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteStepDto {
    pub phase: usize,
    pub action: String, // "rule" | "expand"
    pub name: String,
    pub path: Vec<usize>,
    pub before_digest: String,
    pub after_digest: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hyp_proofs: Vec<HypProofDto>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseTreeVarDto {
    pub variable: String,
    pub segments: Vec<IntervalDto>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseLeafDto {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<SegmentDto>,
    pub claim: IntervalDto,
    pub trace: TraceDto,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub format: String,
    pub problem: String,
    pub problem_digest: String,
    pub goal: String,
    pub rewritten_goal: String,
    pub rewrite_steps: Vec<RewriteStepDto>,
    pub case_tree: Vec<CaseTreeVarDto>,
    pub cases: Vec<CaseLeafDto>,
    pub claim: IntervalDto,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Certificate, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Fail { reason: String, location: String },
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

// ---------------------------------------------------------------------------
// digests
// ---------------------------------------------------------------------------

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn term_digest(t: &Term) -> String {
    sha_hex(t.to_string().as_bytes())
}

/// Digest over a canonical problem serialization: terms are printed in
/// normalized form, so whitespace and surface spelling do not matter.
pub fn problem_digest(p: &Problem) -> String {
    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, "problem {}", p.name);
    let _ = writeln!(w, "goal {}", normalize(&p.goal));
    let _ = writeln!(w, "hyp {}", normalize(&p.hyp));
    for ph in &p.phases {
        let enables: Vec<_> = ph.enables.iter().cloned().collect();
        let disables: Vec<_> = ph.disables.iter().cloned().collect();
        let expands: Vec<_> = ph.expands.iter().map(|e| normalize(e).to_string()).collect();
        let _ = writeln!(
            w,
            "phase enable=[{}] disable=[{}] expand=[{}]",
            enables.join(","),
            disables.join(","),
            expands.join(",")
        );
    }
    for c in &p.cases {
        let _ = writeln!(
            w,
            "cases {} {} {} {}",
            c.variable,
            format_rational(&c.from),
            format_rational(&c.to),
            format_rational(&c.by)
        );
    }
    for sg in &p.suggestions {
        let free: Vec<_> = sg.free_vars.iter().cloned().collect();
        let _ = writeln!(
            w,
            "suggest {:?} pattern={} free=[{}] rhs={}",
            sg.direction,
            normalize(&sg.pattern),
            free.join(","),
            normalize(&sg.rhs)
        );
    }
    for r in &p.linear_rules {
        let hyps: Vec<_> = r.hyps.iter().map(|h| normalize(h).to_string()).collect();
        let _ = writeln!(
            w,
            "linear {} lhs={} rhs={} hyps=[{}] enabled={}",
            r.name,
            normalize(&r.lhs),
            normalize(&r.rhs),
            hyps.join(","),
            r.enabled
        );
    }
    for r in &p.db.rules {
        let hyps: Vec<_> = r.hyps.iter().map(|h| normalize(h).to_string()).collect();
        let _ = writeln!(
            w,
            "rule {} lhs={} rhs={} hyps=[{}] default={}",
            r.name,
            normalize(&r.lhs),
            normalize(&r.rhs),
            hyps.join(","),
            r.default_enabled
        );
    }
    for d in &p.db.defs {
        let _ = writeln!(
            w,
            "def {} params=[{}] body={} default={}",
            d.name,
            d.params.join(","),
            normalize(&d.body),
            d.default_enabled
        );
    }
    // tuning (backchain depth, budgets, caps) stays out of the digest: it
    // shapes the search, not the problem, and the checker replays recorded
    // steps rather than searching
    sha_hex(s.as_bytes())
}

// ---------------------------------------------------------------------------
// building
// ---------------------------------------------------------------------------

fn interval_dto(iv: &Interval) -> IntervalDto {
    IntervalDto {
        lo: iv.lo().map(format_rational),
        hi: iv.hi().map(format_rational),
    }
}

fn categories_dto(ts: Typeset) -> Vec<String> {
    ts.iter().map(|c| c.as_str().to_string()).collect()
}

fn hyp_proof_dto(p: &HypProof) -> HypProofDto {
    match p {
        HypProof::EnvConjunct => HypProofDto::EnvConjunct,
        HypProof::Ground => HypProofDto::Ground,
        HypProof::Recognizer { ts } => HypProofDto::Recognizer {
            categories: categories_dto(*ts),
        },
        HypProof::ByBounds { lhs, rhs } => HypProofDto::ByBounds {
            lhs: Box::new(trace_dto(lhs)),
            rhs: Box::new(trace_dto(rhs)),
        },
    }
}

fn justification_dto(j: &Justification) -> JustificationDto {
    match j {
        Justification::Hypothesis { var } => JustificationDto::Hypothesis { var: var.clone() },
        Justification::Constant => JustificationDto::Constant,
        Justification::Typeset { ts } => JustificationDto::Typeset {
            categories: categories_dto(*ts),
        },
        Justification::Structural => JustificationDto::Structural,
        Justification::Suggestion {
            index,
            value,
            proof,
        } => JustificationDto::Suggestion {
            index: *index,
            value: format_rational(value),
            proof: Box::new(hyp_proof_dto(proof)),
        },
        Justification::Linear {
            name,
            value,
            proofs,
        } => JustificationDto::Linear {
            name: name.clone(),
            value: format_rational(value),
            proofs: proofs.iter().map(hyp_proof_dto).collect(),
        },
    }
}

fn trace_dto(t: &BoundTrace) -> TraceDto {
    TraceDto {
        term: t.term.to_string(),
        bounds: interval_dto(&t.result),
        lo_just: t.lo_just.as_ref().map(justification_dto),
        hi_just: t.hi_just.as_ref().map(justification_dto),
        children: t.children.iter().map(trace_dto).collect(),
    }
}

/// Serialize the steps a solve took; deterministic bytes for identical
/// inputs.
pub fn build_cert(p: &Problem, r: &BoundsResult) -> Certificate {
    let mut steps = Vec::new();
    for (phase_idx, log) in r.phase_logs.iter().enumerate() {
        for s in &log.steps {
            let (action, name) = match &s.action {
                StepAction::ExpandDef { name } => ("expand", name.clone()),
                StepAction::Rule { name } => ("rule", name.clone()),
            };
            steps.push(RewriteStepDto {
                phase: phase_idx,
                action: action.to_string(),
                name,
                path: s.path.clone(),
                before_digest: term_digest(&s.before),
                after_digest: term_digest(&s.after),
                hyp_proofs: s.hyp_proofs.iter().map(hyp_proof_dto).collect(),
            });
        }
    }

    let mut case_tree: Vec<CaseTreeVarDto> = Vec::new();
    for c in &r.per_case {
        for (var, seg) in &c.segments {
            let entry = match case_tree.iter_mut().find(|e| e.variable == *var) {
                Some(e) => e,
                None => {
                    case_tree.push(CaseTreeVarDto {
                        variable: var.clone(),
                        segments: Vec::new(),
                    });
                    case_tree.last_mut().unwrap()
                }
            };
            let dto = interval_dto(seg);
            if !entry.segments.contains(&dto) {
                entry.segments.push(dto);
            }
        }
    }

    Certificate {
        format: CERT_FORMAT.to_string(),
        problem: p.name.clone(),
        problem_digest: problem_digest(p),
        goal: normalize(&p.goal).to_string(),
        rewritten_goal: r.rewritten_goal.to_string(),
        rewrite_steps: steps,
        case_tree,
        cases: r
            .per_case
            .iter()
            .map(|c| CaseLeafDto {
                segments: c
                    .segments
                    .iter()
                    .map(|(v, seg)| SegmentDto {
                        variable: v.clone(),
                        lo: seg.lo().map(format_rational).unwrap_or_default(),
                        hi: seg.hi().map(format_rational).unwrap_or_default(),
                    })
                    .collect(),
                claim: interval_dto(&c.bounds),
                trace: trace_dto(&c.trace),
            })
            .collect(),
        claim: interval_dto(&r.bounds),
    }
}

// ---------------------------------------------------------------------------
// checking
// ---------------------------------------------------------------------------

struct Fail {
    reason: String,
    location: String,
}

type Check<T> = Result<T, Box<Fail>>;

fn fail<T>(loc: &str, reason: impl Into<String>) -> Check<T> {
    Err(Box::new(Fail {
        reason: reason.into(),
        location: loc.to_string(),
    }))
}

fn parse_rat_at(s: &str, loc: &str) -> Check<Rational> {
    parse_rational(s).map_err(|e| {
        Box::new(Fail {
            reason: e.to_string(),
            location: loc.to_string(),
        })
    })
}

fn interval_from_dto(dto: &IntervalDto, loc: &str) -> Check<Interval> {
    let lo = dto.lo.as_deref().map(|s| parse_rat_at(s, loc)).transpose()?;
    let hi = dto.hi.as_deref().map(|s| parse_rat_at(s, loc)).transpose()?;
    if let (Some(l), Some(h)) = (&lo, &hi) {
        if l > h {
            return fail(loc, format!("interval endpoints out of order: [{l}, {h}]"));
        }
    }
    Ok(Interval::new(lo, hi))
}

fn typeset_from_dto(names: &[String], loc: &str) -> Check<Typeset> {
    let mut ts = Typeset::EMPTY;
    for n in names {
        match Category::from_name(n) {
            Some(c) => ts = ts.union(Typeset::single(c)),
            None => return fail(loc, format!("unknown typeset category `{n}`")),
        }
    }
    Ok(ts)
}

fn parse_term_at(s: &str, loc: &str) -> Check<Term> {
    match parse_term(s) {
        Ok(t) => Ok(t),
        Err(e) => fail(loc, format!("unparseable term: {e}")),
    }
}

/// Independent re-validation of a certificate against its problem. Shares
/// the term/rational/interval/typeset primitives with the solver but none of
/// the bounder's search: every step is replayed locally.
pub fn check_cert(p: &Problem, c: &Certificate) -> Verdict {
    match check_inner(p, c) {
        Ok(()) => Verdict::Ok,
        Err(f) => Verdict::Fail {
            reason: f.reason,
            location: f.location,
        },
    }
}

fn check_inner(p: &Problem, c: &Certificate) -> Check<()> {
    if c.format != CERT_FORMAT {
        return fail("format", format!("unsupported format `{}`", c.format));
    }
    if c.problem != p.name {
        return fail(
            "problem",
            format!("certificate is for `{}`, not `{}`", c.problem, p.name),
        );
    }
    let expected_digest = problem_digest(p);
    if c.problem_digest != expected_digest {
        return fail("problem_digest", "problem digest mismatch");
    }

    let env0 = match env_from_hyp(&p.hyp) {
        Ok(e) => e,
        Err(e) => return fail("hyp", e.to_string()),
    };

    let goal0 = normalize(&p.goal);
    if c.goal != goal0.to_string() {
        return fail("goal", "goal does not match the problem");
    }

    let rewritten = replay_rewrites(p, c, &env0, goal0)?;
    if c.rewritten_goal != rewritten.to_string() {
        return fail("rewritten_goal", "rewrite replay ends at a different term");
    }

    check_cases(p, c, &env0, &rewritten)
}

fn replay_rewrites(p: &Problem, c: &Certificate, env0: &HypEnv, goal0: Term) -> Check<Term> {
    let mut cur = goal0;
    let mut last_phase = 0usize;
    for (i, step) in c.rewrite_steps.iter().enumerate() {
        let loc = format!("rewrite_steps[{i}]");
        if step.phase >= p.phases.len() {
            return fail(&loc, format!("phase {} out of range", step.phase));
        }
        if step.phase < last_phase {
            return fail(&loc, "steps out of phase order");
        }
        last_phase = step.phase;
        let active = match ActiveSet::for_phase(&p.db, &p.phases[step.phase]) {
            Ok(a) => a,
            Err(e) => return fail(&loc, e.to_string()),
        };

        if term_digest(&cur) != step.before_digest {
            return fail(&loc, "before-digest does not match the current term");
        }
        let Some(subterm) = cur.at_path(&step.path) else {
            return fail(&loc, "path does not address a subterm");
        };

        let replacement = match step.action.as_str() {
            "expand" => {
                let Term::Call(f, args) = subterm else {
                    return fail(&loc, "expand step at a non-call position");
                };
                if *f != step.name {
                    return fail(&loc, format!("expand names `{}` but call is `{f}`", step.name));
                }
                let enabled = active.defs.contains_key(f.as_str())
                    || active.expands.iter().any(|(pat, _)| pat == subterm);
                if !enabled {
                    return fail(
                        &loc,
                        format!("definition `{f}` is neither enabled nor expanded in phase {}", step.phase),
                    );
                }
                let Some(def) = p.db.def(f) else {
                    return fail(&loc, format!("no definition named `{f}`"));
                };
                if def.params.len() != args.len() {
                    return fail(&loc, "arity mismatch in expansion");
                }
                let subst = def
                    .params
                    .iter()
                    .cloned()
                    .zip(args.iter().cloned())
                    .collect();
                substitute(&def.body, &subst)
            }
            "rule" if step.name == DISTRIBUTIVITY => {
                if !active.distributivity {
                    return fail(&loc, format!("`{DISTRIBUTIVITY}` is disabled in phase {}", step.phase));
                }
                match distribute_once(subterm) {
                    Some(t) => t,
                    None => return fail(&loc, "distributivity does not apply here"),
                }
            }
            "rule" => {
                let Some(rule) = active.rules.iter().find(|r| r.name == step.name) else {
                    return fail(
                        &loc,
                        format!("rule `{}` is unknown or disabled in phase {}", step.name, step.phase),
                    );
                };
                let free = rule.lhs.vars();
                let Some(subst) = match_term(&rule.lhs, subterm, &free) else {
                    return fail(&loc, format!("rule `{}` does not match at the path", step.name));
                };
                if step.hyp_proofs.len() != rule.hyps.len() {
                    return fail(&loc, "wrong number of hypothesis proofs");
                }
                for (k, (hyp, proof)) in rule.hyps.iter().zip(&step.hyp_proofs).enumerate() {
                    let atom = substitute(hyp, &subst);
                    check_hyp_proof(p, &atom, proof, env0, &format!("{loc}.hyp_proofs[{k}]"))?;
                }
                substitute(&rule.rhs, &subst)
            }
            other => return fail(&loc, format!("unknown action `{other}`")),
        };

        let next = match cur.replace_at_path(&step.path, replacement) {
            Some(t) => normalize(&t),
            None => return fail(&loc, "replacement path invalid"),
        };
        if term_digest(&next) != step.after_digest {
            return fail(&loc, "after-digest does not match the rewritten term");
        }
        cur = next;
    }
    Ok(cur)
}

fn check_cases(p: &Problem, c: &Certificate, env0: &HypEnv, goal: &Term) -> Check<()> {
    if c.case_tree.is_empty() {
        if c.cases.len() != 1 || !c.cases[0].segments.is_empty() {
            return fail("cases", "expected exactly one unsplit case");
        }
        let leaf = &c.cases[0];
        let claim = interval_from_dto(&leaf.claim, "cases[0].claim")?;
        let derived = check_trace(p, goal, &leaf.trace, env0, "cases[0].trace")?;
        if !derived.is_subset(&claim) {
            return fail("cases[0].claim", "claim is tighter than its trace supports");
        }
        let root = interval_from_dto(&c.claim, "claim")?;
        if !claim.is_subset(&root) {
            return fail("claim", "root claim is tighter than the case result");
        }
        return Ok(());
    }

    // coverage: each variable's segments must blanket its hypothesis range
    let mut tree: Vec<(String, Vec<Interval>)> = Vec::new();
    for (vi, var_dto) in c.case_tree.iter().enumerate() {
        let loc = format!("case_tree[{vi}]");
        let Some(info) = env0.var(&var_dto.variable) else {
            return fail(&loc, format!("unknown case variable `{}`", var_dto.variable));
        };
        let (Some(range_lo), Some(range_hi)) = (info.range.lo(), info.range.hi()) else {
            return fail(&loc, format!("case variable `{}` is unbounded", var_dto.variable));
        };
        let mut segs = Vec::new();
        for (si, dto) in var_dto.segments.iter().enumerate() {
            let sloc = format!("{loc}.segments[{si}]");
            let iv = interval_from_dto(dto, &sloc)?;
            let (Some(lo), Some(hi)) = (iv.lo(), iv.hi()) else {
                return fail(&sloc, "segment endpoints must both be present");
            };
            if si == 0 && lo > range_lo {
                return fail(&sloc, "segments start above the range's lower end");
            }
            if si > 0 {
                let prev: &Interval = &segs[si - 1];
                if lo > prev.hi().unwrap() {
                    return fail(&sloc, "gap between consecutive segments");
                }
            }
            let _ = hi;
            segs.push(iv);
        }
        match segs.last() {
            Some(last) if last.hi().unwrap() >= range_hi => {}
            _ => {
                return fail(
                    &loc,
                    "segments do not reach the range's upper end",
                )
            }
        }
        tree.push((var_dto.variable.clone(), segs));
    }

    // leaves must be exactly the cartesian product of the tree, in order,
    // minus combinations with no inhabitants
    let mut leaf_iter = c.cases.iter().enumerate();
    let mut union: Option<Interval> = None;
    let mut indices = vec![0usize; tree.len()];
    'combos: loop {
        let combo: Vec<(String, Interval)> = tree
            .iter()
            .zip(&indices)
            .map(|((v, segs), &i)| (v.clone(), segs[i].clone()))
            .collect();
        match env0.with_case_ranges(&combo) {
            Ok(env_k) => {
                let Some((li, leaf)) = leaf_iter.next() else {
                    return fail("cases", "missing case leaves for the case tree");
                };
                let loc = format!("cases[{li}]");
                if leaf.segments.len() != combo.len() {
                    return fail(&loc, "wrong number of case segments");
                }
                for (seg_dto, (v, iv)) in leaf.segments.iter().zip(&combo) {
                    let lo = parse_rat_at(&seg_dto.lo, &loc)?;
                    let hi = parse_rat_at(&seg_dto.hi, &loc)?;
                    if seg_dto.variable != *v
                        || Some(&lo) != iv.lo()
                        || Some(&hi) != iv.hi()
                    {
                        return fail(&loc, "case leaf does not match the case tree product");
                    }
                }
                let claim = interval_from_dto(&leaf.claim, &format!("{loc}.claim"))?;
                let derived = check_trace(p, goal, &leaf.trace, &env_k, &format!("{loc}.trace"))?;
                if !derived.is_subset(&claim) {
                    return fail(
                        &format!("{loc}.claim"),
                        "claim is tighter than its trace supports",
                    );
                }
                union = Some(match union {
                    None => claim,
                    Some(u) => u.union(&claim),
                });
            }
            Err(_) => {} // uninhabited combination (integer tightening)
        }
        for slot in (0..indices.len()).rev() {
            indices[slot] += 1;
            if indices[slot] < tree[slot].1.len() {
                continue 'combos;
            }
            indices[slot] = 0;
            if slot == 0 {
                break 'combos;
            }
        }
    }
    if let Some((li, _)) = leaf_iter.next() {
        return fail(&format!("cases[{li}]"), "more leaves than the case tree produces");
    }

    let root = interval_from_dto(&c.claim, "claim")?;
    let union = union.unwrap_or_else(Interval::unbounded);
    if !union.is_subset(&root) {
        return fail("claim", "root claim is tighter than the union of case claims");
    }
    Ok(())
}

/// Validate one trace node: children first, then each claimed endpoint
/// against its justification. Returns the node's (validated) claim.
fn check_trace(
    p: &Problem,
    expected: &Term,
    dto: &TraceDto,
    env: &HypEnv,
    loc: &str,
) -> Check<Interval> {
    let stated = parse_term_at(&dto.term, loc)?;
    if stated != *expected {
        return fail(loc, format!("trace term `{stated}` is not `{expected}`"));
    }
    let claim = interval_from_dto(&dto.bounds, loc)?;

    let kid_terms = expected.children();
    let kids: Option<Vec<Interval>> = if dto.children.is_empty() {
        None
    } else {
        if dto.children.len() != kid_terms.len() {
            return fail(loc, "trace children do not match the term's arguments");
        }
        let mut ivs = Vec::new();
        for (i, (kt, kd)) in kid_terms.iter().zip(&dto.children).enumerate() {
            ivs.push(check_trace(p, kt, kd, env, &format!("{loc}.children[{i}]"))?);
        }
        Some(ivs)
    };

    if claim.lo().is_some() {
        let Some(j) = &dto.lo_just else {
            return fail(loc, "lower endpoint has no justification");
        };
        let derived = derive_side(p, expected, j, env, kids.as_deref(), Side::Lo, loc)?;
        match derived {
            Some(d) if claim.lo().unwrap() <= &d => {}
            Some(d) => {
                return fail(
                    loc,
                    format!("claimed lower bound {} is tighter than derived {}", claim.lo().unwrap(), d),
                )
            }
            None => return fail(loc, "justification derives no lower bound"),
        }
    }
    if claim.hi().is_some() {
        let Some(j) = &dto.hi_just else {
            return fail(loc, "upper endpoint has no justification");
        };
        let derived = derive_side(p, expected, j, env, kids.as_deref(), Side::Hi, loc)?;
        match derived {
            Some(d) if &d <= claim.hi().unwrap() => {}
            Some(d) => {
                return fail(
                    loc,
                    format!("claimed upper bound {} is tighter than derived {}", claim.hi().unwrap(), d),
                )
            }
            None => return fail(loc, "justification derives no upper bound"),
        }
    }
    Ok(claim)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Lo,
    Hi,
}

fn side_of(iv: &Interval, side: Side) -> Option<Rational> {
    match side {
        Side::Lo => iv.lo().cloned(),
        Side::Hi => iv.hi().cloned(),
    }
}

// Checker-local structural recomputation (kept independent of the bounder):
// fold the children's validated claims through this node's operator, with
// adjacent equal factors of a product bounded as squares.
fn recompute_structural(term: &Term, kids: &[Interval]) -> Option<Interval> {
    let Term::App(op, args) = term else {
        return None;
    };
    match op {
        Op::Add => kids.iter().cloned().reduce(|a, b| a.add(&b)),
        Op::Recip => kids.first().map(Interval::recip),
        Op::Mul => {
            let mut acc: Option<Interval> = None;
            let mut i = 0;
            while i < args.len() {
                let factor = if i + 1 < args.len() && args[i] == args[i + 1] {
                    let sq = kids[i].square();
                    i += 2;
                    sq
                } else {
                    let f = kids[i].clone();
                    i += 1;
                    f
                };
                acc = Some(match acc {
                    None => factor,
                    Some(a) => a.mul(&factor),
                });
            }
            acc
        }
        Op::Sub | Op::Div => None,
    }
}

fn derive_side(
    p: &Problem,
    term: &Term,
    just: &JustificationDto,
    env: &HypEnv,
    kids: Option<&[Interval]>,
    side: Side,
    loc: &str,
) -> Check<Option<Rational>> {
    match just {
        JustificationDto::Hypothesis { var } => {
            if *term != Term::Var(var.clone()) {
                return fail(loc, "hypothesis justification on a non-variable");
            }
            match env.var(var) {
                Some(info) => Ok(side_of(&info.range, side)),
                None => fail(loc, format!("no hypothesis range for `{var}`")),
            }
        }
        JustificationDto::Constant => match term {
            Term::Const(c) => Ok(Some(c.clone())),
            _ => fail(loc, "constant justification on a non-constant"),
        },
        JustificationDto::Typeset { categories } => {
            let stored = typeset_from_dto(categories, loc)?;
            let actual = typeset_of(term, env);
            if !actual.is_subset(stored) {
                return fail(loc, format!("stored typeset {stored} does not cover {actual}"));
            }
            Ok(side_of(&typeset_bounds(stored), side))
        }
        JustificationDto::Structural => match kids {
            Some(kids) => match recompute_structural(term, kids) {
                Some(iv) => Ok(side_of(&iv, side)),
                None => fail(loc, "structural justification on a non-operator term"),
            },
            None => fail(loc, "structural justification without child traces"),
        },
        JustificationDto::Suggestion {
            index,
            value,
            proof,
        } => {
            let Some(s) = p.suggestions.get(*index) else {
                return fail(loc, format!("no suggestion with index {index}"));
            };
            let expected_dir = match side {
                Side::Lo => crate::bounder::Direction::Lower,
                Side::Hi => crate::bounder::Direction::Upper,
            };
            if s.direction != expected_dir {
                return fail(loc, "suggestion direction does not justify this side");
            }
            let Some(subst) = match_term(&normalize(&s.pattern), term, &s.free_vars) else {
                return fail(loc, "suggestion pattern does not match the term");
            };
            let v = parse_rat_at(value, loc)?;
            match eval_ground(&substitute(&s.rhs, &subst)) {
                Ok(got) if got == v => {}
                _ => return fail(loc, "suggestion value does not re-evaluate"),
            }
            let atom = match side {
                Side::Hi => Term::Call("<=".into(), vec![term.clone(), Term::Const(v.clone())]),
                Side::Lo => Term::Call("<=".into(), vec![Term::Const(v.clone()), term.clone()]),
            };
            check_hyp_proof(p, &atom, proof, env, loc)?;
            Ok(Some(v))
        }
        JustificationDto::Linear {
            name,
            value,
            proofs,
        } => {
            let Some(rule) = p.linear_rules.iter().find(|r| r.name == *name) else {
                return fail(loc, format!("no linear rule named `{name}`"));
            };
            if !rule.enabled {
                return fail(loc, format!("linear rule `{name}` is disabled"));
            }
            let (pattern, bound_side) = match side {
                Side::Hi => (&rule.lhs, &rule.rhs),
                Side::Lo => (&rule.rhs, &rule.lhs),
            };
            let mut free = rule.lhs.vars();
            free.extend(rule.rhs.vars());
            for h in &rule.hyps {
                free.extend(h.vars());
            }
            let Some(subst) = match_term(&normalize(pattern), term, &free) else {
                return fail(loc, format!("linear rule `{name}` does not match the term"));
            };
            let v = parse_rat_at(value, loc)?;
            match eval_ground(&substitute(bound_side, &subst)) {
                Ok(got) if got == v => {}
                _ => return fail(loc, "linear bound does not re-evaluate"),
            }
            if proofs.len() != rule.hyps.len() {
                return fail(loc, "wrong number of hypothesis proofs");
            }
            for (k, (hyp, proof)) in rule.hyps.iter().zip(proofs).enumerate() {
                let atom = substitute(hyp, &subst);
                check_hyp_proof(p, &atom, proof, env, &format!("{loc}.proofs[{k}]"))?;
            }
            Ok(Some(v))
        }
    }
}

fn check_hyp_proof(
    p: &Problem,
    atom: &Term,
    proof: &HypProofDto,
    env: &HypEnv,
    loc: &str,
) -> Check<()> {
    let atom = canon_cmp(&normalize(atom));
    match proof {
        HypProofDto::EnvConjunct => {
            if env.entails_syntactically(&atom) {
                Ok(())
            } else {
                fail(loc, format!("`{atom}` is not among the hypothesis conjuncts"))
            }
        }
        HypProofDto::Ground => match eval_ground_atom(&atom) {
            Some(true) => Ok(()),
            _ => fail(loc, format!("`{atom}` does not evaluate to true")),
        },
        HypProofDto::Recognizer { categories } => {
            let stored = typeset_from_dto(categories, loc)?;
            let Term::Call(op, args) = &atom else {
                return fail(loc, "recognizer proof on a non-recognizer atom");
            };
            if args.len() != 1 {
                return fail(loc, "recognizer arity");
            }
            let actual = typeset_of(&args[0], env);
            if !actual.is_subset(stored) {
                return fail(loc, format!("stored typeset {stored} does not cover {actual}"));
            }
            match op.as_str() {
                "rationalp" => Ok(()),
                "integerp" => {
                    let ints = Typeset::of(&[
                        Category::NegInt,
                        Category::Zero,
                        Category::One,
                        Category::IntAboveOne,
                    ]);
                    if stored.is_subset(ints) {
                        Ok(())
                    } else {
                        fail(loc, "typeset does not establish integerp")
                    }
                }
                other => fail(loc, format!("recognizer proof on `{other}`")),
            }
        }
        HypProofDto::ByBounds { lhs, rhs } => {
            let Term::Call(op, args) = &atom else {
                return fail(loc, "bound proof on a non-inequality");
            };
            if op != "<=" || args.len() != 2 {
                return fail(loc, "bound proof on a non-inequality");
            }
            let lhs_iv = check_trace(p, &args[0], lhs, env, &format!("{loc}.lhs"))?;
            let rhs_iv = check_trace(p, &args[1], rhs, env, &format!("{loc}.rhs"))?;
            match (lhs_iv.hi(), rhs_iv.lo()) {
                (Some(h), Some(l)) if h <= l => Ok(()),
                _ => fail(loc, format!("bounds do not establish `{atom}`")),
            }
        }
    }
}
