//! Case splitting over variable subranges and the top-level solve pipeline:
//! rewrite the goal once, split the hypothesis box into segments, bound each
//! case independently, and union the results.
//!
//! Segments are closed and share endpoints (weak bounds make the overlap
//! harmless). The generated split must cover the variable's hypothesis
//! range; segments are intersected with it and never widen it.

use crate::bounder::{bound_term, BoundTrace, BounderCfg, LinearRule, Suggestion};
use crate::env::{env_from_hyp, EnvError, HypEnv};
use crate::interval::Interval;
use crate::rational::{ceil, format_rational, Rational};
use crate::rewrite::{run_phases, Phase, PhaseLog, RewriteError, RuleDb, DEFAULT_REWRITE_BUDGET};
use crate::term::Term;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

/// `(:ranges-from-to-by variable from to by)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseSpec {
    pub variable: String,
    pub from: Rational,
    pub to: Rational,
    pub by: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemConfig {
    pub backchain_depth: u32,
    pub max_rewrite_steps: u64,
    pub case_cap: usize,
    pub memo: bool,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            backchain_depth: 3,
            max_rewrite_steps: DEFAULT_REWRITE_BUDGET,
            case_cap: 4096,
            memo: true,
        }
    }
}

/// One bound-finding query with the databases in scope for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub goal: Term,
    pub hyp: Term,
    pub phases: Vec<Phase>,
    pub cases: Vec<CaseSpec>,
    pub suggestions: Vec<Suggestion>,
    pub linear_rules: Vec<LinearRule>,
    pub db: RuleDb,
    pub config: ProblemConfig,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseResult {
    /// Per-variable segment for this case; empty when no split was asked.
    pub segments: Vec<(String, Interval)>,
    pub bounds: Interval,
    pub trace: BoundTrace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsResult {
    pub bounds: Interval,
    pub per_case: Vec<CaseResult>,
    pub rewritten_goal: Term,
    pub phase_logs: Vec<PhaseLog>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("bad case spec for `{variable}`: {reason}")]
    BadCaseSpec { variable: String, reason: String },
    #[error("case variable `{0}` is not declared and bounded in the hypothesis")]
    CaseVarUnbounded(String),
    #[error("case variable `{0}` appears in more than one `:ranges-from-to-by`")]
    DuplicateCaseVar(String),
    #[error("cases for `{variable}` span [{from}, {to}] but must cover its hypothesis range {range}")]
    CasesDoNotCover {
        variable: String,
        from: String,
        to: String,
        range: String,
    },
    #[error("case split produces {cases} cases, above the cap of {cap}")]
    CaseCapExceeded { cases: usize, cap: usize },
}

/// Consecutive closed segments of width `by` from `from` to `to`, the last
/// clipped to end exactly at `to`.
pub fn gen_cases(spec: &CaseSpec) -> Vec<(Rational, Rational)> {
    let mut out = Vec::new();
    let mut lo = spec.from.clone();
    while lo < spec.to {
        let hi = (&lo + &spec.by).min(spec.to.clone());
        out.push((lo, hi.clone()));
        lo = hi;
    }
    out
}

fn check_case_spec(spec: &CaseSpec) -> Result<(), SolveError> {
    let bad = |reason: &str| SolveError::BadCaseSpec {
        variable: spec.variable.clone(),
        reason: reason.to_string(),
    };
    if !spec.by.is_positive() {
        return Err(bad("step must be positive"));
    }
    if spec.from >= spec.to {
        return Err(bad("`from` must be below `to`"));
    }
    Ok(())
}

fn segment_count(spec: &CaseSpec) -> usize {
    let span = &spec.to - &spec.from;
    ceil(&(span / &spec.by))
        .to_integer()
        .to_usize()
        .unwrap_or(usize::MAX)
}

/// Run the full pipeline for one problem.
pub fn solve(p: &Problem) -> Result<BoundsResult, SolveError> {
    let env0 = env_from_hyp(&p.hyp)?;
    let bcfg = BounderCfg {
        suggestions: p.suggestions.clone(),
        linear_rules: p.linear_rules.clone(),
        depth: p.config.backchain_depth,
        memo: p.config.memo,
    };
    let (goal, phase_logs) = run_phases(
        &p.goal,
        &p.phases,
        &p.db,
        &env0,
        &bcfg,
        p.config.max_rewrite_steps,
    )?;

    if p.cases.is_empty() {
        let (bounds, trace) = bound_term(&goal, &env0, &bcfg);
        return Ok(BoundsResult {
            bounds: bounds.clone(),
            per_case: vec![CaseResult {
                segments: Vec::new(),
                bounds,
                trace,
            }],
            rewritten_goal: goal,
            phase_logs,
        });
    }

    // one clipped, nonempty segment list per case variable
    let mut per_var: Vec<(String, Vec<Interval>)> = Vec::new();
    let mut total: usize = 1;
    for spec in &p.cases {
        check_case_spec(spec)?;
        if per_var.iter().any(|(v, _)| *v == spec.variable) {
            return Err(SolveError::DuplicateCaseVar(spec.variable.clone()));
        }
        let info = env0
            .var(&spec.variable)
            .ok_or_else(|| SolveError::CaseVarUnbounded(spec.variable.clone()))?;
        let (Some(range_lo), Some(range_hi)) = (info.range.lo(), info.range.hi()) else {
            return Err(SolveError::CaseVarUnbounded(spec.variable.clone()));
        };
        if &spec.from > range_lo || range_hi > &spec.to {
            return Err(SolveError::CasesDoNotCover {
                variable: spec.variable.clone(),
                from: format_rational(&spec.from),
                to: format_rational(&spec.to),
                range: info.range.to_string(),
            });
        }
        total = total.saturating_mul(segment_count(spec));
        if total > p.config.case_cap {
            return Err(SolveError::CaseCapExceeded {
                cases: total,
                cap: p.config.case_cap,
            });
        }
        let segments: Vec<Interval> = gen_cases(spec)
            .into_iter()
            .filter_map(|(lo, hi)| Interval::closed(lo, hi).intersect(&info.range))
            .collect();
        per_var.push((spec.variable.clone(), segments));
    }

    // cartesian product, rightmost spec varying fastest
    let mut per_case = Vec::new();
    let mut bounds: Option<Interval> = None;
    let mut indices = vec![0usize; per_var.len()];
    'cases: loop {
        let assignment: Vec<(String, Interval)> = per_var
            .iter()
            .zip(&indices)
            .map(|((v, segs), &i)| (v.clone(), segs[i].clone()))
            .collect();
        match env0.with_case_ranges(&assignment) {
            Ok(env_k) => {
                let (iv_k, trace_k) = bound_term(&goal, &env_k, &bcfg);
                bounds = Some(match bounds {
                    None => iv_k.clone(),
                    Some(acc) => acc.union(&iv_k),
                });
                per_case.push(CaseResult {
                    segments: assignment,
                    bounds: iv_k,
                    trace: trace_k,
                });
            }
            // an integer-declared variable can leave a fractional segment
            // with no inhabitants; such a case contributes nothing
            Err(EnvError::CaseOutsideRange(_)) => {}
            Err(e) => return Err(e.into()),
        }
        for slot in (0..indices.len()).rev() {
            indices[slot] += 1;
            if indices[slot] < per_var[slot].1.len() {
                continue 'cases;
            }
            indices[slot] = 0;
            if slot == 0 {
                break 'cases;
            }
        }
    }

    let bounds = bounds.unwrap_or_else(Interval::unbounded);
    Ok(BoundsResult {
        bounds,
        per_case,
        rewritten_goal: goal,
        phase_logs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};
    use crate::rewrite::{FnDef, RewriteRule, DISTRIBUTIVITY};
    use crate::term::{normalize, parse_term};

    fn t(src: &str) -> Term {
        normalize(&parse_term(src).unwrap())
    }

    fn spec(var: &str, from: i64, to: i64, by: Rational) -> CaseSpec {
        CaseSpec {
            variable: var.into(),
            from: rat(from),
            to: rat(to),
            by,
        }
    }

    #[test]
    fn two_unit_segments() {
        let segs = gen_cases(&spec("x", 2, 4, rat(1)));
        assert_eq!(segs, vec![(rat(2), rat(3)), (rat(3), rat(4))]);
    }

    #[test]
    fn a_128_way_split() {
        let segs = gen_cases(&spec("x", 2, 4, ratio(1, 64)));
        assert_eq!(segs.len(), 128);
        assert_eq!(segs[0], (rat(2), ratio(129, 64)));
        assert_eq!(segs[127], (ratio(255, 64), rat(4)));
    }

    #[test]
    fn last_segment_clips_to_the_range_end() {
        let segs = gen_cases(&spec("x", 0, 1, ratio(2, 3)));
        assert_eq!(segs, vec![(rat(0), ratio(2, 3)), (ratio(2, 3), rat(1))]);
    }

    #[test]
    fn segments_cover_exactly() {
        for by in [rat(1), ratio(1, 64), ratio(2, 3), ratio(5, 7)] {
            let s = spec("x", 2, 4, by);
            let segs = gen_cases(&s);
            assert_eq!(segs.first().unwrap().0, s.from);
            assert_eq!(segs.last().unwrap().1, s.to);
            for w in segs.windows(2) {
                assert_eq!(w[0].1, w[1].0, "adjacent segments share an endpoint");
            }
        }
    }

    fn foo_problem(factored: bool, cases: Vec<CaseSpec>) -> Problem {
        let phases = if factored {
            vec![
                Phase {
                    enables: ["foo".to_string()].into(),
                    ..Default::default()
                },
                Phase {
                    enables: ["my-factor".to_string()].into(),
                    disables: [DISTRIBUTIVITY.to_string()].into(),
                    ..Default::default()
                },
            ]
        } else {
            vec![Phase {
                enables: ["foo".to_string()].into(),
                ..Default::default()
            }]
        };
        Problem {
            name: if factored { "foo-better-bounds" } else { "foo-bounds" }.into(),
            goal: t("(foo x)"),
            hyp: t("(and (rationalp x) (<= 2 x) (<= x 4))"),
            phases,
            cases,
            suggestions: vec![],
            linear_rules: vec![],
            db: RuleDb {
                rules: vec![RewriteRule {
                    name: "my-factor".into(),
                    lhs: t("(+ (- (* 3 x)) (* x x))"),
                    rhs: t("(* x (- x 3))"),
                    hyps: vec![],
                    default_enabled: false,
                }],
                defs: vec![FnDef {
                    name: "foo".into(),
                    params: vec!["x".into()],
                    body: t("(- (* x x) (* 3 x))"),
                    default_enabled: false,
                }],
            },
            config: ProblemConfig::default(),
        }
    }

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::closed(rat(lo), rat(hi))
    }

    #[test]
    fn solves_distributed_form() {
        let r = solve(&foo_problem(false, vec![])).unwrap();
        assert_eq!(r.bounds, iv(-8, 10));
        assert_eq!(r.rewritten_goal, t("(- (* x x) (* 3 x))"));
        assert_eq!(r.per_case.len(), 1);
    }

    #[test]
    fn solves_factored_form() {
        let r = solve(&foo_problem(true, vec![])).unwrap();
        assert_eq!(r.bounds, iv(-4, 4));
        assert_eq!(r.rewritten_goal, t("(* x (- x 3))"));
    }

    #[test]
    fn two_segment_split_distributed() {
        let r = solve(&foo_problem(false, vec![spec("x", 2, 4, rat(1))])).unwrap();
        assert_eq!(r.per_case.len(), 2);
        assert_eq!(r.per_case[0].bounds, iv(-5, 3));
        assert_eq!(r.per_case[1].bounds, iv(-3, 7));
        assert_eq!(r.bounds, iv(-5, 7));
    }

    #[test]
    fn two_segment_split_factored() {
        let r = solve(&foo_problem(true, vec![spec("x", 2, 4, rat(1))])).unwrap();
        assert_eq!(r.per_case[0].bounds, iv(-3, 0));
        assert_eq!(r.per_case[1].bounds, iv(0, 4));
        assert_eq!(r.bounds, iv(-3, 4));
    }

    #[test]
    fn fine_split_distributed() {
        let r = solve(&foo_problem(false, vec![spec("x", 2, 4, ratio(1, 64))])).unwrap();
        assert_eq!(r.per_case.len(), 128);
        assert_eq!(
            r.bounds,
            Interval::closed(ratio(-131, 64), ratio(259, 64))
        );
    }

    #[test]
    fn fine_split_factored() {
        let r = solve(&foo_problem(true, vec![spec("x", 2, 4, ratio(1, 64))])).unwrap();
        assert_eq!(r.bounds, Interval::closed(ratio(-129, 64), rat(4)));
    }

    #[test]
    fn union_covers_every_case() {
        let r = solve(&foo_problem(false, vec![spec("x", 2, 4, ratio(2, 3))])).unwrap();
        for c in &r.per_case {
            assert!(c.bounds.is_subset(&r.bounds));
        }
    }

    #[test]
    fn halving_the_step_never_widens() {
        for factored in [false, true] {
            let coarse = solve(&foo_problem(factored, vec![spec("x", 2, 4, ratio(1, 2))]))
                .unwrap()
                .bounds;
            let fine = solve(&foo_problem(factored, vec![spec("x", 2, 4, ratio(1, 4))]))
                .unwrap()
                .bounds;
            assert!(fine.is_subset(&coarse));
        }
    }

    #[test]
    fn case_validation_errors() {
        let err = solve(&foo_problem(false, vec![spec("x", 2, 3, rat(1))])).unwrap_err();
        assert!(matches!(err, SolveError::CasesDoNotCover { .. }));

        let err = solve(&foo_problem(false, vec![spec("y", 2, 4, rat(1))])).unwrap_err();
        assert!(matches!(err, SolveError::CaseVarUnbounded(_)));

        let mut p = foo_problem(false, vec![spec("x", 2, 4, ratio(1, 64))]);
        p.config.case_cap = 100;
        assert!(matches!(
            solve(&p).unwrap_err(),
            SolveError::CaseCapExceeded { cases: 128, cap: 100 }
        ));

        let p = foo_problem(
            false,
            vec![spec("x", 2, 4, rat(1)), spec("x", 2, 4, ratio(1, 2))],
        );
        assert!(matches!(
            solve(&p).unwrap_err(),
            SolveError::DuplicateCaseVar(_)
        ));

        let p = foo_problem(false, vec![spec("x", 2, 4, rat(-1))]);
        assert!(matches!(solve(&p).unwrap_err(), SolveError::BadCaseSpec { .. }));
        let p = foo_problem(false, vec![spec("x", 4, 2, rat(1))]);
        assert!(matches!(solve(&p).unwrap_err(), SolveError::BadCaseSpec { .. }));
    }

    #[test]
    fn segments_beyond_the_range_clip() {
        // hyp range [2, 4] inside a [0, 6] split: outer segments clip away,
        // boundary ones degenerate to shared endpoints
        let r = solve(&foo_problem(false, vec![spec("x", 0, 6, rat(1))])).unwrap();
        assert_eq!(r.per_case.len(), 4);
        assert_eq!(r.per_case[0].segments[0].1, Interval::point(rat(2)));
        assert_eq!(r.bounds, iv(-5, 7));
    }

    #[test]
    fn cartesian_product_over_two_variables() {
        let mut p = foo_problem(false, vec![]);
        p.goal = t("(+ (* x y) y)");
        p.hyp = t("(and (rationalp x) (<= 2 x) (<= x 4) (rationalp y) (<= 0 y) (<= y 2))");
        p.phases = vec![];
        p.cases = vec![spec("x", 2, 4, rat(1)), spec("y", 0, 2, rat(1))];
        let r = solve(&p).unwrap();
        assert_eq!(r.per_case.len(), 4);
        // rightmost spec varies fastest
        assert_eq!(r.per_case[0].segments[0].1, iv(2, 3));
        assert_eq!(r.per_case[0].segments[1].1, iv(0, 1));
        assert_eq!(r.per_case[1].segments[0].1, iv(2, 3));
        assert_eq!(r.per_case[1].segments[1].1, iv(1, 2));
        // exact union: x*y + y = y(x+1) over [2,4]x[0,2]: [0, 10]
        assert_eq!(r.bounds, iv(0, 10));
    }
}
