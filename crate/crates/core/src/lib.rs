//! Bound-finding engine for arithmetic terms.
//!
//! Given an s-expression arithmetic term and a hypothesis constraining its
//! variables, the engine computes proven (possibly one-sided) upper and
//! lower bounds. The pipeline is: phased rewriting of the goal, optional
//! case splitting over variable subranges, interval abstract interpretation
//! of each case drawing on four bound sources (user suggestions, typeset
//! reasoning, linear rules, structural operator recursion), and a union of
//! the per-case results. Every run can emit a self-contained derivation
//! certificate that a separate, search-free checker replays.

pub mod bounder;
pub mod cases;
pub mod cert;
pub mod dsl;
pub mod env;
pub mod interval;
pub mod rational;
pub mod rewrite;
pub mod sexp;
pub mod term;
pub mod typeset;

pub use bounder::{
    bound_term, relieve_hyps, BoundTrace, BounderCfg, Direction, HypProof, Justification,
    LinearRule, Suggestion,
};
pub use cases::{
    gen_cases, solve, BoundsResult, CaseResult, CaseSpec, Problem, ProblemConfig, SolveError,
};
pub use cert::{build_cert, check_cert, problem_digest, term_digest, Certificate, Verdict};
pub use dsl::{load_problem_file, load_problems, LoadError};
pub use env::{env_from_hyp, Decl, EnvError, HypEnv, VarInfo};
pub use interval::Interval;
pub use rational::{format_rational, parse_rational, Rational};
pub use rewrite::{
    rewrite_fixpoint, run_phases, FnDef, Phase, PhaseLog, RewriteError, RewriteRule, RuleDb,
    StepAction, StepRecord, DEFAULT_REWRITE_BUDGET, DISTRIBUTIVITY,
};
pub use term::{eval_ground, match_term, normalize, parse_term, substitute, Op, Substitution, Term};
pub use typeset::{typeset_bounds, typeset_of, Category, Typeset};
