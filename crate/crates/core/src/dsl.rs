//! Problem-file loader. A file is a sequence of top-level forms:
//!
//! - `(defund name (params) body)` / `(defun ...)` — function definitions
//!   (`defund` stays closed until a phase enables it);
//! - `(defthmd name (equal lhs rhs))` / `(defthm ...)`, optionally wrapped in
//!   `(implies hyps ...)` — rewrite rules (`defthmd` starts disabled);
//! - `(deflinear name (implies hyps (<= lhs rhs)))` — linear rules;
//! - `(defsuggest name form...)` — a named set of bound suggestions;
//! - `(def-bounds name goal :hyp ... :simp-hints ... :cases ...
//!   :suggestions ... :backchain-depth n :max-rewrite-steps n :case-cap n)`
//!   — a query, bound to the databases defined earlier in the file.
//!
//! Hints admit `(:in-theory (enable ...))`, `(:in-theory (disable ...))`,
//! `(:in-theory (e/d (...) (...)))`, and `(:expand (calls...))`; anything
//! richer is rejected with a diagnostic rather than ignored.

use crate::bounder::{Direction, LinearRule, Suggestion};
use crate::cases::{CaseSpec, Problem, ProblemConfig};
use crate::rational::parse_rational;
use crate::rewrite::{FnDef, Phase, RewriteRule, RuleDb, DISTRIBUTIVITY};
use crate::sexp::{read_all, Pos, Sexp, SexpError};
use crate::term::{normalize, term_from_sexp, Term, TermParseError};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("{0}")]
    Sexp(#[from] SexpError),
    #[error("{0}")]
    Term(#[from] TermParseError),
    #[error("{pos}: {msg}")]
    Form { pos: Pos, msg: String },
    #[error("cannot read `{path}`: {msg}")]
    Io { path: String, msg: String },
}

fn form_err<T>(pos: Pos, msg: impl Into<String>) -> Result<T, LoadError> {
    Err(LoadError::Form {
        pos,
        msg: msg.into(),
    })
}

#[derive(Default)]
struct Loader {
    db: RuleDb,
    linears: Vec<LinearRule>,
    suggest_sets: BTreeMap<String, Vec<Suggestion>>,
    problems: Vec<Problem>,
}

/// Parse and resolve a whole problem file. `base` supplies the config that
/// per-problem keywords may override.
pub fn load_problems(src: &str, base: &ProblemConfig) -> Result<Vec<Problem>, LoadError> {
    let mut loader = Loader::default();
    for form in read_all(src)? {
        loader.form(&form, base)?;
    }
    Ok(loader.problems)
}

pub fn load_problem_file(
    path: impl AsRef<Path>,
    base: &ProblemConfig,
) -> Result<Vec<Problem>, LoadError> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| LoadError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    load_problems(&src, base)
}

fn atom_of(s: &Sexp, what: &str) -> Result<String, LoadError> {
    match s.as_atom() {
        Some(a) => Ok(a.to_string()),
        None => form_err(s.pos(), format!("expected {what}, got a list")),
    }
}

fn term_of(s: &Sexp) -> Result<Term, LoadError> {
    Ok(normalize(&term_from_sexp(s)?))
}

impl Loader {
    fn known(&self, name: &str) -> Option<&'static str> {
        if name == DISTRIBUTIVITY {
            Some("built-in rule")
        } else if self.db.rule(name).is_some() {
            Some("rewrite rule")
        } else if self.db.def(name).is_some() {
            Some("function")
        } else if self.linears.iter().any(|l| l.name == name) {
            Some("linear rule")
        } else if self.suggest_sets.contains_key(name) {
            Some("suggestion set")
        } else if self.problems.iter().any(|p| p.name == name) {
            Some("problem")
        } else {
            None
        }
    }

    fn fresh_name(&self, s: &Sexp) -> Result<String, LoadError> {
        let name = atom_of(s, "a name")?;
        if name.starts_with(':') {
            return form_err(s.pos(), format!("`{name}` is not a valid name"));
        }
        match self.known(&name) {
            Some(kind) => form_err(s.pos(), format!("`{name}` is already defined as a {kind}")),
            None => Ok(name),
        }
    }

    fn form(&mut self, form: &Sexp, base: &ProblemConfig) -> Result<(), LoadError> {
        let pos = form.pos();
        let Some(items) = form.as_list() else {
            return form_err(pos, "expected a top-level form");
        };
        let Some(head) = items.first().and_then(Sexp::as_atom) else {
            return form_err(pos, "expected a form starting with a symbol");
        };
        match head {
            "defund" | "defun" => self.fn_def(items, pos, head == "defun"),
            "defthmd" | "defthm" => self.rewrite_rule(items, pos, head == "defthm"),
            "deflinear" => self.linear_rule(items, pos),
            "defsuggest" => self.suggest_set(items, pos),
            "def-bounds" => self.def_bounds(items, pos, base),
            other => form_err(pos, format!("unknown top-level form `{other}`")),
        }
    }

    fn fn_def(&mut self, items: &[Sexp], pos: Pos, enabled: bool) -> Result<(), LoadError> {
        let [_, name_s, params_s, body_s] = items else {
            return form_err(pos, "expected (defund name (params...) body)");
        };
        let name = self.fresh_name(name_s)?;
        let Some(param_items) = params_s.as_list() else {
            return form_err(params_s.pos(), "expected a parameter list");
        };
        let mut params = Vec::new();
        for p in param_items {
            let p = atom_of(p, "a parameter name")?;
            if params.contains(&p) {
                return form_err(params_s.pos(), format!("duplicate parameter `{p}`"));
            }
            params.push(p);
        }
        let body = term_of(body_s)?;
        for v in body.vars() {
            if !params.contains(&v) {
                return form_err(
                    body_s.pos(),
                    format!("body variable `{v}` is not a parameter of `{name}`"),
                );
            }
        }
        if calls_fn(&body, &name) {
            return form_err(pos, format!("recursive definition of `{name}` is not supported"));
        }
        self.db.defs.push(FnDef {
            name,
            params,
            body,
            default_enabled: enabled,
        });
        Ok(())
    }

    fn rewrite_rule(&mut self, items: &[Sexp], pos: Pos, enabled: bool) -> Result<(), LoadError> {
        let [_, name_s, form_s] = items else {
            return form_err(pos, "expected (defthmd name (equal lhs rhs))");
        };
        let name = self.fresh_name(name_s)?;
        let stated = term_of(form_s)?;
        let (hyps, concl) = split_implies(&stated);
        let Term::Call(eq, args) = &concl else {
            return form_err(form_s.pos(), "conclusion must be (equal lhs rhs)");
        };
        if eq != "equal" || args.len() != 2 {
            return form_err(form_s.pos(), "conclusion must be (equal lhs rhs)");
        }
        let (lhs, rhs) = (args[0].clone(), args[1].clone());
        if matches!(lhs, Term::Var(_)) {
            return form_err(form_s.pos(), "rule left side must not be a bare variable");
        }
        let lhs_vars = lhs.vars();
        for v in rhs.vars() {
            if !lhs_vars.contains(&v) {
                return form_err(
                    form_s.pos(),
                    format!("right side variable `{v}` does not occur on the left"),
                );
            }
        }
        self.db.rules.push(RewriteRule {
            name,
            lhs,
            rhs,
            hyps,
            default_enabled: enabled,
        });
        Ok(())
    }

    fn linear_rule(&mut self, items: &[Sexp], pos: Pos) -> Result<(), LoadError> {
        let [_, name_s, form_s] = items else {
            return form_err(pos, "expected (deflinear name (implies hyps (<= lhs rhs)))");
        };
        let name = self.fresh_name(name_s)?;
        let stated = term_of(form_s)?;
        let (hyps, concl) = split_implies(&stated);
        let Some((lhs, rhs)) = as_weak_le(&concl) else {
            return form_err(form_s.pos(), "conclusion must be a binary inequality");
        };
        self.linears.push(LinearRule {
            name,
            lhs,
            rhs,
            hyps,
            enabled: true,
        });
        Ok(())
    }

    fn suggest_set(&mut self, items: &[Sexp], pos: Pos) -> Result<(), LoadError> {
        let [_, name_s, rest @ ..] = items else {
            return form_err(pos, "expected (defsuggest name form...)");
        };
        let name = self.fresh_name(name_s)?;
        if rest.is_empty() {
            return form_err(pos, "suggestion set is empty");
        }
        let suggestions = rest
            .iter()
            .map(parse_suggestion)
            .collect::<Result<Vec<_>, _>>()?;
        self.suggest_sets.insert(name, suggestions);
        Ok(())
    }

    fn def_bounds(
        &mut self,
        items: &[Sexp],
        pos: Pos,
        base: &ProblemConfig,
    ) -> Result<(), LoadError> {
        let [_, name_s, goal_s, rest @ ..] = items else {
            return form_err(pos, "expected (def-bounds name goal :key value ...)");
        };
        let name = self.fresh_name(name_s)?;
        let goal = term_of(goal_s)?;

        let mut hyp = Term::var("t");
        let mut phases = Vec::new();
        let mut cases = Vec::new();
        let mut suggestions = Vec::new();
        let mut config = base.clone();

        if rest.len() % 2 != 0 {
            return form_err(pos, "keyword arguments must come in pairs");
        }
        for pair in rest.chunks(2) {
            let key = atom_of(&pair[0], "a keyword")?;
            let val = &pair[1];
            match key.as_str() {
                ":hyp" => hyp = term_of(val)?,
                ":simp-hints" => phases = self.parse_hints(val)?,
                ":cases" => cases = parse_cases(val)?,
                ":suggestions" => suggestions = self.parse_suggestion_args(val)?,
                ":backchain-depth" => config.backchain_depth = parse_nat(val)? as u32,
                ":max-rewrite-steps" => config.max_rewrite_steps = parse_nat(val)?,
                ":case-cap" => config.case_cap = parse_nat(val)? as usize,
                other => {
                    return form_err(
                        pair[0].pos(),
                        format!("unsupported def-bounds keyword `{other}`"),
                    )
                }
            }
        }

        self.problems.push(Problem {
            name,
            goal,
            hyp,
            phases,
            cases,
            suggestions,
            linear_rules: self.linears.clone(),
            db: self.db.clone(),
            config,
        });
        Ok(())
    }

    // :simp-hints ((:in-theory (enable foo)) (:in-theory (e/d (a) (b)) :expand ((f x))))
    fn parse_hints(&self, val: &Sexp) -> Result<Vec<Phase>, LoadError> {
        let Some(hints) = val.as_list() else {
            return form_err(val.pos(), "`:simp-hints` expects a list of hint objects");
        };
        hints.iter().map(|h| self.parse_hint(h)).collect()
    }

    fn parse_hint(&self, hint: &Sexp) -> Result<Phase, LoadError> {
        let Some(items) = hint.as_list() else {
            return form_err(hint.pos(), "a hint is a (:keyword value ...) list");
        };
        if items.len() % 2 != 0 {
            return form_err(hint.pos(), "hint keywords must come in pairs");
        }
        let mut phase = Phase::default();
        for pair in items.chunks(2) {
            let key = atom_of(&pair[0], "a hint keyword")?;
            match key.as_str() {
                ":in-theory" => self.parse_theory(&pair[1], &mut phase)?,
                ":expand" => {
                    let Some(calls) = pair[1].as_list() else {
                        return form_err(pair[1].pos(), "`:expand` expects a list of calls");
                    };
                    for c in calls {
                        let t = term_of(c)?;
                        match &t {
                            Term::Call(f, _) if self.db.def(f).is_some() => {
                                phase.expands.push(t)
                            }
                            Term::Call(f, _) => {
                                return form_err(
                                    c.pos(),
                                    format!("`:expand` target `{f}` is not a defined function"),
                                )
                            }
                            _ => {
                                return form_err(c.pos(), "`:expand` targets must be calls")
                            }
                        }
                    }
                }
                other => {
                    return form_err(
                        pair[0].pos(),
                        format!("unsupported hint keyword `{other}` (only :in-theory and :expand)"),
                    )
                }
            }
        }
        Ok(phase)
    }

    fn parse_theory(&self, val: &Sexp, phase: &mut Phase) -> Result<(), LoadError> {
        let Some(items) = val.as_list() else {
            return form_err(val.pos(), "`:in-theory` expects (enable ...), (disable ...), or (e/d (...) (...))");
        };
        let head = items
            .first()
            .and_then(Sexp::as_atom)
            .unwrap_or_default();
        let mut add = |names: &[Sexp], enable: bool| -> Result<(), LoadError> {
            for n in names {
                let name = atom_of(n, "a rule or function name")?;
                if self.known(&name).is_none() {
                    return form_err(n.pos(), format!("unknown rule or function `{name}`"));
                }
                if enable {
                    phase.enables.insert(name);
                } else {
                    phase.disables.insert(name);
                }
            }
            Ok(())
        };
        match head {
            "enable" => add(&items[1..], true),
            "disable" => add(&items[1..], false),
            "e/d" => {
                let [_, ons, offs] = items else {
                    return form_err(val.pos(), "e/d expects two name lists");
                };
                let (Some(ons), Some(offs)) = (ons.as_list(), offs.as_list()) else {
                    return form_err(val.pos(), "e/d expects two name lists");
                };
                add(ons, true)?;
                add(offs, false)
            }
            other => form_err(
                val.pos(),
                format!("unsupported theory expression `{other}`"),
            ),
        }
    }

    // :suggestions (set-name (<= x 7) ...)
    fn parse_suggestion_args(&self, val: &Sexp) -> Result<Vec<Suggestion>, LoadError> {
        let Some(items) = val.as_list() else {
            return form_err(val.pos(), "`:suggestions` expects a list");
        };
        let mut out = Vec::new();
        for item in items {
            match item {
                Sexp::Atom(name, pos) => match self.suggest_sets.get(name) {
                    Some(set) => out.extend(set.iter().cloned()),
                    None => {
                        return form_err(*pos, format!("unknown suggestion set `{name}`"))
                    }
                },
                Sexp::List(..) => out.push(parse_suggestion(item)?),
            }
        }
        Ok(out)
    }
}

fn calls_fn(t: &Term, name: &str) -> bool {
    match t {
        Term::Call(f, args) => f == name || args.iter().any(|a| calls_fn(a, name)),
        _ => t.children().iter().any(|a| calls_fn(a, name)),
    }
}

/// Split (implies hyp concl) into flattened hypothesis conjuncts and the
/// conclusion; a bare term has no hypotheses.
fn split_implies(t: &Term) -> (Vec<Term>, Term) {
    if let Term::Call(op, args) = t {
        if op == "implies" && args.len() == 2 {
            let mut hyps = Vec::new();
            flatten_and(&args[0], &mut hyps);
            return (hyps, args[1].clone());
        }
    }
    (Vec::new(), t.clone())
}

fn flatten_and(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::Call(op, args) if op == "and" => {
            for a in args {
                flatten_and(a, out);
            }
        }
        Term::Var(v) if v == "t" => {}
        _ => out.push(t.clone()),
    }
}

/// Read a binary inequality as a weak `lhs <= rhs` pair.
fn as_weak_le(t: &Term) -> Option<(Term, Term)> {
    let Term::Call(op, args) = t else {
        return None;
    };
    if args.len() != 2 {
        return None;
    }
    match op.as_str() {
        "<" | "<=" => Some((args[0].clone(), args[1].clone())),
        ">" | ">=" => Some((args[1].clone(), args[0].clone())),
        _ => None,
    }
}

// (< a 3) | (>= (foo b) 5) | (:free (c) (<= (bar c) 10))
fn parse_suggestion(s: &Sexp) -> Result<Suggestion, LoadError> {
    let pos = s.pos();
    let Some(items) = s.as_list() else {
        return form_err(pos, "a suggestion is an inequality form");
    };
    let (free_vars, ineq_s): (Vec<String>, &Sexp) =
        if items.first().and_then(Sexp::as_atom) == Some(":free") {
            let [_, vars_s, ineq] = items else {
                return form_err(pos, "expected (:free (vars...) inequality)");
            };
            let Some(var_items) = vars_s.as_list() else {
                return form_err(vars_s.pos(), "`:free` expects a variable list");
            };
            let vars = var_items
                .iter()
                .map(|v| atom_of(v, "a variable"))
                .collect::<Result<Vec<_>, _>>()?;
            (vars, ineq)
        } else {
            (Vec::new(), s)
        };

    let Some(ineq_items) = ineq_s.as_list() else {
        return form_err(ineq_s.pos(), "a suggestion is an inequality form");
    };
    let [op_s, lhs_s, rhs_s] = ineq_items else {
        return form_err(ineq_s.pos(), "a suggestion inequality is binary");
    };
    let direction = match op_s.as_atom() {
        Some("<") | Some("<=") => Direction::Upper,
        Some(">") | Some(">=") => Direction::Lower,
        _ => return form_err(op_s.pos(), "suggestion must start with <, <=, >, or >="),
    };
    let pattern = term_of(lhs_s)?;
    let rhs = term_of(rhs_s)?;
    let pattern_vars = pattern.vars();
    for v in rhs.vars() {
        if !pattern_vars.contains(&v) {
            return form_err(
                rhs_s.pos(),
                format!("suggestion bound uses `{v}`, which is not in the pattern"),
            );
        }
    }
    Ok(Suggestion {
        pattern,
        free_vars: free_vars.into_iter().collect(),
        direction,
        rhs,
    })
}

// (:ranges-from-to-by x 2 4 1/64)
fn parse_cases(val: &Sexp) -> Result<Vec<CaseSpec>, LoadError> {
    let Some(items) = val.as_list() else {
        return form_err(val.pos(), "`:cases` expects a list of case forms");
    };
    items
        .iter()
        .map(|c| {
            let pos = c.pos();
            let Some(parts) = c.as_list() else {
                return form_err(pos, "expected (:ranges-from-to-by var from to by)");
            };
            let [kw, var_s, from_s, to_s, by_s] = parts else {
                return form_err(pos, "expected (:ranges-from-to-by var from to by)");
            };
            if kw.as_atom() != Some(":ranges-from-to-by") {
                return form_err(
                    kw.pos(),
                    "only `:ranges-from-to-by` case splits are supported",
                );
            }
            let variable = atom_of(var_s, "a variable")?;
            let parse_r = |s: &Sexp| {
                let a = atom_of(s, "a rational")?;
                parse_rational(&a)
                    .map_err(|e| LoadError::Form {
                        pos: s.pos(),
                        msg: e.to_string(),
                    })
            };
            Ok(CaseSpec {
                variable,
                from: parse_r(from_s)?,
                to: parse_r(to_s)?,
                by: parse_r(by_s)?,
            })
        })
        .collect()
}

fn parse_nat(s: &Sexp) -> Result<u64, LoadError> {
    let a = atom_of(s, "a number")?;
    a.parse::<u64>().map_err(|_| LoadError::Form {
        pos: s.pos(),
        msg: format!("expected a nonnegative integer, got `{a}`"),
    })
}

impl fmt::Debug for Loader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Loader")
            .field("defs", &self.db.defs.len())
            .field("rules", &self.db.rules.len())
            .field("problems", &self.problems.len())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::solve;
    use crate::interval::Interval;
    use crate::rational::{rat, ratio};

    const FOO_FILE: &str = "\
; bounds for a small quadratic
(defund foo (x)
  (- (* x x) (* 3 x)))

(def-bounds foo-bounds
  (foo x)
  :hyp (and (rationalp x)
            (<= 2 x)
            (<= x 4))
  :simp-hints ((:in-theory (enable foo))))
";

    const FOO_BETTER_FILE: &str = "\
(defund foo (x)
  (- (* x x) (* 3 x)))

(defthmd my-factor
  (equal (+ (- (* 3 x)) (* x x))
         (* x (- x 3))))

(def-bounds foo-better-bounds
  (foo x)
  :hyp (and (rationalp x) (<= 2 x) (<= x 4))
  :simp-hints ((:in-theory (enable foo))
               (:in-theory (e/d (my-factor) (distributivity)))))
";

    fn load(src: &str) -> Vec<Problem> {
        load_problems(src, &ProblemConfig::default()).unwrap()
    }

    #[test]
    fn loads_the_basic_file() {
        let ps = load(FOO_FILE);
        assert_eq!(ps.len(), 1);
        let p = &ps[0];
        assert_eq!(p.name, "foo-bounds");
        assert_eq!(p.phases.len(), 1);
        assert!(p.phases[0].enables.contains("foo"));
        assert_eq!(solve(p).unwrap().bounds, Interval::closed(rat(-8), rat(10)));
    }

    #[test]
    fn loads_two_phase_factoring() {
        let ps = load(FOO_BETTER_FILE);
        let p = &ps[0];
        assert_eq!(p.phases.len(), 2);
        assert!(p.phases[1].enables.contains("my-factor"));
        assert!(p.phases[1].disables.contains(DISTRIBUTIVITY));
        assert_eq!(solve(p).unwrap().bounds, Interval::closed(rat(-4), rat(4)));
    }

    #[test]
    fn cases_and_config_keywords() {
        let src = "\
(defund foo (x) (- (* x x) (* 3 x)))
(def-bounds fine
  (foo x)
  :hyp (and (rationalp x) (<= 2 x) (<= x 4))
  :simp-hints ((:in-theory (enable foo)))
  :cases ((:ranges-from-to-by x 2 4 1/64))
  :case-cap 200
  :backchain-depth 2)
";
        let p = &load(src)[0];
        assert_eq!(
            p.cases,
            vec![CaseSpec {
                variable: "x".into(),
                from: rat(2),
                to: rat(4),
                by: ratio(1, 64),
            }]
        );
        assert_eq!(p.config.case_cap, 200);
        assert_eq!(p.config.backchain_depth, 2);
        assert_eq!(
            solve(p).unwrap().bounds,
            Interval::closed(ratio(-131, 64), ratio(259, 64))
        );
    }

    #[test]
    fn suggestion_sets_and_inline_forms() {
        let src = "\
(defsuggest my-suggs
  (< a 3)
  (>= (foo b) 5)
  (:free (c) (<= (bar c) 10)))
(def-bounds q
  (bar x)
  :hyp (and (rationalp x) (<= 2 x) (<= x 4))
  :suggestions (my-suggs (<= x 7)))
";
        let p = &load(src)[0];
        assert_eq!(p.suggestions.len(), 4);
        assert_eq!(p.suggestions[0].direction, Direction::Upper);
        assert_eq!(p.suggestions[1].direction, Direction::Lower);
        assert_eq!(
            p.suggestions[2].free_vars,
            ["c".to_string()].into_iter().collect()
        );
        assert_eq!(p.suggestions[3].pattern, Term::var("x"));
    }

    #[test]
    fn deflinear_and_conditional_rules() {
        let src = "\
(deflinear sq-le-16
  (implies (and (<= y 4) (<= 0 y))
           (<= (* y y) 16)))
(defthmd clamp-away
  (implies (<= y 4)
           (equal (clamp y) y)))
(def-bounds q (clamp x)
  :hyp (and (rationalp x) (<= 2 x) (<= x 4))
  :simp-hints ((:in-theory (enable clamp-away))))
";
        let p = &load(src)[0];
        assert_eq!(p.linear_rules.len(), 1);
        assert_eq!(p.linear_rules[0].hyps.len(), 2);
        assert_eq!(p.db.rules[0].hyps.len(), 1);
        assert_eq!(solve(p).unwrap().bounds, Interval::closed(rat(2), rat(4)));
    }

    #[test]
    fn load_errors_carry_positions() {
        let e = load_problems("(defund f (x) (* x y))", &ProblemConfig::default()).unwrap_err();
        assert!(e.to_string().contains("not a parameter"));

        let e = load_problems(
            "(def-bounds q x :simp-hints ((:in-theory (enable nope))))",
            &ProblemConfig::default(),
        )
        .unwrap_err();
        assert!(e.to_string().contains("unknown rule or function `nope`"), "{e}");

        let e = load_problems(
            "(defund f (x) x)(defund f (y) y)",
            &ProblemConfig::default(),
        )
        .unwrap_err();
        assert!(e.to_string().contains("already defined"));

        let e = load_problems("(defund f (x)", &ProblemConfig::default()).unwrap_err();
        assert!(matches!(e, LoadError::Sexp(_)));

        let e = load_problems(
            "(def-bounds q x :hints ((:in-theory (enable f))))",
            &ProblemConfig::default(),
        )
        .unwrap_err();
        assert!(e.to_string().contains("unsupported def-bounds keyword"));

        let e = load_problems(
            "(defund f (x) x)(def-bounds q (f x) :simp-hints ((:cases ((< x 3)))))",
            &ProblemConfig::default(),
        )
        .unwrap_err();
        assert!(e.to_string().contains("unsupported hint keyword"));

        let e = load_problems("(defthmd r (equal x 3))", &ProblemConfig::default()).unwrap_err();
        assert!(e.to_string().contains("bare variable"));

        let e = load_problems("(defund f (x) (f x))", &ProblemConfig::default()).unwrap_err();
        assert!(e.to_string().contains("recursive"));
    }

    #[test]
    fn expand_hints_resolve_against_definitions() {
        let src = "\
(defund g (a b) (+ a (* 2 b)))
(def-bounds q (+ (g x y) 1)
  :hyp (and (rationalp x) (<= 0 x) (<= x 1) (rationalp y) (<= 0 y) (<= y 1))
  :simp-hints ((:expand ((g x y)))))
";
        let p = &load(src)[0];
        assert_eq!(p.phases[0].expands.len(), 1);
        assert_eq!(solve(p).unwrap().bounds, Interval::closed(rat(1), rat(4)));

        let bad = "\
(def-bounds q (h x)
  :hyp (rationalp x)
  :simp-hints ((:expand ((h x)))))
";
        let e = load_problems(bad, &ProblemConfig::default()).unwrap_err();
        assert!(e.to_string().contains("not a defined function"));
    }

    #[test]
    fn later_problems_see_earlier_definitions_only() {
        let src = "\
(defund f (x) (* 2 x))
(def-bounds first (f x) :hyp (and (rationalp x) (<= 0 x) (<= x 1))
  :simp-hints ((:in-theory (enable f))))
(defund g (x) (* 3 x))
(def-bounds second (g x) :hyp (and (rationalp x) (<= 0 x) (<= x 1))
  :simp-hints ((:in-theory (enable g))))
";
        let ps = load(src);
        assert_eq!(ps[0].db.defs.len(), 1);
        assert_eq!(ps[1].db.defs.len(), 2);
        assert_eq!(solve(&ps[0]).unwrap().bounds, Interval::closed(rat(0), rat(2)));
        assert_eq!(solve(&ps[1]).unwrap().bounds, Interval::closed(rat(0), rat(3)));
    }
}
