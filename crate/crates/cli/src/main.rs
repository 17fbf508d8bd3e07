//! Command-line driver: solve the def-bounds queries in a problem file,
//! optionally emitting a JSON report, a derivation trace, and certificates;
//! re-check certificates against their problem file.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use defbounds_core::{
    build_cert, check_cert, load_problem_file, solve, BoundTrace, BoundsResult, Certificate,
    Interval, Justification, Problem, ProblemConfig, Verdict,
};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "defbounds",
    version,
    about = "Compute and certify proven bounds for arithmetic terms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every def-bounds query in a problem file
    Solve {
        /// Problem file
        file: PathBuf,
        /// Emit a machine-readable JSON report on stdout
        #[arg(long)]
        json: bool,
        /// Print the rewrite summary and per-case derivation trees
        #[arg(long)]
        explain: bool,
        /// Write derivation certificates (a JSON array) to this path
        #[arg(long, value_name = "OUT")]
        cert: Option<PathBuf>,
        /// Backchaining depth for validating suggestions and linear rules
        #[arg(long, value_name = "N")]
        backchain_depth: Option<u32>,
        /// Rewrite-step budget per simplification phase
        #[arg(long, value_name = "N")]
        max_rewrite_steps: Option<u64>,
        /// Maximum number of cases a split may produce
        #[arg(long, value_name = "N")]
        case_cap: Option<usize>,
    },
    /// Re-verify certificates against their problem file
    Check {
        /// Problem file the certificates were produced from
        file: PathBuf,
        /// Certificate file written by `solve --cert`
        cert: PathBuf,
    },
}

#[derive(Serialize)]
struct BoundsJson {
    lo: Option<String>,
    hi: Option<String>,
}

#[derive(Serialize)]
struct SegmentJson {
    var: String,
    lo: Option<String>,
    hi: Option<String>,
}

#[derive(Serialize)]
struct CaseJson {
    vars: Vec<SegmentJson>,
    bounds: BoundsJson,
}

#[derive(Serialize)]
struct TimingsJson {
    total_ms: u128,
}

#[derive(Serialize)]
struct Report {
    name: String,
    bounds: BoundsJson,
    per_case: Vec<CaseJson>,
    rewritten_goal: String,
    timings: TimingsJson,
}

fn bounds_json(iv: &Interval) -> BoundsJson {
    BoundsJson {
        lo: iv.lo().map(|r| r.to_string()),
        hi: iv.hi().map(|r| r.to_string()),
    }
}

fn report_of(p: &Problem, r: &BoundsResult, total_ms: u128) -> Report {
    Report {
        name: p.name.clone(),
        bounds: bounds_json(&r.bounds),
        per_case: r
            .per_case
            .iter()
            .map(|c| CaseJson {
                vars: c
                    .segments
                    .iter()
                    .map(|(v, seg)| SegmentJson {
                        var: v.clone(),
                        lo: seg.lo().map(|x| x.to_string()),
                        hi: seg.hi().map(|x| x.to_string()),
                    })
                    .collect(),
                bounds: bounds_json(&c.bounds),
            })
            .collect(),
        rewritten_goal: r.rewritten_goal.to_string(),
        timings: TimingsJson { total_ms },
    }
}

fn just_label(j: &Justification) -> String {
    match j {
        Justification::Hypothesis { var } => format!("hypothesis {var}"),
        Justification::Constant => "constant".to_string(),
        Justification::Typeset { ts } => format!("typeset {ts}"),
        Justification::Structural => "structural".to_string(),
        Justification::Suggestion { index, .. } => format!("suggestion #{index}"),
        Justification::Linear { name, .. } => format!("linear {name}"),
    }
}

fn trace_suffix(tr: &BoundTrace) -> String {
    match (&tr.lo_just, &tr.hi_just) {
        (None, None) => String::new(),
        (Some(l), Some(h)) if l == h => format!("  [{}]", just_label(l)),
        (lo, hi) => {
            let mut parts = Vec::new();
            if let Some(l) = lo {
                parts.push(format!("lo: {}", just_label(l)));
            }
            if let Some(h) = hi {
                parts.push(format!("hi: {}", just_label(h)));
            }
            format!("  [{}]", parts.join(", "))
        }
    }
}

fn print_trace(tr: &BoundTrace, indent: usize) {
    println!("{:indent$}{} in {}{}", "", tr.term, tr.result, trace_suffix(tr));
    for c in &tr.children {
        print_trace(c, indent + 2);
    }
}

fn print_explain(r: &BoundsResult) {
    println!("  rewritten goal: {}", r.rewritten_goal);
    for (i, log) in r.phase_logs.iter().enumerate() {
        for s in &log.steps {
            let name = match &s.action {
                defbounds_core::StepAction::ExpandDef { name } => format!("expand {name}"),
                defbounds_core::StepAction::Rule { name } => format!("rule {name}"),
            };
            println!("  phase {}: {} => {}", i + 1, name, s.after);
        }
        if log.budget_exhausted {
            println!("  phase {}: rewrite budget exhausted", i + 1);
        }
    }
    for (i, c) in r.per_case.iter().enumerate() {
        if c.segments.is_empty() {
            println!("  case {}: full range -> {}", i + 1, c.bounds);
        } else {
            let segs: Vec<String> = c
                .segments
                .iter()
                .map(|(v, seg)| format!("{v} in {seg}"))
                .collect();
            println!("  case {}: {} -> {}", i + 1, segs.join(", "), c.bounds);
        }
        print_trace(&c.trace, 4);
    }
}

fn cmd_solve(
    file: &Path,
    json: bool,
    explain: bool,
    cert_out: Option<&Path>,
    base: ProblemConfig,
) -> Result<()> {
    let problems = load_problem_file(file, &base)
        .with_context(|| format!("loading {}", file.display()))?;
    if problems.is_empty() {
        bail!("{} contains no def-bounds forms", file.display());
    }

    let mut reports = Vec::new();
    let mut certs = Vec::new();
    for p in &problems {
        let start = Instant::now();
        let r = solve(p).with_context(|| format!("solving `{}`", p.name))?;
        let total_ms = start.elapsed().as_millis();
        if json {
            reports.push(report_of(p, &r, total_ms));
        } else {
            println!("{}: {}", p.name, r.bounds);
            if explain {
                print_explain(&r);
            }
        }
        if cert_out.is_some() {
            certs.push(build_cert(p, &r));
        }
    }

    if json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    }
    if let Some(path) = cert_out {
        let blob = serde_json::to_string_pretty(&certs)?;
        std::fs::write(path, blob)
            .with_context(|| format!("writing certificates to {}", path.display()))?;
    }
    Ok(())
}

fn cmd_check(file: &Path, cert_path: &Path) -> Result<()> {
    let problems = load_problem_file(file, &ProblemConfig::default())
        .with_context(|| format!("loading {}", file.display()))?;
    let text = std::fs::read_to_string(cert_path)
        .with_context(|| format!("reading {}", cert_path.display()))?;
    let certs: Vec<Certificate> = match serde_json::from_str::<Vec<Certificate>>(&text) {
        Ok(cs) => cs,
        Err(_) => vec![Certificate::from_json(&text)
            .with_context(|| format!("parsing {}", cert_path.display()))?],
    };
    if certs.is_empty() {
        bail!("{} contains no certificates", cert_path.display());
    }

    let mut all_ok = true;
    for c in &certs {
        match problems.iter().find(|p| p.name == c.problem) {
            None => {
                println!(
                    "{}: FAIL no problem of that name in {}",
                    c.problem,
                    file.display()
                );
                all_ok = false;
            }
            Some(p) => match check_cert(p, c) {
                Verdict::Ok => println!("{}: ok", c.problem),
                Verdict::Fail { reason, location } => {
                    println!("{}: FAIL {reason} (at {location})", c.problem);
                    all_ok = false;
                }
            },
        }
    }
    if !all_ok {
        std::process::exit(1);
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve {
            file,
            json,
            explain,
            cert,
            backchain_depth,
            max_rewrite_steps,
            case_cap,
        } => {
            let mut base = ProblemConfig::default();
            if let Some(d) = backchain_depth {
                base.backchain_depth = d;
            }
            if let Some(m) = max_rewrite_steps {
                base.max_rewrite_steps = m;
            }
            if let Some(c) = case_cap {
                base.case_cap = c;
            }
            cmd_solve(&file, json, explain, cert.as_deref(), base)
        }
        Command::Check { file, cert } => cmd_check(&file, &cert),
    }
}
