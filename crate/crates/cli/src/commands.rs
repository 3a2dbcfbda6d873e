use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use serde_json::{json, Value};
use shiftreset::bisim::{check_programs, check_relaxed, GameConfig};
use shiftreset::corpus::{self, Corpus, EntryReport, Expectation};
use shiftreset::cps::{self as cpsmod, cps_translate, kh_search};
use shiftreset::ctxequiv::{compare_semantics, falsify_programs, falsify_relaxed, FalsifyBudget};
use shiftreset::semantics::{self, Outcome, SemanticsError};
use shiftreset::Term;
use thiserror::Error;

use crate::output::{emit, Budgets, Record};
use crate::{Opts, Semantics};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Open(String),
    #[error("bad budget: {0}")]
    Budget(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Open(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

type CmdResult = Result<ExitCode, CliError>;

const MAX_FUEL: usize = 10_000_000;
const MAX_CLOSURE_BUDGET: usize = 8;
const MAX_CTX_SIZE: usize = 8;
const MAX_DEPTH: usize = 12;

fn check_budgets(opts: &Opts, game: bool) -> Result<(), CliError> {
    let bad = |m: String| Err(CliError::Budget(m));
    if opts.fuel > MAX_FUEL {
        return bad(format!("--fuel must be at most {MAX_FUEL}"));
    }
    if opts.depth > MAX_DEPTH {
        return bad(format!("--depth must be at most {MAX_DEPTH}"));
    }
    if game {
        if opts.fuel == 0 {
            return bad("--fuel must be positive".into());
        }
        if opts.closure_budget == 0 || opts.closure_budget > MAX_CLOSURE_BUDGET {
            return bad(format!("--closure-budget must be between 1 and {MAX_CLOSURE_BUDGET}"));
        }
        if opts.ctx_size > MAX_CTX_SIZE {
            return bad(format!("--ctx-size must be at most {MAX_CTX_SIZE}"));
        }
    }
    Ok(())
}

fn game_config(opts: &Opts) -> GameConfig {
    GameConfig {
        fuel: opts.fuel,
        closure_budget: opts.closure_budget,
        depth: opts.depth,
        big_step: opts.big_step,
        ..GameConfig::default()
    }
}

fn falsify_budget(opts: &Opts) -> FalsifyBudget {
    FalsifyBudget {
        fuel: opts.fuel,
        ctx_size: opts.ctx_size,
        ..FalsifyBudget::default()
    }
}

fn parse(src: &str) -> Result<Term, CliError> {
    corpus::builtin()
        .parse_term(src)
        .map_err(|e| CliError::Parse(format!("`{src}`: {e}")))
}

fn closed(src: &str) -> Result<Term, CliError> {
    let t = parse(src)?;
    if !t.is_closed() {
        let vars: Vec<String> = t.free_vars().iter().map(|v| v.to_string()).collect();
        return Err(CliError::Open(format!("`{src}` has free variables: {}", vars.join(", "))));
    }
    Ok(t)
}

fn open_error(e: SemanticsError) -> CliError {
    CliError::Open(e.to_string())
}

fn record(opts: &Opts, command: &'static str, input: &[&str], verdict: Value, witness: Option<String>, start: Instant) -> Record {
    Record {
        command,
        input: json!(input),
        verdict,
        witness,
        budgets: Budgets::of(opts),
        millis: start.elapsed().as_millis(),
    }
}

fn outcome_name(o: &Outcome) -> &'static str {
    match o {
        Outcome::Value(_) => "value",
        Outcome::Stuck(_) => "stuck",
        Outcome::Timeout(_) => "timeout",
    }
}

pub fn eval(opts: &Opts, src: &str) -> CmdResult {
    check_budgets(opts, false)?;
    let start = Instant::now();
    let t = closed(src)?;
    let o = semantics::evaluate(&t, opts.fuel).map_err(open_error)?;
    let witness = o.normal_form().map(|n| n.to_string());
    let rec = record(opts, "eval", &[src], json!(outcome_name(&o)), witness, start);
    emit(opts, rec, &o.to_string());
    Ok(ExitCode::SUCCESS)
}

pub fn trace(opts: &Opts, src: &str) -> CmdResult {
    check_budgets(opts, false)?;
    let start = Instant::now();
    let t = closed(src)?;
    let steps = semantics::trace(&t, opts.fuel).map_err(open_error)?;
    let o = semantics::evaluate(&t, opts.fuel).map_err(open_error)?;
    let text: Vec<String> = steps.iter().enumerate().map(|(i, s)| format!("{i}: {s}")).collect();
    let text = text.join("\n");
    let rec = record(opts, "trace", &[src], json!(outcome_name(&o)), Some(text.clone()), start);
    emit(opts, rec, &text);
    Ok(ExitCode::SUCCESS)
}

pub fn stuck(opts: &Opts, src: &str) -> CmdResult {
    let start = Instant::now();
    let t = closed(src)?;
    let s = semantics::is_stuck(&t).map_err(open_error)?;
    let rec = record(opts, "stuck", &[src], json!(s), None, start);
    emit(opts, rec, &s.to_string());
    Ok(ExitCode::SUCCESS)
}

pub fn cps(opts: &Opts, src: &str) -> CmdResult {
    let start = Instant::now();
    let t = parse(src)?;
    let image = cps_translate(&t).to_string();
    let rec = record(opts, "cps", &[src], json!(image), None, start);
    emit(opts, rec, &image);
    Ok(ExitCode::SUCCESS)
}

pub fn cps_equiv(opts: &Opts, left: &str, right: &str) -> CmdResult {
    check_budgets(opts, false)?;
    let start = Instant::now();
    let (a, b) = (parse(left)?, parse(right)?);
    let v = cpsmod::cps_equiv(&a, &b, opts.fuel).to_string();
    let rec = record(opts, "cps-equiv", &[left, right], json!(v), None, start);
    emit(opts, rec, &v);
    Ok(ExitCode::SUCCESS)
}

pub fn kh(opts: &Opts, left: &str, right: &str) -> CmdResult {
    check_budgets(opts, false)?;
    let start = Instant::now();
    let (a, b) = (parse(left)?, parse(right)?);
    let (verdict, text, witness) = match kh_search(&a, &b, opts.depth) {
        Some(d) => {
            let steps = if d.len() == 1 { "step" } else { "steps" };
            let text = format!("derivation ({} {steps})\n{d}", d.len());
            (json!("derivation"), text, Some(d.to_string()))
        }
        None => (json!("none"), "none".to_string(), None),
    };
    let rec = record(opts, "kh", &[left, right], verdict, witness, start);
    emit(opts, rec, &text);
    Ok(ExitCode::SUCCESS)
}

pub fn bisim(opts: &Opts, left: &str, right: &str) -> CmdResult {
    check_budgets(opts, true)?;
    let start = Instant::now();
    let (a, b) = (parse(left)?, parse(right)?);
    let cfg = game_config(opts);
    let v = match opts.semantics {
        Semantics::Relaxed => check_relaxed(&a, &b, &cfg),
        Semantics::Original => check_programs(&a, &b, &cfg),
    };
    let witness = v.trace().map(|t| t.to_string());
    let rec = record(opts, "bisim", &[left, right], json!(v.name()), witness, start);
    emit(opts, rec, &v.to_string());
    Ok(ExitCode::SUCCESS)
}

pub fn falsify(opts: &Opts, left: &str, right: &str) -> CmdResult {
    check_budgets(opts, true)?;
    let start = Instant::now();
    let (a, b) = (parse(left)?, parse(right)?);
    let budget = falsify_budget(opts);
    let v = match opts.semantics {
        Semantics::Relaxed => falsify_relaxed(&a, &b, &budget),
        Semantics::Original => falsify_programs(&a, &b, &budget),
    };
    let witness = v.witness().map(|w| w.to_string());
    let rec = record(opts, "falsify", &[left, right], json!(v.name()), witness, start);
    emit(opts, rec, &v.to_string());
    Ok(ExitCode::SUCCESS)
}

fn pair_json(bisim: &str, falsify: &str) -> Value {
    json!({ "bisim": bisim, "falsify": falsify })
}

fn expectation_json(e: &Expectation) -> Value {
    pair_json(&e.bisim, &e.falsify)
}

pub fn compare(opts: &Opts, left: &str, right: &str) -> CmdResult {
    check_budgets(opts, true)?;
    let start = Instant::now();
    let (a, b) = (parse(left)?, parse(right)?);
    let c = compare_semantics(&a, &b, &game_config(opts), &falsify_budget(opts));
    let verdict = json!({
        "relaxed": pair_json(c.relaxed_bisim.name(), c.relaxed_falsify.name()),
        "original": pair_json(c.program_bisim.name(), c.program_falsify.name()),
    });
    let rec = record(opts, "compare", &[left, right], verdict, None, start);
    emit(opts, rec, &c.to_string());
    Ok(ExitCode::SUCCESS)
}

fn load(file: Option<&Path>) -> Result<Corpus, CliError> {
    match file {
        None => Ok(corpus::builtin()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Corpus::parse(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
        }
    }
}

pub fn corpus_list(opts: &Opts, file: Option<&Path>) -> CmdResult {
    let start = Instant::now();
    let c = load(file)?;
    for e in &c.entries {
        let (l, r) = (e.left.to_string(), e.right.to_string());
        let verdict = json!({
            "relaxed": expectation_json(&e.expect_relaxed),
            "original": expectation_json(&e.expect_original),
        });
        let rec = record(opts, "corpus-list", &[&e.name, &l, &r], verdict, None, start);
        emit(opts, rec, &format!("{}: {l} | {r}", e.name));
    }
    Ok(ExitCode::SUCCESS)
}

fn report_line(r: &EntryReport, ok: bool, expected: (&Expectation, &Expectation)) -> String {
    let mut line = format!(
        "{:<24} relaxed: {:<40} original: {:<40} {}",
        r.name,
        r.relaxed.to_string(),
        r.original.to_string(),
        if ok { "ok" } else { "MISMATCH" }
    );
    if !ok {
        line.push_str(&format!(
            "\n{:<24} expected relaxed: {}; original: {}",
            "", expected.0, expected.1
        ));
    }
    line
}

pub fn corpus_run(opts: &Opts, file: Option<&Path>) -> CmdResult {
    check_budgets(opts, true)?;
    let c = load(file)?;
    let run = corpus::run(&c, &game_config(opts), &falsify_budget(opts));
    for (e, r) in c.entries.iter().zip(&run.reports) {
        let ok = r.expected(e);
        let verdict = json!({
            "relaxed": expectation_json(&r.relaxed),
            "original": expectation_json(&r.original),
            "expected": {
                "relaxed": expectation_json(&e.expect_relaxed),
                "original": expectation_json(&e.expect_original),
            },
            "ok": ok,
        });
        let (l, r_src) = (e.left.to_string(), e.right.to_string());
        let rec = Record {
            command: "corpus",
            input: json!([e.name, l, r_src]),
            verdict,
            witness: None,
            budgets: Budgets::of(opts),
            millis: r.millis,
        };
        emit(opts, rec, &report_line(r, ok, (&e.expect_relaxed, &e.expect_original)));
    }
    let summary = format!("{} entries, {} mismatches", c.entries.len(), run.mismatches.len());
    let rec = Record {
        command: "corpus",
        input: json!("summary"),
        verdict: json!({ "entries": c.entries.len(), "mismatches": run.mismatches }),
        witness: None,
        budgets: Budgets::of(opts),
        millis: run.millis,
    };
    emit(opts, rec, &summary);
    Ok(if run.all_expected() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
