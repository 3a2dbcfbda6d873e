//! Text and JSON-lines rendering of command results.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::{Format, Opts};

#[derive(Serialize)]
pub struct Budgets {
    pub fuel: usize,
    pub closure_budget: usize,
    pub depth: usize,
    pub ctx_size: usize,
    pub big_step: bool,
}

impl Budgets {
    pub fn of(opts: &Opts) -> Self {
        Budgets {
            fuel: opts.fuel,
            closure_budget: opts.closure_budget,
            depth: opts.depth,
            ctx_size: opts.ctx_size,
            big_step: opts.big_step,
        }
    }
}

/// One result line in `--format json`. Field order is fixed.
#[derive(Serialize)]
pub struct Record {
    pub command: &'static str,
    pub input: Value,
    pub verdict: Value,
    pub witness: Option<String>,
    pub budgets: Budgets,
    pub millis: u128,
}

/// Prints `text` or the JSON form of `record`, depending on the format.
/// Write errors such as a closed pipe are ignored.
pub fn emit(opts: &Opts, record: Record, text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = match opts.format {
        Format::Text => writeln!(out, "{text}"),
        Format::Json => writeln!(out, "{}", serde_json::to_string(&record).expect("records serialize")),
    };
}
