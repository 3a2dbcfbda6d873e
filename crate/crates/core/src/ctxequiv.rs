//! Bounded falsifiers for contextual equivalence.
//!
//! Instead of arbitrary closing contexts, the search ranges over evaluation
//! contexts `F` and closing substitutions `s`, comparing `F[t0 s]` with
//! `F[t1 s]` (relaxed semantics) or `<F[t0]>` with `<F[t1]>` (program
//! semantics, after closing both terms by lambda-abstraction). Contexts are
//! built from a small alphabet of closed values, each costing one node.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::bisim::{check_programs, check_relaxed, GameConfig, Verdict};
use crate::closures::{ctx_closure_pairs, open_extension_close_pair, ClosureBudget, ContextKind, Environment, Mode};
use crate::semantics::{run_closed, Outcome, Prefix};
use crate::syntax::{parse, EvalContext, Name, Substitution, Term, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FalsifyBudget {
    pub fuel: usize,
    /// Largest context cost (frames plus skeleton nodes).
    pub ctx_size: usize,
    /// Largest number of contexts tried.
    pub max_contexts: usize,
}

impl Default for FalsifyBudget {
    fn default() -> Self {
        FalsifyBudget {
            fuel: 2000,
            ctx_size: 6,
            max_contexts: 25_000,
        }
    }
}

impl fmt::Display for FalsifyBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "fuel={} ctx-size={} max-contexts={}",
            self.fuel, self.ctx_size, self.max_contexts
        )
    }
}

/// The closed values used for closing substitutions and as context atoms.
pub fn sigma_alphabet() -> Vec<(&'static str, Value)> {
    [
        ("id", r"\x. x"),
        ("true", r"\x. \y. x"),
        ("false", r"\x. \y. y"),
        ("one", r"\f. \x. f x"),
        ("two", r"\f. \x. f (f x)"),
        ("diverge", r"\x. (\y. y y) (\y. y y)"),
        ("capture", r"\x. S k. k x"),
    ]
    .into_iter()
    .map(|(n, s)| (n, Value::new(parse(s).expect("alphabet term")).expect("alphabet value")))
    .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub context: EvalContext,
    pub subst: Substitution,
    pub left: Outcome,
    pub right: Outcome,
    pub fuel: usize,
}

impl Witness {
    /// Re-evaluates both sides; true when the recorded mismatch is observed
    /// again.
    pub fn replay(&self, t0: &Term, t1: &Term, mode: Mode) -> bool {
        let (a, b) = instantiate(t0, t1, &self.context, &self.subst, mode);
        let o0 = run_closed(a, self.fuel).0;
        let o1 = run_closed(b, self.fuel).0;
        o0.kind() == self.left.kind() && o1.kind() == self.right.kind() && o0.kind() != o1.kind()
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "context {} substitution {}\nleft {}\nright {}",
            self.context, self.subst, self.left, self.right
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FalsifyVerdict {
    /// Both sides terminated with different observations.
    Counterexample(Witness),
    /// One side terminated, the other ran out of fuel.
    LikelyCounterexample(Witness),
    NoneFound { budget: FalsifyBudget, tried: usize },
}

impl FalsifyVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            FalsifyVerdict::Counterexample(_) => "counterexample",
            FalsifyVerdict::LikelyCounterexample(_) => "likely-counterexample",
            FalsifyVerdict::NoneFound { .. } => "none-found",
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            FalsifyVerdict::Counterexample(w) | FalsifyVerdict::LikelyCounterexample(w) => Some(w),
            FalsifyVerdict::NoneFound { .. } => None,
        }
    }

    pub fn is_clean(&self) -> bool {
        matches!(self, FalsifyVerdict::NoneFound { .. })
    }
}

impl fmt::Display for FalsifyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        match self {
            FalsifyVerdict::Counterexample(w) => write!(f, "\n{w}"),
            FalsifyVerdict::LikelyCounterexample(w) => {
                write!(f, " (no normal form within {} steps)\n{w}", w.fuel)
            }
            FalsifyVerdict::NoneFound { budget, tried } => write!(f, " ({tried} tests; {budget})"),
        }
    }
}

/// Searches for a context and substitution telling the terms apart under
/// the relaxed semantics (values and stuck terms are both observable).
pub fn falsify_relaxed(t0: &Term, t1: &Term, budget: &FalsifyBudget) -> FalsifyVerdict {
    falsify(t0, t1, budget, Mode::Relaxed)
}

/// Searches for a context making exactly one side terminate under a
/// top-level reset.
pub fn falsify_programs(t0: &Term, t1: &Term, budget: &FalsifyBudget) -> FalsifyVerdict {
    falsify(t0, t1, budget, Mode::Program)
}

/// The evaluation contexts tried by the falsifiers, cheapest first.
pub fn harness_contexts(budget: &FalsifyBudget) -> Vec<EvalContext> {
    cached_contexts(budget).as_ref().clone()
}

type ContextCache = Mutex<HashMap<(usize, usize), Arc<Vec<EvalContext>>>>;

fn cached_contexts(budget: &FalsifyBudget) -> Arc<Vec<EvalContext>> {
    static CACHE: OnceLock<ContextCache> = OnceLock::new();
    let key = (budget.ctx_size, budget.max_contexts);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(found) = cache.lock().expect("context cache").get(&key) {
        return found.clone();
    }
    let mut env = Environment::new(Mode::Relaxed);
    for (_, v) in sigma_alphabet() {
        env.insert(v.as_term().clone(), v.as_term().clone())
            .expect("alphabet values are closed values");
    }
    let ctxs: Vec<EvalContext> =
        ctx_closure_pairs(&env, ClosureBudget::new(budget.ctx_size, budget.max_contexts), ContextKind::Eval)
            .map(|(f, _)| f)
            .collect();
    let ctxs = Arc::new(ctxs);
    cache.lock().expect("context cache").insert(key, ctxs.clone());
    ctxs
}

// All substitutions from the alphabet for the given variables.
fn substitutions(vars: &[Name]) -> Vec<Substitution> {
    let alphabet = sigma_alphabet();
    let mut out = vec![Substitution::new()];
    for x in vars {
        out = out
            .into_iter()
            .flat_map(|s| {
                alphabet.iter().map(move |(_, v)| {
                    let mut s = s.clone();
                    s.insert(x, v.clone()).expect("closed alphabet value");
                    s
                })
            })
            .collect();
    }
    out
}

fn instantiate(t0: &Term, t1: &Term, ctx: &EvalContext, subst: &Substitution, mode: Mode) -> (Term, Term) {
    match mode {
        Mode::Relaxed => (ctx.plug(subst.apply(t0)), ctx.plug(subst.apply(t1))),
        Mode::Program => {
            let (a, b) = open_extension_close_pair(t0, t1);
            (Term::reset(ctx.plug(a)), Term::reset(ctx.plug(b)))
        }
    }
}

const RETRY_FACTOR: usize = 4;
const BATCH: usize = 64;

enum Probe {
    Definite(Witness),
    Likely(Witness),
    Clean,
}

// The hole fillers for one substitution, each run once up front.
struct Fillers {
    subst: Substitution,
    left: Prefix,
    right: Prefix,
}

fn fillers(t0: &Term, t1: &Term, subst: Substitution, mode: Mode, fuel: usize) -> Fillers {
    let (a, b) = match mode {
        Mode::Relaxed => (subst.apply(t0), subst.apply(t1)),
        Mode::Program => open_extension_close_pair(t0, t1),
    };
    let long = fuel * RETRY_FACTOR;
    Fillers {
        subst,
        left: Prefix::new(a, long),
        right: Prefix::new(b, long),
    }
}

fn probe(ctx: &EvalContext, fill: &Fillers, mode: Mode, fuel: usize) -> Probe {
    let plug = |t: Term| match mode {
        Mode::Relaxed => ctx.plug(t),
        Mode::Program => Term::reset(ctx.plug(t)),
    };
    let mut o0 = fill.left.run_in(plug, fuel);
    let mut o1 = fill.right.run_in(plug, fuel);
    let mut used = fuel;
    if o0.is_timeout() != o1.is_timeout() {
        used = fuel * RETRY_FACTOR;
        if o0.is_timeout() {
            o0 = fill.left.run_in(plug, used);
        } else {
            o1 = fill.right.run_in(plug, used);
        }
    }
    if o0.kind() == o1.kind() {
        return Probe::Clean;
    }
    let definite = !o0.is_timeout() && !o1.is_timeout();
    let w = Witness {
        context: ctx.clone(),
        subst: fill.subst.clone(),
        left: o0,
        right: o1,
        fuel: used,
    };
    if definite {
        Probe::Definite(w)
    } else {
        Probe::Likely(w)
    }
}

fn falsify(t0: &Term, t1: &Term, budget: &FalsifyBudget, mode: Mode) -> FalsifyVerdict {
    let substs = match mode {
        Mode::Relaxed => {
            let mut vars = t0.free_vars();
            vars.extend(t1.free_vars());
            substitutions(&vars.into_iter().collect::<Vec<_>>())
        }
        Mode::Program => vec![Substitution::new()],
    };
    let fills: Vec<Fillers> = substs
        .into_par_iter()
        .map(|s| fillers(t0, t1, s, mode, budget.fuel))
        .collect();
    let ctxs = cached_contexts(budget);
    let grid: Vec<(&EvalContext, &Fillers)> = ctxs
        .iter()
        .flat_map(|f| fills.iter().map(move |s| (f, s)))
        .collect();
    let mut likely = None;
    for batch in grid.chunks(BATCH) {
        let probes: Vec<Probe> = batch
            .par_iter()
            .map(|(f, s)| probe(f, s, mode, budget.fuel))
            .collect();
        for p in probes {
            match p {
                Probe::Definite(w) => return FalsifyVerdict::Counterexample(w),
                Probe::Likely(w) => {
                    likely.get_or_insert(w);
                }
                Probe::Clean => {}
            }
        }
    }
    match likely {
        Some(w) => FalsifyVerdict::LikelyCounterexample(w),
        None => FalsifyVerdict::NoneFound {
            budget: *budget,
            tried: grid.len(),
        },
    }
}

/// Both games and both falsifiers on one pair.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub relaxed_bisim: Verdict,
    pub program_bisim: Verdict,
    pub relaxed_falsify: FalsifyVerdict,
    pub program_falsify: FalsifyVerdict,
}

pub fn compare_semantics(t0: &Term, t1: &Term, cfg: &GameConfig, budget: &FalsifyBudget) -> Comparison {
    let ((relaxed_bisim, program_bisim), (relaxed_falsify, program_falsify)) = rayon::join(
        || rayon::join(|| check_relaxed(t0, t1, cfg), || check_programs(t0, t1, cfg)),
        || {
            rayon::join(
                || falsify_relaxed(t0, t1, budget),
                || falsify_programs(t0, t1, budget),
            )
        },
    );
    Comparison {
        relaxed_bisim,
        program_bisim,
        relaxed_falsify,
        program_falsify,
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:<22} falsify", "", "bisim")?;
        writeln!(
            f,
            "{:<10} {:<22} {}",
            "relaxed",
            self.relaxed_bisim.name(),
            self.relaxed_falsify.name()
        )?;
        write!(
            f,
            "{:<10} {:<22} {}",
            "original",
            self.program_bisim.name(),
            self.program_falsify.name()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    const OMEGA: &str = r"(\x. x x) (\x. x x)";

    fn small() -> FalsifyBudget {
        FalsifyBudget {
            fuel: 300,
            ctx_size: 4,
            max_contexts: 200,
        }
    }

    #[test]
    fn value_against_stuck_at_the_hole() {
        let (a, b) = (p(r"\x. x"), p(r"S k. k (\x. x)"));
        let v = falsify_relaxed(&a, &b, &small());
        let w = v.witness().expect("witness");
        assert_eq!(v.name(), "counterexample");
        assert!(w.context.is_hole() && w.subst.is_empty());
        assert!(w.replay(&a, &b, Mode::Relaxed));
    }

    #[test]
    fn reset_reset_has_no_counterexample() {
        assert!(falsify_relaxed(&p(r"<<\x. x>>"), &p(r"<\x. x>"), &small()).is_clean());
    }

    #[test]
    fn omega_cases() {
        let (a, b) = (p(OMEGA), p(&format!("S k. {OMEGA}")));
        assert_eq!(falsify_relaxed(&a, &b, &small()).name(), "likely-counterexample");
        assert!(falsify_programs(&a, &b, &small()).is_clean());
    }

    #[test]
    fn open_terms_are_closed_by_substitution() {
        let v = falsify_relaxed(&p("x"), &p(r"S k. k x"), &small());
        assert_eq!(v.name(), "counterexample");
        let w = v.witness().unwrap();
        assert!(!w.subst.is_empty());
        assert!(w.replay(&p("x"), &p(r"S k. k x"), Mode::Relaxed));
        assert!(falsify_programs(&p("x"), &p(r"S k. k x"), &small()).is_clean());
    }

    #[test]
    fn booleans_are_separated_in_programs() {
        let (a, b) = (p(r"\x. \y. y"), p(r"\x. \y. x"));
        let v = falsify_programs(&a, &b, &FalsifyBudget::default());
        assert_eq!(v.name(), "likely-counterexample");
        assert!(v.witness().unwrap().replay(&a, &b, Mode::Program));
    }

    #[test]
    fn substitutions_cover_all_variables() {
        let xs = [Name::from("a"), Name::from("b")];
        assert_eq!(substitutions(&xs).len(), 49);
        assert_eq!(substitutions(&[]).len(), 1);
    }

    #[test]
    fn contexts_start_with_the_hole() {
        let cs = harness_contexts(&small());
        assert!(cs[0].is_hole());
        assert!(cs.iter().all(EvalContext::is_closed));
    }
}
