//! Bounded environmental-bisimulation games.
//!
//! A play starts from a pair of closed terms and an environment (empty by
//! default). Each obligation pair is evaluated; pairs of normal forms of the
//! same kind extend the environment, and every environment entry is then
//! tested against arguments (values) or contexts (stuck terms) drawn from the
//! closures of the current environment. Tests form the next round. The
//! environment only grows, so one environment is shared by the whole play.
//!
//! In program mode, obligations that are not both programs are first put
//! into pairs of pure contexts under a reset, and only values are observed.
//!
//! Obligations already implied by the environment are skipped: pairs in the
//! term-generating closure, and pairs `F0[u0]`, `F1[u1]` with related frames
//! around a pair `(u0, u1)` that already reached related normal forms.

use std::collections::HashSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::closures::{
    ctx_closure_pairs, open_extension_close_pair, value_closure_pairs, ClosureBudget, ContextKind,
    Environment, Mode,
};
use crate::semantics::{run_closed, step_owned, stuck_parts, Outcome, Prefix, Step};
use crate::syntax::{fresh_name, Nameless, PureContext, Term, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameConfig {
    /// Reduction steps per evaluation.
    pub fuel: usize,
    /// Node budget for test arguments and contexts.
    pub closure_budget: usize,
    /// Number of environment-test rounds.
    pub depth: usize,
    /// Jump straight to normal forms instead of stepping both sides.
    pub big_step: bool,
    /// Arguments or contexts drawn per test.
    pub max_pairs: usize,
    /// Total obligations per play.
    pub max_obligations: usize,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            fuel: 2000,
            closure_budget: 5,
            depth: 3,
            big_step: false,
            max_pairs: 48,
            max_obligations: 5000,
        }
    }
}

impl fmt::Display for GameConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "fuel={} closure-budget={} depth={} {} max-pairs={} max-obligations={}",
            self.fuel,
            self.closure_budget,
            self.depth,
            if self.big_step { "big-step" } else { "small-step" },
            self.max_pairs,
            self.max_obligations
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    Start { left: Term, right: Term },
    /// A pair taken from the initial environment.
    Assume { left: Term, right: Term },
    /// One lockstep reduction; a side already in normal form stays put.
    Reduce { left: Term, right: Term },
    ValueReached { left: Term, right: Term },
    StuckReached { left: Term, right: Term },
    TestValue {
        entry: (Term, Term),
        argument: (Term, Term),
        left: Term,
        right: Term,
    },
    TestStuck {
        entry: (Term, Term),
        context: (PureContext, PureContext),
        left: Term,
        right: Term,
    },
    WrapReset {
        context: (PureContext, PureContext),
        left: Term,
        right: Term,
    },
    Mismatch { left: Outcome, right: Outcome },
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Start { left, right } => write!(f, "start {left} | {right}"),
            Move::Assume { left, right } => write!(f, "assume {left} | {right}"),
            Move::Reduce { left, right } => write!(f, "reduce {left} | {right}"),
            Move::ValueReached { left, right } => write!(f, "values {left} | {right}"),
            Move::StuckReached { left, right } => write!(f, "stuck {left} | {right}"),
            Move::TestValue {
                argument,
                left,
                right,
                ..
            } => write!(f, "test-value with {} | {}: {left} | {right}", argument.0, argument.1),
            Move::TestStuck {
                context,
                left,
                right,
                ..
            } => write!(f, "test-stuck in {} | {}: {left} | {right}", context.0, context.1),
            Move::WrapReset {
                context,
                left,
                right,
            } => write!(f, "wrap in {} | {}: {left} | {right}", context.0, context.1),
            Move::Mismatch { left, right } => write!(f, "mismatch {left} | {right}"),
        }
    }
}

/// A play from the start pair to an observable mismatch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub mode: Mode,
    /// Fuel of the final evaluations, after any retry.
    pub fuel: usize,
    pub moves: Vec<Move>,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.moves.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Both sides reached normal forms of different kinds.
    Distinguished(Trace),
    /// One side reached a normal form, the other ran out of fuel.
    LikelyDistinguished(Trace),
    NoCounterexample {
        config: GameConfig,
        obligations: usize,
        /// The obligation limit was reached before the game depth.
        truncated: bool,
    },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Distinguished(_) => "distinguished",
            Verdict::LikelyDistinguished(_) => "likely-distinguished",
            Verdict::NoCounterexample { .. } => "no-counterexample",
        }
    }

    pub fn trace(&self) -> Option<&Trace> {
        match self {
            Verdict::Distinguished(t) | Verdict::LikelyDistinguished(t) => Some(t),
            Verdict::NoCounterexample { .. } => None,
        }
    }

    pub fn is_clean(&self) -> bool {
        matches!(self, Verdict::NoCounterexample { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        match self {
            Verdict::Distinguished(t) => write!(f, "\n{t}"),
            Verdict::LikelyDistinguished(t) => {
                write!(f, " (no normal form within {} steps)\n{t}", t.fuel)
            }
            Verdict::NoCounterexample {
                config,
                obligations,
                truncated,
            } => {
                write!(f, " ({obligations} obligations; {config}")?;
                if *truncated {
                    f.write_str("; obligation limit reached")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Game under the relaxed semantics, where stuck terms are observable.
/// Open terms are closed by abstracting their free variables.
pub fn check_relaxed(t0: &Term, t1: &Term, cfg: &GameConfig) -> Verdict {
    check_with_environment(t0, t1, Environment::new(Mode::Relaxed), cfg)
}

/// Game under the program semantics, where only values are observed.
pub fn check_programs(t0: &Term, t1: &Term, cfg: &GameConfig) -> Verdict {
    check_with_environment(t0, t1, Environment::new(Mode::Program), cfg)
}

/// Plays from a seeded environment; the mode is the environment's.
pub fn check_with_environment(t0: &Term, t1: &Term, env: Environment, cfg: &GameConfig) -> Verdict {
    let (t0, t1) = open_extension_close_pair(t0, t1);
    Game::new(env, *cfg).play(t0, t1)
}

#[derive(Clone, Debug)]
pub struct InclusionViolation {
    pub left: Term,
    pub right: Term,
    pub relaxed: Verdict,
    pub programs: Verdict,
}

#[derive(Clone, Debug, Default)]
pub struct InclusionReport {
    pub checked: usize,
    pub violations: Vec<InclusionViolation>,
}

impl InclusionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every pair the relaxed game cannot tell apart is also clean
/// in the program game.
pub fn check_inclusion_property(pairs: &[(Term, Term)], cfg: &GameConfig) -> InclusionReport {
    let results: Vec<_> = pairs
        .par_iter()
        .map(|(a, b)| {
            let relaxed = check_relaxed(a, b, cfg);
            let programs = relaxed.is_clean().then(|| check_programs(a, b, cfg));
            (a, b, relaxed, programs)
        })
        .collect();
    let mut report = InclusionReport::default();
    for (a, b, relaxed, programs) in results {
        report.checked += 1;
        if let Some(programs) = programs {
            if !programs.is_clean() {
                report.violations.push(InclusionViolation {
                    left: a.clone(),
                    right: b.clone(),
                    relaxed,
                    programs,
                });
            }
        }
    }
    report
}

// Limit on reduction moves listed per obligation in a trace.
const TRACE_REDUCE_LIMIT: usize = 64;
// Fuel multiplier for re-running the side that timed out.
const RETRY_FACTOR: usize = 4;

// A candidate pair shared by its wrapped obligations, run on first use.
struct Filler {
    left: Term,
    right: Term,
    fuel: usize,
    runs: OnceLock<[Prefix; 2]>,
}

impl Filler {
    fn prefix(&self, side: usize) -> &Prefix {
        &self.runs.get_or_init(|| {
            [
                Prefix::new(self.left.clone(), self.fuel),
                Prefix::new(self.right.clone(), self.fuel),
            ]
        })[side]
    }
}

struct Obligation {
    left: Term,
    right: Term,
    parent: Option<usize>,
    moves: Vec<Move>,
    // For wrapped candidates: the candidate pair run once, and the contexts
    // it was wrapped in.
    via: Option<(Arc<Filler>, PureContext, PureContext)>,
}

struct Candidate {
    left: Term,
    right: Term,
    parent: Option<usize>,
    moves: Vec<Move>,
}

struct Game {
    cfg: GameConfig,
    env: Environment,
    entry_origin: Vec<Option<usize>>,
    obligations: Vec<Obligation>,
    reached: Vec<Option<Move>>,
    seen: HashSet<(Nameless, Nameless)>,
    discharged: HashSet<(Nameless, Nameless)>,
    tested: HashSet<(usize, Nameless, Nameless)>,
    truncated: bool,
}

enum Observation {
    Same(Move, Term, Term),
    Mismatch(Outcome, Outcome, usize),
    Likely(Outcome, Outcome, usize),
    Silent,
}

impl Game {
    fn new(env: Environment, cfg: GameConfig) -> Self {
        let entry_origin = vec![None; env.len()];
        Game {
            cfg,
            env,
            entry_origin,
            obligations: Vec::new(),
            reached: Vec::new(),
            seen: HashSet::new(),
            discharged: HashSet::new(),
            tested: HashSet::new(),
            truncated: false,
        }
    }

    fn mode(&self) -> Mode {
        self.env.mode()
    }

    fn budget(&self) -> ClosureBudget {
        ClosureBudget::new(self.cfg.closure_budget, self.cfg.max_pairs)
    }

    fn wrap_contexts(&self) -> Vec<(PureContext, PureContext)> {
        if self.mode() != Mode::Program {
            return Vec::new();
        }
        pure_pairs(&self.env, self.budget())
    }

    fn play(mut self, t0: Term, t1: Term) -> Verdict {
        let mut current = Vec::new();
        let wraps = self.wrap_contexts();
        let start = Move::Start {
            left: t0.clone(),
            right: t1.clone(),
        };
        // The start pair itself is never skipped.
        let first = Candidate {
            left: t0,
            right: t1,
            parent: None,
            moves: vec![start],
        };
        self.push(vec![first], &wraps, &mut current, true);
        let mut likely = None;
        for round in 0..=self.cfg.depth {
            let fuel = self.cfg.fuel;
            let observed: Vec<Observation> = current
                .par_iter()
                .map(|&i| {
                    observe(&self.obligations[i], fuel)
                })
                .collect();
            for (&i, obs) in current.iter().zip(observed) {
                match obs {
                    Observation::Same(reached, a, b) => {
                        let ob = &self.obligations[i];
                        self.discharged.insert((ob.left.alpha_key(), ob.right.alpha_key()));
                        self.reached[i] = Some(reached);
                        // Pairs already in the closure add nothing to it.
                        if self.env.star_contains(&a, &b) {
                            continue;
                        }
                        if let Ok(true) = self.env.insert(a, b) {
                            self.entry_origin.push(Some(i));
                        }
                    }
                    Observation::Mismatch(o0, o1, fuel) => {
                        return Verdict::Distinguished(self.trace(i, o0, o1, fuel));
                    }
                    Observation::Likely(o0, o1, fuel) => {
                        if likely.is_none() {
                            likely = Some(self.trace(i, o0, o1, fuel));
                        }
                        // Programs never get stuck, so nothing better can
                        // turn up.
                        if self.mode() == Mode::Program {
                            return Verdict::LikelyDistinguished(likely.unwrap());
                        }
                    }
                    Observation::Silent => {}
                }
            }
            if round == self.cfg.depth || self.truncated {
                break;
            }
            current = self.next_round();
            if current.is_empty() {
                break;
            }
        }
        match likely {
            Some(t) => Verdict::LikelyDistinguished(t),
            None => Verdict::NoCounterexample {
                config: self.cfg,
                obligations: self.obligations.len(),
                truncated: self.truncated,
            },
        }
    }

    fn next_round(&mut self) -> Vec<usize> {
        let budget = self.budget();
        let args: Vec<(Value, Value)> = value_closure_pairs(&self.env, budget).collect();
        let has_stuck = self.env.pairs().iter().any(|(l, _)| !l.is_value());
        let ctxs = if has_stuck {
            pure_pairs(&self.env, budget)
        } else {
            Vec::new()
        };
        let mut cands = Vec::new();
        for e in 0..self.env.len() {
            let (l, r) = self.env.pairs()[e].clone();
            let (parent, prefix) = match self.entry_origin[e] {
                Some(o) => (Some(o), Vec::new()),
                None => (
                    None,
                    vec![Move::Assume {
                        left: l.clone(),
                        right: r.clone(),
                    }],
                ),
            };
            if let (Term::Lam(x0, b0), Term::Lam(x1, b1)) = (&l, &r) {
                for (w0, w1) in &args {
                    let key = (e, w0.as_term().alpha_key(), w1.as_term().alpha_key());
                    if !self.tested.insert(key) {
                        continue;
                    }
                    let left = b0.subst(x0, w0.as_term());
                    let right = b1.subst(x1, w1.as_term());
                    let mut moves = prefix.clone();
                    moves.push(Move::TestValue {
                        entry: (l.clone(), r.clone()),
                        argument: (w0.as_term().clone(), w1.as_term().clone()),
                        left: left.clone(),
                        right: right.clone(),
                    });
                    cands.push(Candidate {
                        left,
                        right,
                        parent,
                        moves,
                    });
                }
            } else {
                for (c0, c1) in &ctxs {
                    let key = (
                        e,
                        c0.plug(Term::var("[]")).alpha_key(),
                        c1.plug(Term::var("[]")).alpha_key(),
                    );
                    if !self.tested.insert(key) {
                        continue;
                    }
                    let (Some(left), Some(right)) = (stuck_test(&l, c0), stuck_test(&r, c1)) else {
                        continue;
                    };
                    let mut moves = prefix.clone();
                    moves.push(Move::TestStuck {
                        entry: (l.clone(), r.clone()),
                        context: (c0.clone(), c1.clone()),
                        left: left.clone(),
                        right: right.clone(),
                    });
                    cands.push(Candidate {
                        left,
                        right,
                        parent,
                        moves,
                    });
                }
            }
        }
        let wraps = self.wrap_contexts();
        let mut out = Vec::new();
        self.push(cands, &wraps, &mut out, false);
        out
    }

    // In program mode every candidate that is not a pair of programs stands
    // for one obligation per wrapping context. Candidates and wraps are
    // interleaved along diagonals so that a cap on obligations does not
    // spend everything on the first few candidates.
    fn push(&mut self, cands: Vec<Candidate>, wraps: &[(PureContext, PureContext)], out: &mut Vec<usize>, force: bool) {
        let wrapped: Vec<bool> = cands
            .iter()
            .map(|c| self.mode() == Mode::Program && !(c.left.is_program() && c.right.is_program()))
            .collect();
        let width = |i: usize| if wrapped[i] { wraps.len() } else { 1 };
        let mut fillers: Vec<Option<Arc<Filler>>> = vec![None; cands.len()];
        let long = self.cfg.fuel * RETRY_FACTOR;
        let longest = (0..cands.len()).map(width).max().unwrap_or(0);
        for diag in 0..cands.len() + longest {
            for (i, c) in cands.iter().enumerate().take(diag + 1) {
                let j = diag - i;
                if j >= width(i) {
                    continue;
                }
                if wrapped[i] {
                    let (c0, c1) = &wraps[j];
                    let l = Term::reset(c0.plug(c.left.clone()));
                    let r = Term::reset(c1.plug(c.right.clone()));
                    let mut m = c.moves.clone();
                    m.push(Move::WrapReset {
                        context: (c0.clone(), c1.clone()),
                        left: l.clone(),
                        right: r.clone(),
                    });
                    let pre = fillers[i].get_or_insert_with(|| {
                        Arc::new(Filler {
                            left: c.left.clone(),
                            right: c.right.clone(),
                            fuel: long,
                            runs: OnceLock::new(),
                        })
                    });
                    let via = Some((pre.clone(), c0.clone(), c1.clone()));
                    self.push_one(l, r, c.parent, m, via, out, force);
                } else {
                    self.push_one(c.left.clone(), c.right.clone(), c.parent, c.moves.clone(), None, out, force);
                }
                if self.truncated {
                    return;
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push_one(
        &mut self,
        left: Term,
        right: Term,
        parent: Option<usize>,
        moves: Vec<Move>,
        via: Option<(Arc<Filler>, PureContext, PureContext)>,
        out: &mut Vec<usize>,
        force: bool,
    ) {
        if self.obligations.len() >= self.cfg.max_obligations {
            self.truncated = true;
            return;
        }
        let key = (left.alpha_key(), right.alpha_key());
        if !self.seen.insert(key.clone()) {
            return;
        }
        if !force && (self.env.star_contains(&left, &right) || self.up_to_context(&key.0, &key.1)) {
            return;
        }
        self.obligations.push(Obligation {
            left,
            right,
            parent,
            moves,
            via,
        });
        self.reached.push(None);
        out.push(self.obligations.len() - 1);
    }

    // Walks both evaluation spines in parallel while the frames are related,
    // looking for an already discharged pair.
    fn up_to_context(&self, a: &Nameless, b: &Nameless) -> bool {
        let (mut a, mut b) = (a, b);
        loop {
            match (a, b) {
                (Nameless::App(f0, x0), Nameless::App(f1, x1)) => {
                    let fun_values = matches!(**f0, Nameless::Lam(_)) && matches!(**f1, Nameless::Lam(_));
                    if fun_values && self.star_nameless(f0, f1) {
                        (a, b) = (x0, x1);
                    } else if self.star_nameless(x0, x1) {
                        (a, b) = (f0, f1);
                    } else {
                        return false;
                    }
                }
                (Nameless::Reset(x0), Nameless::Reset(x1)) => (a, b) = (x0, x1),
                _ => return false,
            }
            if self.discharged.contains(&(a.clone(), b.clone())) {
                return true;
            }
        }
    }

    fn star_nameless(&self, a: &Nameless, b: &Nameless) -> bool {
        if a == b {
            return true;
        }
        self.env.star_contains(&from_nameless(a), &from_nameless(b))
    }

    fn trace(&self, i: usize, o0: Outcome, o1: Outcome, fuel: usize) -> Trace {
        let mut chain = vec![i];
        while let Some(p) = self.obligations[*chain.last().unwrap()].parent {
            chain.push(p);
        }
        chain.reverse();
        let mut moves = Vec::new();
        for (n, &j) in chain.iter().enumerate() {
            let ob = &self.obligations[j];
            moves.extend(ob.moves.iter().cloned());
            if !self.cfg.big_step {
                let mut reduces = Vec::new();
                lockstep(&ob.left, &ob.right, TRACE_REDUCE_LIMIT, Some(&mut reduces));
                moves.extend(reduces);
            }
            if n + 1 < chain.len() {
                moves.push(self.reached[j].clone().expect("parent reached normal forms"));
            }
        }
        moves.push(Move::Mismatch {
            left: o0,
            right: o1,
        });
        Trace {
            mode: self.mode(),
            fuel,
            moves,
        }
    }
}

fn pure_pairs(env: &Environment, budget: ClosureBudget) -> Vec<(PureContext, PureContext)> {
    ctx_closure_pairs(env, budget, ContextKind::Pure)
        .filter_map(|(a, b)| Some((a.as_pure()?, b.as_pure()?)))
        .collect()
}

/// `<t[k := \x. <ctx[E[x]]>]>` for a stuck term `E[S k. t]`.
pub fn stuck_test(stuck: &Term, ctx: &PureContext) -> Option<Term> {
    let (e, k, body) = stuck_parts(stuck)?;
    let mut taken = body.all_names();
    e.collect_names(&mut taken);
    ctx.collect_names(&mut taken);
    let x = fresh_name("x", |n| taken.contains(n));
    let resume = Term::Lam(x.clone(), Box::new(Term::reset(ctx.compose(&e).plug(Term::Var(x)))));
    Some(Term::reset(body.substitute(&k, &resume)))
}

// A closed term back from its nameless form, with binders named by depth.
fn from_nameless(t: &Nameless) -> Term {
    fn go(t: &Nameless, depth: usize) -> Term {
        let name = |d: usize| format!("v{d}");
        match t {
            Nameless::Bound(i) => Term::var(&name(depth - 1 - i)),
            Nameless::Free(x) => Term::Var(x.clone()),
            Nameless::Lam(b) => Term::lam(&name(depth), go(b, depth + 1)),
            Nameless::Shift(b) => Term::shift(&name(depth), go(b, depth + 1)),
            Nameless::App(f, a) => Term::app(go(f, depth), go(a, depth)),
            Nameless::Reset(b) => Term::reset(go(b, depth)),
        }
    }
    go(t, 0)
}

// Stepping in lockstep reaches the same outcomes, so only traces show the
// individual steps.
fn observe(ob: &Obligation, fuel: usize) -> Observation {
    let run = |side: usize, fuel: usize| match &ob.via {
        Some((pre, c0, c1)) => {
            let ctx = if side == 0 { c0 } else { c1 };
            pre.prefix(side).run_in(|t| Term::reset(ctx.plug(t)), fuel)
        }
        None => run_closed(if side == 0 { ob.left.clone() } else { ob.right.clone() }, fuel).0,
    };
    let (mut o0, mut o1) = (run(0, fuel), run(1, fuel));
    let mut used = fuel;
    if o0.is_timeout() != o1.is_timeout() {
        used = fuel * RETRY_FACTOR;
        if o0.is_timeout() {
            o0 = run(0, used);
        } else {
            o1 = run(1, used);
        }
    }
    match (o0, o1) {
        (Outcome::Value(a), Outcome::Value(b)) => Observation::Same(
            Move::ValueReached {
                left: a.clone(),
                right: b.clone(),
            },
            a,
            b,
        ),
        (Outcome::Stuck(a), Outcome::Stuck(b)) => Observation::Same(
            Move::StuckReached {
                left: a.clone(),
                right: b.clone(),
            },
            a,
            b,
        ),
        (Outcome::Timeout(_), Outcome::Timeout(_)) => Observation::Silent,
        (o0 @ Outcome::Timeout(_), o1) | (o0, o1 @ Outcome::Timeout(_)) => {
            Observation::Likely(o0, o1, used)
        }
        (o0, o1) => Observation::Mismatch(o0, o1, used),
    }
}

/// Steps both sides together for at most `fuel` rounds. A side in normal
/// form stays put. With `record`, every round is logged as a reduce move.
pub fn lockstep(t0: &Term, t1: &Term, fuel: usize, mut record: Option<&mut Vec<Move>>) -> (Outcome, Outcome) {
    let mut sides = [Side::Running(t0.clone()), Side::Running(t1.clone())];
    for _ in 0..=fuel {
        let mut live = false;
        let mut stepped = false;
        for s in sides.iter_mut() {
            match s.advance() {
                Advance::Stepped => {
                    live = true;
                    stepped = true;
                }
                Advance::Finished => live = true,
                Advance::Idle => {}
            }
        }
        if !live {
            break;
        }
        if let (true, Some(rec)) = (stepped, record.as_deref_mut()) {
            rec.push(Move::Reduce {
                left: sides[0].term().clone(),
                right: sides[1].term().clone(),
            });
        }
    }
    let finish = |s: &Side| match s {
        Side::Done(o) => o.clone(),
        Side::Running(_) => Outcome::Timeout(fuel),
    };
    (finish(&sides[0]), finish(&sides[1]))
}

enum Advance {
    Stepped,
    Finished,
    Idle,
}

enum Side {
    Running(Term),
    Done(Outcome),
}

impl Side {
    fn advance(&mut self) -> Advance {
        let Side::Running(t) = self else {
            return Advance::Idle;
        };
        let t = std::mem::replace(t, Term::var("_"));
        match step_owned(t) {
            Step::Reduced(next) => {
                *self = Side::Running(next);
                Advance::Stepped
            }
            Step::Normal(nf, kind) => {
                *self = Side::Done(match kind {
                    crate::semantics::NormalFormKind::Value => Outcome::Value(nf),
                    crate::semantics::NormalFormKind::Stuck => Outcome::Stuck(nf),
                });
                Advance::Finished
            }
        }
    }

    fn term(&self) -> &Term {
        match self {
            Side::Running(t) => t,
            Side::Done(o) => o.normal_form().expect("normal form"),
        }
    }
}

impl Trace {
    /// Re-runs the play against the reduction semantics. Returns true when
    /// every move is consistent and the final mismatch is observed again.
    pub fn replay(&self) -> bool {
        let mut cur: Option<(Term, Term)> = None;
        let mut entry: Option<(Term, Term)> = None;
        let eval = |t: &Term| run_closed(t.clone(), self.fuel).0;
        let eval_long = |t: &Term| run_closed(t.clone(), self.fuel * RETRY_FACTOR).0;
        let same_nf = |o: &Outcome, t: &Term| o.normal_form().is_some_and(|n| n.alpha_eq(t));
        for m in &self.moves {
            match m {
                Move::Start { left, right } => cur = Some((left.clone(), right.clone())),
                Move::Assume { left, right } => entry = Some((left.clone(), right.clone())),
                Move::Reduce { left, right } => {
                    let Some((a, b)) = &cur else { return false };
                    if !(step_matches(a, left) && step_matches(b, right)) {
                        return false;
                    }
                    cur = Some((left.clone(), right.clone()));
                }
                Move::ValueReached { left, right } | Move::StuckReached { left, right } => {
                    let Some((a, b)) = &cur else { return false };
                    let (o0, o1) = (eval_long(a), eval_long(b));
                    let want_value = matches!(m, Move::ValueReached { .. });
                    if o0.kind() != o1.kind()
                        || matches!(o0, Outcome::Value(_)) != want_value
                        || !same_nf(&o0, left)
                        || !same_nf(&o1, right)
                    {
                        return false;
                    }
                    entry = Some((left.clone(), right.clone()));
                    cur = None;
                }
                Move::TestValue {
                    entry: e,
                    argument,
                    left,
                    right,
                } => {
                    if !pair_alpha_eq(entry.as_ref(), e) {
                        return false;
                    }
                    let (Term::Lam(x0, b0), Term::Lam(x1, b1)) = (&e.0, &e.1) else {
                        return false;
                    };
                    if !(argument.0.is_value() && argument.1.is_value()) {
                        return false;
                    }
                    if !b0.subst(x0, &argument.0).alpha_eq(left) || !b1.subst(x1, &argument.1).alpha_eq(right) {
                        return false;
                    }
                    cur = Some((left.clone(), right.clone()));
                }
                Move::TestStuck {
                    entry: e,
                    context,
                    left,
                    right,
                } => {
                    if !pair_alpha_eq(entry.as_ref(), e) {
                        return false;
                    }
                    let ok = |s: &Term, c: &PureContext, t: &Term| stuck_test(s, c).is_some_and(|r| r.alpha_eq(t));
                    if !ok(&e.0, &context.0, left) || !ok(&e.1, &context.1, right) {
                        return false;
                    }
                    cur = Some((left.clone(), right.clone()));
                }
                Move::WrapReset {
                    context,
                    left,
                    right,
                } => {
                    let Some((a, b)) = &cur else { return false };
                    if !Term::reset(context.0.plug(a.clone())).alpha_eq(left)
                        || !Term::reset(context.1.plug(b.clone())).alpha_eq(right)
                    {
                        return false;
                    }
                    cur = Some((left.clone(), right.clone()));
                }
                Move::Mismatch { left, right } => {
                    let Some((a, b)) = &cur else { return false };
                    let (o0, o1) = (eval(a), eval(b));
                    let agrees = |o: &Outcome, want: &Outcome| match (o, want) {
                        (Outcome::Timeout(_), Outcome::Timeout(_)) => true,
                        (o, w) => o.kind() == w.kind() && w.normal_form().is_some_and(|t| same_nf(o, t)),
                    };
                    return agrees(&o0, left) && agrees(&o1, right) && o0.kind() != o1.kind();
                }
            }
        }
        false
    }
}

fn pair_alpha_eq(a: Option<&(Term, Term)>, b: &(Term, Term)) -> bool {
    a.is_some_and(|a| a.0.alpha_eq(&b.0) && a.1.alpha_eq(&b.1))
}

// `next` is one step from `t`, or `t` itself in normal form.
fn step_matches(t: &Term, next: &Term) -> bool {
    match step_owned(t.clone()) {
        Step::Reduced(r) => r.alpha_eq(next),
        Step::Normal(nf, _) => nf.alpha_eq(next),
    }
}
