//! Environments of related normal forms and bounded enumerations of their
//! term-generating closure `*` and context-generating closure `c`.
//!
//! A closure pair is a *skeleton* (a closed term built from variables and the
//! four constructors) whose leaves may also be slots standing for environment
//! pairs; the left term fills slots with left components and the right term
//! with right components. Budgets count skeleton nodes, a slot costing one
//! node, so large environment terms stay reachable at small budgets.
//!
//! Enumeration is by cost, then by skeleton structure. Streams are
//! deterministic and free of duplicates up to alpha-equivalence of pairs.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::semantics::{decompose, Decomposition, NormalFormKind};
use crate::syntax::{EvalContext, EvalFrame, Name, Nameless, Term, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Values and stuck terms may be related.
    Relaxed,
    /// Only values may be related.
    Program,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvironmentError {
    #[error("environment terms must be closed: {0}")]
    Open(Term),
    #[error("not a normal form: {0}")]
    NotNormal(Term),
    #[error("cannot relate a value and a stuck term: {0} and {1}")]
    KindMismatch(Term, Term),
    #[error("program environments relate values only: {0}")]
    NotAValue(Term),
}

/// A finite relation on closed normal forms.
#[derive(Clone, Debug)]
pub struct Environment {
    mode: Mode,
    pairs: Vec<(Term, Term)>,
    keys: HashSet<(Nameless, Nameless)>,
}

impl Environment {
    pub fn new(mode: Mode) -> Self {
        Environment {
            mode,
            pairs: Vec::new(),
            keys: HashSet::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn pairs(&self) -> &[(Term, Term)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Adds a pair. Returns `Ok(false)` if an alpha-equivalent pair is
    /// already present.
    pub fn insert(&mut self, t0: Term, t1: Term) -> Result<bool, EnvironmentError> {
        let k0 = normal_kind(&t0)?;
        let k1 = normal_kind(&t1)?;
        if k0 != k1 {
            return Err(EnvironmentError::KindMismatch(t0, t1));
        }
        if self.mode == Mode::Program && k0 != NormalFormKind::Value {
            return Err(EnvironmentError::NotAValue(t0));
        }
        let key = (t0.alpha_key(), t1.alpha_key());
        if !self.keys.insert(key) {
            return Ok(false);
        }
        self.pairs.push((t0, t1));
        Ok(true)
    }

    pub fn contains(&self, t0: &Term, t1: &Term) -> bool {
        self.keys.contains(&(t0.alpha_key(), t1.alpha_key()))
    }

    /// Membership in the term-generating closure (closed or open terms).
    pub fn star_contains(&self, t0: &Term, t1: &Term) -> bool {
        self.star_rec(&t0.alpha_key(), &t1.alpha_key())
    }

    fn star_rec(&self, a: &Nameless, b: &Nameless) -> bool {
        if self.keys.contains(&(a.clone(), b.clone())) {
            return true;
        }
        match (a, b) {
            (Nameless::Bound(i), Nameless::Bound(j)) => i == j,
            (Nameless::Free(x), Nameless::Free(y)) => x == y,
            (Nameless::Lam(x), Nameless::Lam(y))
            | (Nameless::Shift(x), Nameless::Shift(y))
            | (Nameless::Reset(x), Nameless::Reset(y)) => self.star_rec(x, y),
            (Nameless::App(f0, a0), Nameless::App(f1, a1)) => {
                self.star_rec(f0, f1) && self.star_rec(a0, a1)
            }
            _ => false,
        }
    }
}

fn normal_kind(t: &Term) -> Result<NormalFormKind, EnvironmentError> {
    if !t.is_closed() {
        return Err(EnvironmentError::Open(t.clone()));
    }
    match decompose(t) {
        Ok(Decomposition::NormalForm(kind)) => Ok(kind),
        _ => Err(EnvironmentError::NotNormal(t.clone())),
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "({a}, {b})")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClosureBudget {
    /// Largest skeleton cost (nodes, slots counting one).
    pub max_nodes: usize,
    /// Largest number of pairs yielded by one stream.
    pub max_pairs: usize,
}

impl ClosureBudget {
    pub fn new(max_nodes: usize, max_pairs: usize) -> Self {
        ClosureBudget {
            max_nodes,
            max_pairs,
        }
    }
}

impl Default for ClosureBudget {
    fn default() -> Self {
        ClosureBudget::new(5, 10_000)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ContextKind {
    Pure,
    Eval,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Shape {
    /// Variable bound by the binder at this depth (0 = outermost).
    Var(usize),
    Slot(usize),
    Lam(Box<Shape>),
    App(Box<Shape>, Box<Shape>),
    Shift(Box<Shape>),
    Reset(Box<Shape>),
}

const LAM_NAMES: [&str; 5] = ["x", "y", "z", "u", "w"];
const SHIFT_NAMES: [&str; 4] = ["k", "j", "h", "g"];

fn binder_name(shift: bool, depth: usize) -> Name {
    let table: &[&str] = if shift { &SHIFT_NAMES } else { &LAM_NAMES };
    match table.get(depth) {
        Some(n) => Name::from(*n),
        None => Name::from(format!("{}{depth}", table[0])),
    }
}

// Builds one side; `binders` holds the names of enclosing skeleton binders.
fn build(shape: &Shape, slots: &[&Term], binders: &mut Vec<Name>) -> Term {
    match shape {
        Shape::Var(d) => Term::Var(binders[*d].clone()),
        Shape::Slot(i) => slots[*i].clone(),
        Shape::Lam(b) | Shape::Shift(b) => {
            let shift = matches!(shape, Shape::Shift(_));
            let name = binder_name(shift, binders.len());
            binders.push(name.clone());
            let body = build(b, slots, binders);
            binders.pop();
            if shift {
                Term::Shift(name, Box::new(body))
            } else {
                Term::Lam(name, Box::new(body))
            }
        }
        Shape::App(f, a) => Term::app(build(f, slots, binders), build(a, slots, binders)),
        Shape::Reset(b) => Term::reset(build(b, slots, binders)),
    }
}

// Slots are filled with related terms of the same kind, so the left-hand
// entries decide.
fn shape_is_value(shape: &Shape, lefts: &[&Term]) -> bool {
    match shape {
        Shape::Lam(_) => true,
        Shape::Slot(i) => lefts[*i].is_value(),
        _ => false,
    }
}

// Feeds every skeleton of exact cost `n` under `depth` binders to `k`, in a
// fixed order, until `k` returns false. Returns false if stopped early.
fn for_shapes(n: usize, depth: usize, slots: usize, k: &mut dyn FnMut(Shape) -> bool) -> bool {
    if n == 1 {
        return (0..depth).map(Shape::Var).chain((0..slots).map(Shape::Slot)).all(k);
    }
    if n < 2 {
        return true;
    }
    if !for_shapes(n - 1, depth + 1, slots, &mut |b| k(Shape::Lam(Box::new(b)))) {
        return false;
    }
    for left in 1..n - 1 {
        let go_on = for_shapes(left, depth, slots, &mut |f| {
            for_shapes(n - 1 - left, depth, slots, &mut |a| {
                k(Shape::App(Box::new(f.clone()), Box::new(a)))
            })
        });
        if !go_on {
            return false;
        }
    }
    for_shapes(n - 1, depth + 1, slots, &mut |b| k(Shape::Shift(Box::new(b))))
        && for_shapes(n - 1, depth, slots, &mut |b| k(Shape::Reset(Box::new(b))))
}

/// A closure pair together with its skeleton cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostedPair {
    pub cost: usize,
    pub left: Term,
    pub right: Term,
}

/// Stream of pairs of the term-generating closure, cheapest first.
pub struct TermPairs<'a> {
    env: &'a Environment,
    budget: ClosureBudget,
    cost: usize,
    pending: std::vec::IntoIter<CostedPair>,
    seen: HashSet<(Nameless, Nameless)>,
    yielded: usize,
    values_only: bool,
}

impl<'a> TermPairs<'a> {
    fn new(env: &'a Environment, budget: ClosureBudget) -> Self {
        TermPairs {
            env,
            budget,
            cost: 0,
            pending: Vec::new().into_iter(),
            seen: HashSet::new(),
            yielded: 0,
            values_only: false,
        }
    }

    fn refill(&mut self) -> bool {
        while self.cost < self.budget.max_nodes {
            self.cost += 1;
            let lefts: Vec<&Term> = self.env.pairs.iter().map(|p| &p.0).collect();
            let rights: Vec<&Term> = self.env.pairs.iter().map(|p| &p.1).collect();
            let mut layer = Vec::new();
            let wanted = self.budget.max_pairs.saturating_sub(self.yielded);
            let seen = &mut self.seen;
            let cost = self.cost;
            let values_only = self.values_only;
            for_shapes(cost, 0, lefts.len(), &mut |shape| {
                if values_only && !shape_is_value(&shape, &lefts) {
                    return true;
                }
                let left = build(&shape, &lefts, &mut Vec::new());
                let right = build(&shape, &rights, &mut Vec::new());
                if seen.insert((left.alpha_key(), right.alpha_key())) {
                    layer.push(CostedPair { cost, left, right });
                }
                layer.len() < wanted
            });
            if !layer.is_empty() {
                self.pending = layer.into_iter();
                return true;
            }
        }
        false
    }
}

impl Iterator for TermPairs<'_> {
    type Item = CostedPair;

    fn next(&mut self) -> Option<CostedPair> {
        if self.yielded >= self.budget.max_pairs {
            return None;
        }
        loop {
            if let Some(p) = self.pending.next() {
                self.yielded += 1;
                return Some(p);
            }
            if !self.refill() {
                return None;
            }
        }
    }
}

/// Closed pairs of the term-generating closure with their costs.
pub fn costed_term_pairs(env: &Environment, budget: ClosureBudget) -> TermPairs<'_> {
    TermPairs::new(env, budget)
}

/// Closed pairs of the term-generating closure, cheapest first.
pub fn term_closure_pairs(
    env: &Environment,
    budget: ClosureBudget,
) -> impl Iterator<Item = (Term, Term)> + '_ {
    TermPairs::new(env, budget).map(|p| (p.left, p.right))
}

/// The value pairs of the closed term-generating closure.
pub fn value_closure_pairs(
    env: &Environment,
    budget: ClosureBudget,
) -> impl Iterator<Item = (Value, Value)> + '_ {
    let mut pairs = TermPairs::new(env, budget);
    pairs.values_only = true;
    pairs
        .filter_map(|p| Some((Value::new(p.left).ok()?, Value::new(p.right).ok()?)))
        .take(budget.max_pairs)
}

/// Pairs of closed contexts of the context-generating closure, cheapest
/// first. The hole costs nothing; every frame costs one plus its term.
/// Pure contexts never contain a reset frame.
pub fn ctx_closure_pairs(
    env: &Environment,
    budget: ClosureBudget,
    kind: ContextKind,
) -> impl Iterator<Item = (EvalContext, EvalContext)> {
    let frames = frame_pairs(env, budget.max_nodes, budget.max_pairs, kind);
    let mut out = Vec::new();
    for n in 0..=budget.max_nodes {
        let mut prefix = Vec::new();
        contexts_of_cost(&frames, n, &mut prefix, &mut out, budget.max_pairs);
        if out.len() >= budget.max_pairs {
            break;
        }
    }
    out.truncate(budget.max_pairs);
    out.into_iter()
}

struct FramePair {
    cost: usize,
    left: EvalFrame,
    right: EvalFrame,
}

fn frame_pairs(env: &Environment, max_nodes: usize, max_frames: usize, kind: ContextKind) -> Vec<FramePair> {
    let mut frames = Vec::new();
    if max_nodes == 0 {
        return frames;
    }
    if kind == ContextKind::Eval {
        frames.push(FramePair {
            cost: 1,
            left: EvalFrame::Reset,
            right: EvalFrame::Reset,
        });
    }
    // The cheapest contexts are built from the cheapest frames only.
    let budget = ClosureBudget::new(max_nodes - 1, max_frames);
    for p in TermPairs::new(env, budget) {
        if let (Ok(v0), Ok(v1)) = (Value::new(p.left.clone()), Value::new(p.right.clone())) {
            frames.push(FramePair {
                cost: 1 + p.cost,
                left: EvalFrame::AppR(v0),
                right: EvalFrame::AppR(v1),
            });
        }
        frames.push(FramePair {
            cost: 1 + p.cost,
            left: EvalFrame::AppL(p.left),
            right: EvalFrame::AppL(p.right),
        });
    }
    frames.sort_by_key(|f| f.cost);
    frames
}

fn contexts_of_cost(
    frames: &[FramePair],
    n: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<(EvalContext, EvalContext)>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if n == 0 {
        let left = prefix.iter().map(|&i| frames[i].left.clone()).collect();
        let right = prefix.iter().map(|&i| frames[i].right.clone()).collect();
        out.push((EvalContext::from_frames(left), EvalContext::from_frames(right)));
        return;
    }
    for (i, f) in frames.iter().enumerate() {
        if f.cost > n {
            break;
        }
        prefix.push(i);
        contexts_of_cost(frames, n - f.cost, prefix, out, limit);
        prefix.pop();
    }
}

/// Lambda-abstracts the free variables of `t` in sorted order, the first
/// variable outermost.
pub fn open_extension_close(t: &Term) -> Term {
    abstract_vars(t.clone(), t.free_vars().into_iter().collect())
}

/// Closes both terms over the union of their free variables.
pub fn open_extension_close_pair(t0: &Term, t1: &Term) -> (Term, Term) {
    let mut vars = t0.free_vars();
    vars.extend(t1.free_vars());
    let vars: Vec<Name> = vars.into_iter().collect();
    (abstract_vars(t0.clone(), vars.clone()), abstract_vars(t1.clone(), vars))
}

fn abstract_vars(t: Term, vars: Vec<Name>) -> Term {
    vars.into_iter()
        .rev()
        .fold(t, |acc, x| Term::Lam(x, Box::new(acc)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    fn env(mode: Mode, pairs: &[(&str, &str)]) -> Environment {
        let mut e = Environment::new(mode);
        for (a, b) in pairs {
            e.insert(p(a), p(b)).unwrap();
        }
        e
    }

    fn has(pairs: &[(Term, Term)], a: &str, b: &str) -> bool {
        let (a, b) = (p(a), p(b));
        pairs.iter().any(|(x, y)| x.alpha_eq(&a) && y.alpha_eq(&b))
    }

    #[test]
    fn empty_environment_relates_identical_terms() {
        let e = Environment::new(Mode::Relaxed);
        let pairs: Vec<_> = term_closure_pairs(&e, ClosureBudget::new(5, 1000)).collect();
        assert!(has(&pairs, r"\x. x", r"\x. x"));
        assert!(pairs.iter().all(|(a, b)| a == b && a.is_closed()));
    }

    #[test]
    fn base_and_lambda_rules() {
        let e = env(Mode::Relaxed, &[(r"\x. x", r"\x. \y. y")]);
        let pairs: Vec<_> = term_closure_pairs(&e, ClosureBudget::new(3, 1000)).collect();
        assert!(has(&pairs, r"\x. x", r"\x. \y. y"));
        assert!(has(&pairs, r"\z. \x. x", r"\z. \x. \y. y"));
        assert_eq!(pairs[0].0, p(r"\x. x"));
    }

    #[test]
    fn enumeration_is_by_cost_and_duplicate_free() {
        let e = env(Mode::Relaxed, &[(r"\x. x", r"\x. x")]);
        let costed: Vec<_> = costed_term_pairs(&e, ClosureBudget::new(4, 10_000)).collect();
        assert!(costed.windows(2).all(|w| w[0].cost <= w[1].cost));
        let keys: HashSet<_> = costed
            .iter()
            .map(|c| (c.left.alpha_key(), c.right.alpha_key()))
            .collect();
        assert_eq!(keys.len(), costed.len());
    }

    #[test]
    fn value_pairs_are_values() {
        let e = env(Mode::Relaxed, &[(r"\x. x", r"\y. y"), ("S k. k", "S k. k")]);
        let vals: Vec<_> = value_closure_pairs(&e, ClosureBudget::new(4, 1000)).collect();
        assert!(!vals.is_empty());
        assert!(vals.iter().any(|(a, _)| a.as_term() == &p(r"\x. x")));
    }

    #[test]
    fn context_pairs() {
        let e = env(Mode::Relaxed, &[(r"\x. x", r"\x. \y. y")]);
        let ctxs: Vec<_> = ctx_closure_pairs(&e, ClosureBudget::new(3, 1000), ContextKind::Pure).collect();
        assert!(ctxs[0].0.is_hole() && ctxs[0].1.is_hole());
        let show = |c: &EvalContext| c.to_string();
        assert!(ctxs.iter().any(|(a, b)| show(a) == r"(\x. x) []" && show(b) == r"(\x. \y. y) []"));
        assert!(ctxs.iter().all(|(a, b)| a.as_pure().is_some() && b.as_pure().is_some()));
        let eval: Vec<_> = ctx_closure_pairs(&e, ClosureBudget::new(2, 1000), ContextKind::Eval).collect();
        assert!(eval.iter().any(|(a, _)| a.as_pure().is_none()));
    }

    #[test]
    fn empty_environment_context_congruence() {
        let e = Environment::new(Mode::Relaxed);
        let ctxs: Vec<_> = ctx_closure_pairs(&e, ClosureBudget::new(3, 1000), ContextKind::Pure).collect();
        assert!(ctxs.iter().any(|(a, b)| a.to_string() == r"(\x. x) []" && a == b));
    }

    #[test]
    fn environment_invariants() {
        let mut e = Environment::new(Mode::Relaxed);
        assert!(e.insert(p(r"\x. x"), p("S k. k")).is_err());
        assert!(e.insert(p("x"), p("x")).is_err());
        assert!(e.insert(p(r"(\x. x) (\x. x)"), p(r"\x. x")).is_err());
        assert!(e.insert(p(r"\x. x"), p(r"\y. y")).unwrap());
        assert!(!e.insert(p(r"\z. z"), p(r"\x. x")).unwrap());
        let mut prog = Environment::new(Mode::Program);
        assert!(prog.insert(p("S k. k"), p("S k. k")).is_err());
    }

    #[test]
    fn star_membership() {
        let e = env(Mode::Relaxed, &[(r"\x. x", r"\x. \y. y")]);
        assert!(e.star_contains(&p(r"\a. a (\x. x)"), &p(r"\b. b (\x. \y. y)")));
        assert!(!e.star_contains(&p(r"\a. a (\x. x)"), &p(r"\b. b (\x. x) b")));
    }

    #[test]
    fn open_extension() {
        assert_eq!(open_extension_close(&p("x")), p(r"\x. x"));
        assert_eq!(open_extension_close(&p(r"\x. x")), p(r"\x. x"));
        assert_eq!(open_extension_close(&p("y x")), p(r"\x. \y. y x"));
        let (a, b) = open_extension_close_pair(&p("x"), &p("y"));
        assert_eq!((a, b), (p(r"\x. \y. x"), p(r"\x. \y. y")));
    }
}
