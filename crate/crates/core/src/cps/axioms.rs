//! The eight equations axiomatizing CPS equivalence, as data, together with
//! a matcher that applies them as rewrite rules in either direction.
//!
//! Axioms are stated on open terms with variables counted as values, so in
//! this module a value is a lambda-abstraction *or* a variable, and the pure
//! contexts matched by `E` may have variables in function position
//! ([`ContextMatch`]).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::syntax::{fresh_name, Name, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    /// Object variable introduced by a pattern binder (or fresh on the
    /// side where no binder matches it).
    Var(&'static str),
    Lam(&'static str, Box<Pattern>),
    App(Box<Pattern>, Box<Pattern>),
    Shift(&'static str, Box<Pattern>),
    Reset(Box<Pattern>),
    /// Term metavariable.
    Term(&'static str),
    /// Value metavariable.
    Value(&'static str),
    /// `E[p]` for a pure-context metavariable `E`.
    Plug(&'static str, Box<Pattern>),
    /// `p[x := q]`; only appears on the side that is never matched.
    Subst(Box<Pattern>, &'static str, Box<Pattern>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideCondition {
    /// The object variable does not occur free in the metavariable.
    NotFreeIn {
        var: &'static str,
        meta: &'static str,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomSchema {
    pub name: &'static str,
    pub lhs: Pattern,
    pub rhs: Pattern,
    pub side_conditions: Vec<SideCondition>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::LeftToRight => Direction::RightToLeft,
            Direction::RightToLeft => Direction::LeftToRight,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::LeftToRight => "->",
            Direction::RightToLeft => "<-",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SpineFrame {
    /// `v [.]` where `v` is a lambda or a variable.
    Fun(Term),
    /// `[.] t`
    Arg(Term),
}

/// A pure context whose function-position values may be variables.
/// Frames are outermost first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ContextMatch(pub Vec<SpineFrame>);

impl ContextMatch {
    pub fn plug(&self, t: Term) -> Term {
        self.0.iter().rev().fold(t, |acc, f| match f {
            SpineFrame::Fun(v) => Term::app(v.clone(), acc),
            SpineFrame::Arg(u) => Term::app(acc, u.clone()),
        })
    }

    pub fn has_free(&self, x: &str) -> bool {
        self.0.iter().any(|f| match f {
            SpineFrame::Fun(t) | SpineFrame::Arg(t) => t.has_free(x),
        })
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        for f in &self.0 {
            match f {
                SpineFrame::Fun(t) | SpineFrame::Arg(t) => t.collect_names(out),
            }
        }
    }
}

impl fmt::Display for ContextMatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.plug(Term::var("[]")).fmt(f)
    }
}

/// Assignment of metavariables and object variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Instantiation {
    pub vars: BTreeMap<&'static str, Name>,
    pub terms: BTreeMap<&'static str, Term>,
    pub contexts: BTreeMap<&'static str, ContextMatch>,
}

impl Instantiation {
    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        out.extend(self.vars.values().cloned());
        for t in self.terms.values() {
            t.collect_names(out);
        }
        for c in self.contexts.values() {
            c.collect_names(out);
        }
    }
}

impl fmt::Display for Instantiation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| {
            let s = if first { "" } else { ", " };
            first = false;
            f.write_str(s)
        };
        for (k, v) in &self.vars {
            sep(f)?;
            write!(f, "{k}={v}")?;
        }
        for (k, v) in &self.terms {
            sep(f)?;
            write!(f, "{k}={v}")?;
        }
        for (k, v) in &self.contexts {
            sep(f)?;
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

fn pv(x: &'static str) -> Pattern {
    Pattern::Var(x)
}
fn plam(x: &'static str, b: Pattern) -> Pattern {
    Pattern::Lam(x, Box::new(b))
}
fn papp(a: Pattern, b: Pattern) -> Pattern {
    Pattern::App(Box::new(a), Box::new(b))
}
fn pshift(k: &'static str, b: Pattern) -> Pattern {
    Pattern::Shift(k, Box::new(b))
}
fn preset(b: Pattern) -> Pattern {
    Pattern::Reset(Box::new(b))
}
fn pplug(e: &'static str, b: Pattern) -> Pattern {
    Pattern::Plug(e, Box::new(b))
}
fn psubst(p: Pattern, x: &'static str, q: Pattern) -> Pattern {
    Pattern::Subst(Box::new(p), x, Box::new(q))
}

/// The eight axioms, in a fixed order.
pub fn kh_axioms() -> Vec<AxiomSchema> {
    use Pattern::{Term as T, Value as V};
    let not_free = |var, meta| SideCondition::NotFreeIn { var, meta };
    vec![
        AxiomSchema {
            name: "beta-v",
            lhs: papp(plam("x", T("t")), V("v")),
            rhs: psubst(T("t"), "x", V("v")),
            side_conditions: vec![],
        },
        AxiomSchema {
            name: "beta-omega",
            lhs: papp(plam("x", pplug("E", pv("x"))), T("t")),
            rhs: pplug("E", T("t")),
            side_conditions: vec![not_free("x", "E")],
        },
        AxiomSchema {
            name: "reset-shift",
            lhs: preset(pplug("E", pshift("k", T("t")))),
            rhs: preset(psubst(
                T("t"),
                "k",
                plam("x", preset(pplug("E", pv("x")))),
            )),
            side_conditions: vec![],
        },
        AxiomSchema {
            name: "reset-lift",
            lhs: preset(papp(plam("x", T("t0")), preset(T("t1")))),
            rhs: papp(plam("x", preset(T("t0"))), preset(T("t1"))),
            side_conditions: vec![],
        },
        AxiomSchema {
            name: "reset-value",
            lhs: preset(V("v")),
            rhs: V("v"),
            side_conditions: vec![],
        },
        AxiomSchema {
            name: "shift-reset",
            lhs: pshift("k", preset(T("t"))),
            rhs: pshift("k", T("t")),
            side_conditions: vec![],
        },
        AxiomSchema {
            name: "eta-v",
            lhs: plam("x", papp(V("v"), pv("x"))),
            rhs: V("v"),
            side_conditions: vec![not_free("x", "v")],
        },
        AxiomSchema {
            name: "shift-elim",
            lhs: pshift("k", papp(pv("k"), T("t"))),
            rhs: T("t"),
            side_conditions: vec![not_free("k", "t")],
        },
    ]
}

impl Pattern {
    fn contains_subst(&self) -> bool {
        match self {
            Pattern::Subst(..) => true,
            Pattern::Lam(_, b) | Pattern::Shift(_, b) | Pattern::Reset(b) | Pattern::Plug(_, b) => {
                b.contains_subst()
            }
            Pattern::App(a, b) => a.contains_subst() || b.contains_subst(),
            Pattern::Var(_) | Pattern::Term(_) | Pattern::Value(_) => false,
        }
    }

    /// Metavariables occurring in the pattern.
    pub fn metavariables(&self) -> BTreeSet<&'static str> {
        let mut out = BTreeSet::new();
        self.collect_metas(&mut out);
        out
    }

    fn collect_metas(&self, out: &mut BTreeSet<&'static str>) {
        match self {
            Pattern::Term(m) | Pattern::Value(m) => {
                out.insert(m);
            }
            Pattern::Plug(e, b) => {
                out.insert(e);
                b.collect_metas(out);
            }
            Pattern::Lam(_, b) | Pattern::Shift(_, b) | Pattern::Reset(b) => b.collect_metas(out),
            Pattern::App(a, b) | Pattern::Subst(a, _, b) => {
                a.collect_metas(out);
                b.collect_metas(out);
            }
            Pattern::Var(_) => {}
        }
    }

    /// Instantiates the pattern. Object variables missing from `inst` get
    /// fresh names avoiding everything in `inst` and `avoid`.
    pub fn instantiate(&self, inst: &Instantiation, avoid: &BTreeSet<Name>) -> Term {
        let mut taken = avoid.clone();
        inst.collect_names(&mut taken);
        let mut fresh = BTreeMap::new();
        self.build(inst, &mut taken, &mut fresh)
    }

    fn build(
        &self,
        inst: &Instantiation,
        taken: &mut BTreeSet<Name>,
        fresh: &mut BTreeMap<&'static str, Name>,
    ) -> Term {
        let mut name_of = |x: &'static str, taken: &mut BTreeSet<Name>| -> Name {
            if let Some(n) = inst.vars.get(x) {
                return n.clone();
            }
            fresh
                .entry(x)
                .or_insert_with(|| {
                    let n = fresh_name(x, |s| taken.contains(s));
                    taken.insert(n.clone());
                    n
                })
                .clone()
        };
        match self {
            Pattern::Var(x) => Term::Var(name_of(x, taken)),
            Pattern::Lam(x, b) => {
                let n = name_of(x, taken);
                Term::Lam(n, Box::new(b.build(inst, taken, fresh)))
            }
            Pattern::Shift(k, b) => {
                let n = name_of(k, taken);
                Term::Shift(n, Box::new(b.build(inst, taken, fresh)))
            }
            Pattern::App(a, b) => Term::app(a.build(inst, taken, fresh), b.build(inst, taken, fresh)),
            Pattern::Reset(b) => Term::reset(b.build(inst, taken, fresh)),
            Pattern::Term(m) | Pattern::Value(m) => inst
                .terms
                .get(m)
                .cloned()
                .unwrap_or_else(|| panic!("metavariable {m} is not instantiated")),
            Pattern::Plug(e, b) => {
                let ctx = inst
                    .contexts
                    .get(e)
                    .unwrap_or_else(|| panic!("context metavariable {e} is not instantiated"));
                ctx.plug(b.build(inst, taken, fresh))
            }
            Pattern::Subst(p, x, q) => {
                let n = name_of(x, taken);
                let body = p.build(inst, taken, fresh);
                let arg = q.build(inst, taken, fresh);
                body.substitute(&n, &arg)
            }
        }
    }
}

fn is_kh_value(t: &Term) -> bool {
    matches!(t, Term::Lam(..) | Term::Var(_))
}

/// All splits `t = E[u]` with `E` a pure context (variables count as values).
pub(crate) fn spine_splits(t: &Term) -> Vec<(ContextMatch, Term)> {
    let mut out = Vec::new();
    let mut frames = Vec::new();
    collect_splits(t, &mut frames, &mut out);
    out
}

fn collect_splits(t: &Term, frames: &mut Vec<SpineFrame>, out: &mut Vec<(ContextMatch, Term)>) {
    out.push((ContextMatch(frames.clone()), t.clone()));
    if let Term::App(f, a) = t {
        frames.push(SpineFrame::Arg((**a).clone()));
        collect_splits(f, frames, out);
        frames.pop();
        if is_kh_value(f) {
            frames.push(SpineFrame::Fun((**f).clone()));
            collect_splits(a, frames, out);
            frames.pop();
        }
    }
}

fn match_pattern(p: &Pattern, t: &Term, inst: Instantiation, out: &mut Vec<Instantiation>) {
    match (p, t) {
        (Pattern::Var(x), Term::Var(y)) => {
            if inst.vars.get(x) == Some(y) {
                out.push(inst);
            }
        }
        (Pattern::Lam(x, pb), Term::Lam(y, b)) | (Pattern::Shift(x, pb), Term::Shift(y, b)) => {
            let mut inst = inst;
            inst.vars.insert(x, y.clone());
            match_pattern(pb, b, inst, out);
        }
        (Pattern::App(pa, pb), Term::App(a, b)) => {
            let mut left = Vec::new();
            match_pattern(pa, a, inst, &mut left);
            for i in left {
                match_pattern(pb, b, i, out);
            }
        }
        (Pattern::Reset(pb), Term::Reset(b)) => match_pattern(pb, b, inst, out),
        (Pattern::Term(m), _) => {
            let mut inst = inst;
            inst.terms.insert(m, t.clone());
            out.push(inst);
        }
        (Pattern::Value(m), _) if is_kh_value(t) => {
            let mut inst = inst;
            inst.terms.insert(m, t.clone());
            out.push(inst);
        }
        (Pattern::Plug(e, pb), _) => {
            for (ctx, focus) in spine_splits(t) {
                let mut i = inst.clone();
                i.contexts.insert(e, ctx);
                match_pattern(pb, &focus, i, out);
            }
        }
        _ => {}
    }
}

impl AxiomSchema {
    /// Whether rewriting in `dir` can be done by matching (sides containing
    /// a substitution cannot be matched).
    pub fn can_rewrite(&self, dir: Direction) -> bool {
        match dir {
            Direction::LeftToRight => !self.lhs.contains_subst(),
            Direction::RightToLeft => !self.rhs.contains_subst(),
        }
    }

    pub fn metavariables(&self) -> BTreeSet<&'static str> {
        let mut m = self.lhs.metavariables();
        m.extend(self.rhs.metavariables());
        m
    }

    pub fn side_conditions_hold(&self, inst: &Instantiation) -> bool {
        self.side_conditions.iter().all(|c| match c {
            SideCondition::NotFreeIn { var, meta } => {
                let Some(name) = inst.vars.get(var) else {
                    return true;
                };
                if let Some(t) = inst.terms.get(meta) {
                    !t.has_free(name)
                } else if let Some(ctx) = inst.contexts.get(meta) {
                    !ctx.has_free(name)
                } else {
                    true
                }
            }
        })
    }

    /// Both sides of the equation for an instantiation of the left-hand
    /// side's metavariables and binders.
    pub fn instance(&self, inst: &Instantiation) -> (Term, Term) {
        let avoid = BTreeSet::new();
        let lhs = self.lhs.instantiate(inst, &avoid);
        let rhs = self.rhs.instantiate(inst, &lhs.all_names());
        (lhs, rhs)
    }

    /// Rewrites `t` at its root in direction `dir`.
    pub fn rewrite_root(&self, t: &Term, dir: Direction) -> Vec<(Instantiation, Term)> {
        if !self.can_rewrite(dir) {
            return Vec::new();
        }
        let (from, to) = match dir {
            Direction::LeftToRight => (&self.lhs, &self.rhs),
            Direction::RightToLeft => (&self.rhs, &self.lhs),
        };
        let mut matches = Vec::new();
        match_pattern(from, t, Instantiation::default(), &mut matches);
        let avoid = t.all_names();
        let mut out: Vec<(Instantiation, Term)> = Vec::new();
        for inst in matches {
            if !self.side_conditions_hold(&inst) {
                continue;
            }
            let result = to.instantiate(&inst, &avoid);
            if !out.iter().any(|(_, r)| r.alpha_eq(&result)) {
                out.push((inst, result));
            }
        }
        out
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(x) | Pattern::Term(x) | Pattern::Value(x) => f.write_str(x),
            Pattern::Lam(x, b) => write!(f, "(\\{x}. {b})"),
            Pattern::Shift(k, b) => write!(f, "(S {k}. {b})"),
            Pattern::App(a, b) => write!(f, "({a} {b})"),
            Pattern::Reset(b) => write!(f, "<{b}>"),
            Pattern::Plug(e, b) => write!(f, "{e}[{b}]"),
            Pattern::Subst(p, x, q) => write!(f, "{p}[{x} := {q}]"),
        }
    }
}

impl fmt::Display for AxiomSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} = {}", self.name, self.lhs, self.rhs)?;
        for c in &self.side_conditions {
            match c {
                SideCondition::NotFreeIn { var, meta } => write!(f, "  if {var} not in fv({meta})")?,
            }
        }
        Ok(())
    }
}

pub(crate) fn subterm_at<'a>(t: &'a Term, path: &[usize]) -> Option<&'a Term> {
    let Some((&first, rest)) = path.split_first() else {
        return Some(t);
    };
    let child = match (t, first) {
        (Term::Lam(_, b) | Term::Shift(_, b) | Term::Reset(b), 0) => b,
        (Term::App(a, _), 0) => a,
        (Term::App(_, b), 1) => b,
        _ => return None,
    };
    subterm_at(child, rest)
}

pub(crate) fn replace_at(t: &Term, path: &[usize], new: Term) -> Term {
    let Some((&first, rest)) = path.split_first() else {
        return new;
    };
    match (t, first) {
        (Term::Lam(x, b), 0) => Term::Lam(x.clone(), Box::new(replace_at(b, rest, new))),
        (Term::Shift(x, b), 0) => Term::Shift(x.clone(), Box::new(replace_at(b, rest, new))),
        (Term::Reset(b), 0) => Term::reset(replace_at(b, rest, new)),
        (Term::App(a, b), 0) => Term::app(replace_at(a, rest, new), (**b).clone()),
        (Term::App(a, b), 1) => Term::app((**a).clone(), replace_at(b, rest, new)),
        _ => panic!("invalid position {path:?}"),
    }
}

/// Positions of all subterms, in pre-order.
pub(crate) fn positions(t: &Term) -> Vec<Vec<usize>> {
    fn go(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(path.clone());
        match t {
            Term::Var(_) => {}
            Term::Lam(_, b) | Term::Shift(_, b) | Term::Reset(b) => {
                path.push(0);
                go(b, path, out);
                path.pop();
            }
            Term::App(a, b) => {
                path.push(0);
                go(a, path, out);
                path.pop();
                path.push(1);
                go(b, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Rewrites the subterm at `position` with `axiom` in direction `dir`,
/// returning every resulting whole term.
pub fn rewrite_at(
    t: &Term,
    position: &[usize],
    axiom: &AxiomSchema,
    dir: Direction,
) -> Vec<(Instantiation, Term)> {
    let Some(sub) = subterm_at(t, position) else {
        return Vec::new();
    };
    axiom
        .rewrite_root(sub, dir)
        .into_iter()
        .map(|(inst, r)| (inst, replace_at(t, position, r)))
        .collect()
}
