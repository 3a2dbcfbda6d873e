//! Abstract syntax of the call-by-value lambda-calculus with shift and reset.
//!
//! Terms use named variables. Alpha-equivalence ([`Term::alpha_eq`]) is the
//! equality used by every other module; [`Term::alpha_key`] produces a
//! nameless form suitable for hashing terms up to renaming of bound names.

mod context;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use context::{EvalContext, EvalFrame, GeneralContext, PureContext, PureFrame};
pub use parse::{parse, parse_with_aliases, ParseError};

/// Variable name. Cheap to clone and shareable across threads.
pub type Name = Arc<str>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    Lam(Name, Box<Term>),
    App(Box<Term>, Box<Term>),
    Shift(Name, Box<Term>),
    Reset(Box<Term>),
}

/// Nameless (index-based) shadow of a [`Term`]. Two terms are alpha-equivalent
/// iff their nameless forms are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nameless {
    Bound(usize),
    Free(Name),
    Lam(Box<Nameless>),
    App(Box<Nameless>, Box<Nameless>),
    Shift(Box<Nameless>),
    Reset(Box<Nameless>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("expected a value (lambda-abstraction), found `{0}`")]
    NotAValue(Term),
    #[error("substitution range must be closed, `{0}` has free variables")]
    OpenValue(Term),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Name::from(name))
    }

    pub fn lam(binder: &str, body: Term) -> Term {
        Term::Lam(Name::from(binder), Box::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    /// Left-nested application `f a1 a2 ... an`.
    pub fn apps(fun: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(fun, Term::app)
    }

    pub fn shift(binder: &str, body: Term) -> Term {
        Term::Shift(Name::from(binder), Box::new(body))
    }

    pub fn reset(body: Term) -> Term {
        Term::Reset(Box::new(body))
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Term::Lam(..))
    }

    /// Programs are terms with a top-level reset.
    pub fn is_program(&self) -> bool {
        matches!(self, Term::Reset(_))
    }

    /// True when the term contains no shift and no reset.
    pub fn is_pure(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Lam(_, b) => b.is_pure(),
            Term::App(a, b) => a.is_pure() && b.is_pure(),
            Term::Shift(..) | Term::Reset(_) => false,
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Lam(_, b) | Term::Shift(_, b) | Term::Reset(b) => 1 + b.size(),
            Term::App(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        fn go<'a>(t: &'a Term, bound: &mut Vec<&'a str>) -> bool {
            match t {
                Term::Var(x) => bound.iter().any(|b| *b == &**x),
                Term::Lam(x, b) | Term::Shift(x, b) => {
                    bound.push(x);
                    let r = go(b, bound);
                    bound.pop();
                    r
                }
                Term::App(a, b) => go(a, bound) && go(b, bound),
                Term::Reset(b) => go(b, bound),
            }
        }
        go(self, &mut Vec::new())
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => &**y == x,
            Term::Lam(y, b) | Term::Shift(y, b) => &**y != x && b.has_free(x),
            Term::App(a, b) => a.has_free(x) || b.has_free(x),
            Term::Reset(b) => b.has_free(x),
        }
    }

    /// Every name occurring in the term, bound or free.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    pub(crate) fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Lam(x, b) | Term::Shift(x, b) => {
                out.insert(x.clone());
                b.collect_names(out);
            }
            Term::App(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Term::Reset(b) => b.collect_names(out),
        }
    }

    /// Capture-avoiding substitution `self[x := s]`.
    pub fn subst(&self, x: &str, s: &Term) -> Term {
        self.clone().substitute(x, s)
    }

    /// Owned variant of [`Term::subst`]; reuses the nodes of `self`.
    pub fn substitute(self, x: &str, s: &Term) -> Term {
        let s_free = s.free_vars();
        substitute_rec(self, x, s, &s_free)
    }

    /// Alpha-equivalence.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        let mut env = Vec::new();
        alpha_eq_rec(self, other, &mut env)
    }

    pub fn alpha_key(&self) -> Nameless {
        let mut bound = Vec::new();
        to_nameless(self, &mut bound)
    }
}

fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Lam(x, b) | Term::Shift(x, b) => {
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        Term::App(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Term::Reset(b) => collect_free(b, bound, out),
    }
}

fn substitute_rec(t: Term, x: &str, s: &Term, s_free: &BTreeSet<Name>) -> Term {
    match t {
        Term::Var(y) => {
            if &*y == x {
                s.clone()
            } else {
                Term::Var(y)
            }
        }
        Term::App(a, b) => Term::App(
            Box::new(substitute_rec(*a, x, s, s_free)),
            Box::new(substitute_rec(*b, x, s, s_free)),
        ),
        Term::Reset(b) => Term::Reset(Box::new(substitute_rec(*b, x, s, s_free))),
        Term::Lam(y, b) => {
            let (y, b) = subst_under_binder(y, *b, x, s, s_free);
            Term::Lam(y, Box::new(b))
        }
        Term::Shift(y, b) => {
            let (y, b) = subst_under_binder(y, *b, x, s, s_free);
            Term::Shift(y, Box::new(b))
        }
    }
}

fn subst_under_binder(
    y: Name,
    body: Term,
    x: &str,
    s: &Term,
    s_free: &BTreeSet<Name>,
) -> (Name, Term) {
    if &*y == x {
        return (y, body);
    }
    if s_free.contains(&y) && body.has_free(x) {
        let mut avoid = body.all_names();
        avoid.extend(s_free.iter().cloned());
        avoid.insert(Name::from(x));
        let fresh = fresh_name(&y, |n| avoid.contains(n));
        let renamed = body.substitute(&y, &Term::Var(fresh.clone()));
        return (fresh.clone(), substitute_rec(renamed, x, s, s_free));
    }
    (y, substitute_rec(body, x, s, s_free))
}

fn alpha_eq_rec<'a>(a: &'a Term, b: &'a Term, env: &mut Vec<(&'a str, &'a str)>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            let ix = env.iter().rposition(|(l, _)| *l == &**x);
            let iy = env.iter().rposition(|(_, r)| *r == &**y);
            match (ix, iy) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Term::Lam(x, s), Term::Lam(y, t)) | (Term::Shift(x, s), Term::Shift(y, t)) => {
            env.push((x, y));
            let r = alpha_eq_rec(s, t, env);
            env.pop();
            r
        }
        (Term::App(a0, a1), Term::App(b0, b1)) => {
            alpha_eq_rec(a0, b0, env) && alpha_eq_rec(a1, b1, env)
        }
        (Term::Reset(s), Term::Reset(t)) => alpha_eq_rec(s, t, env),
        _ => false,
    }
}

fn to_nameless<'a>(t: &'a Term, bound: &mut Vec<&'a str>) -> Nameless {
    match t {
        Term::Var(x) => match bound.iter().rposition(|b| *b == &**x) {
            Some(i) => Nameless::Bound(bound.len() - 1 - i),
            None => Nameless::Free(x.clone()),
        },
        Term::Lam(x, b) => {
            bound.push(x);
            let r = Nameless::Lam(Box::new(to_nameless(b, bound)));
            bound.pop();
            r
        }
        Term::Shift(x, b) => {
            bound.push(x);
            let r = Nameless::Shift(Box::new(to_nameless(b, bound)));
            bound.pop();
            r
        }
        Term::App(a, b) => Nameless::App(
            Box::new(to_nameless(a, bound)),
            Box::new(to_nameless(b, bound)),
        ),
        Term::Reset(b) => Nameless::Reset(Box::new(to_nameless(b, bound))),
    }
}

/// Returns `base` itself when it is not taken, otherwise the first
/// `stem1`, `stem2`, ... that is free, where `stem` is `base` without its
/// trailing digits.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    if !taken(base) {
        return Name::from(base);
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    (1..)
        .map(|n| format!("{stem}{n}"))
        .find(|cand| !taken(cand))
        .map(Name::from)
        .expect("unbounded name supply")
}

/// A term known to be a lambda-abstraction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Value(Term);

impl Value {
    pub fn new(t: Term) -> Result<Value, SyntaxError> {
        if t.is_value() {
            Ok(Value(t))
        } else {
            Err(SyntaxError::NotAValue(t))
        }
    }

    pub fn as_term(&self) -> &Term {
        &self.0
    }

    pub fn into_term(self) -> Term {
        self.0
    }

    /// Binder and body of the abstraction.
    pub fn parts(&self) -> (&Name, &Term) {
        match &self.0 {
            Term::Lam(x, b) => (x, b),
            _ => unreachable!("Value always wraps a Lam"),
        }
    }
}

impl TryFrom<Term> for Value {
    type Error = SyntaxError;

    fn try_from(t: Term) -> Result<Self, Self::Error> {
        Value::new(t)
    }
}

impl From<Value> for Term {
    fn from(v: Value) -> Term {
        v.0
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Finite map from variables to closed values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution(BTreeMap<Name, Value>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: &str, v: Value) -> Result<(), SyntaxError> {
        if !v.as_term().is_closed() {
            return Err(SyntaxError::OpenValue(v.into_term()));
        }
        self.0.insert(Name::from(x), v);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Value)> {
        self.0.iter()
    }

    /// Applies the substitution. The range is closed, so the order in which
    /// bindings are applied does not matter.
    pub fn apply(&self, t: &Term) -> Term {
        self.0
            .iter()
            .fold(t.clone(), |acc, (x, v)| acc.substitute(x, v.as_term()))
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} := {v}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    fn names(xs: &[&str]) -> BTreeSet<Name> {
        xs.iter().map(|x| Name::from(*x)).collect()
    }

    #[test]
    fn free_vars_examples() {
        assert!(p(r"\x. x").free_vars().is_empty());
        assert_eq!(p(r"x (\y. z)").free_vars(), names(&["x", "z"]));
        assert_eq!(p("S k. k x").free_vars(), names(&["x"]));
        assert!(p(r"\x. x").is_closed());
        assert!(!p("S k. k x").is_closed());
    }

    #[test]
    fn subst_hits_variable() {
        let id = p(r"\y. y");
        assert_eq!(p("x").subst("x", &id), id);
    }

    #[test]
    fn subst_stops_at_shadowing_binder() {
        let t = p(r"\x. x");
        assert_eq!(t.subst("x", &p(r"\y. y")), t);
        let s = p("S x. x");
        assert_eq!(s.subst("x", &p(r"\y. y")), s);
    }

    #[test]
    fn subst_renames_to_avoid_capture() {
        let out = p(r"\y. x").subst("x", &p(r"\z. y"));
        assert!(out.alpha_eq(&p(r"\w. \z. y")));
        match &out {
            Term::Lam(b, _) => assert_eq!(&**b, "y1"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn alpha_eq_distinguishes_binding_structure() {
        assert!(p(r"\x. \y. x").alpha_eq(&p(r"\a. \b. a")));
        assert!(!p(r"\x. \y. x").alpha_eq(&p(r"\a. \b. b")));
        assert!(!p(r"\x. x").alpha_eq(&p("S x. x")));
        assert!(p("x").alpha_eq(&p("x")));
        assert!(!p(r"\x. y").alpha_eq(&p(r"\y. y")));
        assert_eq!(p(r"\x. \y. x").alpha_key(), p(r"\a. \b. a").alpha_key());
    }

    #[test]
    fn fresh_names_use_counter_suffix() {
        let taken = names(&["x", "x1", "k2"]);
        assert_eq!(&*fresh_name("x", |n| taken.contains(n)), "x2");
        assert_eq!(&*fresh_name("y", |n| taken.contains(n)), "y");
        assert_eq!(&*fresh_name("k2", |n| taken.contains(n)), "k1");
    }

    #[test]
    fn value_rejects_non_lambdas() {
        assert!(Value::new(p("x")).is_err());
        assert!(Value::new(p("<\\x. x>")).is_err());
        assert!(Value::new(p("\\x. x")).is_ok());
    }

    #[test]
    fn substitution_requires_closed_range() {
        let mut s = Substitution::new();
        assert!(s.insert("x", Value::new(p(r"\y. z")).unwrap()).is_err());
        s.insert("x", Value::new(p(r"\y. y")).unwrap()).unwrap();
        s.insert("z", Value::new(p(r"\a. \b. a")).unwrap()).unwrap();
        let out = s.apply(&p("x z"));
        assert!(out.alpha_eq(&p(r"(\y. y) (\a. \b. a)")));
    }
}
