//! CPS translation into the pure lambda-calculus, beta-eta normalization of
//! pure terms, CPS equivalence, and the equational axioms of shift and reset.
//!
//! The translation uses one continuation parameter:
//!
//! ```text
//! [x]        = \c. c x
//! [\x. t]    = \c. c (\x. [t])
//! [t0 t1]    = \c. [t0] (\f. [t1] (\a. f a c))
//! [<t>]      = \c. c ([t] (\w. w))
//! [S k. t]   = \c. [t][k := \a. \d. d (c a)] (\w. w)
//! ```
//!
//! The auxiliary names `c`, `f`, `a`, `w`, `d` are chosen fresh for the
//! translated term.

mod axioms;
mod search;

use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::{fresh_name, Name, Term};

pub use axioms::{
    kh_axioms, rewrite_at, AxiomSchema, ContextMatch, Direction, Instantiation, Pattern,
    SideCondition, SpineFrame,
};
pub use search::{kh_search, kh_search_bounded, Derivation, DerivationStep};

/// A term without shift and reset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PureTerm(Term);

impl PureTerm {
    pub fn new(t: Term) -> Option<PureTerm> {
        t.is_pure().then_some(PureTerm(t))
    }

    pub fn as_term(&self) -> &Term {
        &self.0
    }

    pub fn into_term(self) -> Term {
        self.0
    }
}

impl fmt::Display for PureTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CpsVerdict {
    Equiv,
    Inequiv,
    Unknown,
}

impl fmt::Display for CpsVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CpsVerdict::Equiv => "equiv",
            CpsVerdict::Inequiv => "inequiv",
            CpsVerdict::Unknown => "unknown",
        })
    }
}

struct CpsNames {
    cont: Name,
    fun: Name,
    arg: Name,
    id: Name,
    inner: Name,
}

pub fn cps_translate(t: &Term) -> PureTerm {
    let taken = t.all_names();
    let mut used: BTreeSet<Name> = taken.clone();
    let mut pick = |base: &str| {
        let n = fresh_name(base, |s| used.contains(s));
        used.insert(n.clone());
        n
    };
    let names = CpsNames {
        cont: pick("c"),
        fun: pick("f"),
        arg: pick("a"),
        id: pick("w"),
        inner: pick("d"),
    };
    PureTerm(translate(t, &names))
}

fn var(n: &Name) -> Term {
    Term::Var(n.clone())
}

fn lam(n: &Name, body: Term) -> Term {
    Term::Lam(n.clone(), Box::new(body))
}

fn translate(t: &Term, n: &CpsNames) -> Term {
    let c = &n.cont;
    let identity = || lam(&n.id, var(&n.id));
    match t {
        Term::Var(x) => lam(c, Term::app(var(c), var(x))),
        Term::Lam(x, body) => lam(c, Term::app(var(c), lam(x, translate(body, n)))),
        Term::App(t0, t1) => {
            let apply = Term::apps(var(&n.fun), [var(&n.arg), var(c)]);
            let arg_cont = lam(&n.arg, apply);
            let fun_cont = lam(&n.fun, Term::app(translate(t1, n), arg_cont));
            lam(c, Term::app(translate(t0, n), fun_cont))
        }
        Term::Reset(body) => lam(c, Term::app(var(c), Term::app(translate(body, n), identity()))),
        Term::Shift(k, body) => {
            let resume = lam(
                &n.arg,
                lam(&n.inner, Term::app(var(&n.inner), Term::app(var(c), var(&n.arg)))),
            );
            let body = translate(body, n).substitute(k, &resume);
            lam(c, Term::app(body, identity()))
        }
    }
}

// Normal forms larger than this are treated like fuel exhaustion.
const MAX_NORMALIZATION_SIZE: usize = 200_000;

/// Leftmost-outermost beta-reduction to beta-normal form (at most `fuel`
/// contractions), followed by eta-contraction to a fixed point. `None` when
/// the budget is exhausted.
pub fn beta_eta_normalize(t: &PureTerm, fuel: usize) -> Option<PureTerm> {
    let mut cur = t.0.clone();
    let mut steps = 0;
    loop {
        match beta_step(cur) {
            Ok(next) => {
                if steps == fuel || next.size() > MAX_NORMALIZATION_SIZE {
                    return None;
                }
                steps += 1;
                cur = next;
            }
            Err(normal) => return Some(PureTerm(eta_normalize(normal))),
        }
    }
}

// Ok(reduct) after one leftmost-outermost contraction, Err(term) if normal.
fn beta_step(t: Term) -> Result<Term, Term> {
    match t {
        Term::App(f, a) => match *f {
            Term::Lam(x, body) => Ok(body.substitute(&x, &a)),
            f => match beta_step(f) {
                Ok(f) => Ok(Term::App(Box::new(f), a)),
                Err(f) => match beta_step(*a) {
                    Ok(a) => Ok(Term::app(f, a)),
                    Err(a) => Err(Term::app(f, a)),
                },
            },
        },
        Term::Lam(x, body) => match beta_step(*body) {
            Ok(b) => Ok(Term::Lam(x, Box::new(b))),
            Err(b) => Err(Term::Lam(x, Box::new(b))),
        },
        other => Err(other),
    }
}

fn eta_normalize(t: Term) -> Term {
    match t {
        Term::Lam(x, body) => {
            let body = eta_normalize(*body);
            match body {
                Term::App(f, a) if matches!(&*a, Term::Var(y) if *y == x) && !f.has_free(&x) => *f,
                body => Term::Lam(x, Box::new(body)),
            }
        }
        Term::App(f, a) => Term::app(eta_normalize(*f), eta_normalize(*a)),
        other => other,
    }
}

/// Compares the beta-eta normal forms of both CPS images.
pub fn cps_equiv(t0: &Term, t1: &Term, fuel: usize) -> CpsVerdict {
    let n0 = beta_eta_normalize(&cps_translate(t0), fuel);
    let n1 = beta_eta_normalize(&cps_translate(t1), fuel);
    match (n0, n1) {
        (Some(a), Some(b)) if a.0.alpha_eq(&b.0) => CpsVerdict::Equiv,
        (Some(_), Some(_)) => CpsVerdict::Inequiv,
        _ => CpsVerdict::Unknown,
    }
}
