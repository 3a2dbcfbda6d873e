//! Call-by-value reduction semantics.
//!
//! A closed term is either a normal form (a value, or a stuck term
//! `E[S k. t]` with no enclosing reset) or it splits uniquely into an
//! evaluation context and one of three redexes:
//!
//! ```text
//! F[(\x. t) v]      -> F[t[x := v]]
//! F[<E[S k. t]>]    -> F[<t[k := \x. <E[x]>]>]     x fresh
//! F[<v>]            -> F[v]
//! ```
//!
//! [`decompose`] is the single structural recursion that finds the split;
//! every other operation here is built on it.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

mod machine;

use crate::syntax::{fresh_name, EvalContext, EvalFrame, Name, PureContext, PureFrame, Term, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("term is not closed (free variables: {})", .0.join(", "))]
    OpenTerm(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Redex {
    /// `(\binder. body) arg`
    BetaV { binder: Name, body: Term, arg: Value },
    /// `<context[S binder. body]>`
    ShiftCapture {
        context: PureContext,
        binder: Name,
        body: Term,
    },
    /// `<v>`
    ResetValue(Value),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalFormKind {
    Value,
    Stuck,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    NormalForm(NormalFormKind),
    Split(EvalContext, Redex),
}

/// Result of running a closed term with a step budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Value(Term),
    Stuck(Term),
    /// The budget ran out; carries the number of steps spent.
    Timeout(usize),
}

impl Outcome {
    pub fn normal_form(&self) -> Option<&Term> {
        match self {
            Outcome::Value(t) | Outcome::Stuck(t) => Some(t),
            Outcome::Timeout(_) => None,
        }
    }

    pub fn kind(&self) -> Option<NormalFormKind> {
        match self {
            Outcome::Value(_) => Some(NormalFormKind::Value),
            Outcome::Stuck(_) => Some(NormalFormKind::Stuck),
            Outcome::Timeout(_) => None,
        }
    }

    pub fn is_timeout(&self) -> bool {
        matches!(self, Outcome::Timeout(_))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Value(t) => write!(f, "value: {t}"),
            Outcome::Stuck(t) => write!(f, "stuck: {t}"),
            Outcome::Timeout(_) => f.write_str("timeout"),
        }
    }
}

impl Redex {
    /// The redex as a term.
    pub fn to_term(&self) -> Term {
        match self {
            Redex::BetaV { binder, body, arg } => Term::app(
                Term::Lam(binder.clone(), Box::new(body.clone())),
                arg.as_term().clone(),
            ),
            Redex::ShiftCapture {
                context,
                binder,
                body,
            } => Term::reset(context.plug(Term::Shift(binder.clone(), Box::new(body.clone())))),
            Redex::ResetValue(v) => Term::reset(v.as_term().clone()),
        }
    }

    /// Applies the matching reduction rule.
    pub fn contract(self) -> Term {
        match self {
            Redex::BetaV { binder, body, arg } => body.substitute(&binder, arg.as_term()),
            Redex::ResetValue(v) => v.into_term(),
            Redex::ShiftCapture {
                context,
                binder,
                body,
            } => {
                let mut taken = BTreeSet::new();
                context.collect_names(&mut taken);
                body.collect_names(&mut taken);
                let x = fresh_name("x", |n| taken.contains(n));
                let captured = Term::Lam(x.clone(), Box::new(Term::reset(context.plug_owned(Term::Var(x)))));
                Term::reset(body.substitute(&binder, &captured))
            }
        }
    }
}

// Owned decomposition. Frame lists are built innermost-first while returning
// from the recursion and reversed once at the top.
enum Dec {
    Value(Term),
    Stuck(Vec<PureFrame>, Name, Term),
    Split(Vec<EvalFrame>, Redex),
    Open(Name),
}

fn dec(t: Term) -> Dec {
    match t {
        Term::Var(x) => Dec::Open(x),
        Term::Lam(..) => Dec::Value(t),
        Term::Shift(k, body) => Dec::Stuck(Vec::new(), k, *body),
        Term::Reset(inner) => match dec(*inner) {
            Dec::Value(v) => Dec::Split(Vec::new(), Redex::ResetValue(Value::new(v).expect("lambda"))),
            Dec::Stuck(mut frames, binder, body) => {
                frames.reverse();
                Dec::Split(
                    Vec::new(),
                    Redex::ShiftCapture {
                        context: PureContext::from_frames(frames),
                        binder,
                        body,
                    },
                )
            }
            Dec::Split(mut frames, r) => {
                frames.push(EvalFrame::Reset);
                Dec::Split(frames, r)
            }
            open @ Dec::Open(_) => open,
        },
        Term::App(fun, arg) => match dec(*fun) {
            Dec::Split(mut frames, r) => {
                frames.push(EvalFrame::AppL(*arg));
                Dec::Split(frames, r)
            }
            Dec::Stuck(mut frames, k, body) => {
                frames.push(PureFrame::AppL(*arg));
                Dec::Stuck(frames, k, body)
            }
            Dec::Value(f) => {
                let f = Value::new(f).expect("lambda");
                match dec(*arg) {
                    Dec::Split(mut frames, r) => {
                        frames.push(EvalFrame::AppR(f));
                        Dec::Split(frames, r)
                    }
                    Dec::Stuck(mut frames, k, body) => {
                        frames.push(PureFrame::AppR(f));
                        Dec::Stuck(frames, k, body)
                    }
                    Dec::Value(a) => {
                        let (binder, body) = match f.into_term() {
                            Term::Lam(x, b) => (x, *b),
                            _ => unreachable!(),
                        };
                        Dec::Split(
                            Vec::new(),
                            Redex::BetaV {
                                binder,
                                body,
                                arg: Value::new(a).expect("lambda"),
                            },
                        )
                    }
                    open @ Dec::Open(_) => open,
                }
            }
            open @ Dec::Open(_) => open,
        },
    }
}

fn ensure_closed(t: &Term) -> Result<(), SemanticsError> {
    if t.is_closed() {
        Ok(())
    } else {
        Err(SemanticsError::OpenTerm(
            t.free_vars().iter().map(|x| x.to_string()).collect(),
        ))
    }
}

/// Unique decomposition of a closed term.
pub fn decompose(t: &Term) -> Result<Decomposition, SemanticsError> {
    ensure_closed(t)?;
    Ok(match dec(t.clone()) {
        Dec::Value(_) => Decomposition::NormalForm(NormalFormKind::Value),
        Dec::Stuck(..) => Decomposition::NormalForm(NormalFormKind::Stuck),
        Dec::Split(mut frames, r) => {
            frames.reverse();
            Decomposition::Split(EvalContext::from_frames(frames), r)
        }
        Dec::Open(_) => unreachable!("closedness checked"),
    })
}

/// Splits a stuck term `E[S k. t]` into its pure context, binder and body.
pub fn stuck_parts(t: &Term) -> Option<(PureContext, Name, Term)> {
    match dec(t.clone()) {
        Dec::Stuck(mut frames, k, body) => {
            frames.reverse();
            Some((PureContext::from_frames(frames), k, body))
        }
        _ => None,
    }
}

pub(crate) enum Step {
    Normal(Term, NormalFormKind),
    Reduced(Term),
}

// Single step on a term already known to be closed.
pub(crate) fn step_owned(t: Term) -> Step {
    match dec(t) {
        Dec::Value(v) => Step::Normal(v, NormalFormKind::Value),
        Dec::Stuck(mut frames, k, body) => {
            frames.reverse();
            let term = PureContext::from_frames(frames).plug_owned(Term::Shift(k, Box::new(body)));
            Step::Normal(term, NormalFormKind::Stuck)
        }
        Dec::Split(mut frames, r) => {
            frames.reverse();
            Step::Reduced(EvalContext::from_frames(frames).plug_owned(r.contract()))
        }
        Dec::Open(x) => unreachable!("free variable {x} in a closed term"),
    }
}

/// One reduction step; `None` exactly when `t` is a normal form.
pub fn reduce_step(t: &Term) -> Result<Option<Term>, SemanticsError> {
    ensure_closed(t)?;
    Ok(match step_owned(t.clone()) {
        Step::Normal(..) => None,
        Step::Reduced(t) => Some(t),
    })
}

pub fn is_stuck(t: &Term) -> Result<bool, SemanticsError> {
    Ok(decompose(t)? == Decomposition::NormalForm(NormalFormKind::Stuck))
}

/// Runs at most `fuel` steps.
pub fn evaluate(t: &Term, fuel: usize) -> Result<Outcome, SemanticsError> {
    evaluate_counted(t, fuel).map(|(o, _)| o)
}

/// Like [`evaluate`], also returning the number of steps taken.
pub fn evaluate_counted(t: &Term, fuel: usize) -> Result<(Outcome, usize), SemanticsError> {
    ensure_closed(t)?;
    Ok(run_closed(t.clone(), fuel))
}

pub(crate) fn run_closed(t: Term, fuel: usize) -> (Outcome, usize) {
    machine::run(&t, fuel)
}

/// A closed term run once, ahead of runs of `C[t]` for many evaluation
/// contexts `C`. Reduction of `C[t]` starts by reducing `t` in place, so
/// those runs can resume from `C[nf]` with the fuel that is left.
pub(crate) struct Prefix {
    nf: Option<(Term, usize)>,
    max_fuel: usize,
}

impl Prefix {
    pub(crate) fn new(t: Term, max_fuel: usize) -> Prefix {
        let nf = match run_closed(t, max_fuel) {
            (Outcome::Value(v), n) | (Outcome::Stuck(v), n) => Some((v, n)),
            (Outcome::Timeout(_), _) => None,
        };
        Prefix { nf, max_fuel }
    }

    /// The outcome of `plug(t)` within `fuel` steps, `fuel` at most the
    /// fuel the prefix was run with.
    pub(crate) fn run_in(&self, plug: impl FnOnce(Term) -> Term, fuel: usize) -> Outcome {
        debug_assert!(fuel <= self.max_fuel);
        match &self.nf {
            Some((nf, n)) if *n <= fuel => match run_closed(plug(nf.clone()), fuel - n).0 {
                Outcome::Timeout(_) => Outcome::Timeout(fuel),
                o => o,
            },
            _ => Outcome::Timeout(fuel),
        }
    }
}

/// The reduction sequence from `t`, at most `fuel + 1` terms long.
pub fn trace(t: &Term, fuel: usize) -> Result<Vec<Term>, SemanticsError> {
    ensure_closed(t)?;
    let mut out = vec![t.clone()];
    let mut cur = t.clone();
    for _ in 0..fuel {
        match step_owned(cur) {
            Step::Normal(..) => break,
            Step::Reduced(next) => {
                out.push(next.clone());
                cur = next;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    const OMEGA: &str = r"(\x. x x) (\x. x x)";

    #[test]
    fn beta_redex_at_the_root() {
        let d = decompose(&p(r"(\x. x) (\y. y)")).unwrap();
        let expected = Redex::BetaV {
            binder: Name::from("x"),
            body: p("x"),
            arg: Value::new(p(r"\y. y")).unwrap(),
        };
        assert_eq!(d, Decomposition::Split(EvalContext::hole(), expected));
    }

    #[test]
    fn bare_shift_is_stuck() {
        assert_eq!(
            decompose(&p("S k. k")).unwrap(),
            Decomposition::NormalForm(NormalFormKind::Stuck)
        );
    }

    #[test]
    fn shift_capture_under_reset() {
        let d = decompose(&p(r"<(\x. x) (S k. k)>")).unwrap();
        let context =
            PureContext::from_frames(vec![PureFrame::AppR(Value::new(p(r"\x. x")).unwrap())]);
        let expected = Redex::ShiftCapture {
            context,
            binder: Name::from("k"),
            body: p("k"),
        };
        assert_eq!(d, Decomposition::Split(EvalContext::hole(), expected));
    }

    #[test]
    fn open_terms_are_rejected() {
        assert!(matches!(decompose(&p("x")), Err(SemanticsError::OpenTerm(_))));
        assert!(reduce_step(&p(r"(\y. y) z")).is_err());
        assert!(is_stuck(&p("S k. y")).is_err());
        assert!(evaluate(&p("y"), 3).is_err());
    }

    #[test]
    fn reset_of_value_steps_to_value() {
        assert_eq!(reduce_step(&p(r"<\y. y>")).unwrap(), Some(p(r"\y. y")));
    }

    #[test]
    fn shift_step_captures_empty_context() {
        let out = reduce_step(&p("<S k. k>")).unwrap().unwrap();
        assert_eq!(out, p(r"<\x. <x>>"));
    }

    #[test]
    fn fresh_variable_avoids_names_of_the_redex() {
        let out = reduce_step(&p(r"<(\x. x) (S k. k)>")).unwrap().unwrap();
        assert!(out.alpha_eq(&p(r"<\y. <(\x. x) y>>")));
        assert_eq!(out.to_string(), r"<\x1. <(\x. x) x1>>");
    }

    #[test]
    fn omega_reduces_to_itself() {
        let omega = p(OMEGA);
        let next = reduce_step(&omega).unwrap().unwrap();
        assert!(next.alpha_eq(&omega));
    }

    #[test]
    fn stuck_examples() {
        assert!(is_stuck(&p(&format!("S k. {OMEGA}"))).unwrap());
        assert!(!is_stuck(&p(r"\x. x")).unwrap());
        assert!(!is_stuck(&p("<S k. k>")).unwrap());
        assert!(is_stuck(&p(r"(\x. x) (S k. k) (\y. y)")).unwrap());
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(evaluate(&p("<S k. k>"), 10).unwrap(), Outcome::Value(p(r"\x. <x>")));
        assert_eq!(evaluate(&p(OMEGA), 1000).unwrap(), Outcome::Timeout(1000));
        let stuck = p(r"(\x. x) (S k. \y. y)");
        assert_eq!(evaluate(&stuck, 10).unwrap(), Outcome::Stuck(stuck));
        assert_eq!(
            evaluate_counted(&p("<S k. k>"), 10).unwrap(),
            (Outcome::Value(p(r"\x. <x>")), 2)
        );
        assert_eq!(
            evaluate(&p(r"<\y. y>"), 0).unwrap(),
            Outcome::Timeout(0),
            "a reducible term with zero fuel times out"
        );
        assert_eq!(evaluate(&p(r"\y. y"), 0).unwrap(), Outcome::Value(p(r"\y. y")));
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace(&p(r"<\y. y>"), 5).unwrap(), vec![p(r"<\y. y>"), p(r"\y. y")]);
        let omega = p(OMEGA);
        let tr = trace(&omega, 2).unwrap();
        assert_eq!(tr.len(), 3);
        assert!(tr.iter().all(|t| t.alpha_eq(&omega)));
    }

    #[test]
    fn reset_beta_example_trace() {
        // <(\x. t0) <t1>> with t0 = x, t1 = \z. z
        let tr = trace(&p(r"<(\x. x) <\z. z>>"), 10).unwrap();
        assert_eq!(tr.len(), 4);
        assert_eq!(tr[1], p(r"<(\x. x) (\z. z)>"));
        assert_eq!(tr[2], p(r"<\z. z>"));
        assert_eq!(tr[3], p(r"\z. z"));
    }

    #[test]
    fn stuck_parts_splits_pure_context() {
        let (ctx, k, body) = stuck_parts(&p(r"(S k. k) (\y. y)")).unwrap();
        assert_eq!(&*k, "k");
        assert_eq!(body, p("k"));
        assert_eq!(ctx.plug(p("h")), p(r"h (\y. y)"));
        assert!(stuck_parts(&p(r"\y. y")).is_none());
    }
}
