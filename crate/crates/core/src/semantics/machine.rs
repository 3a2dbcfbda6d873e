//! Environment machine for running closed terms.
//!
//! It takes exactly the reduction steps of the substitution semantics
//! (beta, shift capture and reset removal each count one), but never copies
//! terms: code is borrowed from the input and bindings live in environments.
//! Normal forms are read back into terms at the end, alpha-equivalent to what
//! the substitution semantics produces.

use std::rc::Rc;

use super::Outcome;
use crate::syntax::{Name, Term};

#[derive(Clone)]
enum Val<'a> {
    Clo(&'a Name, &'a Term, Env<'a>),
    // Captured continuation `\x. <E[x]>`, frames innermost last.
    Cont(Rc<[Frame<'a>]>),
}

#[derive(Clone)]
enum Frame<'a> {
    // `[] t`, with `t` still to be evaluated.
    Arg(&'a Term, Env<'a>),
    // `v []`
    Fun(Val<'a>),
    Reset,
}

type Env<'a> = Option<Rc<Bind<'a>>>;

struct Bind<'a> {
    name: &'a Name,
    val: Val<'a>,
    next: Env<'a>,
}

fn bind<'a>(env: &Env<'a>, name: &'a Name, val: Val<'a>) -> Env<'a> {
    Some(Rc::new(Bind {
        name,
        val,
        next: env.clone(),
    }))
}

fn lookup<'a>(env: &Env<'a>, x: &str) -> Option<Val<'a>> {
    let mut cur = env.as_ref();
    while let Some(b) = cur {
        if &**b.name == x {
            return Some(b.val.clone());
        }
        cur = b.next.as_ref();
    }
    None
}

#[derive(Clone)]
enum State<'a> {
    Eval(&'a Term, Env<'a>),
    Apply(Val<'a>),
}

/// Runs a closed term for at most `fuel` steps, returning the outcome and
/// the number of steps taken.
pub(crate) fn run(t: &Term, fuel: usize) -> (Outcome, usize) {
    let mut stack: Vec<Frame> = Vec::new();
    let mut state = State::Eval(t, None);
    let mut steps = 0;
    // Brent's cycle detection over whole machine states: a state that comes
    // back means the run can never reach a normal form.
    let mut saved: Option<(State, Vec<Frame>)> = None;
    let (mut power, mut since) = (1usize, 0usize);
    loop {
        if let Some((s0, st0)) = &saved {
            if same_config(s0, st0, &state, &stack) {
                return (Outcome::Timeout(fuel), fuel);
            }
        }
        since += 1;
        if since == power {
            saved = Some((state.clone(), stack.clone()));
            power *= 2;
            since = 0;
        }
        state = match state {
            State::Eval(t, env) => match t {
                Term::Var(x) => State::Apply(lookup(&env, x).expect("closed term")),
                Term::Lam(x, body) => State::Apply(Val::Clo(x, body, env)),
                Term::App(f, a) => {
                    stack.push(Frame::Arg(a, env.clone()));
                    State::Eval(f, env)
                }
                Term::Reset(body) => {
                    stack.push(Frame::Reset);
                    State::Eval(body, env)
                }
                Term::Shift(k, body) => {
                    let Some(mark) = stack.iter().rposition(|f| matches!(f, Frame::Reset)) else {
                        return match read_stuck(&stack, t, &env) {
                            Some(r) => (Outcome::Stuck(r), steps),
                            None => (Outcome::Timeout(fuel), fuel),
                        };
                    };
                    if steps == fuel {
                        return (Outcome::Timeout(fuel), fuel);
                    }
                    steps += 1;
                    let captured: Rc<[Frame]> = stack.split_off(mark + 1).into();
                    State::Eval(body, bind(&env, k, Val::Cont(captured)))
                }
            },
            State::Apply(v) => match stack.pop() {
                None => {
                    return match read_val(&v, &mut Budget(READBACK_LIMIT)) {
                        Some(r) => (Outcome::Value(r), steps),
                        None => (Outcome::Timeout(fuel), fuel),
                    }
                }
                Some(Frame::Arg(a, env)) => {
                    stack.push(Frame::Fun(v));
                    State::Eval(a, env)
                }
                Some(frame) => {
                    if steps == fuel {
                        return (Outcome::Timeout(fuel), fuel);
                    }
                    steps += 1;
                    match frame {
                        Frame::Reset => State::Apply(v),
                        Frame::Fun(Val::Clo(x, body, env)) => State::Eval(body, bind(&env, x, v)),
                        Frame::Fun(Val::Cont(frames)) => {
                            if stack.len() + frames.len() > READBACK_LIMIT {
                                return (Outcome::Timeout(fuel), fuel);
                            }
                            stack.push(Frame::Reset);
                            stack.extend(frames.iter().cloned());
                            State::Apply(v)
                        }
                        Frame::Arg(..) => unreachable!(),
                    }
                }
            },
        }
    }
}

// Structural comparison gives up (answering "different") after this many
// node visits.
const COMPARE_LIMIT: usize = 512;

fn same_config(s0: &State, st0: &[Frame], s1: &State, st1: &[Frame]) -> bool {
    if st0.len() != st1.len() {
        return false;
    }
    let mut budget = COMPARE_LIMIT;
    let b = &mut budget;
    let heads = match (s0, s1) {
        (State::Eval(t0, e0), State::Eval(t1, e1)) => std::ptr::eq(*t0, *t1) && env_eq(e0, e1, b),
        (State::Apply(v0), State::Apply(v1)) => val_eq(v0, v1, b),
        _ => false,
    };
    heads && frames_eq(st0, st1, b)
}

fn frames_eq(a: &[Frame], b: &[Frame], budget: &mut usize) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| frame_eq(x, y, budget))
}

fn frame_eq(a: &Frame, b: &Frame, budget: &mut usize) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    match (a, b) {
        (Frame::Arg(t0, e0), Frame::Arg(t1, e1)) => std::ptr::eq(*t0, *t1) && env_eq(e0, e1, budget),
        (Frame::Fun(v0), Frame::Fun(v1)) => val_eq(v0, v1, budget),
        (Frame::Reset, Frame::Reset) => true,
        _ => false,
    }
}

fn val_eq(a: &Val, b: &Val, budget: &mut usize) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    match (a, b) {
        (Val::Clo(_, t0, e0), Val::Clo(_, t1, e1)) => std::ptr::eq(*t0, *t1) && env_eq(e0, e1, budget),
        (Val::Cont(f0), Val::Cont(f1)) => Rc::ptr_eq(f0, f1) || frames_eq(f0, f1, budget),
        _ => false,
    }
}

fn env_eq(a: &Env, b: &Env, budget: &mut usize) -> bool {
    let (mut a, mut b) = (a.as_ref(), b.as_ref());
    loop {
        match (a, b) {
            (None, None) => return true,
            (Some(x), Some(y)) => {
                if Rc::ptr_eq(x, y) {
                    return true;
                }
                if *budget == 0 || !std::ptr::eq(x.name, y.name) || !val_eq(&x.val, &y.val, budget) {
                    return false;
                }
                *budget -= 1;
                (a, b) = (x.next.as_ref(), y.next.as_ref());
            }
            _ => return false,
        }
    }
}

// Shared bindings can make a normal form exponentially larger than the
// machine state, and reusing continuations can do the same to the stack.
// Past this many nodes or frames the run counts as having exhausted its
// budget.
const READBACK_LIMIT: usize = 200_000;

struct Budget(usize);

impl Budget {
    fn take(&mut self) -> Option<()> {
        self.0 = self.0.checked_sub(1)?;
        Some(())
    }
}

fn read_val(v: &Val, b: &mut Budget) -> Option<Term> {
    b.take()?;
    Some(match v {
        Val::Clo(x, body, env) => Term::Lam((*x).clone(), Box::new(close(body, env, &mut vec![(*x).clone()], b)?)),
        Val::Cont(frames) => {
            let x = Name::from("x");
            let inner = plug_frames(frames, Term::Var(x.clone()), b)?;
            Term::Lam(x, Box::new(Term::Reset(Box::new(inner))))
        }
    })
}

// Frames are stored outermost first; the hole gets the innermost.
fn plug_frames(frames: &[Frame], mut t: Term, b: &mut Budget) -> Option<Term> {
    for f in frames.iter().rev() {
        b.take()?;
        t = match f {
            Frame::Arg(a, env) => Term::app(t, close(a, env, &mut Vec::new(), b)?),
            Frame::Fun(v) => Term::app(read_val(v, b)?, t),
            Frame::Reset => Term::reset(t),
        };
    }
    Some(t)
}

fn read_stuck(stack: &[Frame], shift: &Term, env: &Env) -> Option<Term> {
    let mut b = Budget(READBACK_LIMIT);
    let t = close(shift, env, &mut Vec::new(), &mut b)?;
    plug_frames(stack, t, &mut b)
}

// Replaces the free variables of `t` by the read-back values bound in `env`.
// Those are closed, so no renaming is needed.
fn close(t: &Term, env: &Env, bound: &mut Vec<Name>, b: &mut Budget) -> Option<Term> {
    b.take()?;
    Some(match t {
        Term::Var(x) => {
            if bound.iter().any(|n| n == x) {
                return Some(t.clone());
            }
            match lookup(env, x) {
                Some(v) => read_val(&v, b)?,
                None => t.clone(),
            }
        }
        Term::Lam(x, body) | Term::Shift(x, body) => {
            bound.push(x.clone());
            let inner = close(body, env, bound, b);
            bound.pop();
            match t {
                Term::Lam(..) => Term::Lam(x.clone(), Box::new(inner?)),
                _ => Term::Shift(x.clone(), Box::new(inner?)),
            }
        }
        Term::App(f, a) => Term::app(close(f, env, bound, b)?, close(a, env, bound, b)?),
        Term::Reset(body) => Term::reset(close(body, env, bound, b)?),
    })
}
