//! The three context grammars: pure contexts (what shift captures),
//! call-by-value evaluation contexts, and general one-hole contexts.
//!
//! Pure and evaluation contexts are stored as frame lists, outermost frame
//! first, so `frames[0]` is the frame closest to the root of the plugged term.

use std::collections::BTreeSet;
use std::fmt;

use super::{Name, Term, Value};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PureFrame {
    /// `v [.]`
    AppR(Value),
    /// `[.] t`
    AppL(Term),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EvalFrame {
    AppR(Value),
    AppL(Term),
    /// `<[.]>`
    Reset,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PureContext {
    frames: Vec<PureFrame>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EvalContext {
    frames: Vec<EvalFrame>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GeneralContext {
    Hole,
    Lam(Name, Box<GeneralContext>),
    /// `C t`
    AppL(Box<GeneralContext>, Term),
    /// `t C`
    AppR(Term, Box<GeneralContext>),
    Shift(Name, Box<GeneralContext>),
    Reset(Box<GeneralContext>),
}

impl PureFrame {
    fn wrap(&self, inner: Term) -> Term {
        match self {
            PureFrame::AppR(v) => Term::app(v.as_term().clone(), inner),
            PureFrame::AppL(t) => Term::app(inner, t.clone()),
        }
    }

    fn wrap_owned(self, inner: Term) -> Term {
        match self {
            PureFrame::AppR(v) => Term::app(v.into_term(), inner),
            PureFrame::AppL(t) => Term::app(inner, t),
        }
    }

    fn term(&self) -> &Term {
        match self {
            PureFrame::AppR(v) => v.as_term(),
            PureFrame::AppL(t) => t,
        }
    }
}

impl EvalFrame {
    fn wrap_owned(self, inner: Term) -> Term {
        match self {
            EvalFrame::AppR(v) => Term::app(v.into_term(), inner),
            EvalFrame::AppL(t) => Term::app(inner, t),
            EvalFrame::Reset => Term::reset(inner),
        }
    }
}

impl From<PureFrame> for EvalFrame {
    fn from(f: PureFrame) -> Self {
        match f {
            PureFrame::AppR(v) => EvalFrame::AppR(v),
            PureFrame::AppL(t) => EvalFrame::AppL(t),
        }
    }
}

impl PureContext {
    pub fn hole() -> Self {
        Self::default()
    }

    pub fn from_frames(frames: Vec<PureFrame>) -> Self {
        PureContext { frames }
    }

    pub fn frames(&self) -> &[PureFrame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<PureFrame> {
        self.frames
    }

    pub fn is_hole(&self) -> bool {
        self.frames.is_empty()
    }

    /// Adds a frame directly around the hole.
    pub fn push_inner(&mut self, frame: PureFrame) {
        self.frames.push(frame);
    }

    /// `self[inner[.]]`
    pub fn compose(&self, inner: &PureContext) -> PureContext {
        let mut frames = self.frames.clone();
        frames.extend(inner.frames.iter().cloned());
        PureContext { frames }
    }

    pub fn plug(&self, t: Term) -> Term {
        self.frames.iter().rev().fold(t, |acc, f| f.wrap(acc))
    }

    pub fn plug_owned(self, t: Term) -> Term {
        self.frames
            .into_iter()
            .rev()
            .fold(t, |acc, f| f.wrap_owned(acc))
    }

    pub fn embed(&self) -> EvalContext {
        EvalContext {
            frames: self.frames.iter().cloned().map(EvalFrame::from).collect(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        self.frames
            .iter()
            .flat_map(|f| f.term().free_vars())
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.frames.iter().all(|f| f.term().is_closed())
    }

    pub(crate) fn collect_names(&self, out: &mut BTreeSet<Name>) {
        for f in &self.frames {
            f.term().collect_names(out);
        }
    }

    /// Number of frames plus the sizes of their terms.
    pub fn size(&self) -> usize {
        self.frames.iter().map(|f| 1 + f.term().size()).sum()
    }
}

impl EvalContext {
    pub fn hole() -> Self {
        Self::default()
    }

    pub fn from_frames(frames: Vec<EvalFrame>) -> Self {
        EvalContext { frames }
    }

    pub fn frames(&self) -> &[EvalFrame] {
        &self.frames
    }

    pub fn is_hole(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn push_inner(&mut self, frame: EvalFrame) {
        self.frames.push(frame);
    }

    pub fn plug(&self, t: Term) -> Term {
        self.clone().plug_owned(t)
    }

    pub fn plug_owned(self, t: Term) -> Term {
        self.frames
            .into_iter()
            .rev()
            .fold(t, |acc, f| f.wrap_owned(acc))
    }

    /// The pure context obtained when the context has no reset frame.
    pub fn as_pure(&self) -> Option<PureContext> {
        self.frames
            .iter()
            .map(|f| match f {
                EvalFrame::AppR(v) => Some(PureFrame::AppR(v.clone())),
                EvalFrame::AppL(t) => Some(PureFrame::AppL(t.clone())),
                EvalFrame::Reset => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(PureContext::from_frames)
    }

    pub fn is_closed(&self) -> bool {
        self.frames.iter().all(|f| match f {
            EvalFrame::AppR(v) => v.as_term().is_closed(),
            EvalFrame::AppL(t) => t.is_closed(),
            EvalFrame::Reset => true,
        })
    }

    pub fn size(&self) -> usize {
        self.frames
            .iter()
            .map(|f| match f {
                EvalFrame::AppR(v) => 1 + v.as_term().size(),
                EvalFrame::AppL(t) => 1 + t.size(),
                EvalFrame::Reset => 1,
            })
            .sum()
    }
}

impl GeneralContext {
    /// Fills the hole. No renaming happens: free variables of `t` may be
    /// captured by binders of the context.
    pub fn plug(&self, t: Term) -> Term {
        match self {
            GeneralContext::Hole => t,
            GeneralContext::Lam(x, c) => Term::Lam(x.clone(), Box::new(c.plug(t))),
            GeneralContext::AppL(c, u) => Term::app(c.plug(t), u.clone()),
            GeneralContext::AppR(u, c) => Term::app(u.clone(), c.plug(t)),
            GeneralContext::Shift(k, c) => Term::Shift(k.clone(), Box::new(c.plug(t))),
            GeneralContext::Reset(c) => Term::reset(c.plug(t)),
        }
    }
}

impl From<&EvalContext> for GeneralContext {
    fn from(ctx: &EvalContext) -> Self {
        ctx.frames
            .iter()
            .rev()
            .fold(GeneralContext::Hole, |acc, f| match f {
                EvalFrame::AppR(v) => GeneralContext::AppR(v.as_term().clone(), Box::new(acc)),
                EvalFrame::AppL(t) => GeneralContext::AppL(Box::new(acc), t.clone()),
                EvalFrame::Reset => GeneralContext::Reset(Box::new(acc)),
            })
    }
}

const HOLE: &str = "[]";

impl fmt::Display for PureContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.plug(Term::var(HOLE)).fmt(f)
    }
}

impl fmt::Display for EvalContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.plug(Term::var(HOLE)).fmt(f)
    }
}

impl fmt::Display for GeneralContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.plug(Term::var(HOLE)).fmt(f)
    }
}
