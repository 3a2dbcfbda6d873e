//! A workbench for the call-by-value lambda-calculus extended with the
//! delimited-control operators shift and reset.
//!
//! * [`syntax`]: terms, contexts, substitution, parsing and printing.
//! * [`semantics`]: unique decomposition, one-step reduction and evaluation.
//! * [`cps`]: CPS translation, beta-eta normalization and the eight
//!   equational axioms of shift and reset.
//! * [`closures`]: bounded enumeration of the term- and context-generating
//!   closures of an environment.
//! * [`bisim`]: bounded environmental-bisimulation games for the relaxed and
//!   the top-level-reset (program) semantics.
//! * [`ctxequiv`]: bounded falsifiers for contextual equivalence.
//! * [`corpus`]: the named example corpus.

pub mod bisim;
pub mod closures;
pub mod corpus;
pub mod cps;
pub mod ctxequiv;
pub mod semantics;
pub mod syntax;

pub use syntax::{parse, Name, Term, Value};
