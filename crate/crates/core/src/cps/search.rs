//! Bounded bidirectional breadth-first search for equational derivations.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use super::axioms::{kh_axioms, positions, rewrite_at, AxiomSchema, Direction};
use crate::syntax::{Nameless, Term};

/// Default limit on the number of distinct terms visited by [`kh_search`].
pub const DEFAULT_MAX_STATES: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationStep {
    pub axiom: &'static str,
    pub direction: Direction,
    /// Child-index path from the root (0 = body or function, 1 = argument).
    pub position: Vec<usize>,
    pub instantiation: String,
    pub result: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub start: Term,
    pub steps: Vec<DerivationStep>,
}

impl Derivation {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> &Term {
        self.steps.last().map_or(&self.start, |s| &s.result)
    }

    /// Re-checks every step against the axioms. Returns the final term if all
    /// steps are valid.
    pub fn replay(&self) -> Option<Term> {
        let axioms = kh_axioms();
        let mut cur = self.start.clone();
        for step in &self.steps {
            let axiom = axioms.iter().find(|a| a.name == step.axiom)?;
            if !step_is_valid(&cur, step, axiom) {
                return None;
            }
            cur = step.result.clone();
        }
        Some(cur)
    }
}

fn step_is_valid(cur: &Term, step: &DerivationStep, axiom: &AxiomSchema) -> bool {
    let dir = step.direction;
    if axiom.can_rewrite(dir) {
        rewrite_at(cur, &step.position, axiom, dir)
            .iter()
            .any(|(_, r)| r.alpha_eq(&step.result))
    } else {
        rewrite_at(&step.result, &step.position, axiom, dir.flip())
            .iter()
            .any(|(_, r)| r.alpha_eq(cur))
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for s in &self.steps {
            write!(f, "\n  = {} ({} {} at {:?})", s.result, s.axiom, s.direction, s.position)?;
        }
        Ok(())
    }
}

/// One-step rewrites of `t` by any axiom, at any position, in any direction
/// that can be enumerated. The order is deterministic.
pub(crate) fn neighbours(t: &Term, axioms: &[AxiomSchema]) -> Vec<DerivationStep> {
    let mut out = Vec::new();
    for pos in positions(t) {
        for axiom in axioms {
            for dir in [Direction::LeftToRight, Direction::RightToLeft] {
                for (inst, result) in rewrite_at(t, &pos, axiom, dir) {
                    out.push(DerivationStep {
                        axiom: axiom.name,
                        direction: dir,
                        position: pos.clone(),
                        instantiation: inst.to_string(),
                        result,
                    });
                }
            }
        }
    }
    out
}

struct Side {
    // key -> (term, parent key and the step that produced this term)
    seen: HashMap<Nameless, (Term, Option<(Nameless, DerivationStep)>)>,
    frontier: Vec<Nameless>,
    depth: usize,
}

impl Side {
    fn new(t: &Term) -> Side {
        let key = t.alpha_key();
        let mut seen = HashMap::new();
        seen.insert(key.clone(), (t.clone(), None));
        Side {
            seen,
            frontier: vec![key],
            depth: 0,
        }
    }

    // Steps from the root of this side to `key`, in order.
    fn path(&self, key: &Nameless) -> Vec<DerivationStep> {
        let mut steps = Vec::new();
        let mut cur = key;
        while let Some((_, Some((parent, step)))) = self.seen.get(cur) {
            steps.push(step.clone());
            cur = parent;
        }
        steps.reverse();
        steps
    }

    // Expands one BFS layer; returns a key also present in `other`, if any.
    fn expand(&mut self, other: &Side, axioms: &[AxiomSchema], max_states: usize) -> Option<Nameless> {
        let layer: Vec<(Nameless, Term)> = self
            .frontier
            .iter()
            .map(|k| (k.clone(), self.seen[k].0.clone()))
            .collect();
        let expanded: Vec<Vec<DerivationStep>> =
            layer.par_iter().map(|(_, t)| neighbours(t, axioms)).collect();
        let mut next = Vec::new();
        self.depth += 1;
        for ((parent, _), steps) in layer.into_iter().zip(expanded) {
            for step in steps {
                let key = step.result.alpha_key();
                if self.seen.contains_key(&key) {
                    continue;
                }
                if self.seen.len() + other.seen.len() >= max_states {
                    self.frontier = next;
                    return None;
                }
                self.seen
                    .insert(key.clone(), (step.result.clone(), Some((parent.clone(), step))));
                if other.seen.contains_key(&key) {
                    return Some(key);
                }
                next.push(key);
            }
        }
        self.frontier = next;
        None
    }
}

/// Searches for a derivation of `t0 = t1` with at most `depth` axiom
/// applications, visiting at most [`DEFAULT_MAX_STATES`] terms.
pub fn kh_search(t0: &Term, t1: &Term, depth: usize) -> Option<Derivation> {
    kh_search_bounded(t0, t1, depth, DEFAULT_MAX_STATES)
}

pub fn kh_search_bounded(t0: &Term, t1: &Term, depth: usize, max_states: usize) -> Option<Derivation> {
    let axioms = kh_axioms();
    let mut fwd = Side::new(t0);
    let mut bwd = Side::new(t1);
    let key0 = t0.alpha_key();
    if bwd.seen.contains_key(&key0) {
        return Some(Derivation {
            start: t0.clone(),
            steps: Vec::new(),
        });
    }
    while fwd.depth + bwd.depth < depth {
        if fwd.frontier.is_empty() && bwd.frontier.is_empty() {
            return None;
        }
        let expand_fwd = !fwd.frontier.is_empty()
            && (bwd.frontier.is_empty() || fwd.frontier.len() <= bwd.frontier.len());
        let meet = if expand_fwd {
            fwd.expand(&bwd, &axioms, max_states)
        } else {
            bwd.expand(&fwd, &axioms, max_states)
        };
        if let Some(key) = meet {
            return Some(join(t0, t1, &fwd, &bwd, &key));
        }
        if fwd.seen.len() + bwd.seen.len() >= max_states {
            return None;
        }
    }
    None
}

fn join(t0: &Term, t1: &Term, fwd: &Side, bwd: &Side, key: &Nameless) -> Derivation {
    let mut steps = fwd.path(key);
    // Walking from the meeting point back to t1 undoes each backward step.
    let back = bwd.path(key);
    for (i, step) in back.iter().enumerate().rev() {
        let target = if i == 0 { t1.clone() } else { back[i - 1].result.clone() };
        steps.push(DerivationStep {
            axiom: step.axiom,
            direction: step.direction.flip(),
            position: step.position.clone(),
            instantiation: step.instantiation.clone(),
            result: target,
        });
    }
    Derivation {
        start: t0.clone(),
        steps,
    }
}
