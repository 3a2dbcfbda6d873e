#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftreset::{parse, Term};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn p(s: &str) -> Term {
    parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

const NAMES: [&str; 5] = ["x", "y", "z", "k", "f"];

/// A random term of roughly `size` nodes whose free variables are drawn
/// from `scope`. With an empty scope the term is closed.
pub fn term(rng: &mut impl Rng, size: usize, scope: &mut Vec<&'static str>) -> Term {
    if size <= 1 {
        if !scope.is_empty() && rng.gen_bool(0.7) {
            return Term::var(scope[rng.gen_range(0..scope.len())]);
        }
        let x = NAMES[rng.gen_range(0..NAMES.len())];
        return Term::lam(x, Term::var(x));
    }
    match rng.gen_range(0..10) {
        0..=2 => binder(rng, size, scope, Term::lam),
        3..=6 => {
            let left = rng.gen_range(1..size);
            let f = term(rng, left, scope);
            let a = term(rng, size - left, scope);
            Term::app(f, a)
        }
        7 | 8 => binder(rng, size, scope, Term::shift),
        _ => Term::reset(term(rng, size - 1, scope)),
    }
}

fn binder(
    rng: &mut impl Rng,
    size: usize,
    scope: &mut Vec<&'static str>,
    make: fn(&str, Term) -> Term,
) -> Term {
    let x = NAMES[rng.gen_range(0..NAMES.len())];
    scope.push(x);
    let body = term(rng, size - 1, scope);
    scope.pop();
    make(x, body)
}

pub fn closed(rng: &mut impl Rng, size: usize) -> Term {
    term(rng, size, &mut Vec::new())
}

/// A random closed value.
pub fn value(rng: &mut impl Rng, size: usize) -> Term {
    let x = NAMES[rng.gen_range(0..NAMES.len())];
    let mut scope = vec![x];
    Term::lam(x, term(rng, size.saturating_sub(1).max(1), &mut scope))
}
