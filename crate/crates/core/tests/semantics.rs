mod common;

use common::{closed, p, rng};
use shiftreset::semantics::{decompose, evaluate, evaluate_counted, reduce_step, trace, Outcome};
use shiftreset::Term;

// Oracle: iterate the one-step relation by hand and classify the last term
// by its syntactic shape.
fn by_steps(t: &Term, fuel: usize) -> Outcome {
    let tr = trace(t, fuel).unwrap();
    let last = tr.last().unwrap().clone();
    if reduce_step(&last).unwrap().is_some() {
        return Outcome::Timeout(fuel);
    }
    if last.is_value() {
        Outcome::Value(last)
    } else {
        Outcome::Stuck(last)
    }
}

fn same(a: &Outcome, b: &Outcome) -> bool {
    match (a, b) {
        (Outcome::Value(x), Outcome::Value(y)) | (Outcome::Stuck(x), Outcome::Stuck(y)) => x.alpha_eq(y),
        (Outcome::Timeout(m), Outcome::Timeout(n)) => m == n,
        _ => false,
    }
}

#[test]
fn evaluation_agrees_with_iterated_steps() {
    let mut r = rng(7);
    let mut kinds = [0usize; 3];
    for i in 0..600 {
        let t = closed(&mut r, 4 + i % 14);
        for fuel in [0, 3, 40] {
            let fast = evaluate(&t, fuel).unwrap();
            let slow = by_steps(&t, fuel);
            assert!(same(&fast, &slow), "{t} at fuel {fuel}: {fast} vs {slow}");
            kinds[match fast {
                Outcome::Value(_) => 0,
                Outcome::Stuck(_) => 1,
                Outcome::Timeout(_) => 2,
            }] += 1;
        }
    }
    assert!(kinds.iter().all(|&n| n > 50), "{kinds:?}");
}

#[test]
fn step_counts_match_trace_length() {
    let mut r = rng(11);
    for _ in 0..300 {
        let t = closed(&mut r, 12);
        let (o, n) = evaluate_counted(&t, 60).unwrap();
        if !o.is_timeout() {
            assert_eq!(n + 1, trace(&t, 60).unwrap().len(), "{t}");
        }
    }
}

#[test]
fn fuel_is_monotone() {
    let mut r = rng(3);
    for _ in 0..300 {
        let t = closed(&mut r, 14);
        if let Outcome::Value(v) = evaluate(&t, 30).unwrap() {
            for f in [31, 50, 200] {
                match evaluate(&t, f).unwrap() {
                    Outcome::Value(w) => assert!(v.alpha_eq(&w)),
                    o => panic!("{t}: {o} at fuel {f}"),
                }
            }
        }
    }
}

#[test]
fn decomposition_is_total_on_closed_terms() {
    let mut r = rng(5);
    for _ in 0..500 {
        let t = closed(&mut r, 16);
        assert!(decompose(&t).is_ok(), "{t}");
    }
}

#[test]
fn captured_continuation_can_be_reused() {
    let t = p(r"<(\x. \y. x) (S k. k (k (\z. z)))>");
    let o = evaluate(&t, 100).unwrap();
    assert!(matches!(o, Outcome::Value(_)), "{o}");
    let stuck = p(r"(\x. x) (S k. k (\z. z))");
    assert!(matches!(evaluate(&stuck, 10).unwrap(), Outcome::Stuck(s) if s.alpha_eq(&stuck)));
    assert!(evaluate(&p(r"(\x. x x) (\x. x x)"), 2000).unwrap().is_timeout());
}
