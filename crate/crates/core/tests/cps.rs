mod common;

use common::{closed, p, rng};
use shiftreset::corpus;
use shiftreset::cps::{
    beta_eta_normalize, cps_equiv, cps_translate, kh_axioms, kh_search, rewrite_at, CpsVerdict, Direction,
};
use shiftreset::Term;

fn positions(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    out.push(path.clone());
    let kids: Vec<&Term> = match t {
        Term::Var(_) => vec![],
        Term::Lam(_, b) | Term::Shift(_, b) | Term::Reset(b) => vec![b],
        Term::App(f, a) => vec![f, a],
    };
    for (i, k) in kids.into_iter().enumerate() {
        path.push(i);
        positions(k, path, out);
        path.pop();
    }
}

fn has_control(t: &Term) -> bool {
    match t {
        Term::Var(_) => false,
        Term::Shift(..) | Term::Reset(_) => true,
        Term::Lam(_, b) => has_control(b),
        Term::App(f, a) => has_control(f) || has_control(a),
    }
}

#[test]
fn images_are_pure_with_the_same_free_variables() {
    let mut r = rng(1);
    for i in 0..300 {
        let mut t = closed(&mut r, 2 + i % 20);
        if i % 3 == 0 {
            t = Term::app(t, Term::var("free"));
        }
        let image = cps_translate(&t);
        assert!(!has_control(image.as_term()), "{t}");
        assert_eq!(image.as_term().free_vars(), t.free_vars(), "{t}");
    }
}

#[test]
fn variable_and_value_clauses() {
    assert!(cps_translate(&p("x")).as_term().alpha_eq(&p("\\k. k x")));
    // A value passes itself to the continuation.
    let lam = beta_eta_normalize(&cps_translate(&p("\\x. x")), 100).unwrap();
    let body = beta_eta_normalize(&cps_translate(&p("x")), 100).unwrap();
    match lam.as_term() {
        Term::Lam(k, b) => match &**b {
            Term::App(f, v) => {
                assert_eq!(**f, Term::Var(k.clone()));
                assert!(matches!(&**v, Term::Lam(..)));
            }
            other => panic!("{other}"),
        },
        other => panic!("{other}"),
    }
    assert!(body.as_term().alpha_eq(&p("\\k. k x")));
}

#[test]
fn normal_forms_are_fixed_points() {
    let mut r = rng(2);
    let mut normalized = 0;
    for i in 0..200 {
        let t = closed(&mut r, 2 + i % 12);
        if let Some(n) = beta_eta_normalize(&cps_translate(&t), 3000) {
            normalized += 1;
            let again = beta_eta_normalize(&n, 3000).unwrap();
            assert!(again.as_term().alpha_eq(n.as_term()), "{t}");
        }
    }
    assert!(normalized > 150, "{normalized}");
}

// Every single rewrite step, in every direction, at every position of
// random terms and corpus terms, preserves the CPS image.
#[test]
fn single_rewrites_are_sound() {
    let mut r = rng(3);
    let mut terms: Vec<Term> = (0..150).map(|i| closed(&mut r, 3 + i % 9)).collect();
    // Corpus terms whose images have no normal form would only yield
    // unknowns.
    for e in corpus::builtin().entries {
        for t in [e.left, e.right] {
            if beta_eta_normalize(&cps_translate(&t), 1000).is_some() {
                terms.push(t);
            }
        }
    }
    let axioms = kh_axioms();
    let mut checked = [0usize; 8];
    for t in &terms {
        let mut ps = Vec::new();
        positions(t, &mut Vec::new(), &mut ps);
        for pos in &ps {
            for (i, a) in axioms.iter().enumerate() {
                for dir in [Direction::LeftToRight, Direction::RightToLeft] {
                    for (_, u) in rewrite_at(t, pos, a, dir) {
                        let v = cps_equiv(t, &u, 3000);
                        assert_ne!(v, CpsVerdict::Inequiv, "{} {dir} at {pos:?}: {t} ~> {u}", a.name);
                        checked[i] += 1;
                    }
                }
            }
        }
    }
    assert!(checked.iter().all(|&n| n > 0), "{checked:?}");
}

#[test]
fn derivations_replay_and_are_sound() {
    let pairs = [
        ("<<\\x. x>>", "\\x. x"),
        ("<(\\x. x) (S k. k (\\y. y))>", "\\y. y"),
        ("S k. <k (\\x. x)>", "\\x. x"),
        ("\\f. \\x. (\\y. y) x", "\\f. \\y. y"),
    ];
    for (a, b) in pairs {
        let (a, b) = (p(a), p(b));
        let d = kh_search(&a, &b, 3).unwrap_or_else(|| panic!("{a} = {b}"));
        let end = d.replay().expect("valid steps");
        assert!(end.alpha_eq(&b), "{a} ends at {end}");
        assert_eq!(cps_equiv(&a, &b, 3000), CpsVerdict::Equiv, "{a} = {b}");
    }
}

#[test]
fn inequivalent_terms_have_no_derivation() {
    let pairs = [("\\x. \\y. x", "\\x. \\y. y"), ("\\x. x", "\\x. \\y. y"), ("S k. \\x. x", "\\x. x")];
    for (a, b) in pairs {
        let (a, b) = (p(a), p(b));
        assert_eq!(cps_equiv(&a, &b, 3000), CpsVerdict::Inequiv, "{a} = {b}");
        assert!(kh_search(&a, &b, 3).is_none(), "{a} = {b}");
    }
}

#[test]
fn evaluation_steps_preserve_cps_images() {
    let mut r = rng(4);
    let mut compared = 0;
    for i in 0..300 {
        let t = Term::reset(closed(&mut r, 3 + i % 15));
        let Ok(Some(u)) = shiftreset::semantics::reduce_step(&t) else {
            continue;
        };
        let v = cps_equiv(&t, &u, 3000);
        assert_ne!(v, CpsVerdict::Inequiv, "{t} -> {u}");
        compared += usize::from(v == CpsVerdict::Equiv);
    }
    assert!(compared > 100, "{compared}");
}
