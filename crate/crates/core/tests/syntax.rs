use proptest::prelude::*;
use shiftreset::syntax::PureContext;
use shiftreset::{parse, Term};

fn name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["x", "y", "z", "k"])
}

// Open terms over a tiny alphabet, so shadowing and capture are common.
fn any_term() -> impl Strategy<Value = Term> {
    let leaf = name().prop_map(Term::var);
    leaf.prop_recursive(6, 40, 2, |inner| {
        prop_oneof![
            (name(), inner.clone()).prop_map(|(x, b)| Term::lam(x, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            (name(), inner.clone()).prop_map(|(k, b)| Term::shift(k, b)),
            inner.prop_map(Term::reset),
        ]
    })
}

// Oracle representation: bound variables as de Bruijn indices, free ones by
// name.
#[derive(Debug, PartialEq, Eq, Clone)]
enum Db {
    Free(String),
    Bound(usize),
    Lam(Box<Db>),
    Shift(Box<Db>),
    App(Box<Db>, Box<Db>),
    Reset(Box<Db>),
}

fn db(t: &Term, env: &mut Vec<String>) -> Db {
    match t {
        Term::Var(x) => match env.iter().rev().position(|n| **n == **x) {
            Some(i) => Db::Bound(i),
            None => Db::Free(x.to_string()),
        },
        Term::Lam(x, b) | Term::Shift(x, b) => {
            env.push(x.to_string());
            let body = Box::new(db(b, env));
            env.pop();
            if matches!(t, Term::Lam(..)) {
                Db::Lam(body)
            } else {
                Db::Shift(body)
            }
        }
        Term::App(f, a) => Db::App(Box::new(db(f, env)), Box::new(db(a, env))),
        Term::Reset(b) => Db::Reset(Box::new(db(b, env))),
    }
}

fn nameless(t: &Term) -> Db {
    db(t, &mut Vec::new())
}

// Free names are never bound in the nameless form, so plugging in a
// replacement needs no index shifting.
fn db_subst(t: &Db, x: &str, s: &Db) -> Db {
    match t {
        Db::Free(y) if y == x => s.clone(),
        Db::Free(_) | Db::Bound(_) => t.clone(),
        Db::Lam(b) => Db::Lam(Box::new(db_subst(b, x, s))),
        Db::Shift(b) => Db::Shift(Box::new(db_subst(b, x, s))),
        Db::App(f, a) => Db::App(Box::new(db_subst(f, x, s)), Box::new(db_subst(a, x, s))),
        Db::Reset(b) => Db::Reset(Box::new(db_subst(b, x, s))),
    }
}

fn rename_binders(t: &Term, n: &mut usize) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Lam(x, b) | Term::Shift(x, b) => {
            *n += 1;
            let fresh = format!("r{n}");
            let body = rename_binders(&b.subst(x, &Term::var(&fresh)), n);
            if matches!(t, Term::Lam(..)) {
                Term::lam(&fresh, body)
            } else {
                Term::shift(&fresh, body)
            }
        }
        Term::App(f, a) => Term::app(rename_binders(f, n), rename_binders(a, n)),
        Term::Reset(b) => Term::reset(rename_binders(b, n)),
    }
}

proptest! {
    #[test]
    fn printing_round_trips(t in any_term()) {
        let printed = t.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(&back, &t, "{}", printed);
    }

    #[test]
    fn alpha_equivalence_is_nameless_equality(t in any_term(), u in any_term()) {
        prop_assert_eq!(t.alpha_eq(&u), nameless(&t) == nameless(&u));
        prop_assert_eq!(t.alpha_key() == u.alpha_key(), t.alpha_eq(&u));
    }

    #[test]
    fn renaming_binders_preserves_alpha_class(t in any_term()) {
        let r = rename_binders(&t, &mut 0);
        prop_assert!(t.alpha_eq(&r), "{} vs {}", t, r);
        prop_assert_eq!(t.free_vars(), r.free_vars());
    }

    #[test]
    fn substitution_avoids_capture(t in any_term(), x in name(), s in any_term()) {
        let got = nameless(&t.subst(x, &s));
        let want = db_subst(&nameless(&t), x, &nameless(&s));
        prop_assert_eq!(got, want);
    }

    #[test]
    fn substitution_free_variables(t in any_term(), x in name(), s in any_term()) {
        let mut want = t.free_vars();
        if want.remove(x) {
            want.extend(s.free_vars());
        }
        prop_assert_eq!(t.subst(x, &s).free_vars(), want);
    }

    #[test]
    fn size_counts_constructors(t in any_term()) {
        fn count(t: &Term) -> usize {
            match t {
                Term::Var(_) => 1,
                Term::Lam(_, b) | Term::Shift(_, b) | Term::Reset(b) => 1 + count(b),
                Term::App(f, a) => 1 + count(f) + count(a),
            }
        }
        prop_assert_eq!(t.size(), count(&t));
    }
}

#[test]
fn parser_conventions() {
    let cases = [
        ("\\x. x x", "\\x. (x x)"),
        ("f a b", "(f a) b"),
        ("S k. k <x> y", "S k. ((k <x>) y)"),
    ];
    for (a, b) in cases {
        assert_eq!(parse(a).unwrap(), parse(b).unwrap(), "{a}");
    }
    for bad in ["", "\\. x", "(x", "<x", "x)", "S x", "\\x y. x"] {
        assert!(parse(bad).is_err(), "{bad:?}");
    }
}

#[test]
fn plugging_a_pure_context() {
    let t = parse("(\\x. x) ((S k. k) y)").unwrap();
    assert_eq!(PureContext::hole().plug(t.clone()), t);
}
