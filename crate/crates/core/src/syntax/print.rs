use std::fmt;

use super::Term;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, f, true)
    }
}

// `tail` is true when nothing follows the term inside its enclosing group,
// so an unparenthesized binder body can extend to the right. Binders in
// argument position are always parenthesized.
fn write_term(t: &Term, f: &mut fmt::Formatter<'_>, tail: bool) -> fmt::Result {
    match t {
        Term::Var(x) => f.write_str(x),
        Term::Reset(b) => {
            f.write_str("<")?;
            write_term(b, f, true)?;
            f.write_str(">")
        }
        Term::Lam(x, b) | Term::Shift(x, b) => {
            if !tail {
                f.write_str("(")?;
            }
            if matches!(t, Term::Lam(..)) {
                write!(f, "\\{x}. ")?;
            } else {
                write!(f, "S {x}. ")?;
            }
            write_term(b, f, true)?;
            if !tail {
                f.write_str(")")?;
            }
            Ok(())
        }
        Term::App(a, b) => {
            match **a {
                Term::App(..) => write_term(a, f, false)?,
                Term::Lam(..) | Term::Shift(..) => {
                    f.write_str("(")?;
                    write_term(a, f, true)?;
                    f.write_str(")")?;
                }
                _ => write_term(a, f, false)?,
            }
            f.write_str(" ")?;
            match **b {
                Term::App(..) => {
                    f.write_str("(")?;
                    write_term(b, f, true)?;
                    f.write_str(")")
                }
                _ => write_term(b, f, false),
            }
        }
    }
}
