//! Surface-syntax rendering. The output is the normalized text accepted by
//! the parser: parsing it back yields the same tree.

use std::fmt::{self, Display, Formatter};

use super::syntax::{Atom, Formula, Literal, SecondOrderTerm, Term, Variable};

impl Display for Variable {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.sort)
    }
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const { name, .. } => f.write_str(name),
            Term::Var(v) => v.fmt(f),
        }
    }
}

fn write_args<T: Display>(f: &mut Formatter<'_>, args: &[T]) -> fmt::Result {
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        a.fmt(f)?;
    }
    f.write_str(")")
}

impl Display for Atom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Pred { name, args } => {
                f.write_str(name)?;
                write_args(f, args)
            }
            Atom::Eq(l, r) => write!(f, "{l} = {r}"),
        }
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match (&self.atom, self.negated) {
            (a @ Atom::Pred { .. }, false) => a.fmt(f),
            (a @ Atom::Pred { .. }, true) => write!(f, "!{a}"),
            (a @ Atom::Eq(..), false) => a.fmt(f),
            (a @ Atom::Eq(..), true) => write!(f, "!({a})"),
        }
    }
}

impl Display for SecondOrderTerm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            SecondOrderTerm::Lit(l) => l.fmt(f),
            SecondOrderTerm::Var(x) => f.write_str(x),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Position {
    Top,
    OrLeft,
    OrRight,
    Operand,
}

fn write_formula(f: &mut Formatter<'_>, phi: &Formula, pos: Position) -> fmt::Result {
    match phi {
        Formula::Lit(l) => {
            if pos == Position::Operand && l.is_equality() && !l.negated {
                write!(f, "({l})")
            } else {
                l.fmt(f)
            }
        }
        Formula::SoVar(x) => f.write_str(x),
        Formula::SoEq(a, b) => {
            if pos == Position::Operand {
                f.write_str("(")?;
            }
            match a {
                SecondOrderTerm::Lit(l) if l.negated => write!(f, "({l}) == {b}")?,
                _ => write!(f, "{a} == {b}")?,
            }
            if pos == Position::Operand {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::SoAtom { rel, args } => {
            f.write_str(rel)?;
            write_args(f, args)
        }
        Formula::Not(g) => {
            f.write_str("!")?;
            write_formula(f, g, Position::Operand)
        }
        Formula::Or(a, b) => {
            let wrap = matches!(pos, Position::OrRight | Position::Operand);
            if wrap {
                f.write_str("(")?;
            }
            write_formula(f, a, Position::OrLeft)?;
            f.write_str(" | ")?;
            write_formula(f, b, Position::OrRight)?;
            if wrap {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::Exists(..) | Formula::ExistsSo(..) => {
            let wrap = matches!(pos, Position::OrLeft | Position::Operand);
            if wrap {
                f.write_str("(")?;
            }
            match phi {
                Formula::Exists(v, body) => {
                    write!(f, "exists {v} . ")?;
                    write_formula(f, body, Position::Top)?;
                }
                Formula::ExistsSo(x, body) => {
                    write!(f, "exists {x} . ")?;
                    write_formula(f, body, Position::Top)?;
                }
                _ => unreachable!(),
            }
            if wrap {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl Display for Formula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_formula(f, self, Position::Top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_literals() {
        let l = Literal::pred("Hold", vec![Term::constant("F", "comp"), Term::constant("No", "state")]);
        assert_eq!(l.to_string(), "Hold(F, No)");
        let e = Literal::eq(Term::var("x", "comp"), Term::var("x", "comp")).negate();
        assert_eq!(e.to_string(), "!(x:comp = x:comp)");
        assert_eq!(Literal::pred("q", vec![]).negate().to_string(), "!q()");
    }

    #[test]
    fn parenthesizes_by_position() {
        let p = Formula::Lit(Literal::pred("p", vec![]));
        let q = Formula::Lit(Literal::pred("q", vec![]));
        let or = Formula::or(p.clone(), q.clone());
        assert_eq!(Formula::not(or.clone()).to_string(), "!(p() | q())");
        assert_eq!(Formula::or(p.clone(), or.clone()).to_string(), "p() | (p() | q())");
        assert_eq!(Formula::or(or, p.clone()).to_string(), "p() | q() | p()");
        let ex = Formula::exists(Variable::new("x", "s"), p.clone());
        assert_eq!(Formula::or(ex.clone(), q.clone()).to_string(), "(exists x:s . p()) | q()");
        assert_eq!(Formula::or(q, ex).to_string(), "q() | exists x:s . p()");
    }
}
