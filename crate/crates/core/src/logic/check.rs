use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::alphabet::Alphabet;
use super::syntax::{Atom, Formula, Literal, SecondOrderTerm, Term};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Diagnostic {
    UnknownPredicate { name: String },
    UnknownRelation { name: String },
    UnknownSort { sort: String },
    UnknownConstant { name: String, sort: String },
    Arity { symbol: String, expected: usize, found: usize },
    SortMismatch { predicate: String, position: usize, expected: String, found: String },
    EqualitySorts { left: String, right: String },
    EqualityArgument { relation: String, position: usize },
    VariableSorts { name: String, sorts: Vec<String> },
    SymbolAsVariable { name: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnknownPredicate { name } => write!(f, "unknown predicate `{name}`"),
            Diagnostic::UnknownRelation { name } => write!(f, "unknown second-order predicate `{name}`"),
            Diagnostic::UnknownSort { sort } => write!(f, "unknown sort `{sort}`"),
            Diagnostic::UnknownConstant { name, sort } => write!(f, "`{name}` is not a constant of sort `{sort}`"),
            Diagnostic::Arity { symbol, expected, found } => {
                write!(f, "`{symbol}` expects {expected} arguments, found {found}")
            }
            Diagnostic::SortMismatch { predicate, position, expected, found } => write!(
                f,
                "argument {} of `{predicate}` has sort `{found}`, expected `{expected}`",
                position + 1
            ),
            Diagnostic::EqualitySorts { left, right } => {
                write!(f, "equality between sorts `{left}` and `{right}`")
            }
            Diagnostic::EqualityArgument { relation, position } => write!(
                f,
                "argument {} of `{relation}` is an equality literal; only predicate literals are allowed",
                position + 1
            ),
            Diagnostic::VariableSorts { name, sorts } => {
                write!(f, "variable `{name}` is used with sorts {}", sorts.join(", "))
            }
            Diagnostic::SymbolAsVariable { name } => write!(f, "declared symbol `{name}` used as a variable"),
        }
    }
}

/// Outcome of sort checking; accepted iff there are no diagnostics.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SortCheck {
    pub diagnostics: Vec<Diagnostic>,
}

impl SortCheck {
    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

impl fmt::Display for SortCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("well-sorted");
        }
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            d.fmt(f)?;
        }
        Ok(())
    }
}

struct Checker<'a> {
    alphabet: &'a Alphabet,
    out: Vec<Diagnostic>,
    var_sorts: BTreeMap<String, BTreeSet<String>>,
}

impl Checker<'_> {
    fn term(&mut self, t: &Term) {
        match t {
            Term::Const { sort, name } => {
                if !self.alphabet.has_sort(sort) {
                    self.out.push(Diagnostic::UnknownSort { sort: sort.clone() });
                } else if !self.alphabet.is_constant(sort, name) {
                    self.out.push(Diagnostic::UnknownConstant { name: name.clone(), sort: sort.clone() });
                }
            }
            Term::Var(v) => {
                if !self.alphabet.has_sort(&v.sort) {
                    self.out.push(Diagnostic::UnknownSort { sort: v.sort.clone() });
                }
                self.var_sorts.entry(v.name.clone()).or_default().insert(v.sort.clone());
            }
        }
    }

    fn literal(&mut self, l: &Literal) {
        match &l.atom {
            Atom::Pred { name, args } => {
                args.iter().for_each(|t| self.term(t));
                let Some(decl) = self.alphabet.predicate(name) else {
                    self.out.push(Diagnostic::UnknownPredicate { name: name.clone() });
                    return;
                };
                if decl.arg_sorts.len() != args.len() {
                    self.out.push(Diagnostic::Arity {
                        symbol: name.clone(),
                        expected: decl.arg_sorts.len(),
                        found: args.len(),
                    });
                    return;
                }
                for (i, (t, s)) in args.iter().zip(&decl.arg_sorts).enumerate() {
                    if t.sort() != s {
                        self.out.push(Diagnostic::SortMismatch {
                            predicate: name.clone(),
                            position: i,
                            expected: s.clone(),
                            found: t.sort().to_string(),
                        });
                    }
                }
            }
            Atom::Eq(a, b) => {
                self.term(a);
                self.term(b);
                if a.sort() != b.sort() {
                    self.out.push(Diagnostic::EqualitySorts { left: a.sort().into(), right: b.sort().into() });
                }
            }
        }
    }

    fn so_var(&mut self, name: &str) {
        let a = self.alphabet;
        if a.predicate(name).is_some() || a.relation(name).is_some() || !a.sorts_of_constant(name).is_empty() {
            self.out.push(Diagnostic::SymbolAsVariable { name: name.to_string() });
        }
    }

    fn so_term(&mut self, t: &SecondOrderTerm) {
        match t {
            SecondOrderTerm::Lit(l) => self.literal(l),
            SecondOrderTerm::Var(x) => self.so_var(x),
        }
    }

    fn formula(&mut self, f: &Formula) {
        match f {
            Formula::Lit(l) => self.literal(l),
            Formula::SoVar(x) => self.so_var(x),
            Formula::SoEq(a, b) => {
                self.so_term(a);
                self.so_term(b);
            }
            Formula::SoAtom { rel, args } => {
                for (i, a) in args.iter().enumerate() {
                    self.so_term(a);
                    if let SecondOrderTerm::Lit(l) = a {
                        if l.is_equality() {
                            self.out.push(Diagnostic::EqualityArgument { relation: rel.clone(), position: i });
                        }
                    }
                }
                match self.alphabet.relation(rel) {
                    None => self.out.push(Diagnostic::UnknownRelation { name: rel.clone() }),
                    Some(r) if r.arity != args.len() => self.out.push(Diagnostic::Arity {
                        symbol: rel.clone(),
                        expected: r.arity,
                        found: args.len(),
                    }),
                    Some(_) => {}
                }
            }
            Formula::Not(g) => self.formula(g),
            Formula::Or(a, b) => {
                self.formula(a);
                self.formula(b);
            }
            Formula::Exists(v, body) => {
                self.term(&Term::Var(v.clone()));
                self.formula(body);
            }
            Formula::ExistsSo(x, body) => {
                self.so_var(x);
                self.formula(body);
            }
        }
    }
}

/// Checks arities, argument sorts, equality sorts, and that second-order
/// atoms take only predicate literals. Never fails; problems are reported
/// as diagnostics.
pub fn well_sorted(f: &Formula, alphabet: &Alphabet) -> SortCheck {
    let mut c = Checker { alphabet, out: Vec::new(), var_sorts: BTreeMap::new() };
    c.formula(f);
    finish(c)
}

pub fn literal_well_sorted(l: &Literal, alphabet: &Alphabet) -> SortCheck {
    let mut c = Checker { alphabet, out: Vec::new(), var_sorts: BTreeMap::new() };
    c.literal(l);
    finish(c)
}

fn finish(mut c: Checker<'_>) -> SortCheck {
    for (name, sorts) in std::mem::take(&mut c.var_sorts) {
        if sorts.len() > 1 {
            c.out.push(Diagnostic::VariableSorts { name, sorts: sorts.into_iter().collect() });
        }
    }
    c.out.dedup();
    SortCheck { diagnostics: c.out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::logic::parse::parse_unchecked;

    fn check(text: &str) -> SortCheck {
        let a = fixtures::plant_alphabet();
        well_sorted(&parse_unchecked(text, &a).unwrap(), &a)
    }

    #[test]
    fn accepts_declared_usage() {
        assert!(check("Hold(F, No)").is_ok());
        assert!(check("exists X . Action(X, Open(F), Hold(F, High))").is_ok());
    }

    #[test]
    fn rejects_swapped_sorts() {
        let v = check("Hold(No, F)");
        assert_eq!(v.diagnostics.len(), 2);
        assert!(matches!(v.diagnostics[0], Diagnostic::SortMismatch { position: 0, .. }));
    }

    #[test]
    fn rejects_relation_arity() {
        let v = check("Action(Hold(F,No), Open(F))");
        assert_eq!(v.diagnostics, vec![Diagnostic::Arity { symbol: "Action".into(), expected: 3, found: 2 }]);
    }

    #[test]
    fn rejects_equality_arguments_and_mixed_equalities() {
        let v = check("Cause-Effect(F = F, Open(F))");
        assert!(matches!(v.diagnostics[0], Diagnostic::EqualityArgument { position: 0, .. }));
        assert!(!check("x:comp = y:state").is_ok());
        assert!(!check("Open(x:comp) | x:state = x:state").is_ok());
    }
}
