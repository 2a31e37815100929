use std::collections::BTreeMap;

use super::structure::{FiniteStructure, GroundLiteral};
use crate::error::{Error, Result};
use crate::logic::{free_variables, well_sorted, Atom, Formula, Literal, SecondOrderTerm, Term, Variable};

/// First- and second-order assignments. Only the variables consulted during
/// evaluation need values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub first: BTreeMap<Variable, String>,
    pub second: BTreeMap<String, GroundLiteral>,
}

/// Evaluation environment: the outer assignment plus a stack of quantifier
/// bindings, innermost last.
struct Env<'a> {
    m: &'a FiniteStructure,
    outer: &'a Assignment,
    first: Vec<(&'a Variable, &'a str)>,
    second: Vec<(&'a str, &'a GroundLiteral)>,
}

impl<'a> Env<'a> {
    fn term(&self, t: &Term) -> Result<&'a str> {
        match t {
            Term::Const { sort, name } => self
                .m
                .constant_value(sort, name)
                .ok_or_else(|| Error::IllSorted(format!("`{name}` is not a constant of sort `{sort}`"))),
            Term::Var(v) => {
                if let Some((_, e)) = self.first.iter().rev().find(|(w, _)| *w == v) {
                    return Ok(e);
                }
                self.outer
                    .first
                    .get(v)
                    .map(String::as_str)
                    .ok_or_else(|| Error::AssignmentGap(v.to_string()))
            }
        }
    }

    fn literal(&self, l: &Literal) -> Result<bool> {
        let positive = match &l.atom {
            Atom::Pred { name, args } => {
                let tuple = args.iter().map(|t| self.term(t).map(str::to_string)).collect::<Result<Vec<_>>>()?;
                self.m.holds(name, &tuple)
            }
            Atom::Eq(a, b) => self.term(a)? == self.term(b)?,
        };
        Ok(positive != l.negated)
    }

    fn so_term(&self, t: &SecondOrderTerm) -> Result<GroundLiteral> {
        match t {
            SecondOrderTerm::Lit(l) => match &l.atom {
                Atom::Pred { name, args } => {
                    let tuple = args.iter().map(|t| self.term(t).map(str::to_string)).collect::<Result<Vec<_>>>()?;
                    Ok(GroundLiteral::new(name.clone(), tuple, l.negated))
                }
                Atom::Eq(..) => Err(Error::IllSorted(format!("equality `{l}` used as a second-order term"))),
            },
            SecondOrderTerm::Var(x) => {
                if let Some((_, g)) = self.second.iter().rev().find(|(y, _)| *y == x) {
                    return Ok((*g).clone());
                }
                self.outer.second.get(x).cloned().ok_or_else(|| Error::AssignmentGap(x.clone()))
            }
        }
    }

    fn formula(&mut self, f: &'a Formula) -> Result<bool> {
        Ok(match f {
            Formula::Lit(l) => self.literal(l)?,
            Formula::SoVar(x) => {
                let g = self.so_term(&SecondOrderTerm::Var(x.clone()))?;
                self.m.literal_holds(&g)
            }
            Formula::SoEq(a, b) => self.so_term(a)? == self.so_term(b)?,
            Formula::SoAtom { rel, args } => {
                let tuple = args.iter().map(|a| self.so_term(a)).collect::<Result<Vec<_>>>()?;
                self.m.relation_holds(rel, &tuple)
            }
            Formula::Not(g) => !self.formula(g)?,
            Formula::Or(a, b) => self.formula(a)? || self.formula(b)?,
            Formula::Exists(v, body) => {
                let m = self.m;
                let mut found = false;
                for e in m.domain(&v.sort) {
                    self.first.push((v, e));
                    let r = self.formula(body);
                    self.first.pop();
                    if r? {
                        found = true;
                        break;
                    }
                }
                found
            }
            Formula::ExistsSo(x, body) => {
                let m = self.m;
                let mut found = false;
                for l in m.universe() {
                    self.second.push((x, l));
                    let r = self.formula(body);
                    self.second.pop();
                    if r? {
                        found = true;
                        break;
                    }
                }
                found
            }
        })
    }
}

/// Satisfaction without the sort check; callers have already checked.
pub(crate) fn eval(m: &FiniteStructure, f: &Formula, a: &Assignment) -> Result<bool> {
    Env { m, outer: a, first: Vec::new(), second: Vec::new() }.formula(f)
}

fn check_sorts(m: &FiniteStructure, f: &Formula) -> Result<()> {
    let v = well_sorted(f, m.alphabet());
    if v.is_ok() {
        Ok(())
    } else {
        Err(Error::IllSorted(v.to_string()))
    }
}

/// `m ⊨ φ[a]`.
pub fn satisfies(m: &FiniteStructure, f: &Formula, a: &Assignment) -> Result<bool> {
    check_sorts(m, f)?;
    eval(m, f, a)
}

/// Every assignment to the given free variables over the structure's
/// domains and literal universe, in lexicographic order.
pub fn assignments(m: &FiniteStructure, first: &[Variable], second: &[String]) -> Vec<Assignment> {
    let mut out = vec![Assignment::default()];
    for v in first {
        out = out
            .into_iter()
            .flat_map(|a| {
                m.domain(&v.sort).iter().map(move |e| {
                    let mut a = a.clone();
                    a.first.insert(v.clone(), e.clone());
                    a
                })
            })
            .collect();
    }
    for x in second {
        out = out
            .into_iter()
            .flat_map(|a| {
                m.universe().iter().map(move |l| {
                    let mut a = a.clone();
                    a.second.insert(x.clone(), l.clone());
                    a
                })
            })
            .collect();
    }
    out
}

/// Valid in `m`: satisfied under every assignment.
pub fn valid_in(m: &FiniteStructure, f: &Formula) -> Result<bool> {
    check_sorts(m, f)?;
    let fv = free_variables(f);
    let first: Vec<_> = fv.first.into_iter().collect();
    let second: Vec<_> = fv.second.into_iter().collect();
    for a in assignments(m, &first, &second) {
        if !eval(m, f, &a)? {
            return Ok(false);
        }
    }
    Ok(true)
}
