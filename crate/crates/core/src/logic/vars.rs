use std::collections::BTreeSet;
use std::fmt;

use super::syntax::{Formula, Literal, SecondOrderTerm, Variable};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreeVariables {
    pub first: BTreeSet<Variable>,
    pub second: BTreeSet<String>,
}

impl FreeVariables {
    pub fn is_empty(&self) -> bool {
        self.first.is_empty() && self.second.is_empty()
    }
}

fn collect(
    f: &Formula,
    bound1: &mut Vec<Variable>,
    bound2: &mut Vec<String>,
    out: &mut FreeVariables,
) {
    let lit = |l: &Literal, bound1: &Vec<Variable>, out: &mut FreeVariables| {
        for v in l.variables() {
            if !bound1.contains(v) {
                out.first.insert(v.clone());
            }
        }
    };
    let so = |t: &SecondOrderTerm, bound1: &Vec<Variable>, bound2: &Vec<String>, out: &mut FreeVariables| match t {
        SecondOrderTerm::Lit(l) => lit(l, bound1, out),
        SecondOrderTerm::Var(x) => {
            if !bound2.contains(x) {
                out.second.insert(x.clone());
            }
        }
    };
    match f {
        Formula::Lit(l) => lit(l, bound1, out),
        Formula::SoVar(x) => so(&SecondOrderTerm::Var(x.clone()), bound1, bound2, out),
        Formula::SoEq(a, b) => {
            so(a, bound1, bound2, out);
            so(b, bound1, bound2, out);
        }
        Formula::SoAtom { args, .. } => args.iter().for_each(|a| so(a, bound1, bound2, out)),
        Formula::Not(g) => collect(g, bound1, bound2, out),
        Formula::Or(a, b) => {
            collect(a, bound1, bound2, out);
            collect(b, bound1, bound2, out);
        }
        Formula::Exists(v, body) => {
            bound1.push(v.clone());
            collect(body, bound1, bound2, out);
            bound1.pop();
        }
        Formula::ExistsSo(x, body) => {
            bound2.push(x.clone());
            collect(body, bound1, bound2, out);
            bound2.pop();
        }
    }
}

/// Variables of either order with at least one free occurrence.
pub fn free_variables(f: &Formula) -> FreeVariables {
    let mut out = FreeVariables::default();
    collect(f, &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

/// A formula without free variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sentence(Formula);

impl Sentence {
    /// Returns `None` when the formula has a free variable.
    pub fn new(f: Formula) -> Option<Self> {
        free_variables(&f).is_empty().then_some(Sentence(f))
    }

    pub fn formula(&self) -> &Formula {
        &self.0
    }

    pub fn into_formula(self) -> Formula {
        self.0
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Binds every free variable existentially. First-order variables come
/// outermost in canonical order (sort, then name), second-order variables
/// inside them in name order.
pub fn existential_closure(f: &Formula) -> Sentence {
    let free = free_variables(f);
    let mut body = f.clone();
    for x in free.second.into_iter().rev() {
        body = Formula::exists_so(x, body);
    }
    for v in free.first.into_iter().rev() {
        body = Formula::exists(v, body);
    }
    Sentence(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::logic::parse::parse_formula;

    #[test]
    fn ground_literal_has_no_free_variables() {
        let a = fixtures::plant_alphabet();
        assert!(free_variables(&parse_formula("Hold(F, No)", &a).unwrap()).is_empty());
    }

    #[test]
    fn shadowing_keeps_outer_occurrence_free() {
        let a = fixtures::plant_alphabet();
        let f = parse_formula("Open(x:comp) | exists x:comp . Open(x:comp)", &a).unwrap();
        let fv = free_variables(&f);
        assert_eq!(fv.first, BTreeSet::from([Variable::new("x", "comp")]));
        assert!(fv.second.is_empty());
    }

    #[test]
    fn second_order_free_variable() {
        let a = fixtures::plant_alphabet();
        let f = parse_formula("Action(X, Open(F), Hold(F,High))", &a).unwrap();
        let fv = free_variables(&f);
        assert!(fv.first.is_empty());
        assert_eq!(fv.second, BTreeSet::from(["X".to_string()]));
    }

    #[test]
    fn closure_order_and_identity_on_sentences() {
        let a = fixtures::plant_alphabet();
        let f = parse_formula("Hold(y:comp, s:state) | Open(x:comp) | Action(Y, X, X)", &a).unwrap();
        let c = existential_closure(&f);
        assert!(c.to_string().starts_with("exists x:comp . exists y:comp . exists s:state . exists X . exists Y . "));
        assert!(free_variables(c.formula()).is_empty());
        let s = parse_formula("Open(F)", &a).unwrap();
        assert_eq!(existential_closure(&s).into_formula(), s);
    }
}
