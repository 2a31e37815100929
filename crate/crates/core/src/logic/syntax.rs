use serde::{Deserialize, Serialize};

use super::alphabet::Alphabet;

/// A first-order variable. Field order gives the canonical variable order:
/// sort name first, then variable name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub sort: String,
    pub name: String,
}

impl Variable {
    pub fn new(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Variable { sort: sort.into(), name: name.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Const { sort: String, name: String },
    Var(Variable),
}

impl Term {
    pub fn constant(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Term::Const { sort: sort.into(), name: name.into() }
    }

    pub fn var(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Term::Var(Variable::new(name, sort))
    }

    pub fn sort(&self) -> &str {
        match self {
            Term::Const { sort, .. } => sort,
            Term::Var(v) => &v.sort,
        }
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const { .. } => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Atom {
    Pred { name: String, args: Vec<Term> },
    Eq(Term, Term),
}

impl Atom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Pred { args, .. } => args.iter().collect(),
            Atom::Eq(l, r) => vec![l, r],
        }
    }
}

/// A signed atom. Sorting puts `p(..)` immediately before `!p(..)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn pred(name: impl Into<String>, args: Vec<Term>) -> Self {
        Literal { atom: Atom::Pred { name: name.into(), args }, negated: false }
    }

    pub fn eq(left: Term, right: Term) -> Self {
        Literal { atom: Atom::Eq(left, right), negated: false }
    }

    pub fn negate(mut self) -> Self {
        self.negated = !self.negated;
        self
    }

    pub fn is_equality(&self) -> bool {
        matches!(self.atom, Atom::Eq(..))
    }

    pub fn is_ground(&self) -> bool {
        self.atom.terms().iter().all(|t| !t.is_var())
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.atom.terms().into_iter().filter_map(Term::as_var)
    }

    /// Applies a term map to every argument.
    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Literal {
        let atom = match &self.atom {
            Atom::Pred { name, args } => Atom::Pred { name: name.clone(), args: args.iter().map(&mut f).collect() },
            Atom::Eq(l, r) => Atom::Eq(f(l), f(r)),
        };
        Literal { atom, negated: self.negated }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SecondOrderTerm {
    Lit(Literal),
    Var(String),
}

/// Formula tree. Conjunction, implication, universal quantifiers and the
/// truth constants are macros over these constructors and never stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    Lit(Literal),
    SoVar(String),
    SoEq(SecondOrderTerm, SecondOrderTerm),
    SoAtom { rel: String, args: Vec<SecondOrderTerm> },
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(Variable, Box<Formula>),
    ExistsSo(String, Box<Formula>),
}

impl Formula {
    /// Negation. A positive literal absorbs the negation so that `!p(x)` and
    /// `!(a = b)` stay literals.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::Lit(l) if !l.negated => Formula::Lit(l.negate()),
            f => Formula::Not(Box::new(f)),
        }
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::or(Formula::not(a), Formula::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    pub fn exists(v: Variable, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn exists_so(name: impl Into<String>, body: Formula) -> Formula {
        Formula::ExistsSo(name.into(), Box::new(body))
    }

    pub fn forall(v: Variable, body: Formula) -> Formula {
        Formula::not(Formula::exists(v, Formula::not(body)))
    }

    pub fn forall_so(name: impl Into<String>, body: Formula) -> Formula {
        Formula::not(Formula::exists_so(name, Formula::not(body)))
    }

    /// The contradiction macro: `(c = c) & !(c = c)` over the first declared
    /// sort's first constant, or `exists x:s . !(x = x)` when that sort has no
    /// constants.
    pub fn bottom(alphabet: &Alphabet) -> Formula {
        let Some(sort) = alphabet.sorts().first() else {
            // With no sorts every predicate is nullary.
            let p = Formula::Lit(Literal::pred(alphabet.predicates()[0].name.clone(), vec![]));
            return Formula::and(p.clone(), Formula::not(p));
        };
        match alphabet.constants(sort).first() {
            Some(c) => {
                let t = Term::constant(c.clone(), sort.clone());
                let eq = Formula::Lit(Literal::eq(t.clone(), t));
                Formula::and(eq.clone(), Formula::not(eq))
            }
            None => {
                let v = Variable::new("x", sort.clone());
                let t = Term::Var(v.clone());
                Formula::exists(v, Formula::Lit(Literal::eq(t.clone(), t).negate()))
            }
        }
    }

    pub fn top(alphabet: &Alphabet) -> Formula {
        Formula::not(Formula::bottom(alphabet))
    }

    /// Left-nested conjunction; the empty conjunction is the `true` macro.
    pub fn conjunction(items: impl IntoIterator<Item = Formula>, alphabet: &Alphabet) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or_else(|| Formula::top(alphabet))
    }

    /// Left-nested disjunction; the empty disjunction is the `false` macro.
    pub fn disjunction(items: impl IntoIterator<Item = Formula>, alphabet: &Alphabet) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or_else(|| Formula::bottom(alphabet))
    }

    pub fn lit(l: Literal) -> Formula {
        Formula::Lit(l)
    }

    pub fn so_atom(rel: impl Into<String>, args: Vec<SecondOrderTerm>) -> Formula {
        Formula::SoAtom { rel: rel.into(), args }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Lit(_) | Formula::SoVar(_) | Formula::SoEq(..) | Formula::SoAtom { .. } => 1,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::ExistsSo(_, f) => 1 + f.size(),
            Formula::Or(a, b) => 1 + a.size() + b.size(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negation_folds_into_positive_literals_only() {
        let p = Literal::pred("p", vec![Term::var("x", "s")]);
        assert_eq!(Formula::not(Formula::Lit(p.clone())), Formula::Lit(p.clone().negate()));
        let double = Formula::not(Formula::not(Formula::Lit(p.clone())));
        assert_eq!(double, Formula::Not(Box::new(Formula::Lit(p.negate()))));
    }

    #[test]
    fn literal_order_puts_positive_first() {
        let p = Literal::pred("p", vec![]);
        assert!(p < p.clone().negate());
    }

    #[test]
    fn variables_order_by_sort_then_name() {
        assert!(Variable::new("z", "a") < Variable::new("a", "b"));
        assert!(Variable::new("a", "s") < Variable::new("b", "s"));
    }
}
