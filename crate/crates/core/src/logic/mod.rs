//! The two-level many-sorted language: alphabet, terms, literals and
//! formulas, with parsing, printing, sort checking and closure.

mod alphabet;
mod check;
mod parse;
mod print;
mod syntax;
mod vars;

pub use alphabet::{Alphabet, PredicateDecl, RelationDecl};
pub use check::{literal_well_sorted, well_sorted, Diagnostic, SortCheck};
pub use parse::{parse_formula, parse_literal, parse_unchecked};
pub use syntax::{Atom, Formula, Literal, SecondOrderTerm, Term, Variable};
pub use vars::{existential_closure, free_variables, FreeVariables, Sentence};
