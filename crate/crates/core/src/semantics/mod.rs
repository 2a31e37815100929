//! Finite structures and exhaustive model checking.

mod class;
mod eval;
mod structure;

pub use class::{class_from_theory, equivalent_in, logically_implies, truth_set, StructureClass, TheoryRestriction};
pub use eval::{assignments, satisfies, valid_in, Assignment};
pub use structure::{FiniteStructure, GroundLiteral, StructureFile};
