use std::collections::BTreeSet;
use std::path::Path;

use serde_json::Value;

use super::eval::{assignments, eval, Assignment};
use super::structure::{FiniteStructure, StructureFile};
use crate::error::{Error, Result};
use crate::logic::{free_variables, well_sorted, Alphabet, Formula, Sentence};

/// A finite collection of structures sharing domains and constants, kept
/// sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureClass {
    structures: Vec<FiniteStructure>,
}

impl StructureClass {
    pub fn new(structures: Vec<FiniteStructure>) -> Result<Self> {
        if structures.is_empty() {
            return Err(Error::Structure("a structure class needs at least one structure".into()));
        }
        Self::from_members(structures)
    }

    fn from_members(mut structures: Vec<FiniteStructure>) -> Result<Self> {
        if let Some(first) = structures.first() {
            if let Some(bad) = structures.iter().position(|m| !m.shares_frame(first)) {
                return Err(Error::Structure(format!(
                    "structure {bad} does not share domains and constants with the first structure"
                )));
            }
            if structures.iter().any(|m| m.alphabet() != first.alphabet()) {
                return Err(Error::Structure("structures use different alphabets".into()));
            }
        }
        structures.sort();
        structures.dedup();
        Ok(StructureClass { structures })
    }

    /// Loads a class from a JSON list whose entries are inline structure
    /// objects or paths (relative to `base`) of structure files.
    pub fn from_json_value(alphabet: &Alphabet, value: &Value, base: &Path) -> Result<Self> {
        let Value::Array(items) = value else {
            return Err(Error::Structure("a class file is a JSON list".into()));
        };
        let mut out = Vec::new();
        for item in items {
            let file: StructureFile = match item {
                Value::String(p) => {
                    let text = std::fs::read_to_string(base.join(p))?;
                    serde_json::from_str(&text).map_err(|e| Error::Structure(format!("{p}: {e}")))?
                }
                v => serde_json::from_value(v.clone()).map_err(|e| Error::Structure(e.to_string()))?,
            };
            out.push(FiniteStructure::new(alphabet, file)?);
        }
        StructureClass::new(out)
    }

    pub fn structures(&self) -> &[FiniteStructure] {
        &self.structures
    }

    pub fn len(&self) -> usize {
        self.structures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structures.is_empty()
    }

    pub fn alphabet(&self) -> Option<&Alphabet> {
        self.structures.first().map(FiniteStructure::alphabet)
    }
}

fn check_all<'a>(c: &StructureClass, fs: impl IntoIterator<Item = &'a Formula>) -> Result<()> {
    let Some(a) = c.alphabet() else { return Ok(()) };
    for f in fs {
        let v = well_sorted(f, a);
        if !v.is_ok() {
            return Err(Error::IllSorted(format!("{f}: {v}")));
        }
    }
    Ok(())
}

/// `Γ ⊨_C Δ`: every structure and assignment satisfying all of `Γ` also
/// satisfies all of `Δ`. Assignments range over the free variables of both
/// sets; sentences need a single check per structure.
pub fn logically_implies(gamma: &[Formula], delta: &[Formula], c: &StructureClass) -> Result<bool> {
    check_all(c, gamma.iter().chain(delta))?;
    let mut first = BTreeSet::new();
    let mut second = BTreeSet::new();
    for f in gamma.iter().chain(delta) {
        let fv = free_variables(f);
        first.extend(fv.first);
        second.extend(fv.second);
    }
    let first: Vec<_> = first.into_iter().collect();
    let second: Vec<_> = second.into_iter().collect();
    for m in c.structures() {
        for a in assignments(m, &first, &second) {
            if all_hold(m, gamma, &a)? && !all_hold(m, delta, &a)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn all_hold(m: &FiniteStructure, fs: &[Formula], a: &Assignment) -> Result<bool> {
    for f in fs {
        if !eval(m, f, a)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `φ ↔_C ψ`.
pub fn equivalent_in(phi: &Formula, psi: &Formula, c: &StructureClass) -> Result<bool> {
    let a = std::slice::from_ref(phi);
    let b = std::slice::from_ref(psi);
    Ok(logically_implies(a, b, c)? && logically_implies(b, a, c)?)
}

/// Indices of the class members in which a sentence holds.
pub fn truth_set(s: &Sentence, c: &StructureClass) -> Result<BTreeSet<usize>> {
    check_all(c, [s.formula()])?;
    let mut out = BTreeSet::new();
    for (i, m) in c.structures().iter().enumerate() {
        if eval(m, s.formula(), &Assignment::default())? {
            out.insert(i);
        }
    }
    Ok(out)
}

/// Result of restricting a class by a theory.
#[derive(Clone, Debug)]
pub struct TheoryRestriction {
    pub class: StructureClass,
    /// Set when no candidate validates the theory.
    pub empty: bool,
}

/// The candidates validating every sentence of the theory.
pub fn class_from_theory(candidates: &StructureClass, theory: &[Sentence]) -> Result<TheoryRestriction> {
    check_all(candidates, theory.iter().map(Sentence::formula))?;
    let mut kept = Vec::new();
    for m in candidates.structures() {
        if all_hold(m, &theory.iter().map(|s| s.formula().clone()).collect::<Vec<_>>(), &Assignment::default())? {
            kept.push(m.clone());
        }
    }
    let empty = kept.is_empty();
    Ok(TheoryRestriction { class: StructureClass::from_members(kept)?, empty })
}
