use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::Alphabet;

/// A signed ground predicate literal over domain elements: a member of the
/// literal universe `I` of a structure.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundLiteral {
    pub pred: String,
    pub args: Vec<String>,
    #[serde(default)]
    pub neg: bool,
}

impl GroundLiteral {
    pub fn new(pred: impl Into<String>, args: Vec<String>, neg: bool) -> Self {
        GroundLiteral { pred: pred.into(), args, neg }
    }
}

impl fmt::Display for GroundLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.neg {
            f.write_str("!")?;
        }
        write!(f, "{}({})", self.pred, self.args.join(", "))
    }
}

/// On-disk form of a structure.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct StructureFile {
    pub domains: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub constants: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default)]
    pub predicates: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default, rename = "secondOrder")]
    pub second_order: BTreeMap<String, Vec<Vec<GroundLiteral>>>,
}

/// A finite first-order structure together with second-order relations over
/// its literal universe.
#[derive(Clone, Debug)]
pub struct FiniteStructure {
    alphabet: Alphabet,
    domains: BTreeMap<String, Vec<String>>,
    constants: BTreeMap<String, BTreeMap<String, String>>,
    predicates: BTreeMap<String, BTreeSet<Vec<String>>>,
    relations: BTreeMap<String, BTreeSet<Vec<GroundLiteral>>>,
    universe: Vec<GroundLiteral>,
}

impl PartialEq for FiniteStructure {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FiniteStructure {}

impl PartialOrd for FiniteStructure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FiniteStructure {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.domains, &self.constants, &self.predicates, &self.relations).cmp(&(
            &other.domains,
            &other.constants,
            &other.predicates,
            &other.relations,
        ))
    }
}

impl FiniteStructure {
    pub fn new(alphabet: &Alphabet, file: StructureFile) -> Result<Self> {
        let err = |m: String| Err(Error::Structure(m));
        for sort in file.domains.keys() {
            if !alphabet.has_sort(sort) {
                return err(format!("domain given for undeclared sort `{sort}`"));
            }
        }
        let mut domains = BTreeMap::new();
        for sort in alphabet.sorts() {
            let Some(elems) = file.domains.get(sort) else {
                return err(format!("sort `{sort}` has no domain"));
            };
            if elems.is_empty() {
                return err(format!("domain of sort `{sort}` is empty"));
            }
            if elems.iter().collect::<BTreeSet<_>>().len() != elems.len() {
                return err(format!("domain of sort `{sort}` repeats an element"));
            }
            domains.insert(sort.clone(), elems.clone());
        }
        let mut constants = BTreeMap::new();
        for sort in alphabet.sorts() {
            let given = file.constants.get(sort);
            let mut map = BTreeMap::new();
            for c in alphabet.constants(sort) {
                // Constants default to the domain element of the same name.
                let e = given.and_then(|g| g.get(c)).unwrap_or(c);
                if !domains[sort].contains(e) {
                    return err(format!("constant `{c}` of sort `{sort}` denotes `{e}`, which is not in the domain"));
                }
                map.insert(c.clone(), e.clone());
            }
            if let Some(g) = given {
                if let Some(extra) = g.keys().find(|k| !alphabet.is_constant(sort, k)) {
                    return err(format!("`{extra}` is not a constant of sort `{sort}`"));
                }
            }
            constants.insert(sort.clone(), map);
        }
        for name in file.constants.keys() {
            if !alphabet.has_sort(name) {
                return err(format!("constants given for undeclared sort `{name}`"));
            }
        }
        let mut predicates = BTreeMap::new();
        for p in alphabet.predicates() {
            predicates.insert(p.name.clone(), BTreeSet::new());
        }
        for (name, tuples) in file.predicates {
            let Some(decl) = alphabet.predicate(&name) else {
                return err(format!("extension given for undeclared predicate `{name}`"));
            };
            for t in tuples {
                if t.len() != decl.arg_sorts.len() || t.iter().zip(&decl.arg_sorts).any(|(e, s)| !domains[s].contains(e)) {
                    return err(format!("tuple ({}) does not fit `{name}`", t.join(", ")));
                }
                predicates.get_mut(&name).unwrap().insert(t);
            }
        }
        let mut m = FiniteStructure {
            alphabet: alphabet.clone(),
            domains,
            constants,
            predicates,
            relations: BTreeMap::new(),
            universe: Vec::new(),
        };
        m.universe = m.compute_universe();
        for r in alphabet.relations() {
            m.relations.insert(r.name.clone(), BTreeSet::new());
        }
        for (name, tuples) in file.second_order {
            let Some(decl) = alphabet.relation(&name) else {
                return err(format!("extension given for undeclared second-order predicate `{name}`"));
            };
            for t in tuples {
                if t.len() != decl.arity {
                    return err(format!("`{name}` tuple has {} entries, expected {}", t.len(), decl.arity));
                }
                if let Some(bad) = t.iter().find(|l| !m.in_universe(l)) {
                    return err(format!("`{bad}` in a `{name}` tuple is not a literal over the domains"));
                }
                m.relations.get_mut(&name).unwrap().insert(t);
            }
        }
        Ok(m)
    }

    pub fn from_json(alphabet: &Alphabet, text: &str) -> Result<Self> {
        let file: StructureFile = serde_json::from_str(text).map_err(|e| Error::Structure(e.to_string()))?;
        FiniteStructure::new(alphabet, file)
    }

    pub fn to_file(&self) -> StructureFile {
        StructureFile {
            domains: self.domains.clone(),
            constants: self.constants.clone(),
            predicates: self
                .predicates
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
                .collect(),
            second_order: self
                .relations
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
                .collect(),
        }
    }

    fn compute_universe(&self) -> Vec<GroundLiteral> {
        let mut out = Vec::new();
        for p in self.alphabet.predicates() {
            let mut tuples: Vec<Vec<String>> = vec![Vec::new()];
            for s in &p.arg_sorts {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        self.domains[s].iter().map(move |e| {
                            let mut t = t.clone();
                            t.push(e.clone());
                            t
                        })
                    })
                    .collect();
            }
            for t in tuples {
                out.push(GroundLiteral::new(p.name.clone(), t.clone(), false));
                out.push(GroundLiteral::new(p.name.clone(), t, true));
            }
        }
        out
    }

    fn in_universe(&self, l: &GroundLiteral) -> bool {
        match self.alphabet.predicate(&l.pred) {
            Some(d) => {
                d.arg_sorts.len() == l.args.len()
                    && l.args.iter().zip(&d.arg_sorts).all(|(e, s)| self.domains[s].contains(e))
            }
            None => false,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn domain(&self, sort: &str) -> &[String] {
        self.domains.get(sort).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn domains(&self) -> &BTreeMap<String, Vec<String>> {
        &self.domains
    }

    pub fn constant_value(&self, sort: &str, name: &str) -> Option<&str> {
        self.constants.get(sort)?.get(name).map(String::as_str)
    }

    pub fn constant_map(&self) -> &BTreeMap<String, BTreeMap<String, String>> {
        &self.constants
    }

    pub fn holds(&self, pred: &str, args: &[String]) -> bool {
        self.predicates.get(pred).is_some_and(|s| s.contains(args))
    }

    /// Truth of a member of the literal universe.
    pub fn literal_holds(&self, l: &GroundLiteral) -> bool {
        self.holds(&l.pred, &l.args) != l.neg
    }

    pub fn relation_holds(&self, rel: &str, args: &[GroundLiteral]) -> bool {
        self.relations.get(rel).is_some_and(|s| s.contains(args))
    }

    /// The literal universe `I`: every signed ground predicate literal.
    pub fn universe(&self) -> &[GroundLiteral] {
        &self.universe
    }

    pub fn extension(&self, pred: &str) -> Option<&BTreeSet<Vec<String>>> {
        self.predicates.get(pred)
    }

    pub fn relation(&self, rel: &str) -> Option<&BTreeSet<Vec<GroundLiteral>>> {
        self.relations.get(rel)
    }

    /// Same domains and constant interpretation.
    pub fn shares_frame(&self, other: &FiniteStructure) -> bool {
        self.domains == other.domains && self.constants == other.constants
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn plant_structure_universe() {
        let m = fixtures::plant_structure();
        // Hold over 2x2 plus Open over 2, each with both signs.
        assert_eq!(m.universe().len(), 12);
        assert!(m.holds("Hold", &["F".into(), "No".into()]));
        assert!(!m.holds("Open", &["P".into()]));
        let l = GroundLiteral::new("Open", vec!["P".into()], true);
        assert!(m.literal_holds(&l));
        assert_eq!(l.to_string(), "!Open(P)");
    }

    #[test]
    fn rejects_malformed_structures() {
        let a = fixtures::plant_alphabet();
        let empty = r#"{"domains": {"comp": [], "state": ["High"]}}"#;
        assert!(FiniteStructure::from_json(&a, empty).is_err());
        let bad_tuple = r#"{"domains": {"comp": ["F", "P"], "state": ["High", "No"]}, "predicates": {"Open": [["High"]]}}"#;
        assert!(FiniteStructure::from_json(&a, bad_tuple).is_err());
        let bad_const = r#"{"domains": {"comp": ["a"], "state": ["High", "No"]}}"#;
        assert!(FiniteStructure::from_json(&a, bad_const).is_err());
        let bad_rel = r#"{"domains": {"comp": ["F", "P"], "state": ["High", "No"]},
            "secondOrder": {"Cause-Effect": [[{"pred": "Open", "args": ["F"]}]]}}"#;
        assert!(FiniteStructure::from_json(&a, bad_rel).is_err());
    }

    #[test]
    fn file_round_trip() {
        let m = fixtures::plant_structure();
        let again = FiniteStructure::new(m.alphabet(), m.to_file()).unwrap();
        assert_eq!(m, again);
    }
}
