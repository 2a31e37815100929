use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A first-order predicate symbol together with the sorts of its arguments.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateDecl {
    pub name: String,
    #[serde(rename = "argSorts")]
    pub arg_sorts: Vec<String>,
}

/// A second-order predicate symbol; its arguments are first-order literals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDecl {
    pub name: String,
    pub arity: usize,
}

/// Sorts, constants, first-order predicates and second-order predicates.
///
/// Variables of either order are not declared: every well-formed identifier
/// is available as a variable name. The JSON form is
/// `{sorts, constants, predicates: [{name, argSorts}], secondOrder: [{name, arity}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AlphabetFile", into = "AlphabetFile")]
pub struct Alphabet {
    sorts: Vec<String>,
    constants: BTreeMap<String, Vec<String>>,
    predicates: Vec<PredicateDecl>,
    relations: Vec<RelationDecl>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct AlphabetFile {
    sorts: Vec<String>,
    #[serde(default)]
    constants: BTreeMap<String, Vec<String>>,
    predicates: Vec<PredicateDecl>,
    #[serde(default, rename = "secondOrder")]
    second_order: Vec<RelationDecl>,
}

impl TryFrom<AlphabetFile> for Alphabet {
    type Error = Error;

    fn try_from(file: AlphabetFile) -> Result<Self> {
        Alphabet::new(file.sorts, file.constants, file.predicates, file.second_order)
    }
}

impl From<Alphabet> for AlphabetFile {
    fn from(a: Alphabet) -> Self {
        AlphabetFile {
            sorts: a.sorts,
            constants: a.constants,
            predicates: a.predicates,
            second_order: a.relations,
        }
    }
}

impl Alphabet {
    pub fn new(
        sorts: Vec<String>,
        constants: BTreeMap<String, Vec<String>>,
        predicates: Vec<PredicateDecl>,
        relations: Vec<RelationDecl>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in &sorts {
            if !is_identifier(s) {
                return Err(Error::Alphabet(format!("sort name `{s}` is not an identifier")));
            }
            if !seen.insert(s.as_str()) {
                return Err(Error::Alphabet(format!("duplicate sort `{s}`")));
            }
        }
        let mut constants = constants;
        for (sort, names) in &constants {
            if !seen.contains(sort.as_str()) {
                return Err(Error::Alphabet(format!("constants declared for unknown sort `{sort}`")));
            }
            let mut local = BTreeSet::new();
            for c in names {
                if !is_identifier(c) {
                    return Err(Error::Alphabet(format!("constant `{c}` is not an identifier")));
                }
                if !local.insert(c) {
                    return Err(Error::Alphabet(format!("duplicate constant `{c}` in sort `{sort}`")));
                }
            }
        }
        for s in &sorts {
            constants.entry(s.clone()).or_default();
        }
        if predicates.is_empty() {
            return Err(Error::Alphabet("at least one predicate symbol is required".into()));
        }
        let mut names = BTreeSet::new();
        for p in &predicates {
            if !is_identifier(&p.name) {
                return Err(Error::Alphabet(format!("predicate `{}` is not an identifier", p.name)));
            }
            if !names.insert(p.name.as_str()) {
                return Err(Error::Alphabet(format!("duplicate predicate `{}`", p.name)));
            }
            for s in &p.arg_sorts {
                if !seen.contains(s.as_str()) {
                    return Err(Error::Alphabet(format!(
                        "predicate `{}` uses undeclared sort `{s}`",
                        p.name
                    )));
                }
            }
        }
        for r in &relations {
            if !is_identifier(&r.name) {
                return Err(Error::Alphabet(format!("relation `{}` is not an identifier", r.name)));
            }
            if r.arity == 0 {
                return Err(Error::Alphabet(format!("relation `{}` must have arity >= 1", r.name)));
            }
            if !names.insert(r.name.as_str()) {
                return Err(Error::Alphabet(format!("duplicate symbol `{}`", r.name)));
            }
        }
        Ok(Alphabet { sorts, constants, predicates, relations })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Alphabet(e.to_string()))
    }

    pub fn sorts(&self) -> &[String] {
        &self.sorts
    }

    pub fn has_sort(&self, sort: &str) -> bool {
        self.sorts.iter().any(|s| s == sort)
    }

    pub fn constants(&self, sort: &str) -> &[String] {
        self.constants.get(sort).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_constant(&self, sort: &str, name: &str) -> bool {
        self.constants(sort).iter().any(|c| c == name)
    }

    /// Sorts (in declaration order) that declare a constant with this name.
    pub fn sorts_of_constant(&self, name: &str) -> Vec<&str> {
        self.sorts
            .iter()
            .filter(|s| self.is_constant(s, name))
            .map(String::as_str)
            .collect()
    }

    pub fn predicates(&self) -> &[PredicateDecl] {
        &self.predicates
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn relations(&self) -> &[RelationDecl] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&RelationDecl> {
        self.relations.iter().find(|r| r.name == name)
    }

    /// Largest first-order predicate arity.
    pub fn max_predicate_arity(&self) -> usize {
        self.predicates.iter().map(|p| p.arg_sorts.len()).max().unwrap_or(0)
    }
}

pub(crate) const KEYWORDS: [&str; 4] = ["exists", "forall", "true", "false"];

/// ASCII letters, digits and `_`, with single inner hyphens allowed
/// (`Cause-Effect`). Keywords of the formula grammar are excluded.
pub(crate) fn is_identifier(s: &str) -> bool {
    let bytes = s.as_bytes();
    let word = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    if bytes.is_empty() || !word(bytes[0]) || KEYWORDS.contains(&s) {
        return false;
    }
    bytes.iter().enumerate().all(|(i, &b)| {
        word(b) || (b == b'-' && bytes.get(i + 1).copied().is_some_and(word))
    })
}
