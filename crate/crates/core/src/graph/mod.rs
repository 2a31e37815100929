//! Formula graphs: a finite set of first-order literals plus one family of
//! literal tuples per second-order predicate symbol.

mod canon;
mod embed;
mod enumerate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{
    existential_closure, literal_well_sorted, parse_literal, Alphabet, Formula, Literal, SecondOrderTerm, Sentence,
    Variable,
};

pub use canon::{canonical_form, canonical_key};
pub use embed::{compose, find_embedding, is_isomorphic, verify_embedding, EmbeddingWitness, Renaming};
pub use enumerate::{enumerate_graphs, EnumerateOptions, DEFAULT_CLASS_CEILING};

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormulaGraph {
    vertices: BTreeSet<Literal>,
    /// Only non-empty families are stored.
    edges: BTreeMap<String, BTreeSet<Vec<Literal>>>,
}

/// On-disk form: literal strings in the formula grammar.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: BTreeMap<String, Vec<Vec<String>>>,
}

impl FormulaGraph {
    pub fn empty() -> Self {
        FormulaGraph::default()
    }

    /// Builds a graph, checking every vertex against the alphabet, the
    /// one-sort-per-variable-name rule, relation arities, and that edge
    /// entries are non-equality vertices.
    pub fn new(
        alphabet: &Alphabet,
        vertices: impl IntoIterator<Item = Literal>,
        edges: impl IntoIterator<Item = (String, Vec<Literal>)>,
    ) -> Result<Self> {
        let vertices: BTreeSet<Literal> = vertices.into_iter().collect();
        let mut sorts: BTreeMap<&str, &str> = BTreeMap::new();
        for v in &vertices {
            let check = literal_well_sorted(v, alphabet);
            if !check.is_ok() {
                return Err(Error::Graph(format!("vertex `{v}`: {check}")));
            }
            for x in v.variables() {
                if let Some(prev) = sorts.insert(&x.name, &x.sort) {
                    if prev != x.sort {
                        return Err(Error::Graph(format!(
                            "variable `{}` is used with sorts `{prev}` and `{}`",
                            x.name, x.sort
                        )));
                    }
                }
            }
        }
        let mut families: BTreeMap<String, BTreeSet<Vec<Literal>>> = BTreeMap::new();
        for (rel, tuple) in edges {
            let Some(decl) = alphabet.relation(&rel) else {
                return Err(Error::Graph(format!("unknown second-order predicate `{rel}`")));
            };
            if tuple.len() != decl.arity {
                return Err(Error::Graph(format!("`{rel}` edge has {} entries, expected {}", tuple.len(), decl.arity)));
            }
            for l in &tuple {
                if !vertices.contains(l) {
                    return Err(Error::Graph(format!("`{rel}` edge refers to `{l}`, which is not a vertex")));
                }
                if l.is_equality() {
                    return Err(Error::Graph(format!("`{rel}` edge has the equality literal `{l}` as an entry")));
                }
            }
            families.entry(rel).or_default().insert(tuple);
        }
        Ok(FormulaGraph { vertices, edges: families })
    }

    /// Assembles a graph from parts already known to be well formed.
    pub(crate) fn from_parts(vertices: BTreeSet<Literal>, edges: BTreeMap<String, BTreeSet<Vec<Literal>>>) -> Self {
        let edges = edges.into_iter().filter(|(_, s)| !s.is_empty()).collect();
        FormulaGraph { vertices, edges }
    }

    pub fn from_file(alphabet: &Alphabet, file: &GraphFile) -> Result<Self> {
        let lit = |s: &str| parse_literal(s, alphabet).map_err(|e| Error::Graph(format!("`{s}`: {e}")));
        let vertices = file.vertices.iter().map(|s| lit(s)).collect::<Result<Vec<_>>>()?;
        let mut edges = Vec::new();
        for (rel, tuples) in &file.edges {
            for t in tuples {
                edges.push((rel.clone(), t.iter().map(|s| lit(s)).collect::<Result<Vec<_>>>()?));
            }
        }
        FormulaGraph::new(alphabet, vertices, edges)
    }

    pub fn from_json(alphabet: &Alphabet, text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Graph(e.to_string()))?;
        FormulaGraph::from_file(alphabet, &file)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            vertices: self.vertices.iter().map(ToString::to_string).collect(),
            edges: self
                .edges
                .iter()
                .map(|(r, ts)| (r.clone(), ts.iter().map(|t| t.iter().map(ToString::to_string).collect()).collect()))
                .collect(),
        }
    }

    pub fn vertices(&self) -> &BTreeSet<Literal> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeMap<String, BTreeSet<Vec<Literal>>> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().map(BTreeSet::len).sum()
    }

    /// `|G|`, the number of vertices.
    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    /// First-order variables occurring in some vertex.
    pub fn variables(&self) -> BTreeSet<Variable> {
        self.vertices.iter().flat_map(|l| l.variables().cloned()).collect()
    }

    /// Applies a variable map to every vertex and edge entry.
    pub fn rename(&self, f: impl Fn(&Variable) -> Variable) -> FormulaGraph {
        let lit = |l: &Literal| {
            l.map_terms(|t| match t.as_var() {
                Some(v) => crate::logic::Term::Var(f(v)),
                None => t.clone(),
            })
        };
        FormulaGraph {
            vertices: self.vertices.iter().map(lit).collect(),
            edges: self.edges.iter().map(|(r, ts)| (r.clone(), ts.iter().map(|t| t.iter().map(lit).collect()).collect())).collect(),
        }
    }

    /// `Form(G)`: the conjunction of the vertices and one atom per edge, in
    /// canonical conjunct order.
    pub fn form(&self, alphabet: &Alphabet) -> Formula {
        let mut conjuncts: Vec<Formula> = self.vertices.iter().cloned().map(Formula::Lit).collect();
        for (rel, tuples) in &self.edges {
            for t in tuples {
                conjuncts.push(Formula::so_atom(rel.clone(), t.iter().cloned().map(SecondOrderTerm::Lit).collect()));
            }
        }
        conjuncts.sort();
        Formula::conjunction(conjuncts, alphabet)
    }

    /// Every subgraph: each vertex subset with each subset of the edges
    /// lying inside it. There are at most `2^|V| * 2^|E|` of them.
    pub fn subgraphs(&self) -> Vec<FormulaGraph> {
        let vs: Vec<&Literal> = self.vertices.iter().collect();
        let all_edges: Vec<(&String, &Vec<Literal>)> =
            self.edges.iter().flat_map(|(r, ts)| ts.iter().map(move |t| (r, t))).collect();
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << vs.len()) {
            let chosen: BTreeSet<Literal> =
                vs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, l)| (*l).clone()).collect();
            let inside: Vec<_> = all_edges.iter().filter(|(_, t)| t.iter().all(|l| chosen.contains(l))).collect();
            for emask in 0u64..(1u64 << inside.len()) {
                let mut edges: BTreeMap<String, BTreeSet<Vec<Literal>>> = BTreeMap::new();
                for (i, (r, t)) in inside.iter().enumerate() {
                    if emask >> i & 1 == 1 {
                        edges.entry((*r).clone()).or_default().insert((*t).clone());
                    }
                }
                out.push(FormulaGraph::from_parts(chosen.clone(), edges));
            }
        }
        out
    }
}

/// `Sent(G)`: the existential closure of `Form(G)`. The empty graph yields
/// the `true` macro.
pub fn sent_of(g: &FormulaGraph, alphabet: &Alphabet) -> Sentence {
    existential_closure(&g.form(alphabet))
}

/// Vertex and edge inclusion.
pub fn is_subgraph(g: &FormulaGraph, h: &FormulaGraph) -> bool {
    g.vertices.is_subset(&h.vertices)
        && g.edges.iter().all(|(r, ts)| h.edges.get(r).is_some_and(|hs| ts.is_subset(hs)))
}

impl fmt::Display for FormulaGraph {
    /// `{v1, v2; R(v1, v2)}`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        let mut first = true;
        for (rel, tuples) in &self.edges {
            for t in tuples {
                f.write_str(if first { "; " } else { ", " })?;
                first = false;
                write!(f, "{rel}(")?;
                for (i, l) in t.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{l}")?;
                }
                f.write_str(")")?;
            }
        }
        f.write_str("}")
    }
}
