use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::FormulaGraph;
use crate::logic::{Literal, Term, Variable};

/// Sort-preserving injective variable map.
pub type Renaming = BTreeMap<Variable, Variable>;

/// Evidence that one graph embeds in another: the renaming, and the vertex
/// map it induces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingWitness {
    #[serde(serialize_with = "as_text_pairs")]
    pub renaming: Renaming,
    #[serde(rename = "vertexMap", serialize_with = "as_text_pairs")]
    pub vertex_map: BTreeMap<Literal, Literal>,
}

fn as_text_pairs<S, K: std::fmt::Display, V: std::fmt::Display>(
    m: &BTreeMap<K, V>,
    s: S,
) -> std::result::Result<S::Ok, S::Error>
where
    S: serde::Serializer,
{
    s.collect_map(m.iter().map(|(k, v)| (k.to_string(), v.to_string())))
}

fn apply(r: &Renaming, l: &Literal) -> Literal {
    l.map_terms(|t| match t.as_var() {
        Some(v) => Term::Var(r.get(v).cloned().unwrap_or_else(|| v.clone())),
        None => t.clone(),
    })
}

/// Tries to extend `r` so that `l` maps onto `target`. Equality literals
/// match in the written orientation only. Returns the variables newly bound.
fn unify(l: &Literal, target: &Literal, r: &mut Renaming, used: &mut BTreeSet<Variable>) -> Option<Vec<Variable>> {
    if l.negated != target.negated {
        return None;
    }
    let (a, b) = (l.atom.terms(), target.atom.terms());
    match (&l.atom, &target.atom) {
        (crate::logic::Atom::Pred { name: p, .. }, crate::logic::Atom::Pred { name: q, .. }) if p == q => {}
        (crate::logic::Atom::Eq(..), crate::logic::Atom::Eq(..)) => {}
        _ => return None,
    }
    if a.len() != b.len() {
        return None;
    }
    let mut bound = Vec::new();
    let undo = |r: &mut Renaming, used: &mut BTreeSet<Variable>, bound: &[Variable]| {
        for v in bound {
            if let Some(w) = r.remove(v) {
                used.remove(&w);
            }
        }
    };
    for (s, t) in a.into_iter().zip(b) {
        let ok = match (s, t) {
            (Term::Const { .. }, _) => s == t,
            (Term::Var(x), Term::Var(y)) => match r.get(x) {
                Some(z) => z == y,
                None if x.sort == y.sort && !used.contains(y) => {
                    r.insert(x.clone(), y.clone());
                    used.insert(y.clone());
                    bound.push(x.clone());
                    true
                }
                None => false,
            },
            (Term::Var(_), Term::Const { .. }) => false,
        };
        if !ok {
            undo(r, used, &bound);
            return None;
        }
    }
    Some(bound)
}

struct Search<'a> {
    order: Vec<&'a Literal>,
    candidates: Vec<Vec<&'a Literal>>,
    /// Edges of `g` to check once their last entry (in search order) is placed.
    checks: Vec<Vec<(&'a String, &'a Vec<Literal>)>>,
    h: &'a FormulaGraph,
}

impl Search<'_> {
    fn run(&self, depth: usize, r: &mut Renaming, used: &mut BTreeSet<Variable>) -> bool {
        if depth == self.order.len() {
            return true;
        }
        for &c in &self.candidates[depth] {
            let Some(bound) = unify(self.order[depth], c, r, used) else { continue };
            let edges_ok = self.checks[depth].iter().all(|(rel, t)| {
                let image: Vec<Literal> = t.iter().map(|l| apply(r, l)).collect();
                self.h.edges.get(*rel).is_some_and(|ts| ts.contains(&image))
            });
            if edges_ok && self.run(depth + 1, r, used) {
                return true;
            }
            for v in bound {
                if let Some(w) = r.remove(&v) {
                    used.remove(&w);
                }
            }
        }
        false
    }
}

/// Searches for an injective sort-preserving renaming `α` with `α(g)` a
/// subgraph of `h`. Vertices are placed most-constrained first.
pub fn find_embedding(g: &FormulaGraph, h: &FormulaGraph) -> Option<EmbeddingWitness> {
    if g.order() > h.order() || g.edge_count() > h.edge_count() {
        return None;
    }
    let mut scratch = Renaming::new();
    let mut used = BTreeSet::new();
    let mut ranked: Vec<(&Literal, Vec<&Literal>)> = g
        .vertices
        .iter()
        .map(|l| {
            let cs = h.vertices.iter().filter(|c| unify(l, c, &mut scratch.clone(), &mut used.clone()).is_some()).collect();
            (l, cs)
        })
        .collect();
    if ranked.iter().any(|(_, cs)| cs.is_empty()) {
        return None;
    }
    ranked.sort_by_key(|(l, cs)| (cs.len(), std::cmp::Reverse(l.variables().count())));
    let position: BTreeMap<&Literal, usize> = ranked.iter().enumerate().map(|(i, (l, _))| (*l, i)).collect();
    let mut checks = vec![Vec::new(); ranked.len()];
    for (rel, ts) in &g.edges {
        for t in ts {
            let last = t.iter().map(|l| position[l]).max().unwrap_or(0);
            checks[last].push((rel, t));
        }
    }
    let search = Search {
        order: ranked.iter().map(|(l, _)| *l).collect(),
        candidates: ranked.into_iter().map(|(_, cs)| cs).collect(),
        checks,
        h,
    };
    if !search.run(0, &mut scratch, &mut used) {
        return None;
    }
    Some(witness(g, normalize(&g.variables(), &scratch)))
}

/// Extends an injective map on `dom` to a bijection on `dom ∪ α(dom)` by
/// pairing the leftover variables of each sort in sorted order. Identity
/// pairs are dropped.
fn normalize(dom: &BTreeSet<Variable>, r: &Renaming) -> Renaming {
    let mut out: Renaming = dom.iter().filter_map(|x| r.get(x).map(|y| (x.clone(), y.clone()))).collect();
    let image: BTreeSet<&Variable> = out.values().collect();
    let sources: Vec<Variable> = image.iter().filter(|y| !dom.contains(**y)).map(|y| (*y).clone()).collect();
    let targets: Vec<Variable> = dom.iter().filter(|x| !image.contains(x)).cloned().collect();
    let mut by_sort: BTreeMap<&str, Vec<&Variable>> = BTreeMap::new();
    for t in &targets {
        by_sort.entry(&t.sort).or_default().push(t);
    }
    let mut extra = Vec::new();
    for s in &sources {
        let slot = by_sort.get_mut(s.sort.as_str()).expect("injective maps leave matching leftovers");
        extra.push((s.clone(), slot.remove(0).clone()));
    }
    out.extend(extra);
    out.retain(|x, y| x != y);
    out
}

fn witness(g: &FormulaGraph, renaming: Renaming) -> EmbeddingWitness {
    let vertex_map = g.vertices.iter().map(|l| (l.clone(), apply(&renaming, l))).collect();
    EmbeddingWitness { renaming, vertex_map }
}

/// Checks a witness independently of the search.
pub fn verify_embedding(g: &FormulaGraph, h: &FormulaGraph, w: &EmbeddingWitness) -> bool {
    let vars = g.variables();
    let images: BTreeSet<Variable> = vars.iter().map(|v| w.renaming.get(v).unwrap_or(v).clone()).collect();
    if images.len() != vars.len() || w.renaming.iter().any(|(x, y)| x.sort != y.sort) {
        return false;
    }
    g.vertices.iter().all(|l| {
        let img = apply(&w.renaming, l);
        w.vertex_map.get(l) == Some(&img) && h.vertices.contains(&img)
    }) && g.edges.iter().all(|(rel, ts)| {
        ts.iter().all(|t| {
            let img: Vec<Literal> = t.iter().map(|l| apply(&w.renaming, l)).collect();
            h.edges.get(rel).is_some_and(|hs| hs.contains(&img))
        })
    })
}

/// Composes `g → h` with `h → k` into `g → k`.
pub fn compose(g: &FormulaGraph, first: &EmbeddingWitness, second: &EmbeddingWitness) -> EmbeddingWitness {
    let dom = g.variables();
    let step = |r: &Renaming, v: &Variable| r.get(v).cloned().unwrap_or_else(|| v.clone());
    let direct: Renaming = dom.iter().map(|x| (x.clone(), step(&second.renaming, &step(&first.renaming, x)))).collect();
    witness(g, normalize(&dom, &direct))
}

/// Same size and mutual embedding, which for finite graphs means equal up
/// to renaming.
pub fn is_isomorphic(g: &FormulaGraph, h: &FormulaGraph) -> bool {
    g.order() == h.order()
        && g.edge_count() == h.edge_count()
        && find_embedding(g, h).is_some()
        && find_embedding(h, g).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::is_subgraph;

    #[test]
    fn plant_subgraphs_embed_by_identity() {
        let g0 = fixtures::plant_g0();
        for s in g0.subgraphs() {
            let w = find_embedding(&s, &g0).expect("subgraph embeds");
            assert!(w.renaming.is_empty());
            assert!(verify_embedding(&s, &g0, &w));
        }
        assert!(find_embedding(&g0, &fixtures::plant_g1()).is_none());
    }

    #[test]
    fn cycles_embed_only_when_lengths_allow() {
        let c3 = fixtures::cycle_graph(3);
        let c2 = fixtures::cycle_graph(2);
        assert!(find_embedding(&c3, &c3).is_some());
        assert!(find_embedding(&c2, &c3).is_none());
        assert!(find_embedding(&c3, &c2).is_none());
        assert!(!is_isomorphic(&c2, &c3));
    }

    #[test]
    fn renaming_witness_is_a_bijection() {
        let c2 = fixtures::cycle_graph(2);
        let other = c2.rename(|v| Variable::new(format!("y{}", v.name), v.sort.clone()));
        let w = find_embedding(&c2, &other).unwrap();
        assert!(verify_embedding(&c2, &other, &w));
        let keys: BTreeSet<_> = w.renaming.keys().collect();
        let vals: BTreeSet<_> = w.renaming.values().collect();
        assert_eq!(keys, vals);
        assert!(is_isomorphic(&c2, &other));
        let back = find_embedding(&other, &c2).unwrap();
        let round = compose(&c2, &w, &back);
        assert!(verify_embedding(&c2, &c2, &round));
    }

    #[test]
    fn equality_is_matched_as_written() {
        let a = fixtures::cycle_alphabet();
        let lit = |s: &str| crate::logic::parse_literal(s, &a).unwrap();
        let g = FormulaGraph::new(&a, [lit("x:num = 0")], []).unwrap();
        let h = FormulaGraph::new(&a, [lit("0 = y:num")], []).unwrap();
        assert!(find_embedding(&g, &h).is_none());
        assert!(is_subgraph(&g, &g));
    }
}
