//! Hypotheses, hypothesis graphs, the two property assignments and
//! candidate pools.

mod pool;

use std::collections::BTreeSet;

use crate::error::Result;
use crate::graph::{canonical_form, canonical_key, sent_of, FormulaGraph};
use crate::logic::{Alphabet, Formula, Sentence};
use crate::semantics::{class_from_theory, truth_set, StructureClass};

pub use pool::{build_graph_pool, CandidatePool, Item, ItemBody, Mode, PoolOptions, Property, PropertyBody};

/// A finite set of sentences.
pub type Hypothesis = BTreeSet<Sentence>;

/// `H ∪ O ⊭_C ⊥`: some member of the class validates every sentence.
pub fn is_hypothesis(h: &Hypothesis, o: &[Sentence], c: &StructureClass) -> Result<bool> {
    if c.is_empty() {
        return Ok(false);
    }
    let theory: Vec<Sentence> = h.iter().chain(o).cloned().collect();
    Ok(!class_from_theory(c, &theory)?.empty)
}

pub fn is_hypothesis_graph(g: &FormulaGraph, alphabet: &Alphabet, o: &[Sentence], c: &StructureClass) -> Result<bool> {
    is_hypothesis(&Hypothesis::from([sent_of(g, alphabet)]), o, c)
}

/// A `PropG` property: an isomorphism class of formula graphs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PropertyG {
    pub key: String,
    pub representative: FormulaGraph,
    pub order: usize,
}

/// `PropG(g)`: the classes of graphs embeddable into `g`, which are the
/// classes of its subgraphs. Sorted by key.
pub fn prop_g(g: &FormulaGraph) -> Vec<PropertyG> {
    let mut out: std::collections::BTreeMap<String, PropertyG> = std::collections::BTreeMap::new();
    for s in g.subgraphs() {
        let key = canonical_key(&s);
        if !out.contains_key(&key) {
            let representative = canonical_form(&s);
            out.insert(key.clone(), PropertyG { key, order: representative.order(), representative });
        }
    }
    out.into_values().collect()
}

/// A `PropH` property: an equivalence class in the class, identified by its
/// truth set and shown by the least pool sentence in it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PropertyH {
    pub truth_set: BTreeSet<usize>,
    pub representative: Sentence,
}

impl PropertyH {
    pub fn key(&self) -> String {
        truth_set_key(&self.truth_set)
    }
}

pub(crate) fn truth_set_key(t: &BTreeSet<usize>) -> String {
    let parts: Vec<String> = t.iter().map(usize::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

/// Truth set of `⋀h`.
pub fn hypothesis_truth_set(h: &Hypothesis, c: &StructureClass) -> Result<BTreeSet<usize>> {
    let mut t: BTreeSet<usize> = (0..c.len()).collect();
    for s in h {
        let ts = truth_set(s, c)?;
        t.retain(|i| ts.contains(i));
    }
    Ok(t)
}

/// Least sentence text per truth set over the pool.
fn pool_classes(pool: &[Sentence], c: &StructureClass) -> Result<Vec<PropertyH>> {
    let mut best: std::collections::BTreeMap<BTreeSet<usize>, Sentence> = std::collections::BTreeMap::new();
    for s in pool {
        let t = truth_set(s, c)?;
        match best.get(&t) {
            Some(prev) if prev.to_string() <= s.to_string() => {}
            _ => {
                best.insert(t, s.clone());
            }
        }
    }
    let mut out: Vec<PropertyH> =
        best.into_iter().map(|(truth_set, representative)| PropertyH { truth_set, representative }).collect();
    out.sort_by_key(PropertyH::key);
    Ok(out)
}

/// `PropH(h)` relative to a sentence pool: the classes of pool sentences
/// implied by `h` in the class.
pub fn prop_h(h: &Hypothesis, pool: &[Sentence], c: &StructureClass) -> Result<Vec<PropertyH>> {
    let th = hypothesis_truth_set(h, c)?;
    Ok(pool_classes(pool, c)?.into_iter().filter(|p| th.is_subset(&p.truth_set)).collect())
}

/// `⋀h`, or the truth macro for the empty hypothesis.
pub fn conjunction(h: &Hypothesis, alphabet: &Alphabet) -> Formula {
    Formula::conjunction(h.iter().map(|s| s.formula().clone()), alphabet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::logic::{existential_closure, parse_formula};

    fn sentence(text: &str, a: &Alphabet) -> Sentence {
        existential_closure(&parse_formula(text, a).unwrap())
    }

    #[test]
    fn plant_graph_is_a_hypothesis_graph() {
        let a = fixtures::plant_alphabet();
        let rule = Sentence::new(fixtures::plant_rule()).unwrap();
        let c = class_from_theory(&fixtures::plant_candidates(), &[rule]).unwrap().class;
        let o = [sentence("Hold(P, High)", &a)];
        assert!(is_hypothesis_graph(&fixtures::plant_g0(), &a, &o, &c).unwrap());
        assert!(is_hypothesis(&Hypothesis::new(), &[], &c).unwrap());
    }

    #[test]
    fn contradictions_are_not_hypotheses() {
        let a = fixtures::two_predicate_alphabet();
        let c = fixtures::two_predicate_class();
        let h = Hypothesis::from([sentence("p1(0)", &a)]);
        assert!(!is_hypothesis(&h, &[sentence("!p1(0)", &a)], &c).unwrap());
        let lit = |s: &str| crate::logic::parse_literal(s, &a).unwrap();
        let g = FormulaGraph::new(&a, [lit("p1(0)"), lit("!p1(0)")], []).unwrap();
        assert!(!is_hypothesis_graph(&g, &a, &[], &c).unwrap());
    }

    #[test]
    fn prop_g_contains_parts_and_whole() {
        let g0 = fixtures::plant_g0();
        let keys: BTreeSet<String> = prop_g(&g0).into_iter().map(|p| p.key).collect();
        for g in [FormulaGraph::empty(), fixtures::plant_g1(), fixtures::plant_g2(), g0.clone()] {
            assert!(keys.contains(&canonical_key(&g)));
        }
        assert_eq!(prop_g(&FormulaGraph::empty()).len(), 1);
        let [_, _, g3, _] = fixtures::three_predicate_graphs();
        let p: Vec<String> = prop_g(&g3).into_iter().map(|p| p.key).collect();
        assert_eq!(p, vec![canonical_key(&FormulaGraph::empty()), canonical_key(&g3)]);
    }

    #[test]
    fn prop_h_relative_to_the_pool() {
        let a = fixtures::two_predicate_alphabet();
        let c = fixtures::two_predicate_class();
        let pool = fixtures::prop_h_sentences();
        let reps = |h: &str| -> BTreeSet<String> {
            let h = Hypothesis::from([sentence(h, &a)]);
            prop_h(&h, &pool, &c).unwrap().into_iter().map(|p| p.representative.to_string()).collect()
        };
        let h3 = reps("p1(0)");
        assert!(h3.contains(&sentence("true", &a).to_string()));
        assert!(h3.contains(&sentence("p1(0) | p2(0)", &a).to_string()));
        let h1 = reps("p1(0) & !p2(0)");
        assert!(h1.contains(&sentence("!(p1(0) & p2(0))", &a).to_string()));
        assert!(!h1.contains(&sentence("p2(0)", &a).to_string()));
    }
}
