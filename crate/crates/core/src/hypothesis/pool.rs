use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{hypothesis_truth_set, is_hypothesis_graph, pool_classes, prop_g, Hypothesis};
use crate::error::{Error, Result};
use crate::graph::{canonical_form, canonical_key, enumerate_graphs, sent_of, EnumerateOptions, FormulaGraph};
use crate::logic::{Alphabet, Sentence};
use crate::semantics::{logically_implies, StructureClass};

/// Which property assignment a pool uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Hypothesis graphs with `PropG`.
    G,
    /// Hypotheses with `PropH`.
    H,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::G => "G",
            Mode::H => "H",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "G" | "g" => Ok(Mode::G),
            "H" | "h" => Ok(Mode::H),
            _ => Err(Error::Config(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ItemBody {
    Graph(FormulaGraph),
    Hypothesis(Hypothesis),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    pub key: String,
    pub body: ItemBody,
}

impl Item {
    /// Printed form for transcripts and menus.
    pub fn label(&self) -> String {
        match &self.body {
            ItemBody::Graph(g) => g.to_string(),
            ItemBody::Hypothesis(h) => hypothesis_label(h),
        }
    }
}

pub(crate) fn hypothesis_label(h: &Hypothesis) -> String {
    let parts: Vec<String> = h.iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join("; "))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropertyBody {
    Graph(FormulaGraph),
    Sentence(Sentence),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Property {
    pub key: String,
    /// `|g|` for graph classes; zero for sentence classes.
    pub order: usize,
    pub body: PropertyBody,
}

impl Property {
    pub fn representative(&self) -> String {
        match &self.body {
            PropertyBody::Graph(g) => g.to_string(),
            PropertyBody::Sentence(s) => s.to_string(),
        }
    }
}

/// The candidate set `X` with its property table. Items and properties are
/// sorted by key; the assignment holds property indices per item.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidatePool {
    mode: Mode,
    items: Vec<Item>,
    properties: Vec<Property>,
    assignment: Vec<BTreeSet<usize>>,
}

impl CandidatePool {
    /// Assembles a pool from items paired with their property keys. Every
    /// key must name a listed property.
    pub fn new(mode: Mode, items: Vec<(Item, BTreeSet<String>)>, properties: Vec<Property>) -> Result<Self> {
        let mut properties = properties;
        properties.sort_by(|a, b| a.key.cmp(&b.key));
        if properties.windows(2).any(|w| w[0].key == w[1].key) {
            return Err(Error::Pool("duplicate property key".into()));
        }
        let index: BTreeMap<&str, usize> = properties.iter().enumerate().map(|(i, p)| (p.key.as_str(), i)).collect();
        let mut items = items;
        items.sort_by(|a, b| a.0.key.cmp(&b.0.key));
        if items.windows(2).any(|w| w[0].0.key == w[1].0.key) {
            return Err(Error::Pool("duplicate item key".into()));
        }
        let mut assignment = Vec::with_capacity(items.len());
        for (item, keys) in &items {
            let mut set = BTreeSet::new();
            for k in keys {
                let Some(&i) = index.get(k.as_str()) else {
                    return Err(Error::Pool(format!("item `{}` has unknown property `{k}`", item.key)));
                };
                set.insert(i);
            }
            assignment.push(set);
        }
        Ok(CandidatePool { mode, items: items.into_iter().map(|(i, _)| i).collect(), properties, assignment })
    }

    /// Graph pool with `PropG`; isomorphic inputs collapse to one item.
    pub fn from_graphs(graphs: impl IntoIterator<Item = FormulaGraph>) -> Self {
        let mut items: BTreeMap<String, (Item, BTreeSet<String>)> = BTreeMap::new();
        let mut universe: BTreeMap<String, Property> = BTreeMap::new();
        for g in graphs {
            let key = canonical_key(&g);
            if items.contains_key(&key) {
                continue;
            }
            let props = prop_g(&g);
            let keys = props.iter().map(|p| p.key.clone()).collect();
            for p in props {
                universe.entry(p.key.clone()).or_insert(Property {
                    key: p.key,
                    order: p.order,
                    body: PropertyBody::Graph(p.representative),
                });
            }
            items.insert(key.clone(), (Item { key, body: ItemBody::Graph(canonical_form(&g)) }, keys));
        }
        CandidatePool::new(Mode::G, items.into_values().collect(), universe.into_values().collect())
            .expect("keys come from the same table")
    }

    /// Hypothesis pool with `PropH` relative to `sentences`. Equivalent
    /// hypotheses collapse to the one with the least label.
    pub fn from_hypotheses(
        hypotheses: impl IntoIterator<Item = Hypothesis>,
        sentences: &[Sentence],
        c: &StructureClass,
    ) -> Result<Self> {
        let classes = pool_classes(sentences, c)?;
        let mut by_truth: BTreeMap<BTreeSet<usize>, Hypothesis> = BTreeMap::new();
        for h in hypotheses {
            let t = hypothesis_truth_set(&h, c)?;
            match by_truth.get(&t) {
                Some(prev) if hypothesis_label(prev) <= hypothesis_label(&h) => {}
                _ => {
                    by_truth.insert(t, h);
                }
            }
        }
        let items = by_truth
            .into_iter()
            .map(|(t, h)| {
                let keys = classes.iter().filter(|p| t.is_subset(&p.truth_set)).map(|p| p.key()).collect();
                (Item { key: hypothesis_label(&h), body: ItemBody::Hypothesis(h) }, keys)
            })
            .collect();
        let properties = classes
            .into_iter()
            .map(|p| Property { key: p.key(), order: 0, body: PropertyBody::Sentence(p.representative) })
            .collect();
        CandidatePool::new(Mode::H, items, properties)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn properties(&self) -> &[Property] {
        &self.properties
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Property indices of an item.
    pub fn props(&self, item: usize) -> &BTreeSet<usize> {
        &self.assignment[item]
    }

    pub fn item_index(&self, key: &str) -> Option<usize> {
        self.items.binary_search_by(|i| i.key.as_str().cmp(key)).ok()
    }

    pub fn property_index(&self, key: &str) -> Option<usize> {
        self.properties.binary_search_by(|p| p.key.as_str().cmp(key)).ok()
    }

    /// Item index of a graph, found by its canonical key.
    pub fn graph_index(&self, g: &FormulaGraph) -> Option<usize> {
        self.item_index(&canonical_key(g))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PoolOptions {
    pub enumerate: EnumerateOptions,
    /// Keep only graphs whose sentence implies the observations.
    pub implies_observations: bool,
}

/// Every hypothesis graph of order at most `max_order`, up to isomorphism.
pub fn build_graph_pool(
    alphabet: &Alphabet,
    o: &[Sentence],
    c: &StructureClass,
    max_order: usize,
    opts: PoolOptions,
) -> Result<CandidatePool> {
    let mut kept = Vec::new();
    let obs: Vec<_> = o.iter().map(|s| s.formula().clone()).collect();
    for g in enumerate_graphs(alphabet, max_order, opts.enumerate)? {
        if !is_hypothesis_graph(&g, alphabet, o, c)? {
            continue;
        }
        if opts.implies_observations && !logically_implies(&[sent_of(&g, alphabet).into_formula()], &obs, c)? {
            continue;
        }
        kept.push(g);
    }
    Ok(CandidatePool::from_graphs(kept))
}
