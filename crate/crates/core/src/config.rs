//! Pool and session configuration files.
//!
//! A config names an alphabet and a structure class (inline or by path),
//! optional theory and observations, and either explicit items or an
//! enumeration bound. Protocol, size bound and target may be given here or
//! supplied by the caller.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dialogue::{ProtocolConfig, ProtocolKind};
use crate::error::{Error, Result};
use crate::graph::{EnumerateOptions, FormulaGraph, GraphFile};
use crate::hypothesis::{
    build_graph_pool, hypothesis_truth_set, is_hypothesis, is_hypothesis_graph, CandidatePool, Hypothesis, ItemBody,
    Mode, PoolOptions,
};
use crate::logic::{parse_formula, Alphabet, Sentence};
use crate::semantics::{class_from_theory, StructureClass};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet_ref: Option<String>,
    /// A list of structure objects or structure-file paths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_ref: Option<String>,
    /// Sentences restricting the class.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theory: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observations: Vec<String>,
    /// Graph objects or graph-file paths in mode G; sentence lists in mode H.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub items: Vec<Value>,
    /// The sentences whose classes make up `PropH`. Defaults to the
    /// sentences of the items.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_pool: Option<Vec<String>>,
    /// Enumerate every hypothesis graph up to this order instead of listing items.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub include_equalities: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub implies_observations: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
    /// Item keys, graphs or sentence lists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<Value>>,
}

/// A resolved configuration.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub alphabet: Alphabet,
    pub class: StructureClass,
    pub observations: Vec<Sentence>,
    pub pool: CandidatePool,
    pub protocol: Option<ProtocolKind>,
    pub bound: Option<usize>,
    pub target: Option<BTreeSet<usize>>,
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn sentence(text: &str, alphabet: &Alphabet) -> Result<Sentence> {
    Sentence::new(parse_formula(text, alphabet)?).ok_or_else(|| Error::Config(format!("`{text}` has free variables")))
}

fn sentences(texts: &[String], alphabet: &Alphabet) -> Result<Vec<Sentence>> {
    texts.iter().map(|t| sentence(t, alphabet)).collect()
}

fn graph_value(v: &Value, alphabet: &Alphabet, base: &Path) -> Result<FormulaGraph> {
    let file: GraphFile = match v {
        Value::String(p) => serde_json::from_value(read_json(&base.join(p))?)?,
        v => serde_json::from_value(v.clone())?,
    };
    FormulaGraph::from_file(alphabet, &file)
}

fn hypothesis_value(v: &Value, alphabet: &Alphabet) -> Result<Hypothesis> {
    let texts: Vec<String> = match v {
        Value::String(s) => vec![s.clone()],
        v => serde_json::from_value(v.clone()).map_err(|_| Error::Config("a hypothesis is a list of sentences".into()))?,
    };
    Ok(sentences(&texts, alphabet)?.into_iter().collect())
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<(ConfigFile, PathBuf)> {
        let cfg = serde_json::from_value(read_json(path)?)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    /// A copy with every file reference replaced by its contents, so the
    /// config stands on its own.
    pub fn inline(&self, base: &Path) -> Result<ConfigFile> {
        let mut out = self.clone();
        if let Some(p) = out.alphabet_ref.take() {
            out.alphabet = Some(read_json(&base.join(&p))?);
        }
        let class_base = match &self.class_ref {
            Some(p) => base.join(p).parent().map(Path::to_path_buf).unwrap_or_default(),
            None => base.to_path_buf(),
        };
        if let Some(p) = out.class_ref.take() {
            out.class = Some(read_json(&base.join(&p))?);
        }
        if let Some(Value::Array(entries)) = &mut out.class {
            for e in entries.iter_mut() {
                if let Value::String(p) = e {
                    *e = read_json(&class_base.join(p.as_str()))?;
                }
            }
        }
        if out.mode == Some(Mode::G) {
            let inline_graph = |v: &mut Value| -> Result<()> {
                if let Value::String(p) = v {
                    *v = read_json(&base.join(p.as_str()))?;
                }
                Ok(())
            };
            out.items.iter_mut().try_for_each(inline_graph)?;
            if let Some(t) = &mut out.target {
                // Strings that are not files are item keys.
                t.iter_mut()
                    .filter(|v| v.as_str().is_some_and(|p| base.join(p).is_file()))
                    .try_for_each(inline_graph)?;
            }
        }
        Ok(out)
    }

    /// Resolves references against `base`, restricts the class by the
    /// theory and builds the pool. `mode` fills in a missing mode and must
    /// agree with a given one.
    pub fn resolve(&self, base: &Path, mode: Option<Mode>) -> Result<LoadedConfig> {
        let mode = match (self.mode, mode) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!("the config is for mode {a} but mode {b} was asked for")))
            }
            (a, b) => a.or(b).ok_or_else(|| Error::Config("no property mode given".into()))?,
        };
        let alphabet: Alphabet = match (&self.alphabet, &self.alphabet_ref) {
            (Some(v), None) => serde_json::from_value(v.clone())?,
            (None, Some(p)) => serde_json::from_value(read_json(&base.join(p))?)?,
            _ => return Err(Error::Config("give exactly one of `alphabet` and `alphabetRef`".into())),
        };
        let class_value = match (&self.class, &self.class_ref) {
            (Some(v), None) => v.clone(),
            (None, Some(p)) => read_json(&base.join(p))?,
            _ => return Err(Error::Config("give exactly one of `class` and `classRef`".into())),
        };
        let class_base = match &self.class_ref {
            Some(p) => base.join(p).parent().map(Path::to_path_buf).unwrap_or_default(),
            None => base.to_path_buf(),
        };
        let candidates = StructureClass::from_json_value(&alphabet, &class_value, &class_base)?;
        let theory = sentences(&self.theory, &alphabet)?;
        let restricted = class_from_theory(&candidates, &theory)?;
        if restricted.empty {
            return Err(Error::Config("no structure of the class satisfies the theory".into()));
        }
        let class = restricted.class;
        let observations = sentences(&self.observations, &alphabet)?;
        let pool = match mode {
            Mode::G => self.graph_pool(&alphabet, &class, &observations, base)?,
            Mode::H => self.hypothesis_pool(&alphabet, &class, &observations)?,
        };
        let mut loaded =
            LoadedConfig { alphabet, class, observations, pool, protocol: self.protocol, bound: self.bound, target: None };
        if let Some(t) = &self.target {
            loaded.target = Some(loaded.resolve_target(t, base)?);
        }
        Ok(loaded)
    }

    fn graph_pool(&self, alphabet: &Alphabet, class: &StructureClass, o: &[Sentence], base: &Path) -> Result<CandidatePool> {
        if self.sentence_pool.is_some() {
            return Err(Error::Config("`sentencePool` only applies to mode H".into()));
        }
        match (self.max_order, self.items.is_empty()) {
            (Some(n), true) => {
                let opts = PoolOptions {
                    enumerate: EnumerateOptions { include_equalities: self.include_equalities, ..Default::default() },
                    implies_observations: self.implies_observations,
                };
                build_graph_pool(alphabet, o, class, n, opts)
            }
            (None, _) => {
                let mut graphs = Vec::new();
                for v in &self.items {
                    let g = graph_value(v, alphabet, base)?;
                    if !is_hypothesis_graph(&g, alphabet, o, class)? {
                        return Err(Error::Pool(format!("{g} is not a hypothesis graph for the observations")));
                    }
                    graphs.push(g);
                }
                Ok(CandidatePool::from_graphs(graphs))
            }
            (Some(_), false) => Err(Error::Config("give either `items` or `maxOrder`, not both".into())),
        }
    }

    fn hypothesis_pool(&self, alphabet: &Alphabet, class: &StructureClass, o: &[Sentence]) -> Result<CandidatePool> {
        if self.max_order.is_some() {
            return Err(Error::Config("`maxOrder` only applies to mode G".into()));
        }
        let mut hs = Vec::new();
        for v in &self.items {
            let h = hypothesis_value(v, alphabet)?;
            if !is_hypothesis(&h, o, class)? {
                return Err(Error::Pool("an item is inconsistent with the observations".into()));
            }
            hs.push(h);
        }
        let universe: Vec<Sentence> = match &self.sentence_pool {
            Some(texts) => sentences(texts, alphabet)?,
            None => hs.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
        };
        CandidatePool::from_hypotheses(hs, &universe, class)
    }
}

impl LoadedConfig {
    pub fn load(path: &Path, mode: Option<Mode>) -> Result<LoadedConfig> {
        let (file, base) = ConfigFile::load(path)?;
        file.resolve(&base, mode)
    }

    /// Finds each entry in the pool: an item key, a graph (object or path)
    /// matched up to isomorphism, or a sentence list matched up to
    /// equivalence in the class.
    pub fn resolve_target(&self, entries: &[Value], base: &Path) -> Result<BTreeSet<usize>> {
        let mut out = BTreeSet::new();
        for v in entries {
            if let Value::String(k) = v {
                if let Some(i) = self.pool.item_index(k) {
                    out.insert(i);
                    continue;
                }
            }
            let found = match self.pool.mode() {
                Mode::G => self.pool.graph_index(&graph_value(v, &self.alphabet, base)?),
                Mode::H => {
                    let t = hypothesis_truth_set(&hypothesis_value(v, &self.alphabet)?, &self.class)?;
                    let mut hit = None;
                    for (i, item) in self.pool.items().iter().enumerate() {
                        if let ItemBody::Hypothesis(h) = &item.body {
                            if hypothesis_truth_set(h, &self.class)? == t {
                                hit = Some(i);
                                break;
                            }
                        }
                    }
                    hit
                }
            };
            out.insert(found.ok_or_else(|| Error::Config(format!("target {v} is not in the pool")))?);
        }
        Ok(out)
    }

    /// Builds the protocol, letting explicit arguments override the file.
    pub fn protocol_config(
        &self,
        kind: Option<ProtocolKind>,
        bound: Option<usize>,
        target: Option<BTreeSet<usize>>,
    ) -> Result<ProtocolConfig> {
        let kind = kind.or(self.protocol).ok_or_else(|| Error::Config("no protocol given".into()))?;
        ProtocolConfig::new(kind, self.pool.clone(), bound.or(self.bound), target.or_else(|| self.target.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use serde_json::json;

    fn three_predicate_file() -> ConfigFile {
        let a = fixtures::three_predicate_alphabet();
        let class: Vec<_> = fixtures::three_predicate_class().structures().iter().map(|m| m.to_file()).collect();
        ConfigFile {
            mode: Some(Mode::G),
            alphabet: Some(serde_json::to_value(&a).unwrap()),
            class: Some(serde_json::to_value(class).unwrap()),
            items: fixtures::three_predicate_graphs().iter().map(|g| serde_json::to_value(g.to_file()).unwrap()).collect(),
            protocol: Some(ProtocolKind::Simple),
            bound: Some(2),
            target: Some(vec![json!({"vertices": ["p1(0)", "p3(0)"], "edges": {}})]),
            ..Default::default()
        }
    }

    #[test]
    fn inline_graph_config_resolves() {
        let loaded = three_predicate_file().resolve(Path::new("."), None).unwrap();
        assert_eq!(loaded.pool, fixtures::four_item_pool());
        let g1 = loaded.pool.graph_index(&fixtures::three_predicate_graphs()[0]).unwrap();
        assert_eq!(loaded.target, Some(BTreeSet::from([g1])));
        let cfg = loaded.protocol_config(None, None, None).unwrap();
        assert_eq!((cfg.kind, cfg.size_bound), (ProtocolKind::Simple, Some(2)));
    }

    #[test]
    fn mode_must_agree() {
        assert!(three_predicate_file().resolve(Path::new("."), Some(Mode::H)).is_err());
    }

    #[test]
    fn sentence_items_and_targets() {
        let a = fixtures::two_predicate_alphabet();
        let class: Vec<_> = fixtures::two_predicate_class().structures().iter().map(|m| m.to_file()).collect();
        let file = ConfigFile {
            alphabet: Some(serde_json::to_value(&a).unwrap()),
            class: Some(serde_json::to_value(class).unwrap()),
            items: fixtures::PROP_H_SENTENCES.iter().map(|s| json!([s])).collect(),
            target: Some(vec![json!(["p2(0) & p1(0)"])]),
            ..Default::default()
        };
        let loaded = file.resolve(Path::new("."), Some(Mode::H)).unwrap();
        assert_eq!(loaded.pool, fixtures::prop_h_pool());
        let t = *loaded.target.as_ref().unwrap().iter().next().unwrap();
        let want = Hypothesis::from([sentence("p1(0) & p2(0)", &a).unwrap()]);
        assert_eq!(loaded.pool.items()[t].body, ItemBody::Hypothesis(want));
        assert!(loaded.protocol_config(None, None, None).is_err());
    }

    #[test]
    fn inlined_fixture_resolves_alike() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/plant");
        let (file, base) = ConfigFile::load(&dir.join("pool.json")).unwrap();
        let inlined = file.inline(&base).unwrap();
        assert!(inlined.alphabet_ref.is_none() && inlined.class_ref.is_none());
        let a = file.resolve(&base, None).unwrap();
        let b = inlined.resolve(Path::new("/nonexistent"), None).unwrap();
        assert_eq!(a.pool, b.pool);
        assert_eq!(a.target, b.target);
        assert_eq!(a.pool, fixtures::plant_pool());
        assert_eq!(a.class.len(), 12);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_value::<ConfigFile>(json!({"mode": "G", "pools": []})).is_err());
    }
}
