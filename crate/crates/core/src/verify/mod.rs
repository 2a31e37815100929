//! Exhaustive checks of halting and convergence over finite pools, and the
//! counterexample constructions.

mod families;
mod walk;

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dialogue::{Convergence, DialogueState, Move, ProtocolConfig, ProtocolKind, Turn};
use crate::error::{Error, Result};
use crate::hypothesis::Mode;

pub use families::{
    counterexample_prefix, cycle_pool, family_spot_check, reproduce_non_convergence, verify_counterexamples,
    CounterexampleFamily,
};
pub use walk::{
    exhaustive_dialogues, walk_dialogues, DialogueTree, LeafCheck, LeafFailure, WalkOptions, WalkSummary, DEFAULT_STATE_CEILING,
    DEFAULT_PRESENTATION_CAP,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub instance: String,
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub turns: Vec<Turn>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub suite: String,
    pub instances: u64,
    pub failures: Vec<Failure>,
    /// Search settings and bounds the verdict depends on.
    pub notes: Vec<String>,
    pub wall_time_ms: u64,
}

impl VerificationReport {
    fn new(suite: impl Into<String>) -> Self {
        VerificationReport { suite: suite.into(), instances: 0, failures: Vec::new(), notes: Vec::new(), wall_time_ms: 0 }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn finish(mut self, started: Instant) -> Self {
        self.wall_time_ms = started.elapsed().as_millis() as u64;
        self
    }
}

fn halting_precondition(cfg: &ProtocolConfig) -> Result<()> {
    if cfg.kind == ProtocolKind::Ufbd {
        return Err(Error::Precondition(
            "plain UFBD allows an empty feedback set forever; pick Basic, Simple or a mixed kind".into(),
        ));
    }
    if cfg.pool.mode() == Mode::G && cfg.size_bound.is_none() {
        return Err(Error::Precondition(format!(
            "graph properties have no finite universe without a size bound; see the `{}` family",
            CounterexampleFamily::InfBasicPropG.id()
        )));
    }
    Ok(())
}

/// Longest chain of non-empty feedback sets the ledger argument allows.
fn depth_bound(cfg: &ProtocolConfig) -> usize {
    let props = cfg.pool.properties();
    match cfg.size_bound {
        Some(n) => props.iter().filter(|p| p.order <= n).count(),
        None => props.len(),
    }
}

fn turns_of(cfg: &ProtocolConfig, path: &[Move]) -> Vec<Turn> {
    let mut s = DialogueState::new();
    for mv in path {
        s.apply(cfg, mv.clone()).expect("walker paths are valid");
    }
    s.turns(cfg)
}

fn describe(v: &Convergence) -> String {
    match v {
        Convergence::Converges => "converges".into(),
        Convergence::Fails { condition, item, property } => {
            let mut s = format!("condition {condition} fails");
            if let Some(i) = item {
                s.push_str(&format!(" for item `{i}`"));
            }
            if let Some(p) = property {
                s.push_str(&format!(" on property `{p}`"));
            }
            s
        }
    }
}

/// Every dialogue ends within `fuel` feedback sets, and within the
/// ledger bound. `fuel` defaults to the universe size plus two.
pub fn verify_halting(cfg: &ProtocolConfig, fuel: Option<usize>) -> Result<VerificationReport> {
    halting_precondition(cfg)?;
    let started = Instant::now();
    let mut opts = WalkOptions::for_config(cfg);
    if let Some(f) = fuel {
        opts.fuel = f;
    }
    let s = walk_dialogues(cfg, opts)?;
    let bound = depth_bound(cfg);
    let mut r = VerificationReport::new(format!("halting/{}", cfg.kind.name()));
    r.instances = s.leaves.min(u64::MAX as u128) as u64;
    r.notes.push(format!("presentation cap {}", opts.cap));
    r.notes.push(format!("fuel {}", opts.fuel));
    r.notes.push(format!("depth {} of bound {bound}", s.max_rounds));
    r.notes.push(format!("{} distinct states", s.states));
    if s.fuel_exhausted {
        r.failures.push(Failure { instance: "tree".into(), detail: format!("a branch ran past fuel {}", opts.fuel), turns: vec![] });
    }
    if s.max_rounds > bound {
        r.failures.push(Failure {
            instance: "tree".into(),
            detail: format!("depth {} exceeds the bound {bound}", s.max_rounds),
            turns: vec![],
        });
    }
    Ok(r.finish(started))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetSelection {
    AllSubsets,
    Singletons,
    Given(Vec<BTreeSet<usize>>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundRule {
    #[default]
    AsConfigured,
    /// One more than the largest target order.
    AboveTarget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceSuite {
    pub targets: TargetSelection,
    pub bound: BoundRule,
    /// Also demand that the last set is one item matching the target.
    pub singleton_last_set: bool,
}

impl ConvergenceSuite {
    pub fn all_subsets() -> Self {
        ConvergenceSuite { targets: TargetSelection::AllSubsets, bound: BoundRule::AsConfigured, singleton_last_set: false }
    }

    pub fn singletons() -> Self {
        ConvergenceSuite { targets: TargetSelection::Singletons, bound: BoundRule::AsConfigured, singleton_last_set: true }
    }
}

fn targets(n: usize, sel: &TargetSelection) -> Result<Vec<BTreeSet<usize>>> {
    Ok(match sel {
        TargetSelection::Singletons => (0..n).map(|i| BTreeSet::from([i])).collect(),
        TargetSelection::AllSubsets => {
            if n >= 20 {
                return Err(Error::ResourceLimit(format!("{n} items give too many target subsets")));
            }
            (1u32..1 << n).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
        }
        TargetSelection::Given(v) => v.clone(),
    })
}

/// Runs the towards-constrained tree for each target set and checks every
/// maximal leaf for convergence.
pub fn verify_convergence(cfg: &ProtocolConfig, suite: &ConvergenceSuite) -> Result<VerificationReport> {
    halting_precondition(cfg)?;
    let started = Instant::now();
    let sets = targets(cfg.pool.len(), &suite.targets)?;
    let check = if suite.singleton_last_set { LeafCheck::SingletonTarget } else { LeafCheck::Convergence };
    let per_target: Vec<Result<(String, ProtocolConfig, WalkSummary, usize)>> = sets
        .par_iter()
        .map(|t| {
            let mut c = cfg.with_target(t.clone())?;
            if suite.bound == BoundRule::AboveTarget {
                c.size_bound = Some(c.max_target_order() + 1);
            }
            let mut opts = WalkOptions::for_config(&c);
            opts.check = check;
            let s = walk_dialogues(&c, opts)?;
            let label: Vec<&str> = t.iter().map(|&i| c.pool.items()[i].key.as_str()).collect();
            Ok((format!("target {{{}}}", label.join(", ")), c, s, opts.fuel))
        })
        .collect();
    let mut r = VerificationReport::new(format!("convergence/{}", cfg.kind.name()));
    r.notes.push(format!("presentation cap {DEFAULT_PRESENTATION_CAP}"));
    r.notes.push(format!("{} target sets", sets.len()));
    for res in per_target {
        let (instance, c, s, fuel) = res?;
        r.instances += s.leaves.min(u64::MAX as u128) as u64;
        if s.fuel_exhausted {
            r.failures.push(Failure { instance: instance.clone(), detail: format!("a branch ran past fuel {fuel}"), turns: vec![] });
        }
        if let Some(f) = s.failure {
            r.failures.push(Failure { instance, detail: describe(&f.verdict), turns: turns_of(&c, &f.path) });
        }
    }
    Ok(r.finish(started))
}
