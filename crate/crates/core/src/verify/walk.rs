use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::dialogue::{
    check_convergence, feedback_moves, is_maximal, presentation_moves, Convergence, DialogueState, Move, Polarity,
    ProtocolConfig, ProtocolKind,
};
use crate::error::{Error, Result};
use crate::hypothesis::ItemBody;

pub const DEFAULT_PRESENTATION_CAP: usize = 2;
pub const DEFAULT_STATE_CEILING: usize = 1 << 20;

/// What to assert at each maximal leaf.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafCheck {
    #[default]
    None,
    Convergence,
    /// Convergence, and the last set is a single item matching the target.
    SingletonTarget,
}

#[derive(Clone, Copy, Debug)]
pub struct WalkOptions {
    pub cap: usize,
    /// Feedback sets allowed along one path.
    pub fuel: usize,
    pub check: LeafCheck,
    /// Distinct states kept before giving up with `ResourceLimit`.
    pub max_states: usize,
}

impl WalkOptions {
    /// Fuel from the property-universe bound.
    pub fn for_config(cfg: &ProtocolConfig) -> Self {
        WalkOptions {
            cap: DEFAULT_PRESENTATION_CAP,
            fuel: cfg.pool.properties().len() + 2,
            check: LeafCheck::None,
            max_states: DEFAULT_STATE_CEILING,
        }
    }
}

/// The first bad leaf found and the moves leading to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafFailure {
    pub path: Vec<Move>,
    pub verdict: Convergence,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WalkSummary {
    /// Root-to-leaf paths, counted with multiplicity.
    pub leaves: u128,
    /// Distinct states visited.
    pub states: usize,
    /// Most non-empty feedback sets on one path.
    pub max_rounds: usize,
    pub fuel_exhausted: bool,
    pub failure: Option<LeafFailure>,
}

/// Everything the walker's future depends on: the ledger with polarities,
/// the pending presentation and the terminal flag.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Key {
    pointed: BTreeMap<usize, Polarity>,
    pending: Option<BTreeSet<usize>>,
    terminal: bool,
}

fn key(state: &DialogueState) -> Key {
    Key {
        pointed: state.pointed().iter().map(|(&p, &(_, f))| (p, f)).collect(),
        pending: state.current_presentation().cloned(),
        terminal: state.terminal().is_some(),
    }
}

#[derive(Clone)]
struct Sub {
    leaves: u128,
    height: usize,
    exhausted: bool,
    failure: Option<(Vec<Move>, Convergence)>,
}

/// Moves the walker branches on. Plain UFBD stops after an empty set on
/// either side, since nothing further can be learned.
fn children(state: &DialogueState, cfg: &ProtocolConfig, cap: usize) -> Vec<Move> {
    if state.terminal().is_some() {
        return Vec::new();
    }
    if cfg.kind == ProtocolKind::Ufbd {
        match state.history().last() {
            Some(Move::Present(x)) if x.is_empty() => return Vec::new(),
            Some(Move::Feedback(f)) if f.is_empty() => return Vec::new(),
            _ => {}
        }
    }
    if state.expects_presentation() {
        presentation_moves(state, cfg, cap).into_iter().map(Move::Present).collect()
    } else {
        feedback_moves(state, cfg).into_iter().map(Move::Feedback).collect()
    }
}

fn judge(state: &DialogueState, cfg: &ProtocolConfig, check: LeafCheck) -> Result<Option<Convergence>> {
    if check == LeafCheck::None || cfg.kind == ProtocolKind::Ufbd {
        return Ok(None);
    }
    if !is_maximal(state, cfg) {
        return Ok(Some(Convergence::Fails { condition: "stuck".into(), item: None, property: None }));
    }
    let verdict = check_convergence(state, cfg)?;
    if !verdict.converges() || check != LeafCheck::SingletonTarget {
        return Ok(Some(verdict).filter(|v| !v.converges()));
    }
    let target = cfg.target.as_ref().expect("convergence checked a target");
    let Some(Move::Present(last)) = state.history().last() else { unreachable!("converged on a presentation") };
    let matches = last.len() == 1 && {
        let i = *last.iter().next().unwrap();
        target.iter().any(|&t| cfg.pool.props(t) == cfg.pool.props(i) && same_body(cfg, t, i))
    };
    Ok((!matches).then(|| Convergence::Fails { condition: "singleton".into(), item: None, property: None }))
}

fn same_body(cfg: &ProtocolConfig, a: usize, b: usize) -> bool {
    match (&cfg.pool.items()[a].body, &cfg.pool.items()[b].body) {
        (ItemBody::Graph(g), ItemBody::Graph(h)) => crate::graph::is_isomorphic(g, h),
        _ => true,
    }
}

struct Walker<'a> {
    cfg: &'a ProtocolConfig,
    opts: WalkOptions,
    memo: HashMap<Key, Sub>,
    visits: usize,
}

impl Walker<'_> {
    fn visit(&mut self, state: &DialogueState, rounds: usize) -> Result<Sub> {
        let k = key(state);
        if let Some(s) = self.memo.get(&k) {
            return Ok(s.clone());
        }
        self.visits += 1;
        if self.memo.len() >= self.opts.max_states || self.visits > self.opts.max_states.saturating_mul(16) {
            return Err(Error::ResourceLimit(format!("more than {} distinct dialogue states", self.opts.max_states)));
        }
        if rounds > self.opts.fuel {
            return Ok(Sub { leaves: 0, height: 0, exhausted: true, failure: None });
        }
        let moves = children(state, self.cfg, self.opts.cap);
        let sub = if moves.is_empty() {
            let failure = judge(state, self.cfg, self.opts.check)?.map(|v| (Vec::new(), v));
            Sub { leaves: 1, height: 0, exhausted: false, failure }
        } else {
            let mut acc = Sub { leaves: 0, height: 0, exhausted: false, failure: None };
            for mv in moves {
                let step = matches!(&mv, Move::Feedback(f) if !f.is_empty()) as usize;
                let mut next = state.clone();
                let violations = next.apply(self.cfg, mv.clone())?;
                if !violations.is_empty() {
                    return Err(Error::Move(format!("walker produced an invalid move: {}", violations[0].condition)));
                }
                let child = self.visit(&next, rounds + step)?;
                acc.leaves = acc.leaves.saturating_add(child.leaves);
                acc.height = acc.height.max(child.height + step);
                acc.exhausted |= child.exhausted;
                if acc.failure.is_none() {
                    if let Some((mut path, v)) = child.failure {
                        path.insert(0, mv);
                        acc.failure = Some((path, v));
                    }
                }
            }
            acc
        };
        if !sub.exhausted {
            self.memo.insert(k, sub.clone());
        }
        Ok(sub)
    }
}

/// Depth-first search over every legal continuation, sharing subtrees that
/// reach the same ledger. Paths are cut when they exceed the fuel.
pub fn walk_dialogues(cfg: &ProtocolConfig, opts: WalkOptions) -> Result<WalkSummary> {
    let mut w = Walker { cfg, opts, memo: HashMap::new(), visits: 0 };
    let root = w.visit(&DialogueState::new(), 0)?;
    Ok(WalkSummary {
        leaves: root.leaves,
        states: w.memo.len(),
        max_rounds: root.height,
        fuel_exhausted: root.exhausted || root.height > opts.fuel,
        failure: root.failure.map(|(path, verdict)| LeafFailure { path, verdict }),
    })
}

/// Every maximal dialogue, plus the prefixes cut off by fuel.
#[derive(Clone, Debug, Default)]
pub struct DialogueTree {
    pub leaves: Vec<DialogueState>,
    pub fuel_exhausted: Vec<DialogueState>,
}

/// Lists the leaves one by one. Fails with `ResourceLimit` past `limit`
/// leaves; use `walk_dialogues` for large trees.
pub fn exhaustive_dialogues(cfg: &ProtocolConfig, cap: usize, fuel: usize, limit: usize) -> Result<DialogueTree> {
    fn go(
        state: DialogueState,
        cfg: &ProtocolConfig,
        cap: usize,
        fuel: usize,
        limit: usize,
        out: &mut DialogueTree,
    ) -> Result<()> {
        let rounds = state.history().iter().filter(|m| matches!(m, Move::Feedback(f) if !f.is_empty())).count();
        if rounds > fuel {
            out.fuel_exhausted.push(state);
            return Ok(());
        }
        let moves = children(&state, cfg, cap);
        if moves.is_empty() {
            if out.leaves.len() == limit {
                return Err(Error::ResourceLimit(format!("more than {limit} maximal dialogues")));
            }
            out.leaves.push(state);
            return Ok(());
        }
        for mv in moves {
            let mut next = state.clone();
            if !next.apply(cfg, mv)?.is_empty() {
                return Err(Error::Move("walker produced an invalid move".into()));
            }
            go(next, cfg, cap, fuel, limit, out)?;
        }
        Ok(())
    }
    let mut out = DialogueTree::default();
    go(DialogueState::new(), cfg, cap, fuel, limit, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::replay;
    use crate::fixtures;
    use crate::hypothesis::CandidatePool;

    fn opts(cap: usize, fuel: usize) -> WalkOptions {
        WalkOptions { cap, fuel, check: LeafCheck::None, max_states: DEFAULT_STATE_CEILING }
    }

    #[test]
    fn every_listed_leaf_replays() {
        let cfg = ProtocolConfig::new(ProtocolKind::Simple, fixtures::four_item_pool(), Some(2), None).unwrap();
        let tree = exhaustive_dialogues(&cfg, 2, 10, 100_000).unwrap();
        assert!(tree.fuel_exhausted.is_empty());
        for leaf in &tree.leaves {
            assert_eq!(&replay(&cfg, &leaf.turns(&cfg)).unwrap(), leaf);
            assert!(is_maximal(leaf, &cfg));
        }
        assert_eq!(walk_dialogues(&cfg, opts(2, 10)).unwrap().leaves, tree.leaves.len() as u128);
    }

    #[test]
    fn plain_ufbd_tree_is_finite() {
        let cfg = ProtocolConfig::new(ProtocolKind::Ufbd, fixtures::four_item_pool(), Some(2), None).unwrap();
        let s = walk_dialogues(&cfg, opts(2, 10)).unwrap();
        assert!(!s.fuel_exhausted);
        assert!(s.leaves > 0);
    }

    #[test]
    fn oversized_tree_is_refused() {
        let cfg = ProtocolConfig::new(ProtocolKind::Basic, fixtures::plant_pool(), None, None).unwrap();
        let small = WalkOptions { max_states: 1000, ..opts(2, 25) };
        assert!(matches!(walk_dialogues(&cfg, small), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn empty_pool_has_one_leaf() {
        let pool = CandidatePool::from_graphs(Vec::new());
        let cfg = ProtocolConfig::new(ProtocolKind::Ufbd, pool, None, None).unwrap();
        let tree = exhaustive_dialogues(&cfg, 2, 5, 10).unwrap();
        assert_eq!(tree.leaves.len(), 1);
        assert_eq!(tree.leaves[0].history(), &[Move::Present(BTreeSet::new())]);
    }

    #[test]
    fn prop_h_basic_tree_ends_before_fuel() {
        let cfg = ProtocolConfig::new(ProtocolKind::Basic, fixtures::prop_h_pool(), None, None).unwrap();
        let s = walk_dialogues(&cfg, opts(2, 20)).unwrap();
        assert!(!s.fuel_exhausted);
        assert!(s.max_rounds <= cfg.pool.properties().len());
    }

    #[test]
    fn fuel_cut_is_reported() {
        let cfg = ProtocolConfig::new(ProtocolKind::Basic, fixtures::prop_h_pool(), None, None).unwrap();
        let s = walk_dialogues(&cfg, opts(1, 1)).unwrap();
        assert!(s.fuel_exhausted);
        let tree = exhaustive_dialogues(&cfg, 1, 1, 1_000_000).unwrap();
        assert!(!tree.fuel_exhausted.is_empty());
        assert!(tree.leaves.iter().all(|l| l.history().len() <= 4));
    }
}
