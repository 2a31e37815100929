//! The user-feedback dialogue state machine: move validation per protocol,
//! move generation for reasoner and simulated user, maximality and
//! convergence.

mod moves;
mod transcript;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{CandidatePool, Mode};

pub use moves::{
    feedback_moves, is_maximal, next_feedback, next_presentation, presentation_moves, run_dialogue,
    FeedbackStrategy, PresentationStrategy, RunStatus, Simulator,
};
pub use transcript::{replay, Role, TerminalInfo, Transcript, Turn, TurnPayload};
pub use validate::{check_convergence, satisfies_feedbacks, validate_feedback, validate_presentation, Convergence, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Pos,
    Neg,
    Neutral,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Pos => "pos",
            Polarity::Neg => "neg",
            Polarity::Neutral => "neutral",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProtocolKind {
    #[serde(rename = "UFBD")]
    Ufbd,
    Basic,
    Simple,
    #[serde(rename = "SimpleX-BasicF")]
    SimpleXBasicF,
    #[serde(rename = "BasicX-SimpleF")]
    BasicXSimpleF,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 5] = [
        ProtocolKind::Ufbd,
        ProtocolKind::Basic,
        ProtocolKind::Simple,
        ProtocolKind::SimpleXBasicF,
        ProtocolKind::BasicXSimpleF,
    ];

    pub(crate) fn basic_presentation(self) -> bool {
        matches!(self, ProtocolKind::Basic | ProtocolKind::BasicXSimpleF)
    }

    pub(crate) fn simple_presentation(self) -> bool {
        matches!(self, ProtocolKind::Simple | ProtocolKind::SimpleXBasicF)
    }

    pub(crate) fn basic_feedback(self) -> bool {
        matches!(self, ProtocolKind::Basic | ProtocolKind::SimpleXBasicF)
    }

    pub(crate) fn simple_feedback(self) -> bool {
        matches!(self, ProtocolKind::Simple | ProtocolKind::BasicXSimpleF)
    }

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Ufbd => "UFBD",
            ProtocolKind::Basic => "Basic",
            ProtocolKind::Simple => "Simple",
            ProtocolKind::SimpleXBasicF => "SimpleX-BasicF",
            ProtocolKind::BasicXSimpleF => "BasicX-SimpleF",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown protocol `{s}`")))
    }
}

/// A protocol instance: kind, pool, optional size bound and optional
/// target set (item indices).
#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    pub pool: CandidatePool,
    pub size_bound: Option<usize>,
    pub target: Option<BTreeSet<usize>>,
}

impl ProtocolConfig {
    pub fn new(
        kind: ProtocolKind,
        pool: CandidatePool,
        size_bound: Option<usize>,
        target: Option<BTreeSet<usize>>,
    ) -> Result<Self> {
        if size_bound.is_some() && pool.mode() != Mode::G {
            return Err(Error::Config("a size bound needs a graph pool".into()));
        }
        if let Some(t) = &target {
            if t.is_empty() {
                return Err(Error::Config("the target set is empty".into()));
            }
            if let Some(bad) = t.iter().find(|&&i| i >= pool.len()) {
                return Err(Error::Config(format!("target item {bad} is outside the pool")));
            }
        }
        Ok(ProtocolConfig { kind, pool, size_bound, target })
    }

    pub fn with_target(&self, target: BTreeSet<usize>) -> Result<Self> {
        ProtocolConfig::new(self.kind, self.pool.clone(), self.size_bound, Some(target))
    }

    pub fn with_kind(&self, kind: ProtocolKind) -> Self {
        ProtocolConfig { kind, ..self.clone() }
    }

    /// The polarity the towards rule fixes for a property, if a target is set.
    pub fn towards(&self, property: usize) -> Option<Polarity> {
        let t = self.target.as_ref()?;
        let having = t.iter().filter(|&&i| self.pool.props(i).contains(&property)).count();
        Some(if having == t.len() {
            Polarity::Pos
        } else if having == 0 {
            Polarity::Neg
        } else {
            Polarity::Neutral
        })
    }

    /// Largest target order, for the size-bound construction.
    pub(crate) fn max_target_order(&self) -> usize {
        let Some(t) = &self.target else { return 0 };
        t.iter()
            .map(|&i| match &self.pool.items()[i].body {
                crate::hypothesis::ItemBody::Graph(g) => g.order(),
                crate::hypothesis::ItemBody::Hypothesis(_) => 0,
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Feedback {
    pub property: usize,
    pub polarity: Polarity,
}

impl Feedback {
    pub fn new(property: usize, polarity: Polarity) -> Self {
        Feedback { property, polarity }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Present(BTreeSet<usize>),
    Feedback(BTreeSet<Feedback>),
}

/// A dialogue prefix with its ledger. Moves alternate, presentations first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DialogueState {
    history: Vec<Move>,
    pos: BTreeSet<usize>,
    neg: BTreeSet<usize>,
    /// Property to the index of the feedback set that first pointed it out,
    /// and the polarity given there.
    pointed: BTreeMap<usize, (usize, Polarity)>,
    terminal: Option<String>,
}

impl DialogueState {
    pub fn new() -> Self {
        DialogueState::default()
    }

    pub fn history(&self) -> &[Move] {
        &self.history
    }

    pub fn expects_presentation(&self) -> bool {
        self.history.len() % 2 == 0
    }

    /// The condition that made the last set final, if any.
    pub fn terminal(&self) -> Option<&str> {
        self.terminal.as_deref()
    }

    pub fn positives(&self) -> &BTreeSet<usize> {
        &self.pos
    }

    pub fn negatives(&self) -> &BTreeSet<usize> {
        &self.neg
    }

    pub fn pointed(&self) -> &BTreeMap<usize, (usize, Polarity)> {
        &self.pointed
    }

    pub fn is_fresh(&self, property: usize) -> bool {
        !self.pointed.contains_key(&property)
    }

    /// The presentation awaiting feedback.
    pub fn current_presentation(&self) -> Option<&BTreeSet<usize>> {
        match self.history.last() {
            Some(Move::Present(x)) => Some(x),
            _ => None,
        }
    }

    /// Validates and applies a move. On violations the state is unchanged
    /// and the violations are returned.
    pub fn apply(&mut self, cfg: &ProtocolConfig, mv: Move) -> Result<Vec<Violation>> {
        let violations = match &mv {
            Move::Present(x) => validate_presentation(self, x, cfg)?,
            Move::Feedback(f) => validate_feedback(self, f, cfg)?,
        };
        if violations.is_empty() {
            self.push(cfg, mv);
        }
        Ok(violations)
    }

    /// Applies a move already known to be valid.
    pub(crate) fn push(&mut self, cfg: &ProtocolConfig, mv: Move) {
        match &mv {
            Move::Present(x) => {
                if cfg.kind.basic_presentation()
                    && !x.iter().any(|&i| cfg.pool.props(i).iter().any(|&p| self.is_fresh(p)))
                {
                    self.terminal = Some("Basic 1(b)".into());
                }
                if cfg.kind.simple_presentation() && x.len() <= 1 {
                    self.terminal = Some("Simple 1(c)".into());
                }
            }
            Move::Feedback(f) => {
                let index = self.history.len() / 2;
                for fb in f {
                    match fb.polarity {
                        Polarity::Pos => {
                            self.pos.insert(fb.property);
                        }
                        Polarity::Neg => {
                            self.neg.insert(fb.property);
                        }
                        Polarity::Neutral => {}
                    }
                    self.pointed.entry(fb.property).or_insert((index, fb.polarity));
                }
                if f.is_empty() {
                    if cfg.kind.basic_feedback() {
                        self.terminal = Some("Basic 2(d)".into());
                    }
                    if cfg.kind.simple_feedback() {
                        self.terminal = Some("Simple 2(e)".into());
                    }
                }
            }
        }
        self.history.push(mv);
    }

    pub(crate) fn check_phase(&self, presentation: bool) -> Result<()> {
        if let Some(reason) = &self.terminal {
            return Err(Error::Move(format!("the dialogue has ended ({reason})")));
        }
        match (presentation, self.expects_presentation()) {
            (true, false) => Err(Error::Move("a feedback set is expected".into())),
            (false, true) => Err(Error::Move("a presentation is expected".into())),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn protocol_names_round_trip() {
        for k in ProtocolKind::ALL {
            assert_eq!(k.name().parse::<ProtocolKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
        assert!("Complex".parse::<ProtocolKind>().is_err());
    }

    #[test]
    fn config_rejects_bad_targets_and_bounds() {
        let pool = fixtures::four_item_pool();
        assert!(ProtocolConfig::new(ProtocolKind::Basic, pool.clone(), None, Some(BTreeSet::new())).is_err());
        assert!(ProtocolConfig::new(ProtocolKind::Basic, pool, None, Some(BTreeSet::from([9]))).is_err());
        assert!(ProtocolConfig::new(ProtocolKind::Basic, fixtures::prop_h_pool(), Some(2), None).is_err());
    }

    #[test]
    fn towards_polarities() {
        let pool = fixtures::four_item_pool();
        let [g1, g2, g3, _] = fixtures::three_predicate_graphs();
        let t = BTreeSet::from([pool.graph_index(&g1).unwrap(), pool.graph_index(&g2).unwrap()]);
        let cfg = ProtocolConfig::new(ProtocolKind::Simple, pool.clone(), None, Some(t)).unwrap();
        let key = |g: &crate::graph::FormulaGraph| pool.property_index(&crate::graph::canonical_key(g)).unwrap();
        assert_eq!(cfg.towards(key(&crate::graph::FormulaGraph::empty())), Some(Polarity::Pos));
        assert_eq!(cfg.towards(key(&g3)), Some(Polarity::Neutral));
        assert_eq!(cfg.towards(key(&g1)), Some(Polarity::Neutral));
    }

    #[test]
    fn terminal_rules() {
        let cfg = ProtocolConfig::new(ProtocolKind::Simple, fixtures::four_item_pool(), None, None).unwrap();
        let mut s = DialogueState::new();
        assert!(s.apply(&cfg, Move::Feedback(BTreeSet::new())).is_err());
        let v = s.apply(&cfg, Move::Present(BTreeSet::from([0]))).unwrap();
        assert_eq!(v.iter().map(|v| v.condition.as_str()).collect::<Vec<_>>(), vec!["Simple 1(b)"]);
        assert!(s.apply(&cfg, Move::Present(BTreeSet::from([0, 1]))).unwrap().is_empty());
        assert_eq!(s.terminal(), None);
        let basic = cfg.with_kind(ProtocolKind::Basic);
        let mut b = DialogueState::new();
        assert!(b.apply(&basic, Move::Present(BTreeSet::from([0]))).unwrap().is_empty());
        assert!(b.apply(&basic, Move::Feedback(BTreeSet::new())).unwrap().iter().any(|v| v.condition == "Basic 2(c)"));
    }
}
