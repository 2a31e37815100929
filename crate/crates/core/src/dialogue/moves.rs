use std::collections::BTreeSet;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::validate::satisfies_feedbacks;
use super::{validate_feedback, validate_presentation, DialogueState, Feedback, Move, Polarity, ProtocolConfig};
use crate::error::{Error, Result};
use crate::hypothesis::Mode;

fn satisfying(state: &DialogueState, cfg: &ProtocolConfig) -> Vec<usize> {
    (0..cfg.pool.len()).filter(|&i| satisfies_feedbacks(i, state, cfg)).collect()
}

fn has_fresh(i: usize, state: &DialogueState, cfg: &ProtocolConfig) -> bool {
    cfg.pool.props(i).iter().any(|&p| state.is_fresh(p))
}

fn valid_presentation(state: &DialogueState, x: &BTreeSet<usize>, cfg: &ProtocolConfig) -> bool {
    validate_presentation(state, x, cfg).is_ok_and(|v| v.is_empty())
}

fn valid_feedback(state: &DialogueState, f: &BTreeSet<Feedback>, cfg: &ProtocolConfig) -> bool {
    validate_feedback(state, f, cfg).is_ok_and(|v| v.is_empty())
}

/// The default reasoner move. Basic-style presentations: the least
/// satisfying item with a fresh property, else the least satisfying item.
/// Simple-style: the least pair with distinct properties, else a singleton.
/// Empty when nothing satisfies the feedbacks.
pub fn next_presentation(state: &DialogueState, cfg: &ProtocolConfig) -> BTreeSet<usize> {
    let sat = satisfying(state, cfg);
    if cfg.kind.simple_presentation() {
        for (a, &i) in sat.iter().enumerate() {
            for &j in &sat[a + 1..] {
                if cfg.pool.props(i) != cfg.pool.props(j) {
                    return BTreeSet::from([i, j]);
                }
            }
        }
        return sat.first().map(|&i| BTreeSet::from([i])).unwrap_or_default();
    }
    sat.iter()
        .find(|&&i| has_fresh(i, state, cfg))
        .or(sat.first())
        .map(|&i| BTreeSet::from([i]))
        .unwrap_or_default()
}

/// Every valid presentation with at most `cap` items.
pub fn presentation_moves(state: &DialogueState, cfg: &ProtocolConfig, cap: usize) -> Vec<BTreeSet<usize>> {
    let sat = satisfying(state, cfg);
    let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new()];
    for size in 1..=cap.min(sat.len()) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            sets.push(combo.iter().map(|&k| sat[k]).collect());
            let Some(pos) = (0..size).rev().find(|&p| combo[p] < sat.len() - size + p) else { break };
            combo[pos] += 1;
            for q in pos + 1..size {
                combo[q] = combo[q - 1] + 1;
            }
        }
    }
    sets.into_iter().filter(|x| valid_presentation(state, x, cfg)).collect()
}

/// Fresh properties appearing in the current presentation, in key order.
fn fresh_appearing(state: &DialogueState, cfg: &ProtocolConfig) -> Vec<usize> {
    let Some(x) = state.current_presentation() else { return Vec::new() };
    let set: BTreeSet<usize> = x.iter().flat_map(|&i| cfg.pool.props(i).iter().copied()).filter(|&p| state.is_fresh(p)).collect();
    set.into_iter().collect()
}

/// Polarities a simulated user may give a property.
fn polarities(p: usize, cfg: &ProtocolConfig) -> Vec<Polarity> {
    let all = match cfg.towards(p) {
        Some(f) => vec![f],
        None => vec![Polarity::Pos, Polarity::Neg, Polarity::Neutral],
    };
    all.into_iter().filter(|f| !(cfg.kind.simple_feedback() && *f == Polarity::Neutral)).collect()
}

fn within_bound(p: usize, cfg: &ProtocolConfig) -> bool {
    cfg.size_bound.is_none_or(|n| cfg.pool.properties()[p].order <= n)
}

/// The default simulated-user move under the towards rule: one feedback on
/// the least eligible fresh property of the presentation. When nothing
/// fresh appears the empty set is returned. `None` means no feedback set
/// is legal.
pub fn next_feedback(state: &DialogueState, cfg: &ProtocolConfig) -> Result<Option<BTreeSet<Feedback>>> {
    if cfg.target.is_none() {
        return Err(Error::Precondition("the simulated user needs a target set".into()));
    }
    let fresh = fresh_appearing(state, cfg);
    if fresh.is_empty() {
        return Ok(Some(BTreeSet::new()));
    }
    for p in fresh {
        if let Some(&f) = polarities(p, cfg).first() {
            if within_bound(p, cfg) {
                return Ok(Some(BTreeSet::from([Feedback::new(p, f)])));
            }
        }
    }
    Ok(None)
}

/// Feedback sets the exhaustive walker branches on: every valid single
/// feedback, pairs of an over-bound feedback with a within-bound one, and
/// the empty set when it is valid.
pub fn feedback_moves(state: &DialogueState, cfg: &ProtocolConfig) -> Vec<BTreeSet<Feedback>> {
    let fresh = fresh_appearing(state, cfg);
    let mut out = Vec::new();
    let singles: Vec<Feedback> =
        fresh.iter().flat_map(|&p| polarities(p, cfg).into_iter().map(move |f| Feedback::new(p, f))).collect();
    for fb in &singles {
        out.push(BTreeSet::from([*fb]));
    }
    if cfg.size_bound.is_some() {
        let floor = cfg.max_target_order();
        let extra = |fb: &&Feedback| within_bound(fb.property, cfg) && cfg.pool.properties()[fb.property].order > floor;
        for big in singles.iter().filter(|fb| !within_bound(fb.property, cfg)) {
            for small in singles.iter().filter(extra) {
                out.push(BTreeSet::from([*big, *small]));
            }
        }
    }
    out.push(BTreeSet::new());
    out.into_iter().filter(|f| valid_feedback(state, f, cfg)).collect()
}

/// No legal next set: the last set is final, or no feedback set is valid.
pub fn is_maximal(state: &DialogueState, cfg: &ProtocolConfig) -> bool {
    if state.terminal().is_some() {
        return true;
    }
    if state.expects_presentation() {
        return false;
    }
    let fresh = fresh_appearing(state, cfg);
    if fresh.is_empty() || !(cfg.kind.basic_feedback() || cfg.kind.simple_feedback()) {
        // The empty set is valid here.
        return false;
    }
    !fresh.iter().any(|&p| within_bound(p, cfg) && !polarities(p, cfg).is_empty())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresentationStrategy {
    Canonical,
    /// The inclusion-minimal candidates among those with a fresh property.
    Minimal,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackStrategy {
    Canonical,
    /// Feedback on each presented graph's own class.
    #[serde(rename = "self")]
    SelfClass,
    Random,
}

impl FromStr for PresentationStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| Error::Config(format!("unknown presenter `{s}`")))
    }
}

impl FromStr for FeedbackStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| Error::Config(format!("unknown feedback strategy `{s}`")))
    }
}

/// Reasoner and simulated user with their strategies and a seeded RNG.
#[derive(Clone, Debug)]
pub struct Simulator {
    pub presenter: PresentationStrategy,
    pub feedback: FeedbackStrategy,
    /// Largest random presentation.
    pub cap: usize,
    rng: ChaCha8Rng,
}

impl Simulator {
    pub fn new(presenter: PresentationStrategy, feedback: FeedbackStrategy, seed: u64) -> Self {
        Simulator { presenter, feedback, cap: 2, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn canonical() -> Self {
        Simulator::new(PresentationStrategy::Canonical, FeedbackStrategy::Canonical, 0)
    }

    pub fn present(&mut self, state: &DialogueState, cfg: &ProtocolConfig) -> BTreeSet<usize> {
        let proposal = match self.presenter {
            PresentationStrategy::Canonical => None,
            PresentationStrategy::Minimal => Some(minimal_presentation(state, cfg)),
            PresentationStrategy::Random => presentation_moves(state, cfg, self.cap).choose(&mut self.rng).cloned(),
        };
        match proposal {
            Some(x) if valid_presentation(state, &x, cfg) => x,
            _ => next_presentation(state, cfg),
        }
    }

    pub fn respond(&mut self, state: &DialogueState, cfg: &ProtocolConfig) -> Result<Option<BTreeSet<Feedback>>> {
        let proposal = match self.feedback {
            FeedbackStrategy::Canonical => None,
            FeedbackStrategy::SelfClass => self_feedback(state, cfg),
            FeedbackStrategy::Random => return Ok(self.random_feedback(state, cfg)),
        };
        match proposal {
            Some(f) if valid_feedback(state, &f, cfg) => Ok(Some(f)),
            _ => next_feedback(state, cfg),
        }
    }

    fn random_feedback(&mut self, state: &DialogueState, cfg: &ProtocolConfig) -> Option<BTreeSet<Feedback>> {
        let fresh = fresh_appearing(state, cfg);
        let mut f = BTreeSet::new();
        for &p in &fresh {
            let options = polarities(p, cfg);
            if !options.is_empty() && self.rng.gen_bool(0.5) {
                f.insert(Feedback::new(p, *options.choose(&mut self.rng).unwrap()));
            }
        }
        if valid_feedback(state, &f, cfg) {
            return Some(f);
        }
        let moves = feedback_moves(state, cfg);
        moves.choose(&mut self.rng).cloned()
    }
}

fn minimal_presentation(state: &DialogueState, cfg: &ProtocolConfig) -> BTreeSet<usize> {
    let pool = &cfg.pool;
    let cands: Vec<usize> = satisfying(state, cfg).into_iter().filter(|&i| has_fresh(i, state, cfg)).collect();
    let mut out: BTreeSet<usize> = BTreeSet::new();
    for &i in &cands {
        let dominated = cands.iter().any(|&j| pool.props(j) != pool.props(i) && pool.props(j).is_subset(pool.props(i)));
        let duplicate = out.iter().any(|&j| pool.props(j) == pool.props(i));
        if !dominated && !duplicate {
            out.insert(i);
        }
    }
    out
}

fn self_feedback(state: &DialogueState, cfg: &ProtocolConfig) -> Option<BTreeSet<Feedback>> {
    if cfg.pool.mode() != Mode::G {
        return None;
    }
    let x = state.current_presentation()?;
    let mut f = BTreeSet::new();
    for &i in x {
        let p = cfg.pool.property_index(&cfg.pool.items()[i].key)?;
        if state.is_fresh(p) {
            if let Some(&pol) = polarities(p, cfg).first() {
                f.insert(Feedback::new(p, pol));
            }
        }
    }
    (!f.is_empty()).then_some(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Maximal,
    FuelExhausted,
}

/// Alternates reasoner and user moves until no legal move remains or
/// `fuel` moves have been made.
pub fn run_dialogue(cfg: &ProtocolConfig, sim: &mut Simulator, fuel: usize) -> Result<(DialogueState, RunStatus)> {
    let mut state = DialogueState::new();
    loop {
        if is_maximal(&state, cfg) {
            return Ok((state, RunStatus::Maximal));
        }
        if state.history().len() >= fuel {
            return Ok((state, RunStatus::FuelExhausted));
        }
        let mv = if state.expects_presentation() {
            Move::Present(sim.present(&state, cfg))
        } else {
            match sim.respond(&state, cfg)? {
                Some(f) => Move::Feedback(f),
                None => return Ok((state, RunStatus::Maximal)),
            }
        };
        let violations = state.apply(cfg, mv)?;
        if !violations.is_empty() {
            return Err(Error::Move(format!("generated move violates {}", violations[0].condition)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::{check_convergence, ProtocolKind};
    use crate::fixtures;

    fn plant_towards_g0(kind: ProtocolKind) -> ProtocolConfig {
        let pool = fixtures::plant_pool();
        let t = BTreeSet::from([pool.graph_index(&fixtures::plant_g0()).unwrap()]);
        ProtocolConfig::new(kind, pool, None, Some(t)).unwrap()
    }

    #[test]
    fn example_flow_reaches_g0() {
        let cfg = plant_towards_g0(ProtocolKind::Basic);
        let pool = &cfg.pool;
        let mut s = DialogueState::new();
        let g1 = pool.graph_index(&fixtures::plant_g1()).unwrap();
        let g2 = pool.graph_index(&fixtures::plant_g2()).unwrap();
        s.apply(&cfg, Move::Present(BTreeSet::from([g1, g2]))).unwrap();
        let f: BTreeSet<Feedback> = [g1, g2]
            .iter()
            .map(|&i| Feedback::new(pool.property_index(&pool.items()[i].key).unwrap(), Polarity::Pos))
            .collect();
        assert!(s.apply(&cfg, Move::Feedback(f)).unwrap().is_empty());
        let g0 = pool.graph_index(&fixtures::plant_g0()).unwrap();
        assert_eq!(next_presentation(&s, &cfg), BTreeSet::from([g0]));
    }

    #[test]
    fn golden_strategies_start_with_both_parts() {
        let cfg = plant_towards_g0(ProtocolKind::Basic);
        let mut sim = Simulator::new(PresentationStrategy::Minimal, FeedbackStrategy::SelfClass, 0);
        let (s, status) = run_dialogue(&cfg, &mut sim, 200).unwrap();
        assert_eq!(status, RunStatus::Maximal);
        let g0 = cfg.pool.graph_index(&fixtures::plant_g0()).unwrap();
        let g1 = cfg.pool.graph_index(&fixtures::plant_g1()).unwrap();
        let g2 = cfg.pool.graph_index(&fixtures::plant_g2()).unwrap();
        assert_eq!(s.history()[0], Move::Present(BTreeSet::from([g1, g2])));
        assert_eq!(s.history().last(), Some(&Move::Present(BTreeSet::from([g0]))));
        assert!(check_convergence(&s, &cfg).unwrap().converges());
    }

    #[test]
    fn fuel_zero_is_exhausted() {
        let cfg = plant_towards_g0(ProtocolKind::Basic);
        let (s, status) = run_dialogue(&cfg, &mut Simulator::canonical(), 0).unwrap();
        assert!(s.history().is_empty());
        assert_eq!(status, RunStatus::FuelExhausted);
    }

    #[test]
    fn simple_pair_over_four_items() {
        let cfg = ProtocolConfig::new(ProtocolKind::Simple, fixtures::four_item_pool(), None, None).unwrap();
        let x = next_presentation(&DialogueState::new(), &cfg);
        assert_eq!(x.len(), 2);
        assert!(presentation_moves(&DialogueState::new(), &cfg, 2).contains(&x));
    }

    #[test]
    fn simple_towards_h1_h2_has_no_next_feedback() {
        let pool = fixtures::prop_h_pool();
        let key = |t: &str| pool.item_index(&format!("{{{t}}}")).unwrap();
        let [h1, h2, h3, h4] = ["p1(0) & !p2(0)", "!p1(0) & p2(0)", "p1(0)", "p2(0)"].map(|t| {
            let a = fixtures::two_predicate_alphabet();
            let s = crate::logic::existential_closure(&crate::logic::parse_formula(t, &a).unwrap());
            key(&s.to_string())
        });
        let cfg = ProtocolConfig::new(ProtocolKind::Simple, pool.clone(), None, Some(BTreeSet::from([h1, h2]))).unwrap();
        let mut s = DialogueState::new();
        assert!(s.apply(&cfg, Move::Present(BTreeSet::from([h3, h4]))).unwrap().is_empty());
        let top = pool.properties().iter().position(|p| p.representative() == fixtures::prop_h_sentences()[0].to_string()).unwrap();
        let or = pool.properties().iter().position(|p| p.representative() == fixtures::prop_h_sentences()[3].to_string()).unwrap();
        let f = BTreeSet::from([Feedback::new(top, Polarity::Pos), Feedback::new(or, Polarity::Pos)]);
        assert!(s.apply(&cfg, Move::Feedback(f)).unwrap().is_empty());
        assert!(s.apply(&cfg, Move::Present(BTreeSet::from([h3, h4]))).unwrap().is_empty());
        assert_eq!(next_feedback(&s, &cfg).unwrap(), None);
        assert!(is_maximal(&s, &cfg));
    }
}
