use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Failure, VerificationReport};
use crate::dialogue::{
    check_convergence, is_maximal, replay, validate_feedback, validate_presentation, Convergence, DialogueState,
    Feedback, Move, Polarity, ProtocolConfig, ProtocolKind,
};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::graph::{canonical_key, find_embedding, is_isomorphic, sent_of, FormulaGraph};
use crate::hypothesis::{truth_set_key, CandidatePool, Hypothesis, Item, ItemBody, Mode, Property, PropertyBody};
use crate::logic::{parse_formula, parse_literal, Sentence};
use crate::semantics::{truth_set, valid_in};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CounterexampleFamily {
    #[serde(rename = "inf-basic-propH")]
    InfBasicPropH,
    #[serde(rename = "inf-basic-propG")]
    InfBasicPropG,
    #[serde(rename = "inf-simple-propH")]
    InfSimplePropH,
    #[serde(rename = "inf-simple-propG")]
    InfSimplePropG,
    #[serde(rename = "nc-simple-propG-set")]
    NcSimplePropGSet,
    #[serde(rename = "nc-simple-propH-set")]
    NcSimplePropHSet,
    #[serde(rename = "nc-simpleX-basicF")]
    NcSimpleXBasicF,
    #[serde(rename = "nc-basicX-simpleF")]
    NcBasicXSimpleF,
}

use CounterexampleFamily as F;

impl CounterexampleFamily {
    pub const ALL: [CounterexampleFamily; 8] = [
        F::InfBasicPropH,
        F::InfBasicPropG,
        F::InfSimplePropH,
        F::InfSimplePropG,
        F::NcSimplePropGSet,
        F::NcSimplePropHSet,
        F::NcSimpleXBasicF,
        F::NcBasicXSimpleF,
    ];

    pub fn id(self) -> &'static str {
        match self {
            F::InfBasicPropH => "inf-basic-propH",
            F::InfBasicPropG => "inf-basic-propG",
            F::InfSimplePropH => "inf-simple-propH",
            F::InfSimplePropG => "inf-simple-propG",
            F::NcSimplePropGSet => "nc-simple-propG-set",
            F::NcSimplePropHSet => "nc-simple-propH-set",
            F::NcSimpleXBasicF => "nc-simpleX-basicF",
            F::NcBasicXSimpleF => "nc-basicX-simpleF",
        }
    }

    /// Families of infinite dialogues, as opposed to single finite examples.
    pub fn is_infinite(self) -> bool {
        matches!(self, F::InfBasicPropH | F::InfBasicPropG | F::InfSimplePropH | F::InfSimplePropG)
    }
}

impl fmt::Display for CounterexampleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for CounterexampleFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        F::ALL
            .into_iter()
            .find(|f| f.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown counterexample family `{s}`")))
    }
}

/// `G_0..G_m` (or their sentences) with the property universe cut down to
/// the members' own classes. Member `i` has exactly the property `[i]`,
/// since distinct members never embed into, or imply, each other.
pub fn cycle_pool(mode: Mode, m: usize) -> CandidatePool {
    let a = fixtures::cycle_alphabet();
    let mut items = Vec::new();
    let mut props = Vec::new();
    for i in 0..=m {
        let g = fixtures::cycle_graph(i);
        let name = match mode {
            Mode::G => format!("G_{i:03}"),
            Mode::H => format!("H_{i:03}"),
        };
        let pkey = format!("[{name}]");
        let (item, prop) = match mode {
            Mode::G => (ItemBody::Graph(g.clone()), PropertyBody::Graph(g.clone())),
            Mode::H => {
                let s = sent_of(&g, &a);
                (ItemBody::Hypothesis(Hypothesis::from([s.clone()])), PropertyBody::Sentence(s))
            }
        };
        let order = if mode == Mode::G { g.order() } else { 0 };
        props.push(Property { key: pkey.clone(), order, body: prop });
        items.push((Item { key: name, body: item }, BTreeSet::from([pkey])));
    }
    CandidatePool::new(mode, items, props).expect("cycle pool keys are consistent")
}

fn apply_all(cfg: &ProtocolConfig, moves: Vec<Move>) -> Result<DialogueState> {
    let mut s = DialogueState::new();
    for (i, mv) in moves.into_iter().enumerate() {
        if let Some(v) = s.apply(cfg, mv)?.first() {
            return Err(Error::Move(format!("move {i} violates {}: {}", v.condition, v.message)));
        }
    }
    Ok(s)
}

/// The first `k` rounds of an infinite family, each move validated as it
/// is applied. Basic families present `{G_i}` and reject `[G_i]`; simple
/// ones present `{G_2i-1, G_2i}` and reject both. The target is `{G_0}`.
pub fn counterexample_prefix(family: CounterexampleFamily, k: usize) -> Result<(ProtocolConfig, DialogueState)> {
    if k == 0 {
        return Err(Error::Precondition("a prefix needs at least one round".into()));
    }
    let (kind, mode) = match family {
        F::InfBasicPropH => (ProtocolKind::Basic, Mode::H),
        F::InfBasicPropG => (ProtocolKind::Basic, Mode::G),
        F::InfSimplePropH => (ProtocolKind::Simple, Mode::H),
        F::InfSimplePropG => (ProtocolKind::Simple, Mode::G),
        _ => {
            return Err(Error::Precondition(format!(
                "`{family}` is a finite example; reproduce it instead of asking for a prefix"
            )))
        }
    };
    let width = if kind == ProtocolKind::Basic { 1 } else { 2 };
    let pool = cycle_pool(mode, width * k);
    let cfg = ProtocolConfig::new(kind, pool, None, Some(BTreeSet::from([0])))?;
    let mut moves = Vec::new();
    for i in 1..=k {
        let x: BTreeSet<usize> = (width * (i - 1) + 1..=width * i).collect();
        let f = x.iter().map(|&j| Feedback::new(j, Polarity::Neg)).collect();
        moves.push(Move::Present(x));
        moves.push(Move::Feedback(f));
    }
    let state = apply_all(&cfg, moves)?;
    Ok((cfg, state))
}

/// Pairwise checks on `G_0..G_max` and their sentences: no two members are
/// isomorphic or embed into each other, and over the cycle structures of
/// length up to `max + 1` each sentence holds in exactly its own cycle.
/// Returns the broken pairs.
pub fn family_spot_check(max: usize) -> Result<Vec<String>> {
    let a = fixtures::cycle_alphabet();
    let graphs: Vec<FormulaGraph> = (0..=max).map(fixtures::cycle_graph).collect();
    let structures: Vec<_> = (0..=max).map(fixtures::cycle_structure).collect();
    let mut bad = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        for (j, h) in graphs.iter().enumerate() {
            if i != j && (is_isomorphic(g, h) || find_embedding(g, h).is_some()) {
                bad.push(format!("G_{i} embeds into G_{j}"));
            }
        }
        let s = sent_of(g, &a);
        for (n, m) in structures.iter().enumerate() {
            if valid_in(m, s.formula())? != (n == i) {
                bad.push(format!("H_{i} evaluates wrongly on the cycle of length {}", n + 1));
            }
        }
    }
    Ok(bad)
}

struct Claims {
    report: VerificationReport,
}

impl Claims {
    fn check(&mut self, instance: &str, ok: bool, detail: &str, cfg: &ProtocolConfig, state: &DialogueState) {
        self.report.instances += 1;
        if !ok {
            self.report.failures.push(Failure { instance: instance.into(), detail: detail.into(), turns: state.turns(cfg) });
        }
    }
}

/// Every feedback set over the whole universe, each property absent or
/// given one of three polarities, is rejected.
fn no_feedback_is_legal(state: &DialogueState, cfg: &ProtocolConfig) -> Result<bool> {
    let n = cfg.pool.properties().len();
    if n > 10 {
        return Err(Error::ResourceLimit(format!("{n} properties are too many to try every feedback set")));
    }
    let pols = [Polarity::Pos, Polarity::Neg, Polarity::Neutral];
    for code in 0..4usize.pow(n as u32) {
        let mut f = BTreeSet::new();
        let mut c = code;
        for p in 0..n {
            if c % 4 > 0 {
                f.insert(Feedback::new(p, pols[c % 4 - 1]));
            }
            c /= 4;
        }
        if validate_feedback(state, &f, cfg)?.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn no_presentation_is_legal(state: &DialogueState, cfg: &ProtocolConfig) -> bool {
    (0u32..1 << cfg.pool.len()).all(|m| {
        let x = (0..cfg.pool.len()).filter(|i| m >> i & 1 == 1).collect();
        !matches!(validate_presentation(state, &x, cfg), Ok(v) if v.is_empty())
    })
}

fn graph_item(pool: &CandidatePool, g: &FormulaGraph) -> usize {
    pool.graph_index(g).expect("example graph is in the pool")
}

fn p3_key() -> String {
    let a = fixtures::three_predicate_alphabet();
    canonical_key(&FormulaGraph::new(&a, [parse_literal("p3(0)", &a).expect("literal parses")], []).expect("valid"))
}

fn empty_key() -> String {
    canonical_key(&FormulaGraph::empty())
}

/// The shared positive witness: every target has it and no member of the
/// last presentation does; the convergence check names it too.
fn witness_claims(claims: &mut Claims, cfg: &ProtocolConfig, state: &DialogueState, witness: usize) -> Result<()> {
    let pool = &cfg.pool;
    let target = cfg.target.as_ref().expect("examples have targets");
    let Some(Move::Present(last)) = state.history().last() else {
        return Err(Error::Precondition("the example ends on a presentation".into()));
    };
    claims.check("3(a)", target.iter().all(|&t| pool.props(t).contains(&witness)), "a target lacks the witness", cfg, state);
    claims.check("3(b)", last.iter().all(|&i| !pool.props(i).contains(&witness)), "a presented item has the witness", cfg, state);
    let verdict = check_convergence(state, cfg)?;
    let named = matches!(&verdict, Convergence::Fails { property: Some(p), .. } if *p == pool.properties()[witness].key);
    claims.check("convergence", named, "the convergence check does not name the witness", cfg, state);
    Ok(())
}

fn four_item_cfg(kind: ProtocolKind, bound: Option<usize>) -> Result<ProtocolConfig> {
    let pool = fixtures::four_item_pool();
    let [g1, g2, ..] = fixtures::three_predicate_graphs();
    let t = BTreeSet::from([graph_item(&pool, &g1), graph_item(&pool, &g2)]);
    ProtocolConfig::new(kind, pool, bound, Some(t))
}

fn g3_g4(pool: &CandidatePool) -> (usize, usize) {
    let [_, _, g3, g4] = fixtures::three_predicate_graphs();
    (graph_item(pool, &g3), graph_item(pool, &g4))
}

fn property(pool: &CandidatePool, key: &str) -> Result<usize> {
    pool.property_index(key).ok_or_else(|| Error::Pool(format!("property `{key}` is missing")))
}

fn nc_simple_prop_g_set(claims: &mut Claims) -> Result<()> {
    for bound in [None, Some(0), Some(1), Some(2), Some(3)] {
        let cfg = four_item_cfg(ProtocolKind::Simple, bound)?;
        let pool = &cfg.pool;
        let (g3, g4) = g3_g4(pool);
        let x = BTreeSet::from([g3, g4]);
        let f1 = BTreeSet::from([Feedback::new(property(pool, &empty_key())?, Polarity::Pos)]);
        let tag = bound.map_or("unbounded".to_string(), |n| format!("n = {n}"));
        let state = match apply_all(&cfg, vec![Move::Present(x.clone()), Move::Feedback(f1), Move::Present(x)]) {
            Ok(s) => s,
            Err(e) => {
                claims.check(&format!("1 ({tag})"), false, &e.to_string(), &cfg, &DialogueState::new());
                continue;
            }
        };
        claims.check(&format!("1 ({tag})"), true, "", &cfg, &state);
        claims.check(&format!("2 ({tag})"), no_feedback_is_legal(&state, &cfg)? && is_maximal(&state, &cfg), "a next feedback set exists", &cfg, &state);
        witness_claims(claims, &cfg, &state, property(pool, &p3_key())?)?;
    }
    Ok(())
}

fn nc_simple_prop_h_set(claims: &mut Claims) -> Result<()> {
    let a = fixtures::two_predicate_alphabet();
    let c = fixtures::two_predicate_class();
    let pool = fixtures::prop_h_pool();
    let sentence = |t: &str| -> Result<Sentence> {
        Sentence::new(parse_formula(t, &a)?).ok_or_else(|| Error::Precondition(format!("`{t}` is not a sentence")))
    };
    let item = |t: &str| -> Result<usize> {
        let h = Hypothesis::from([sentence(t)?]);
        pool.items()
            .iter()
            .position(|i| i.body == ItemBody::Hypothesis(h.clone()))
            .ok_or_else(|| Error::Pool(format!("hypothesis `{t}` is missing")))
    };
    let class = |t: &str| -> Result<usize> { property(&pool, &truth_set_key(&truth_set(&sentence(t)?, &c)?)) };
    let target = BTreeSet::from([item("p1(0) & !p2(0)")?, item("!p1(0) & p2(0)")?]);
    let cfg = ProtocolConfig::new(ProtocolKind::Simple, pool.clone(), None, Some(target))?;
    let x = BTreeSet::from([item("p1(0)")?, item("p2(0)")?]);
    let f1 = BTreeSet::from([Feedback::new(class("true")?, Polarity::Pos), Feedback::new(class("p1(0) | p2(0)")?, Polarity::Pos)]);
    let state = apply_all(&cfg, vec![Move::Present(x.clone()), Move::Feedback(f1), Move::Present(x)])?;
    claims.check("1", true, "", &cfg, &state);
    claims.check("2", no_feedback_is_legal(&state, &cfg)? && is_maximal(&state, &cfg), "a next feedback set exists", &cfg, &state);
    witness_claims(claims, &cfg, &state, class("!(p1(0) & p2(0))")?)
}

fn nc_simple_x_basic_f(claims: &mut Claims) -> Result<()> {
    for n in 3..=5 {
        let cfg = four_item_cfg(ProtocolKind::SimpleXBasicF, Some(n))?;
        let pool = &cfg.pool;
        let (g3, g4) = g3_g4(pool);
        let key = |i: usize| pool.items()[i].key.clone();
        let x = BTreeSet::from([g3, g4]);
        let f1 = BTreeSet::from([
            Feedback::new(property(pool, &empty_key())?, Polarity::Pos),
            Feedback::new(property(pool, &key(g3))?, Polarity::Neutral),
            Feedback::new(property(pool, &key(g4))?, Polarity::Neutral),
        ]);
        let moves = vec![Move::Present(x.clone()), Move::Feedback(f1), Move::Present(x), Move::Feedback(BTreeSet::new())];
        let state = apply_all(&cfg, moves)?;
        let tag = format!("n = {n}");
        claims.check(&format!("1 ({tag})"), true, "", &cfg, &state);
        claims.check(&format!("2 ({tag})"), no_presentation_is_legal(&state, &cfg), "a next presentation exists", &cfg, &state);
        let verdict = check_convergence(&state, &cfg)?;
        let cond1 = matches!(&verdict, Convergence::Fails { condition, .. } if condition == "1");
        claims.check(&format!("3 ({tag})"), cond1, "the last set is not reported as a non-item set", &cfg, &state);
    }
    Ok(())
}

fn nc_basic_x_simple_f(claims: &mut Claims) -> Result<()> {
    for n in 3..=5 {
        let cfg = four_item_cfg(ProtocolKind::BasicXSimpleF, Some(n))?;
        let pool = &cfg.pool;
        let (g3, _) = g3_g4(pool);
        let x = BTreeSet::from([g3]);
        let f1 = BTreeSet::from([Feedback::new(property(pool, &empty_key())?, Polarity::Pos)]);
        let state = apply_all(&cfg, vec![Move::Present(x.clone()), Move::Feedback(f1), Move::Present(x)])?;
        let tag = format!("n = {n}");
        claims.check(&format!("1 ({tag})"), true, "", &cfg, &state);
        claims.check(&format!("2 ({tag})"), no_feedback_is_legal(&state, &cfg)? && is_maximal(&state, &cfg), "a next feedback set exists", &cfg, &state);
        witness_claims(claims, &cfg, &state, property(pool, &p3_key())?)?;
    }
    Ok(())
}

/// Rebuilds a finite non-convergence example and checks each of its claims:
/// the dialogue is valid, it cannot be extended, and its last set misses
/// what every target shares.
pub fn reproduce_non_convergence(family: CounterexampleFamily) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut claims = Claims { report: VerificationReport::new(format!("reproduce/{family}")) };
    match family {
        F::NcSimplePropGSet => nc_simple_prop_g_set(&mut claims)?,
        F::NcSimplePropHSet => nc_simple_prop_h_set(&mut claims)?,
        F::NcSimpleXBasicF => nc_simple_x_basic_f(&mut claims)?,
        F::NcBasicXSimpleF => nc_basic_x_simple_f(&mut claims)?,
        _ => return Err(Error::Precondition(format!("`{family}` is an infinite family; ask for a prefix instead"))),
    }
    Ok(claims.report.finish(started))
}

/// All four infinite families at length `k`, re-validated from their
/// transcripts, the pairwise spot checks, and the four finite examples.
pub fn verify_counterexamples(k: usize) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut r = VerificationReport::new("counterexamples");
    r.notes.push(format!("prefix length {k}"));
    for family in F::ALL.into_iter().filter(|f| f.is_infinite()) {
        r.instances += 1;
        let outcome = counterexample_prefix(family, k).and_then(|(cfg, s)| {
            let back = replay(&cfg, &s.turns(&cfg))?;
            Ok(back == s && s.terminal().is_none() && s.history().len() == 2 * k)
        });
        match outcome {
            Ok(true) => {}
            Ok(false) => r.failures.push(Failure { instance: family.id().into(), detail: "prefix does not replay".into(), turns: vec![] }),
            Err(e) => r.failures.push(Failure { instance: family.id().into(), detail: e.to_string(), turns: vec![] }),
        }
    }
    let spot = 5;
    r.notes.push(format!("pairwise checks on members 0..={spot}"));
    r.instances += 1;
    for detail in family_spot_check(spot)? {
        r.failures.push(Failure { instance: "spot-check".into(), detail, turns: vec![] });
    }
    for family in F::ALL.into_iter().filter(|f| !f.is_infinite()) {
        let sub = reproduce_non_convergence(family)?;
        r.instances += sub.instances;
        r.failures.extend(sub.failures.into_iter().map(|f| Failure { instance: format!("{family} {}", f.instance), ..f }));
    }
    Ok(r.finish(started))
}
