use std::collections::BTreeSet;

use serde::Serialize;

use super::{is_maximal, DialogueState, Feedback, Move, Polarity, ProtocolConfig};
use crate::error::{Error, Result};

/// A failed numbered condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: String,
    pub message: String,
}

fn violation(condition: &str, message: String) -> Violation {
    Violation { condition: condition.into(), message }
}

/// Every previous positive property is present and no previous negative
/// one is; neutral feedback imposes nothing.
pub fn satisfies_feedbacks(item: usize, state: &DialogueState, cfg: &ProtocolConfig) -> bool {
    let props = cfg.pool.props(item);
    state.pos.is_subset(props) && state.neg.is_disjoint(props)
}

fn has_fresh(item: usize, state: &DialogueState, cfg: &ProtocolConfig) -> bool {
    cfg.pool.props(item).iter().any(|&p| state.is_fresh(p))
}

pub fn validate_presentation(state: &DialogueState, x: &BTreeSet<usize>, cfg: &ProtocolConfig) -> Result<Vec<Violation>> {
    state.check_phase(true)?;
    let pool = &cfg.pool;
    if let Some(bad) = x.iter().find(|&&i| i >= pool.len()) {
        return Err(Error::Move(format!("item {bad} is not in the pool")));
    }
    let key = |i: usize| pool.items()[i].key.clone();
    let satisfying: Vec<usize> = (0..pool.len()).filter(|&i| satisfies_feedbacks(i, state, cfg)).collect();
    let mut out = Vec::new();
    for &i in x {
        if !satisfies_feedbacks(i, state, cfg) {
            out.push(violation("UFBD 1", format!("`{}` does not satisfy all previous feedbacks", key(i))));
        }
    }
    if x.is_empty() && !satisfying.is_empty() {
        out.push(violation("UFBD 2", "the presentation is empty but some candidate satisfies all previous feedbacks".into()));
    }
    if cfg.kind.basic_presentation()
        && !x.iter().any(|&i| has_fresh(i, state, cfg))
        && satisfying.iter().any(|&i| has_fresh(i, state, cfg))
    {
        out.push(violation(
            "Basic 1(a)",
            "no presented candidate has a property not pointed out before, but such a candidate exists".into(),
        ));
    }
    if cfg.kind.simple_presentation() {
        let xs: Vec<usize> = x.iter().copied().collect();
        for (a, &i) in xs.iter().enumerate() {
            for &j in &xs[a + 1..] {
                if pool.props(i) == pool.props(j) {
                    out.push(violation("Simple 1(a)", format!("`{}` and `{}` have the same properties", key(i), key(j))));
                }
            }
        }
        if xs.len() <= 1 {
            let distinct: BTreeSet<&BTreeSet<usize>> = satisfying.iter().map(|&i| pool.props(i)).collect();
            if distinct.len() >= 2 {
                out.push(violation(
                    "Simple 1(b)",
                    "several candidates with distinct properties satisfy all previous feedbacks".into(),
                ));
            }
        }
    }
    Ok(out)
}

pub fn validate_feedback(state: &DialogueState, f: &BTreeSet<Feedback>, cfg: &ProtocolConfig) -> Result<Vec<Violation>> {
    state.check_phase(false)?;
    let pool = &cfg.pool;
    if let Some(bad) = f.iter().find(|fb| fb.property >= pool.properties().len()) {
        return Err(Error::Move(format!("property {} is not in the universe", bad.property)));
    }
    let x = state.current_presentation().expect("phase checked");
    let appears = |p: usize| x.iter().any(|&i| pool.props(i).contains(&p));
    let key = |p: usize| pool.properties()[p].key.clone();
    let fresh_appearing = x.iter().flat_map(|&i| pool.props(i)).any(|&p| state.is_fresh(p));
    let mut out = Vec::new();
    let (appear_id, fresh_id, nonempty_id) = if cfg.kind.simple_feedback() {
        ("Simple 2(b)", "Simple 2(c)", "Simple 2(d)")
    } else {
        ("Basic 2(a)", "Basic 2(b)", "Basic 2(c)")
    };
    if cfg.kind.basic_feedback() || cfg.kind.simple_feedback() {
        for fb in f {
            if cfg.kind.simple_feedback() && fb.polarity == Polarity::Neutral {
                out.push(violation("Simple 2(a)", format!("feedback on `{}` is neutral", key(fb.property))));
            }
            if !appears(fb.property) {
                out.push(violation(appear_id, format!("`{}` does not appear in the presentation", key(fb.property))));
            }
            if !state.is_fresh(fb.property) {
                out.push(violation(fresh_id, format!("`{}` has been pointed out before", key(fb.property))));
            }
        }
        if f.is_empty() && fresh_appearing {
            out.push(violation(nonempty_id, "the feedback set is empty but a fresh property appears".into()));
        }
    }
    if let Some(n) = cfg.size_bound {
        if !f.is_empty() && !f.iter().any(|fb| pool.properties()[fb.property].order <= n) {
            out.push(violation("n-bound", format!("no feedback is on a property of order at most {n}")));
        }
    }
    if cfg.target.is_some() {
        for fb in f {
            let want = cfg.towards(fb.property).expect("target set");
            if fb.polarity != want {
                out.push(violation("towards", format!("feedback on `{}` must be {want}", key(fb.property))));
            }
        }
    }
    Ok(out)
}

/// Outcome of the convergence check on a maximal dialogue.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum Convergence {
    Converges,
    Fails {
        condition: String,
        /// Offending item and property keys, when the failure has them.
        item: Option<String>,
        property: Option<String>,
    },
}

impl Convergence {
    pub fn converges(&self) -> bool {
        matches!(self, Convergence::Converges)
    }
}

/// Checks a maximal dialogue against its target: the last set is a
/// non-empty candidate set, and each member has every property all targets
/// share and none that no target has.
pub fn check_convergence(state: &DialogueState, cfg: &ProtocolConfig) -> Result<Convergence> {
    let Some(target) = &cfg.target else {
        return Err(Error::Precondition("convergence needs a target set".into()));
    };
    if !is_maximal(state, cfg) {
        return Err(Error::Precondition("the dialogue can still be extended".into()));
    }
    let fail = |condition: &str, item: Option<usize>, property: Option<usize>| Convergence::Fails {
        condition: condition.into(),
        item: item.map(|i| cfg.pool.items()[i].key.clone()),
        property: property.map(|p| cfg.pool.properties()[p].key.clone()),
    };
    let last = match state.history().last() {
        Some(Move::Present(x)) if !x.is_empty() => x,
        _ => return Ok(fail("1", None, None)),
    };
    let pool = &cfg.pool;
    for &i in last {
        for p in 0..pool.properties().len() {
            let in_targets = target.iter().filter(|&&t| pool.props(t).contains(&p)).count();
            let has = pool.props(i).contains(&p);
            if in_targets == target.len() && !has {
                return Ok(fail("2(a)", Some(i), Some(p)));
            }
            if in_targets == 0 && has {
                return Ok(fail("2(b)", Some(i), Some(p)));
            }
        }
    }
    Ok(Convergence::Converges)
}
