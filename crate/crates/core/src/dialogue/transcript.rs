use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{DialogueState, Feedback, Move, Polarity, ProtocolConfig};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Reasoner,
    User,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemRef {
    pub key: String,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRef {
    pub property: String,
    pub representative: String,
    pub polarity: Polarity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TurnPayload {
    Presentation { items: Vec<ItemRef> },
    Feedback { feedback: Vec<FeedbackRef> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub payload: TurnPayload,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminalInfo {
    /// `maximal`, `fuel-exhausted` or `awaiting`.
    pub status: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    #[serde(default)]
    pub config: Value,
    pub turns: Vec<Turn>,
    #[serde(default)]
    pub terminal: Option<TerminalInfo>,
}

impl Turn {
    pub fn from_move(mv: &Move, cfg: &ProtocolConfig) -> Turn {
        let pool = &cfg.pool;
        match mv {
            Move::Present(x) => Turn {
                role: Role::Reasoner,
                payload: TurnPayload::Presentation {
                    items: x
                        .iter()
                        .map(|&i| ItemRef { key: pool.items()[i].key.clone(), label: pool.items()[i].label() })
                        .collect(),
                },
            },
            Move::Feedback(f) => Turn {
                role: Role::User,
                payload: TurnPayload::Feedback {
                    feedback: f
                        .iter()
                        .map(|fb| {
                            let p = &pool.properties()[fb.property];
                            FeedbackRef { property: p.key.clone(), representative: p.representative(), polarity: fb.polarity }
                        })
                        .collect(),
                },
            },
        }
    }

    /// Resolves keys against the pool.
    pub fn to_move(&self, cfg: &ProtocolConfig) -> Result<Move> {
        let pool = &cfg.pool;
        match &self.payload {
            TurnPayload::Presentation { items } => {
                let mut x = BTreeSet::new();
                for r in items {
                    x.insert(pool.item_index(&r.key).ok_or_else(|| Error::Move(format!("unknown item `{}`", r.key)))?);
                }
                Ok(Move::Present(x))
            }
            TurnPayload::Feedback { feedback } => {
                let mut f = BTreeSet::new();
                for r in feedback {
                    let p = pool
                        .property_index(&r.property)
                        .ok_or_else(|| Error::Move(format!("unknown property `{}`", r.property)))?;
                    f.insert(Feedback::new(p, r.polarity));
                }
                Ok(Move::Feedback(f))
            }
        }
    }
}

impl DialogueState {
    pub fn turns(&self, cfg: &ProtocolConfig) -> Vec<Turn> {
        self.history().iter().map(|m| Turn::from_move(m, cfg)).collect()
    }
}

/// Rebuilds a state from turns, validating each move.
pub fn replay(cfg: &ProtocolConfig, turns: &[Turn]) -> Result<DialogueState> {
    let mut state = DialogueState::new();
    for (i, t) in turns.iter().enumerate() {
        let expected = if state.expects_presentation() { Role::Reasoner } else { Role::User };
        if t.role != expected {
            return Err(Error::Move(format!("turn {i} is by the wrong party")));
        }
        let violations = state.apply(cfg, t.to_move(cfg)?)?;
        if let Some(v) = violations.first() {
            return Err(Error::Move(format!("turn {i} violates {}: {}", v.condition, v.message)));
        }
    }
    Ok(state)
}
