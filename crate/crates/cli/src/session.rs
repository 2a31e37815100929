//! Live dialogue sessions backed by append-only transcript files.
//!
//! A session file is JSON lines: a header with the id, creation time and
//! inlined config, then one line per move.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use ufbd_core::config::ConfigFile;
use ufbd_core::dialogue::{
    is_maximal, Convergence, DialogueState, Feedback, FeedbackStrategy, Move, Polarity, PresentationStrategy,
    ProtocolConfig, ProtocolKind, Simulator, TerminalInfo, Transcript, Turn, Violation,
};
use ufbd_core::graph::GraphFile;
use ufbd_core::hypothesis::{ItemBody, Mode};

use crate::commands::{maximal_terminal, pinned_config, transcript_config, verdict};

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Header {
    id: String,
    created_at: DateTime<Utc>,
    #[serde(default = "canonical")]
    presenter: PresentationStrategy,
    config: Value,
}

fn canonical() -> PresentationStrategy {
    PresentationStrategy::Canonical
}

#[derive(Serialize, Deserialize)]
struct TurnLine {
    at: DateTime<Utc>,
    #[serde(flatten)]
    turn: Turn,
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub config: Value,
    pub cfg: ProtocolConfig,
    pub state: DialogueState,
    pub presenter: PresentationStrategy,
    path: PathBuf,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyView {
    pub key: String,
    pub representative: String,
    pub pointed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateView {
    pub key: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentences: Option<Vec<String>>,
    pub properties: Vec<PropertyView>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PresentationView {
    /// The turn number the next feedback must carry.
    pub turn: usize,
    pub candidates: Vec<CandidateView>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TerminalView {
    pub status: String,
    pub reason: String,
    pub last_set: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<Convergence>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionSummary {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub protocol: ProtocolKind,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<String>>,
    pub turn: usize,
    /// `awaiting` while feedback is expected, `maximal` once the dialogue ended.
    pub status: String,
    pub positives: Vec<String>,
    pub negatives: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal: Option<TerminalView>,
}

/// Why a feedback submission was refused.
#[derive(Debug)]
pub enum Rejection {
    StaleTurn { expected: usize },
    Ended,
    UnknownProperty(String),
    Violations(Vec<Violation>),
}

pub struct FeedbackItem {
    pub property_key: String,
    pub polarity: Polarity,
}

fn append(path: &Path, line: &impl Serialize) -> anyhow::Result<()> {
    let mut f = OpenOptions::new().append(true).create(true).open(path)?;
    let mut text = serde_json::to_string(line)?;
    text.push('\n');
    f.write_all(text.as_bytes())?;
    f.sync_data()?;
    Ok(())
}

impl Session {
    /// Builds the protocol from an inline config, stores the header and
    /// makes the first presentation. The presenter must be deterministic so
    /// that a reload reproduces the same moves.
    pub fn create(dir: &Path, file: &ConfigFile, presenter: PresentationStrategy) -> anyhow::Result<Session> {
        if presenter == PresentationStrategy::Random {
            return Err(ufbd_core::Error::Config("sessions need a deterministic presenter".into()).into());
        }
        let loaded = file.resolve(Path::new("."), None)?;
        let cfg = loaded.protocol_config(None, None, None)?;
        let config = serde_json::to_value(pinned_config(file, Path::new("."), &cfg)?)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let now = Utc::now();
        let path = dir.join(format!("{id}.jsonl"));
        append(&path, &Header { id: id.clone(), created_at: now, presenter, config: config.clone() })?;
        let mut s =
            Session { id, created_at: now, updated_at: now, config, cfg, state: DialogueState::new(), presenter, path };
        s.advance()?;
        Ok(s)
    }

    /// Reads a session file and replays its moves.
    pub fn load(path: &Path) -> anyhow::Result<Session> {
        let mut lines = BufReader::new(File::open(path)?).lines();
        let header: Header = serde_json::from_str(&lines.next().ok_or_else(|| anyhow!("empty session file"))??)?;
        let t = Transcript { config: header.config.clone(), turns: vec![], terminal: None };
        let cfg = transcript_config(&t, Path::new("."))?;
        let mut state = DialogueState::new();
        let mut updated_at = header.created_at;
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let tl: TurnLine = serde_json::from_str(&line).with_context(|| format!("line {}", i + 2))?;
            let violations = state.apply(&cfg, tl.turn.to_move(&cfg)?)?;
            if let Some(v) = violations.first() {
                return Err(anyhow!("move {i} violates {}", v.condition));
            }
            updated_at = tl.at;
        }
        let mut s = Session {
            id: header.id,
            created_at: header.created_at,
            updated_at,
            config: header.config,
            cfg,
            state,
            presenter: header.presenter,
            path: path.to_path_buf(),
        };
        // A crash between a feedback line and the next presentation leaves
        // the reasoner to move.
        s.advance()?;
        Ok(s)
    }

    fn record(&mut self, mv: Move) -> anyhow::Result<()> {
        let turn = Turn::from_move(&mv, &self.cfg);
        let violations = self.state.apply(&self.cfg, mv)?;
        if let Some(v) = violations.first() {
            return Err(anyhow!("reasoner move violates {}", v.condition));
        }
        self.updated_at = Utc::now();
        append(&self.path, &TurnLine { at: self.updated_at, turn })
    }

    /// Lets the reasoner present if it is its move.
    fn advance(&mut self) -> anyhow::Result<()> {
        if self.state.expects_presentation() && !is_maximal(&self.state, &self.cfg) {
            let x = Simulator::new(self.presenter, FeedbackStrategy::Canonical, 0).present(&self.state, &self.cfg);
            self.record(Move::Present(x))?;
        }
        Ok(())
    }

    pub fn turn(&self) -> usize {
        self.state.history().len()
    }

    pub fn terminal(&self) -> anyhow::Result<Option<TerminalView>> {
        let Some(TerminalInfo { status, reason }) = maximal_terminal(&self.state, &self.cfg) else { return Ok(None) };
        let last = self.last_presentation().cloned().unwrap_or_default();
        Ok(Some(TerminalView {
            status,
            reason,
            last_set: last.iter().map(|&i| self.cfg.pool.items()[i].key.clone()).collect(),
            convergence: verdict(&self.state, &self.cfg)?,
        }))
    }

    fn last_presentation(&self) -> Option<&BTreeSet<usize>> {
        self.state.history().iter().rev().find_map(|m| match m {
            Move::Present(x) => Some(x),
            Move::Feedback(_) => None,
        })
    }

    pub fn presentation(&self) -> PresentationView {
        let pool = &self.cfg.pool;
        let candidates = self
            .last_presentation()
            .map(|x| {
                x.iter()
                    .map(|&i| {
                        let item = &pool.items()[i];
                        let (graph, sentences) = match &item.body {
                            ItemBody::Graph(g) => (Some(g.to_file()), None),
                            ItemBody::Hypothesis(h) => (None, Some(h.iter().map(ToString::to_string).collect())),
                        };
                        let properties = pool
                            .props(i)
                            .iter()
                            .map(|&p| PropertyView {
                                key: pool.properties()[p].key.clone(),
                                representative: pool.properties()[p].representative(),
                                pointed: !self.state.is_fresh(p),
                            })
                            .collect();
                        CandidateView { key: item.key.clone(), graph, sentences, properties }
                    })
                    .collect()
            })
            .unwrap_or_default();
        PresentationView { turn: self.turn(), candidates }
    }

    pub fn summary(&self) -> anyhow::Result<SessionSummary> {
        let keys = |s: &BTreeSet<usize>| -> Vec<String> {
            s.iter().map(|&p| self.cfg.pool.properties()[p].key.clone()).collect()
        };
        let terminal = self.terminal()?;
        Ok(SessionSummary {
            id: self.id.clone(),
            created_at: self.created_at,
            updated_at: self.updated_at,
            protocol: self.cfg.kind,
            mode: self.cfg.pool.mode(),
            target: self.cfg.target.as_ref().map(|t| t.iter().map(|&i| self.cfg.pool.items()[i].key.clone()).collect()),
            turn: self.turn(),
            status: if terminal.is_some() { "maximal" } else { "awaiting" }.into(),
            positives: keys(self.state.positives()),
            negatives: keys(self.state.negatives()),
            terminal,
        })
    }

    pub fn transcript(&self) -> anyhow::Result<Transcript> {
        Ok(Transcript {
            config: self.config.clone(),
            turns: self.state.turns(&self.cfg),
            terminal: maximal_terminal(&self.state, &self.cfg),
        })
    }

    /// Validates and applies a feedback set, then lets the reasoner move.
    pub fn feedback(&mut self, turn: usize, items: &[FeedbackItem]) -> anyhow::Result<Result<(), Rejection>> {
        if is_maximal(&self.state, &self.cfg) {
            return Ok(Err(Rejection::Ended));
        }
        if turn != self.turn() || self.state.expects_presentation() {
            return Ok(Err(Rejection::StaleTurn { expected: self.turn() }));
        }
        let mut f = BTreeSet::new();
        for it in items {
            let Some(p) = self.cfg.pool.property_index(&it.property_key) else {
                return Ok(Err(Rejection::UnknownProperty(it.property_key.clone())));
            };
            f.insert(Feedback::new(p, it.polarity));
        }
        let mv = Move::Feedback(f);
        let turn_record = Turn::from_move(&mv, &self.cfg);
        let violations = self.state.apply(&self.cfg, mv)?;
        if !violations.is_empty() {
            return Ok(Err(Rejection::Violations(violations)));
        }
        self.updated_at = Utc::now();
        append(&self.path, &TurnLine { at: self.updated_at, turn: turn_record })?;
        self.advance()?;
        Ok(Ok(()))
    }
}
