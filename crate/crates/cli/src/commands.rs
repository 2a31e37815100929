//! The batch subcommands: simulate, verify, enumerate and replay.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;
use serde_json::Value;
use ufbd_core::config::{ConfigFile, LoadedConfig};
use ufbd_core::dialogue::{
    check_convergence, is_maximal, replay as replay_turns, run_dialogue, Convergence, DialogueState, FeedbackStrategy,
    PresentationStrategy, ProtocolConfig, ProtocolKind, RunStatus, Simulator, TerminalInfo, Transcript,
};
use ufbd_core::graph::{canonical_key, enumerate_graphs, EnumerateOptions, GraphFile};
use ufbd_core::hypothesis::Mode;
use ufbd_core::logic::Alphabet;
use ufbd_core::verify::{
    verify_convergence, verify_counterexamples, verify_halting, BoundRule, ConvergenceSuite, TargetSelection,
    VerificationReport,
};

pub const DEFAULT_FUEL: usize = 1000;

/// The reason a maximal dialogue ended, if it has.
pub fn maximal_terminal(state: &DialogueState, cfg: &ProtocolConfig) -> Option<TerminalInfo> {
    is_maximal(state, cfg).then(|| TerminalInfo {
        status: "maximal".into(),
        reason: state.terminal().unwrap_or("no legal move").into(),
    })
}

/// Convergence of a finished dialogue, when a target is set.
pub fn verdict(state: &DialogueState, cfg: &ProtocolConfig) -> anyhow::Result<Option<Convergence>> {
    if cfg.target.is_none() || !is_maximal(state, cfg) {
        return Ok(None);
    }
    Ok(Some(check_convergence(state, cfg)?))
}

/// A copy of the file config, inlined and pinned to the protocol actually
/// run, with the target given as item keys.
pub fn pinned_config(file: &ConfigFile, base: &Path, cfg: &ProtocolConfig) -> anyhow::Result<ConfigFile> {
    let mut out = file.inline(base)?;
    out.mode = Some(cfg.pool.mode());
    out.protocol = Some(cfg.kind);
    out.bound = cfg.size_bound;
    out.target = cfg
        .target
        .as_ref()
        .map(|t| t.iter().map(|&i| Value::String(cfg.pool.items()[i].key.clone())).collect());
    Ok(out)
}

/// Reads a target file: a list of target entries or a single graph or key.
fn read_target(path: &Path, loaded: &LoadedConfig) -> anyhow::Result<BTreeSet<usize>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text)?;
    let entries = match v {
        Value::Array(a) if loaded.pool.mode() == Mode::G => a,
        // In mode H a bare list of strings is one hypothesis.
        Value::Array(a) if a.iter().all(|e| e.is_array()) => a,
        v => vec![v],
    };
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(loaded.resolve_target(&entries, &base)?)
}

#[derive(Clone, Debug)]
pub struct SimulateOptions {
    pub config: PathBuf,
    pub protocol: Option<ProtocolKind>,
    pub mode: Option<Mode>,
    pub bound: Option<usize>,
    pub target: Option<PathBuf>,
    pub fuel: usize,
    pub seed: u64,
    pub presenter: PresentationStrategy,
    pub feedback: FeedbackStrategy,
}

pub struct Simulation {
    pub transcript: Transcript,
    pub convergence: Option<Convergence>,
}

pub fn simulate(opts: &SimulateOptions) -> anyhow::Result<Simulation> {
    let (file, base) = ConfigFile::load(&opts.config)?;
    let loaded = file.resolve(&base, opts.mode)?;
    let target = opts.target.as_deref().map(|p| read_target(p, &loaded)).transpose()?;
    let cfg = loaded.protocol_config(opts.protocol, opts.bound, target)?;
    let mut sim = Simulator::new(opts.presenter, opts.feedback, opts.seed);
    let (state, status) = run_dialogue(&cfg, &mut sim, opts.fuel)?;
    let terminal = match status {
        RunStatus::Maximal => maximal_terminal(&state, &cfg)
            .unwrap_or_else(|| TerminalInfo { status: "maximal".into(), reason: "no legal move".into() }),
        RunStatus::FuelExhausted => TerminalInfo { status: "fuel-exhausted".into(), reason: format!("fuel {}", opts.fuel) },
    };
    let convergence = verdict(&state, &cfg)?;
    let transcript = Transcript {
        config: serde_json::to_value(pinned_config(&file, &base, &cfg)?)?,
        turns: state.turns(&cfg),
        terminal: Some(terminal),
    };
    Ok(Simulation { transcript, convergence })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Halting,
    Convergence,
    Counterexamples,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub config: Option<PathBuf>,
    pub protocol: Option<ProtocolKind>,
    pub mode: Option<Mode>,
    pub bound: Option<usize>,
    pub fuel: Option<usize>,
    /// Used when the config names no target.
    pub targets: TargetSelection,
    pub bound_above_target: bool,
    pub length: usize,
}

pub fn verify(opts: &VerifyOptions) -> anyhow::Result<VerificationReport> {
    if opts.suite == Suite::Counterexamples {
        return Ok(verify_counterexamples(opts.length)?);
    }
    let Some(path) = &opts.config else { bail!("this suite needs --config") };
    let loaded = LoadedConfig::load(path, opts.mode)?;
    let mut cfg = loaded.protocol_config(opts.protocol, opts.bound, None)?;
    let file_target = cfg.target.take();
    match opts.suite {
        Suite::Halting => Ok(verify_halting(&cfg, opts.fuel)?),
        _ => {
            let targets = match file_target {
                Some(t) => TargetSelection::Given(vec![t]),
                None => opts.targets.clone(),
            };
            let suite = ConvergenceSuite {
                singleton_last_set: targets == TargetSelection::Singletons,
                targets,
                bound: if opts.bound_above_target { BoundRule::AboveTarget } else { BoundRule::AsConfigured },
            };
            Ok(verify_convergence(&cfg, &suite)?)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnumeratedGraph {
    pub key: String,
    pub order: usize,
    pub graph: GraphFile,
}

pub fn enumerate(alphabet: &Path, max_order: usize, include_equalities: bool) -> anyhow::Result<Vec<EnumeratedGraph>> {
    let text = std::fs::read_to_string(alphabet).with_context(|| format!("reading {}", alphabet.display()))?;
    let a = Alphabet::from_json(&text)?;
    let opts = EnumerateOptions { include_equalities, ..Default::default() };
    Ok(enumerate_graphs(&a, max_order, opts)?
        .into_iter()
        .map(|g| EnumeratedGraph { key: canonical_key(&g), order: g.order(), graph: g.to_file() })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReplayReport {
    pub turns: usize,
    pub protocol: ProtocolKind,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<Convergence>,
    /// Whether the recorded terminal notice agrees with the replayed state.
    pub terminal_matches: bool,
}

/// Rebuilds the protocol from a transcript's own config.
pub fn transcript_config(t: &Transcript, base: &Path) -> anyhow::Result<ProtocolConfig> {
    let file: ConfigFile = serde_json::from_value(t.config.clone()).context("transcript config")?;
    Ok(file.resolve(base, None)?.protocol_config(None, None, None)?)
}

pub fn replay(path: &Path) -> anyhow::Result<ReplayReport> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let t: Transcript = serde_json::from_str(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let cfg = transcript_config(&t, &base)?;
    let state = replay_turns(&cfg, &t.turns)?;
    let now = maximal_terminal(&state, &cfg);
    let terminal_matches = match (&t.terminal, &now) {
        (Some(rec), Some(now)) => rec == now,
        (Some(rec), None) => rec.status != "maximal",
        (None, _) => true,
    };
    Ok(ReplayReport {
        turns: t.turns.len(),
        protocol: cfg.kind,
        status: now.as_ref().map_or("awaiting", |_| "maximal").into(),
        reason: now.map(|n| n.reason),
        convergence: verdict(&state, &cfg)?,
        terminal_matches,
    })
}
