//! Hypothesis graphs, finite model checking and user-feedback dialogue
//! protocols for abductive reasoning.

pub mod config;
pub mod dialogue;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod hypothesis;
pub mod logic;
pub mod semantics;
pub mod verify;

pub use error::{Error, Result};
