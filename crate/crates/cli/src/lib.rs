//! Command-line driver and HTTP session service for the dialogue engine.

pub mod commands;
pub mod http;
pub mod session;
