//! Batch front end: parses instance files, runs the certified pipeline or the
//! exact oracles, and renders versioned JSON or CSV records.

pub mod commands;
pub mod config;
pub mod input;
pub mod render;
