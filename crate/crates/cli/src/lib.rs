//! Experiment orchestration around `repdec-core`: configuration, the
//! deterministic trajectory worker pool, result files, space-time rendering,
//! and the verification campaigns.

pub mod config;
pub mod harness;
pub mod records;
pub mod render;
pub mod verify;
