//! Configuration, reproduction commands and file export for the
//! boundary-regulation pipeline.

pub mod commands;
pub mod config;
pub mod export;
pub mod verify;
