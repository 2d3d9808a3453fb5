//! Configuration, orchestration and CSV emission for the VLC AGC simulator.

pub mod commands;
pub mod config;
pub mod table;
