pub mod commands;
pub mod config;
pub mod plot;
pub mod regime;
pub mod sweep;
