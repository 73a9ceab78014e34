//! Command-line runner and live WebSocket bridge for the plugpull simulator.

pub mod batch;
pub mod command;
pub mod live;
pub mod telemetry;
