//! File formats and batch drivers around the simulator.

pub mod config;
pub mod logs;
pub mod numfmt;
pub mod record;
pub mod session;
pub mod sweep;

pub use config::{Config, SweepAxis, SweepSpec};
pub use sweep::{run_sweep, SweepRow};
