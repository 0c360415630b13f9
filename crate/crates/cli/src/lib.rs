//! Batch front end: run configs, parameter sweeps and EOM traces as CSV.

pub mod config;
pub mod csv;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use run::{Output, RunError};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const PARTIAL: i32 = 4;
}
