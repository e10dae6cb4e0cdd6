//! One module per subcommand.

pub mod align;
pub mod au;
pub mod cluster;
pub mod eval;
pub mod plot;
pub mod respond;
pub mod synth;

use std::path::PathBuf;

use crate::output::ErrorLog;
use crate::run_config::RunConfig;

pub struct Ctx {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub jobs: usize,
    pub seed: u64,
    pub log: ErrorLog,
}

/// Shortest text that parses back to the same f64.
pub fn f(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt_usize(v: Option<usize>) -> String {
    v.map_or_else(String::new, |n| n.to_string())
}
