//! Command-line front end for the `fpur-core` library: single analyses,
//! restart-parameter sweeps, simulations and figure presets, all as CSV.

pub mod app;
pub mod error;
pub mod figures;
pub mod parse;
pub mod sweep;

pub use app::{run, Cli};
pub use error::{CliError, CliResult};
