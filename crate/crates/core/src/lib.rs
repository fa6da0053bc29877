//! First passage under restart (FPUR) in discrete time.
//!
//! An underlying process with hitting time `U` is reset to its initial state
//! at restart epochs drawn from `R`. The composite hitting time obeys
//!
//! ```text
//! T = U         if R > U
//! T = R + T*    if R <= U      (restart wins ties)
//! ```
//!
//! The crate computes the law of `T` through truncated generating-function
//! arithmetic ([`series`], [`fpur`]), provides the closed forms available for
//! geometric and sharp restart on the cycle trap and the biased walk
//! ([`models`], [`fpur`]), and estimates the same quantities by trajectory
//! simulation ([`montecarlo`]).

pub mod error;
pub mod ext;
pub mod fpur;
pub mod models;
pub mod montecarlo;
pub mod par;
pub mod series;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use fpur::FpurReport;
pub use models::{ProcessModel, RestartSpec, State};
pub use montecarlo::{SimConfig, SimEstimate};
pub use par::Execution;
pub use series::TruncatedPmf;
