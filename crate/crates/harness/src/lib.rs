//! Seeded experiment sweeps, summaries and plots for the Hanabi agents.

pub mod plot;
pub mod seeds;
pub mod stats;
pub mod sweep;

pub use plot::{render_boxplot, Metric, PlotError};
pub use seeds::game_seed;
pub use stats::{sign_test, Summary64};
pub use sweep::{run_sweep, Policy, Row, SweepConfig, SweepError};
