//! Forecasts per-player Fantasy Premier League gameweek points from three
//! seasons of history with a seasonal-ARIMA / LSTM hybrid, then selects the
//! points-maximising 15-player squad under the budget and positional rules
//! with an exact 0/1 optimiser.
//!
//! The pipeline runs in three phases, each with a file boundary so it can be
//! driven incrementally from the CLI:
//!
//! 1. [`ingest`] — load the master roster and per-season points files, filter
//!    players without a full three-season window, and build the per-player
//!    114-gameweek matrix.
//! 2. [`arima`] / [`lstm`] / [`ensemble`] — fit both models per player,
//!    validate on the held-out third season to pick blend weights, and emit
//!    38-gameweek hybrid forecasts.
//! 3. [`squad`] — solve the budget/position-constrained selection problem
//!    exactly and derive the per-player value metrics.

pub mod arima;
pub mod ensemble;
pub mod ingest;
pub mod lstm;
pub mod squad;
pub mod stats;
pub mod synthetic;

mod optim;

pub use ensemble::{EnsembleWeights, ForecastBundle};
pub use ingest::{PlayerRecord, PointsMatrix, Position, Roster};
pub use squad::{Candidate, SquadConstraints, SquadSolution};
