//! How much does a regular season reveal about team strength?
//!
//! This crate fits home-advantage paired-comparison models (Bradley-Terry on
//! win/loss, least squares on margin of victory) to random subsets of a
//! season, scores them on the held-out games, and summarizes the resulting
//! accuracy curves.
//!
//! * [`ingest`]: canonical game-log CSV and the [`Season`](ingest::Season) type
//! * [`models`]: model fitting, prediction and the accuracy metric
//! * [`harness`]: seeded train/test resampling and curve averaging
//! * [`analysis`]: odds ratios, per-game slopes, informativeness ratios, breakpoints
//! * [`synth`]: synthetic seasons with known ground truth
//! * [`report`]: curve files and fixed-precision formatting

pub mod analysis;
pub mod harness;
pub mod ingest;
pub mod models;
pub mod report;
pub mod synth;

pub use harness::{run_protocol, run_protocol_jobs, CurvePoint, ProtocolConfig};
pub use ingest::{parse_season, Game, League, Outcome, Season};
pub use models::{fit_bt, fit_mov, info_metric, BtFit, MovFit};
