//! Detection and modelling of memes whose popularity shows two consecutive
//! "sleeping beauties": a first burst of attention after a dormant period,
//! a second dormancy, and a later, higher burst.
//!
//! The crate is organised bottom-up:
//!
//! - [`types`]: time series, peaks, two-beauty profiles and Bass model values.
//! - [`ingest`] and [`report`]: corpus loading and stable report serialization.
//! - [`peaks`]: spike-function peak detection.
//! - [`beauty`]: awakening / falling-asleep geometry, beauty coefficients and
//!   the two-beauty identification pipeline.
//! - [`bass`]: the two-generation Bass model, its simulation and estimation.
//! - [`stats`]: corpus-level estimators (wake gaps, mass power law, velocities,
//!   coefficient distributions).
//! - [`eval`]: Pearson fit quality, second-peak timing precision and averaged
//!   curves.
//! - [`synth`]: seeded synthetic corpora with ground truth.
//! - [`pipeline`]: per-meme glue used by the CLI and the browser demo.

pub mod bass;
pub mod beauty;
pub mod eval;
pub mod ingest;
pub mod peaks;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod synth;
pub mod types;

pub use bass::{FitError, PMode};
pub use beauty::{identify_two_beauties, Rejection, RejectionReason};
pub use peaks::PeakParams;
pub use types::{
    BassGeneration, BeautyMeasures, Granularity, ModelError, Peak, PeakSet, Stamps, TimeSeries,
    TwoBeautyProfile, TwoStageBassModel,
};

/// Beauty-coefficient threshold multiplier used when none is given.
pub const DEFAULT_ALPHA: f64 = 1.0 / 3.0;
