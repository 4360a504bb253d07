//! Banded vector autoregressions.
//!
//! A VAR(d) process `y_t = A_1 y_{t-1} + ... + A_d y_{t-d} + e_t` whose
//! coefficient matrices vanish outside the band `|i - j| <= k0`. The crate
//! covers:
//!
//! - [`estimation`]: row-by-row least squares on the band,
//! - [`selection`]: marginal BIC choice of the bandwidth (and order), the
//!   whole-model BIC alternative, and comparison of series orderings,
//! - [`autocov`]: banded and thresholded autocovariance estimators tuned by
//!   a wild bootstrap,
//! - [`simulate`] and [`experiments`]: data generators and the Monte Carlo
//!   harness behind the `bench` tables,
//! - [`forecast`]: iterated forecasts, post-sample evaluation and seasonal
//!   adjustment.
//!
//! Row and series indices are 0-based throughout.

pub mod autocov;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod forecast;
pub mod io;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod selection;
pub mod simulate;

pub use error::{Error, Result};
pub use linalg::{BandedMatrix, DenseMatrix};
pub use model::{BandedVarModel, TimeSeries};

/// Version string recorded in run manifests and JSON outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Version of the JSON schemas written by [`io`].
pub const SCHEMA_VERSION: u32 = 1;
