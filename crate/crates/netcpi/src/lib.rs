//! Production-network accounting for consumer prices in small open economies.
//!
//! The crate models one country's production network as an input-output table
//! (domestic intermediate shares, factor shares, imported-input shares,
//! consumption and export shares) and derives from it the statistics that
//! govern how sectoral productivity, factor prices, and import prices pass
//! through to the consumer price index:
//!
//! * [`iotable`] — the table itself, its accounting identities, Leontief
//!   inverses, and expenditure-based Domar weights;
//! * [`netstats`] — network-adjusted consumption, factor, and import shares
//!   (direct plus indirect exposure through intermediate linkages);
//! * [`cpi`] — CPI response evaluation under closed-economy, open-economy
//!   no-network, and open-economy network variants, shock paths built from
//!   level data, model-implied inflation series, and a two-period
//!   decomposition of the price level into named channels;
//! * [`sharesys`] — CES substitution matrices and the linear system that
//!   solves for endogenous factor prices and share changes;
//! * [`mxnsim`] — a calibrated three-sector (importable, exportable,
//!   non-tradable) dynamic model solved by perfect-foresight stacking;
//! * [`panelfe`] — two-way fixed-effects regressions for cross-country
//!   comparisons of the adjustments;
//! * [`ingest`] — CSV parsing for tables and country macro series, and the
//!   small-open-economy classifier;
//! * [`synth`] — seeded generators of random valid tables for testing and
//!   batch experiments.

pub mod cpi;
pub mod error;
pub mod ingest;
pub mod iotable;
pub mod mxnsim;
pub mod netstats;
pub mod panelfe;
pub mod sharesys;
pub mod synth;

pub use error::{Error, Result};

/// The linear-algebra crate used throughout the public API, re-exported so
/// downstream crates construct matching vector and matrix types.
pub use nalgebra;

/// Tolerance for accounting identities in data files. Real tables carry
/// rounding noise, so this is looser than the algorithmic tolerance.
pub const TOL_IDENTITY: f64 = 1e-6;

/// Tolerance for identities among internally generated quantities.
pub const TOL_SOLVE: f64 = 1e-10;

/// Margin below one that the spectral radius must clear for the economy to
/// count as productive.
pub const EPS_MARGIN: f64 = 1e-9;
