//! Revenue-per-visit A/B testing under a zero-inflated log-normal model.
//!
//! The crate decides whether a treatment changed revenue per visit (RPV)
//! relative to control:
//!
//! * [`rank`]: the two-part test (proportion z + Mann-Whitney z) and the
//!   conversion/AOV decision table.
//! * [`delta`]: a Delta-method confidence interval for the RPV difference.
//! * [`lrt`]: a likelihood-ratio test of equal RPV, with a constrained
//!   maximum-likelihood solver.
//! * [`power`]: bootstrap power estimation and sample-size search.
//! * [`diagnostics`]: Q-Q data for checking log-normality of order values.
//! * [`pipeline`] and [`io`]: CSV ingestion, staged analysis and reports.

pub mod config;
pub mod delta;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod lrt;
pub mod model;
pub mod pipeline;
pub mod power;
pub mod rank;
pub mod report;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
pub use model::{fit_mle, rpv, simulate, summarize, ExperimentData, GroupSummary, ZiLogNormalParams};
