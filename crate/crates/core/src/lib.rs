//! Day-ahead scheduling of a transactive energy community.
//!
//! Buildings with PV, stationary batteries and EV chargers trade surplus
//! energy among themselves at prices derived from the community's
//! surplus ratio. The crate prices the community, builds the scheduling
//! problem, solves it with its own simplex and branch-and-bound, and
//! reports the cost breakdown of the baseline, individual and community
//! runs.

pub mod domain;
pub mod error;
pub mod ev_contract;
pub mod model;
pub mod reporting;
pub mod scenario_io;
pub mod solver;
pub mod tariff;

pub use error::{Error, Result};
