//! Closed-form analysis, Monte Carlo verification and max-min energy
//! optimization for RIS-assisted SWIPT massive MIMO downlinks.
//!
//! The crate is organised bottom-up: [`scenario`] describes a deployment and
//! draws user positions, [`channel`] samples fading, [`estimation`] runs the
//! uplink MMSE estimator, [`precoding`] builds PZF/MRT/PMRT beams,
//! [`analysis`] holds the closed forms, [`montecarlo`] the empirical oracles
//! and [`optimizer`] the power/phase allocation algorithms.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod estimation;
pub mod montecarlo;
pub mod optimizer;
pub mod precoding;
pub mod scenario;

mod linalg;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
