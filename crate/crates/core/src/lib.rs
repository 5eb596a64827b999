//! Bayesian Cramér-Rao bound (BCRB) analysis for pinching-antenna systems (PASS).
//!
//! A PASS receiver is a long dielectric waveguide with `M` repositionable
//! pinching antennas (PAs) feeding a single RF chain. Targets on the ground
//! plane transmit uplink pilots; the achievable localization accuracy is
//! bounded below by the BCRB, which combines the Fisher information of the
//! received signal with the Fisher information of a Gaussian-mixture prior
//! on each target position.
//!
//! The crate provides:
//! - the physical scenario and channel model ([`scenario`], [`channel`]),
//! - Gauss-Hermite quadrature over Gaussian-mixture priors ([`quadrature`]),
//! - Bayesian Fisher information and closed-form BCRB ([`bcrb`]),
//! - element-wise (coordinate-descent) PA placement search ([`optimizer`]),
//! - multi-target scheduling protocols with KKT power allocation
//!   ([`protocols`]): pinch switching (PS) re-optimizes the PA layout per
//!   time slot, pinch multiplexing (PM) shares one layout across slots,
//! - heuristic and fixed-array baselines ([`baselines`]).
//!
//! All quantities are SI internally (meters, watts, radians); dBm exists
//! only at user-facing boundaries.

// `!(x > 0.0)` guards reject NaN as well; `x <= 0.0` would not
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bcrb;
pub mod channel;
pub mod error;
pub mod optimizer;
pub mod protocols;
pub mod quadrature;
pub mod scenario;

pub use bcrb::{Bfim, FimEvaluator, ObsFim, PriorFim};
pub use error::{Error, Result};
pub use optimizer::{SearchConfig, SearchOutcome};
pub use protocols::{MultiTargetScenario, Protocol, ProtocolSolution};
pub use quadrature::GhRule;
pub use scenario::{
    dbm_to_watts, watts_to_dbm, GaussianComponent, Gmm1d, PinchLayout, Position, Scenario,
    ScenarioConfig, TargetPrior,
};
