//! Transaction fee mechanism analysis.
//!
//! [`dist`] supplies regular value priors and their virtual-value calculus,
//! [`mech`] the mechanism families and their argmax allocation engine,
//! [`identity`] payments, smoothed utilities and the burn identity, and
//! [`verify`] the incentive checks and deviation oracles.

pub mod dist;
pub mod error;
pub mod identity;
pub mod mech;
pub mod quad;
pub mod rng;
pub mod verify;

pub use dist::{ConditionalNegVV, Density, Distribution, Segment, Smoothness};
pub use error::{Error, Result};
pub use mech::{BidProfile, Capacity, Family, MechanismSpec, Objective, Outcome};
