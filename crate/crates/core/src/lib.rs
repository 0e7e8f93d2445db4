//! Multicolor box-ball system laboratory: exact dynamics, carrier processes,
//! invariant Young diagrams and seeded Monte Carlo experiments.

pub mod carrier;
pub mod config;
pub mod decoupled;
pub mod dist;
pub mod error;
pub mod exclusion;
pub mod excursions;
pub mod experiments;
pub mod invariants;
pub mod par;
pub mod partition;
pub mod random;
pub mod stats;

pub use carrier::{Capacity, Carrier, CarrierTrace};
pub use config::BallConfig;
pub use dist::ColorDist;
pub use error::{BbsError, Result};
pub use partition::Partition;
pub use random::Seed;
