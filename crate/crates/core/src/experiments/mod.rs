//! Monte Carlo experiments on the random models.

pub mod phase;
pub mod profiles;
pub mod scaling;

pub use phase::{phase_classify, PhaseLabel};
pub use profiles::{clt_supercritical, critical_profile, reflected_bm_max_samples, CltReport, CriticalReport, ReferenceSpec};
pub use scaling::{mc_independence, mc_permutation, permutation_column_limit, permutation_column_limit_from_sums, permutation_row_limit, verify_instance, Model, RunSpec, ScalingReport, ScalingRun, SCHEMA};
