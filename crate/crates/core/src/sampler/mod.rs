//! Seeded shot sampling and estimators over recorded shots.

mod estimate;
mod exec;
mod hadamard;
mod rng;
mod shots;

pub use estimate::{
    direct_sv_estimate, linear_estimate, ratio_estimate, run_ensemble, run_hadamard,
    run_unmitigated, sv_postprocess_estimate, DirectSvEstimate, Estimate, RatioEstimate,
};
pub use exec::{run_shots, Execution};
pub use hadamard::{ancilla_joint_distribution, hadamard_test_moments, sample_joint, JointMoments};
pub use rng::{block_stream, derive_seed, splitmix64, BLOCK_SHOTS};
pub use shots::{sample_pauli_observable, sample_pm1, ShotBatch, ShotRecord, SHOT_CSV_HEADER};
