//! Circuits, fault locations and the Poisson fault-path picture of noise.

mod circuit;
mod gates;
mod poisson;
mod synthetic;

pub use circuit::{
    evolve_exact, evolve_with_fault_path, sample_fault_path, uniform_noise_circuit,
    ChannelTermDoc, Circuit, CircuitDoc, FaultChannel, FaultDoc, FaultLocation, FaultPath, Layer,
    LayerDoc, NoiseModel, CIRCUIT_SCHEMA_VERSION,
};
pub use gates::{embed, pauli_rotation, GateParams, GateSpec, GATE_KINDS};
pub use poisson::{
    poisson_fault_prob, poisson_tail, required_ell_max, truncated_poisson_weights,
    POISSON_TAIL_TOL,
};
pub use synthetic::{build_synthetic_state, ComponentStyle, SyntheticModel, SyntheticNoisyState};
