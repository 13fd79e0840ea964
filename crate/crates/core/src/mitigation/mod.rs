//! Mitigation methods, each expressed as a response ensemble
//! `q_em * rho_em = sum_i p_i * sign_i * sigma_i`.

use std::fmt;

use serde::{Deserialize, Serialize};

mod combined;
mod ensemble;
mod pec;
mod purification;
mod subspace;
mod symmetry;
mod zne;

pub use combined::{
    combined_chain_trace, combined_expectation, combined_expectation_sampled, CombinedEstimate,
    EmSource,
};
pub use ensemble::{DrawnVariant, LocationQuasi, ProductEnsemble, ResponseEnsemble, Variant};
pub use pec::{
    default_basis, location_quasi, pauli_channel_eigenvalue, pec_build_ensemble,
    pec_invert_channel, pec_quasi_coefficients, pec_synthetic_ensemble,
};
pub use purification::{
    derangement_expectation, derangement_operator, purification_ensemble, purified_state,
    PurificationConfig,
};
pub use subspace::{
    subspace_energy, subspace_ensemble, subspace_expanded_state, subspace_optimize_weights,
    ExpansionBasis,
};
pub use symmetry::{sv_ensemble, sv_mitigated_state, sv_projector, SymmetryGroup};
pub use zne::{
    analytic_normalizers, build_extrapolation_plan, equal_gap_rates, richardson_coeffs,
    suppression_coeffs, zne_ensemble, zne_mitigated_state, zne_mitigated_value,
    ExtrapolationPlan, ZneStrategy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    Unmitigated,
    Pec,
    Zne,
    Sv,
    DirectSv,
    Subspace,
    Purification,
    Combined,
}

impl MethodTag {
    pub const ALL: [MethodTag; 8] = [
        MethodTag::Unmitigated,
        MethodTag::Pec,
        MethodTag::Zne,
        MethodTag::Sv,
        MethodTag::DirectSv,
        MethodTag::Subspace,
        MethodTag::Purification,
        MethodTag::Combined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodTag::Unmitigated => "unmitigated",
            MethodTag::Pec => "pec",
            MethodTag::Zne => "zne",
            MethodTag::Sv => "sv",
            MethodTag::DirectSv => "direct_sv",
            MethodTag::Subspace => "subspace",
            MethodTag::Purification => "purification",
            MethodTag::Combined => "combined",
        }
    }
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
