//! Linear quantum error mitigation laboratory.
//!
//! Every mitigation method here is treated as *extracting* an error-mitigated
//! state `rho_em` out of a noisy state `rho_lambda`:
//!
//! ```text
//!     rho_lambda = p_em * rho_em + (1 - p_em) * rho_err      (Tr(rho_0 rho_err) = 0)
//!     q_em * rho_em = sum_i p_rsp,i * sigma_rsp,i              (response ensemble)
//! ```
//!
//! From these two numbers follow the fidelity boost `B = 1/p_em`, the
//! sampling overhead `C ~ q_em^-2` and the extraction rate `r = q_em/p_em`.
//!
//! Modules:
//!
//! - [`linalg`]: dense complex matrices, Pauli strings, density matrices and
//!   a Jacobi Hermitian eigensolver.
//! - [`noise`]: circuits, Pauli/Kraus fault locations, Poisson fault paths and
//!   the synthetic orthogonal-error model.
//! - [`mitigation`]: probabilistic error cancellation, analytical
//!   extrapolation, symmetry verification, subspace expansion, multi-copy
//!   purification and their combination.
//! - [`sampler`]: shot-level Monte Carlo with reproducible seeded streams.
//! - [`metrics`]: measured and closed-form fidelity boost, overhead and
//!   extraction rate.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod metrics;
pub mod mitigation;
pub mod noise;
pub mod sampler;

pub use error::{QemError, Result};
pub use num_complex::Complex64;
