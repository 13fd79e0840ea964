//! Dense complex linear algebra and Pauli-operator algebra.

mod density;
mod eigen;
mod matrix;
mod pauli;
pub mod random;

pub use density::{matrix_power, DensityMatrix, PSD_TOL, STATE_TOL};
pub use eigen::{
    eigenvalues_hermitian, generalized_eigensolve, hermitian_eigen, GeneralizedEigen,
    HermitianEigen, JACOBI_TOL,
};
pub use matrix::{
    expectation, tensor, tensor_power, trace_product, ComplexMatrix, DEFAULT_DIM_CAP,
};
pub use pauli::{PauliString, Phase};
