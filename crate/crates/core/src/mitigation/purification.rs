//! Multi-copy purification (virtual distillation).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QemError, Result};
use crate::linalg::{
    matrix_power, tensor, tensor_power, trace_product, ComplexMatrix, DensityMatrix,
    DEFAULT_DIM_CAP,
};
use crate::mitigation::ensemble::{ResponseEnsemble, Variant};
use crate::mitigation::MethodTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PurificationConfig {
    pub n_copies: u32,
}

impl PurificationConfig {
    pub fn new(n_copies: u32) -> Result<Self> {
        if n_copies == 0 {
            return Err(QemError::InvalidParameter("n_copies must be >= 1".into()));
        }
        Ok(Self { n_copies })
    }

    /// Fails when `n` copies plus one ancilla exceed `cap` (explicit simulation only).
    pub fn check_cap(&self, dim: usize, cap: usize) -> Result<()> {
        let total = (dim as u128).pow(self.n_copies) * 2;
        if total > cap as u128 {
            return Err(QemError::DimensionCap {
                dim: total.min(usize::MAX as u128) as usize,
                cap,
            });
        }
        Ok(())
    }
}

/// `(rho^n / Tr(rho^n), Tr(rho^n))`
pub fn purified_state(rho: &DensityMatrix, cfg: PurificationConfig) -> Result<(DensityMatrix, f64)> {
    let cfg = PurificationConfig::new(cfg.n_copies)?;
    let pow = matrix_power(rho, cfg.n_copies)?;
    let q = pow.trace().re;
    if q <= 0.0 {
        return Err(QemError::DegenerateOverlap);
    }
    Ok((DensityMatrix::new(pow.scale_real(1.0 / q))?, q))
}

/// Single response circuit with effective state `rho^n`.
pub fn purification_ensemble(rho: &DensityMatrix, cfg: PurificationConfig) -> Result<ResponseEnsemble> {
    let cfg = PurificationConfig::new(cfg.n_copies)?;
    let pow = matrix_power(rho, cfg.n_copies)?;
    let q = pow.trace().re;
    ResponseEnsemble::explicit(
        MethodTag::Purification,
        vec![Variant {
            weight: 1.0,
            sign: 1,
            state: pow,
            label: format!("copies={}", cfg.n_copies),
        }],
        q,
    )
}

/// Cyclic shift on `n` copies of a `dim`-dimensional system:
/// `D |i_1 i_2 ... i_n> = |i_n i_1 ... i_{n-1}>`.
pub fn derangement_operator(dim: usize, n: u32, cap: usize) -> Result<ComplexMatrix> {
    let total = (dim as u128).pow(n);
    if total > cap as u128 {
        return Err(QemError::DimensionCap {
            dim: total.min(usize::MAX as u128) as usize,
            cap,
        });
    }
    let total = total as usize;
    let n = n as usize;
    let mut d = ComplexMatrix::zeros(total);
    for idx in 0..total {
        // digits, copy 1 most significant
        let mut digits = vec![0usize; n];
        let mut rest = idx;
        for m in (0..n).rev() {
            digits[m] = rest % dim;
            rest /= dim;
        }
        digits.rotate_right(1);
        let out = digits.iter().fold(0usize, |acc, &x| acc * dim + x);
        d[(out, idx)] = Complex64::new(1.0, 0.0);
    }
    Ok(d)
}

/// `Re Tr(O_1 D rho^{(x)n})` built explicitly on the `n`-copy space.
pub fn derangement_expectation(rho: &DensityMatrix, observable: &ComplexMatrix, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(QemError::InvalidParameter("n must be >= 1".into()));
    }
    let dim = rho.dim();
    let d = derangement_operator(dim, n, DEFAULT_DIM_CAP)?;
    let rest = if n > 1 {
        tensor_power(&ComplexMatrix::identity(dim), n as usize - 1, DEFAULT_DIM_CAP)?
    } else {
        ComplexMatrix::identity(1)
    };
    let o1 = tensor(observable, &rest)?;
    let state = tensor_power(rho, n as usize, DEFAULT_DIM_CAP)?;
    Ok(trace_product(&(&o1 * &d), &state)?.re)
}
