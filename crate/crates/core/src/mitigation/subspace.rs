//! Subspace expansion: `rho_em = Gamma rho Gamma^dagger / Tr(Gamma^dagger Gamma rho)`
//! with `Gamma = sum_j w_j G_j`.

use num_complex::Complex64;

use crate::error::{QemError, Result};
use crate::linalg::{generalized_eigensolve, trace_product, ComplexMatrix, DensityMatrix, PauliString};
use crate::mitigation::ensemble::{ResponseEnsemble, Variant};
use crate::mitigation::MethodTag;

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionBasis {
    operators: Vec<ComplexMatrix>,
    weights: Vec<f64>,
}

impl ExpansionBasis {
    /// Requires at least one operator and `sum w = 1`.
    pub fn new(operators: Vec<ComplexMatrix>, weights: Vec<f64>) -> Result<Self> {
        if operators.is_empty() {
            return Err(QemError::InvalidParameter("expansion basis is empty".into()));
        }
        if operators.len() != weights.len() {
            return Err(QemError::LengthMismatch {
                expected: operators.len(),
                got: weights.len(),
            });
        }
        let dim = operators[0].dim();
        if let Some(op) = operators.iter().find(|o| o.dim() != dim) {
            return Err(QemError::DimensionMismatch {
                left: op.dim(),
                right: dim,
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(QemError::InvalidParameter(format!(
                "expansion weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { operators, weights })
    }

    pub fn from_paulis(paulis: &[PauliString], weights: Vec<f64>) -> Result<Self> {
        Self::new(paulis.iter().map(PauliString::to_matrix).collect(), weights)
    }

    /// Equal weights over `paulis`.
    pub fn uniform(paulis: &[PauliString]) -> Result<Self> {
        let w = 1.0 / paulis.len().max(1) as f64;
        Self::from_paulis(paulis, vec![w; paulis.len()])
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Gamma_w = sum_j w_j G_j`
    pub fn gamma(&self) -> ComplexMatrix {
        let mut g = ComplexMatrix::zeros(self.operators[0].dim());
        for (op, w) in self.operators.iter().zip(&self.weights) {
            g.add_scaled_real(op, *w);
        }
        g
    }
}

/// `(Gamma rho Gamma^dagger / Tr(Gamma^dagger Gamma rho), Tr(Gamma^dagger Gamma rho))`
pub fn subspace_expanded_state(
    rho: &DensityMatrix,
    basis: &ExpansionBasis,
) -> Result<(DensityMatrix, f64)> {
    let gamma = basis.gamma();
    if gamma.dim() != rho.dim() {
        return Err(QemError::DimensionMismatch {
            left: gamma.dim(),
            right: rho.dim(),
        });
    }
    let sandwiched = rho.sandwich(&gamma, &gamma)?;
    let q = sandwiched.trace().re;
    if q <= NORM_TOL {
        return Err(QemError::DegenerateOverlap);
    }
    Ok((DensityMatrix::new(sandwiched.scale_real(1.0 / q))?, q))
}

/// Pairwise expansion `sum_{j,k} w_j w_k G_j rho G_k^dagger`, drawn with
/// probability `|w_j w_k| / (sum |w|)^2` and the sign of `w_j w_k`.
pub fn subspace_ensemble(rho: &DensityMatrix, basis: &ExpansionBasis) -> Result<ResponseEnsemble> {
    let (_, q) = subspace_expanded_state(rho, basis)?;
    let w = &basis.weights;
    let norm: f64 = w.iter().map(|x| x.abs()).sum::<f64>().powi(2);
    let ops = &basis.operators;
    let mut variants = Vec::new();
    for j in 0..ops.len() {
        for k in j..ops.len() {
            let prod = w[j] * w[k];
            if prod == 0.0 {
                continue;
            }
            let a = rho.sandwich(&ops[j], &ops[k])?;
            let (state, mult) = if j == k {
                (a, 1.0)
            } else {
                ((&a + &a.dagger()).scale_real(0.5), 2.0)
            };
            variants.push(Variant {
                weight: mult * prod.abs() / norm,
                sign: if prod < 0.0 { -1 } else { 1 },
                state,
                label: format!("G{j}|G{k}"),
            });
        }
    }
    let total: f64 = variants.iter().map(|v| v.weight).sum();
    for v in &mut variants {
        v.weight /= total;
    }
    ResponseEnsemble::explicit(MethodTag::Subspace, variants, q / norm)
}

/// `Tr(Gamma^dagger target Gamma rho) / Tr(Gamma^dagger Gamma rho)`
pub fn subspace_energy(rho: &DensityMatrix, basis: &ExpansionBasis, target: &ComplexMatrix) -> Result<f64> {
    let (em, _) = subspace_expanded_state(rho, basis)?;
    em.expectation(target)
}

/// Weights minimising `target` within the span of `operators`, normalised
/// affinely so they sum to one.
pub fn subspace_optimize_weights(
    rho: &DensityMatrix,
    operators: &[ComplexMatrix],
    target: &ComplexMatrix,
    reg_tol: f64,
) -> Result<ExpansionBasis> {
    if operators.is_empty() {
        return Err(QemError::InvalidParameter("expansion basis is empty".into()));
    }
    let m = operators.len();
    let daggers: Vec<ComplexMatrix> = operators.iter().map(ComplexMatrix::dagger).collect();
    let mut h = ComplexMatrix::zeros(m);
    let mut s = ComplexMatrix::zeros(m);
    for j in 0..m {
        let dj_o = &daggers[j] * target;
        for k in 0..m {
            let gk_rho = &operators[k] * rho.matrix();
            h[(j, k)] = trace_product(&dj_o, &gk_rho)?;
            s[(j, k)] = trace_product(&daggers[j], &gk_rho)?;
        }
    }
    // symmetrise away round-off
    let h = (&h + &h.dagger()).scale_real(0.5);
    let s = (&s + &s.dagger()).scale_real(0.5);
    let sol = generalized_eigensolve(&h, &s, reg_tol)?;
    let v = &sol.vectors[0];
    let total: Complex64 = v.iter().sum();
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if total.norm() <= 1e-10 * scale {
        return Err(QemError::InvalidParameter(
            "optimal expansion has zero weight sum; affine normalisation impossible".into(),
        ));
    }
    let w: Vec<Complex64> = v.iter().map(|z| z / total).collect();
    let max_w = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if w.iter().any(|z| z.im.abs() > 1e-8 * max_w.max(1.0)) {
        return Err(QemError::InvalidParameter(
            "optimal expansion weights are not real".into(),
        ));
    }
    ExpansionBasis::new(operators.to_vec(), w.iter().map(|z| z.re).collect())
}
