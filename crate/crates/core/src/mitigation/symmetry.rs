//! Pauli symmetry verification.

use crate::error::{QemError, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, PauliString};
use crate::mitigation::ensemble::{ResponseEnsemble, Variant};
use crate::mitigation::MethodTag;

const PROJ_TOL: f64 = 1e-12;

/// Commuting Pauli group stabilizing the ideal state, with the fraction
/// `f_S` of faults each element detects.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryGroup {
    elements: Vec<PauliString>,
    fractions: Vec<f64>,
}

impl SymmetryGroup {
    /// Validates closure, identity membership and commutation.
    pub fn new(elements: Vec<PauliString>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| QemError::InvalidParameter("empty symmetry group".into()))?;
        let n = first.num_qubits();
        let id = PauliString::identity(n);
        if !elements.contains(&id) {
            return Err(QemError::NotClosed);
        }
        for (i, a) in elements.iter().enumerate() {
            if a.num_qubits() != n {
                return Err(QemError::DimensionMismatch {
                    left: a.dim(),
                    right: first.dim(),
                });
            }
            if !a.is_hermitian() {
                return Err(QemError::InvalidParameter(format!("{a} is not Hermitian")));
            }
            if elements[..i].contains(a) {
                return Err(QemError::InvalidParameter(format!("{a} listed twice")));
            }
            for b in &elements {
                if !a.commutes_with(b) {
                    return Err(QemError::NonCommuting(format!("{a} and {b}")));
                }
                if !elements.contains(&a.compose(b)?) {
                    return Err(QemError::NotClosed);
                }
            }
        }
        let fractions = vec![0.0; elements.len()];
        Ok(Self {
            elements,
            fractions,
        })
    }

    /// All `2^k` products of `generators`; element `mask` is the product of
    /// the generators whose bits are set.
    pub fn from_generators(generators: &[PauliString]) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| QemError::InvalidParameter("no generators".into()))?;
        let mut elements = Vec::with_capacity(1 << generators.len());
        for mask in 0..(1usize << generators.len()) {
            let mut p = PauliString::identity(first.num_qubits());
            for (j, g) in generators.iter().enumerate() {
                if (mask >> j) & 1 == 1 {
                    p = p.compose(g)?;
                }
            }
            elements.push(p);
        }
        Self::new(elements)
    }

    pub fn trivial(num_qubits: u32) -> Self {
        Self {
            elements: vec![PauliString::identity(num_qubits)],
            fractions: vec![0.0],
        }
    }

    /// Attaches per-element detectable fractions; the identity must get 0.
    pub fn with_fractions(mut self, fractions: Vec<f64>) -> Result<Self> {
        if fractions.len() != self.elements.len() {
            return Err(QemError::LengthMismatch {
                expected: self.elements.len(),
                got: fractions.len(),
            });
        }
        for (e, f) in self.elements.iter().zip(&fractions) {
            if !(0.0..=1.0).contains(f) {
                return Err(QemError::InvalidParameter(format!("f_S = {f} outside [0, 1]")));
            }
            if e.is_identity_up_to_phase() && *f != 0.0 {
                return Err(QemError::InvalidParameter("identity detects no faults".into()));
            }
        }
        self.fractions = fractions;
        Ok(self)
    }

    pub fn elements(&self) -> &[PauliString] {
        &self.elements
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn num_qubits(&self) -> u32 {
        self.elements[0].num_qubits()
    }

    /// `f_S` averaged over the group.
    pub fn mean_fraction(&self) -> f64 {
        self.fractions.iter().sum::<f64>() / self.len() as f64
    }

    /// Fails unless `S rho0 = rho0` for every element.
    pub fn check_stabilizes(&self, rho0: &ComplexMatrix) -> Result<()> {
        for s in &self.elements {
            let srho = &s.to_matrix() * rho0;
            let dev = srho.max_abs_diff(rho0);
            if dev > 1e-10 {
                return Err(QemError::InvalidParameter(format!(
                    "{s} does not stabilize the ideal state (deviation {dev:.2e})"
                )));
            }
        }
        Ok(())
    }

    /// Fails unless `observable` commutes with every element.
    pub fn check_commutes(&self, observable: &PauliString) -> Result<()> {
        for s in &self.elements {
            if !s.commutes_with(observable) {
                return Err(QemError::NonCommuting(format!("{observable} and {s}")));
            }
        }
        Ok(())
    }
}

/// `Pi = (1/|S|) sum_S S`
pub fn sv_projector(group: &SymmetryGroup) -> ComplexMatrix {
    let dim = group.elements[0].dim();
    let mut pi = ComplexMatrix::zeros(dim);
    for s in &group.elements {
        pi.add_scaled_real(&s.to_matrix(), 1.0 / group.len() as f64);
    }
    pi
}

/// `(Pi rho Pi / Tr(Pi rho), Tr(Pi rho))`
pub fn sv_mitigated_state(rho: &DensityMatrix, group: &SymmetryGroup) -> Result<(DensityMatrix, f64)> {
    let pi = sv_projector(group);
    if pi.dim() != rho.dim() {
        return Err(QemError::DimensionMismatch {
            left: pi.dim(),
            right: rho.dim(),
        });
    }
    let q = crate::linalg::trace_product(&pi, rho)?.re;
    if q <= PROJ_TOL {
        return Err(QemError::OrthogonalToSymmetry(q));
    }
    let projected = rho.sandwich(&pi, &pi)?.scale_real(1.0 / q);
    Ok((DensityMatrix::new(projected)?, q))
}

/// Pairwise expansion `(1/|S|^2) sum_{j,k} S_j rho S_k`, Hermitised per pair.
pub fn sv_ensemble(rho: &DensityMatrix, group: &SymmetryGroup) -> Result<ResponseEnsemble> {
    let (_, q) = sv_mitigated_state(rho, group)?;
    let g = group.len();
    let mats: Vec<ComplexMatrix> = group.elements.iter().map(PauliString::to_matrix).collect();
    let mut variants = Vec::with_capacity(g * (g + 1) / 2);
    for j in 0..g {
        for k in j..g {
            let a = rho.sandwich(&mats[j], &mats[k])?;
            let state = if j == k {
                a
            } else {
                (&a + &a.dagger()).scale_real(0.5)
            };
            let mult = if j == k { 1.0 } else { 2.0 };
            variants.push(Variant {
                weight: mult / (g * g) as f64,
                sign: 1,
                state,
                label: format!("{}|{}", group.elements[j], group.elements[k]),
            });
        }
    }
    ResponseEnsemble::explicit(MethodTag::Sv, variants, q)
}
