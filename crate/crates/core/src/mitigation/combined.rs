//! Symmetry verification concatenated with `n`-copy purification:
//! `Tr(O (Pi rho_em)^n) / Tr((Pi rho_em)^n)`.

use std::borrow::Cow;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{QemError, Result};
use crate::linalg::{trace_product, ComplexMatrix, DensityMatrix, PauliString};
use crate::mitigation::ensemble::ResponseEnsemble;
use crate::mitigation::symmetry::{sv_projector, SymmetryGroup};
use crate::sampler::{
    ratio_estimate, run_shots, sample_joint, Execution, JointMoments, RatioEstimate, ShotBatch,
    ShotRecord,
};

/// Where the per-copy state comes from.
#[derive(Debug, Clone, Copy)]
pub enum EmSource<'a> {
    State(&'a DensityMatrix),
    Ensemble(&'a ResponseEnsemble),
}

impl EmSource<'_> {
    fn dim(&self) -> usize {
        match self {
            EmSource::State(s) => s.dim(),
            EmSource::Ensemble(e) => e.dim(),
        }
    }

    /// Unnormalised mixture; the scale cancels in the quotient.
    fn mixture(&self) -> Result<ComplexMatrix> {
        match self {
            EmSource::State(s) => Ok(s.matrix().clone()),
            EmSource::Ensemble(e) => e.materialize(),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(u64, i8, Cow<'_, ComplexMatrix>)> {
        match self {
            EmSource::State(s) => Ok((0, 1, Cow::Borrowed(s.matrix()))),
            EmSource::Ensemble(e) => {
                let v = e.draw(rng)?;
                Ok((v.id, v.sign, v.state))
            }
        }
    }
}

fn check(group: &SymmetryGroup, n: u32, observable: &PauliString, dim: usize) -> Result<()> {
    if n == 0 {
        return Err(QemError::InvalidParameter("n must be >= 1".into()));
    }
    if group.elements()[0].dim() != dim {
        return Err(QemError::DimensionMismatch {
            left: group.elements()[0].dim(),
            right: dim,
        });
    }
    group.check_commutes(observable)
}

/// Exact quotient from the materialised state.
pub fn combined_expectation(
    source: EmSource<'_>,
    group: &SymmetryGroup,
    n: u32,
    observable: &PauliString,
) -> Result<f64> {
    check(group, n, observable, source.dim())?;
    let pi = sv_projector(group);
    let m = source.mixture()?;
    let projected = m.sandwich(&pi, &pi)?;
    let pow = projected.pow(n);
    let den = pow.trace().re;
    if den.abs() <= 1e-14 {
        return Err(QemError::ZeroDenominator);
    }
    Ok(trace_product(&observable.to_matrix(), &pow)?.re / den)
}

/// `Tr(O_1 (S_1 (x) ... (x) S_n) D (sigma_1 (x) ... (x) sigma_n))` with `D` the
/// cyclic shift, evaluated as `Tr(O S_1 sigma_n S_n sigma_{n-1} ... S_2 sigma_1)`.
pub fn combined_chain_trace(
    observable: &ComplexMatrix,
    symmetries: &[&ComplexMatrix],
    states: &[&ComplexMatrix],
) -> Result<Complex64> {
    let n = states.len();
    if n == 0 || symmetries.len() != n {
        return Err(QemError::LengthMismatch {
            expected: n,
            got: symmetries.len(),
        });
    }
    let mut acc = observable.matmul(symmetries[0])?;
    for m in (1..n).rev() {
        acc = acc.matmul(states[m])?.matmul(symmetries[m])?;
    }
    trace_product(&acc, states[0])
}

#[derive(Debug, Clone)]
pub struct CombinedEstimate {
    pub ratio: RatioEstimate,
    pub batch: ShotBatch,
}

/// Hadamard-test sampling: per shot draw `n` response variants and `n`
/// symmetry elements uniformly, then one ancilla-controlled `S D` test.
/// The ancilla outcome estimates the denominator, the joint outcome the numerator.
pub fn combined_expectation_sampled(
    source: EmSource<'_>,
    group: &SymmetryGroup,
    n: u32,
    observable: &PauliString,
    n_cir: usize,
    seed: u64,
    exec: Execution,
) -> Result<CombinedEstimate> {
    let dim = source.dim();
    check(group, n, observable, dim)?;
    let o = observable.to_matrix();
    let syms: Vec<ComplexMatrix> = group.elements().iter().map(PauliString::to_matrix).collect();
    let n = n as usize;
    let records = run_shots(n_cir, seed, exec, |rng| {
        let mut sign = 1i8;
        let mut id: u64 = 0xcbf2_9ce4_8422_2325;
        let mut drawn = Vec::with_capacity(n);
        for _ in 0..n {
            let (vid, s, state) = source.draw(rng)?;
            sign *= s;
            id = (id ^ vid).wrapping_mul(0x0000_0100_0000_01b3);
            drawn.push(state);
        }
        let mut chosen = Vec::with_capacity(n);
        for _ in 0..n {
            let j = rng.random_range(0..syms.len());
            id = (id ^ j as u64).wrapping_mul(0x0000_0100_0000_01b3);
            chosen.push(&syms[j]);
        }
        let states: Vec<&ComplexMatrix> = drawn.iter().map(|c| c.as_ref()).collect();
        let traces: Vec<f64> = states.iter().map(|s| s.trace().re).collect();
        let others = |skip: usize| -> f64 {
            traces
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, t)| t)
                .product()
        };
        let id_mat = ComplexMatrix::identity(dim);
        let e_gamma = combined_chain_trace(&id_mat, &chosen, &states)?.re;
        let e_o_gamma = combined_chain_trace(&o, &chosen, &states)?.re;
        // copy 1 holds sigma_1 before the controlled shift and S_1 sigma_n S_1 after it
        let rotated = states[n - 1].conjugate_by(chosen[0])?;
        let e_o = (trace_product(&o, states[0])?.re * others(0)
            + trace_product(&o, &rotated)?.re * others(n - 1))
            / 2.0;
        let (ov, gv) = sample_joint(
            &JointMoments {
                e_o,
                e_gamma,
                e_o_gamma,
            },
            rng,
        )?;
        Ok(ShotRecord {
            variant_id: id,
            sign,
            o_value: ov,
            gamma_value: gv,
        })
    })?;
    let batch = ShotBatch::new(records, seed);
    Ok(CombinedEstimate {
        ratio: ratio_estimate(&batch)?,
        batch,
    })
}
