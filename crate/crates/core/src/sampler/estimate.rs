use rand::Rng;
use serde::Serialize;

use crate::error::{QemError, Result};
use crate::linalg::{trace_product, ComplexMatrix, DensityMatrix, PauliString};
use crate::mitigation::{sv_projector, SymmetryGroup};
use crate::mitigation::ResponseEnsemble;
use crate::sampler::exec::{run_shots, Execution};
use crate::sampler::hadamard::{hadamard_test_moments, sample_joint, JointMoments};
use crate::sampler::shots::{sample_pauli_observable, sample_pm1, ShotBatch, ShotRecord};

/// Sample estimate of an expectation value with the variance of that estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub variance: f64,
    pub n: usize,
}

impl Estimate {
    pub fn std_error(&self) -> f64 {
        self.variance.sqrt()
    }
}

fn mean_and_var(values: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let (mut n, mut s, mut s2) = (0usize, 0.0, 0.0);
    for v in values {
        n += 1;
        s += v;
        s2 += v * v;
    }
    if n == 0 {
        return (0.0, 0.0, 0);
    }
    let mean = s / n as f64;
    let var = if n > 1 {
        ((s2 - n as f64 * mean * mean) / (n - 1) as f64).max(0.0)
    } else {
        0.0
    };
    (mean, var, n)
}

/// `mean(sign * o) / q_em` and the variance of that estimate.
pub fn linear_estimate(batch: &ShotBatch, q_em: f64) -> Result<Estimate> {
    if batch.n_cir == 0 {
        return Err(QemError::InvalidParameter("empty shot batch".into()));
    }
    let (m, v, n) = mean_and_var(batch.records.iter().map(|r| (r.sign * r.o_value) as f64 / q_em));
    Ok(Estimate {
        mean: m,
        variance: v / n as f64,
        n,
    })
}

/// Quotient estimate `sum O Gamma / sum Gamma` with its plug-in variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub estimate: f64,
    pub variance: f64,
    pub gamma_mean: f64,
    pub warning: Option<String>,
}

/// Ratio of sample means, `Gamma_i = sign_i * gamma_value_i`, with variance
/// `(E[G^2] - 2 a E[O G^2] + a^2 E[G^2]) / (N E[G]^2)` at sample moments.
pub fn ratio_estimate(batch: &ShotBatch) -> Result<RatioEstimate> {
    let n = batch.records.len();
    if n == 0 {
        return Err(QemError::ZeroDenominator);
    }
    let (mut s_og, mut s_g, mut s_g2, mut s_og2) = (0i64, 0i64, 0i64, 0i64);
    for r in &batch.records {
        let g = (r.sign * r.gamma_value) as i64;
        let o = r.o_value as i64;
        s_og += o * g;
        s_g += g;
        s_g2 += g * g;
        s_og2 += o * g * g;
    }
    if s_g == 0 {
        return Err(QemError::ZeroDenominator);
    }
    let nf = n as f64;
    let a = s_og as f64 / s_g as f64;
    let (m_g, m_g2, m_og2) = (s_g as f64 / nf, s_g2 as f64 / nf, s_og2 as f64 / nf);
    let variance = ((m_g2 - 2.0 * a * m_og2 + a * a * m_g2) / (nf * m_g * m_g)).max(0.0);
    let warning = ((s_g.unsigned_abs() as f64) < nf.sqrt())
        .then(|| format!("calibration sum {s_g} below sqrt(N) = {:.1}", nf.sqrt()));
    Ok(RatioEstimate {
        estimate: a,
        variance,
        gamma_mean: m_g,
        warning,
    })
}

/// Executes `n_cir` shots of the response ensemble.
pub fn run_ensemble(
    ensemble: &ResponseEnsemble,
    observable: &PauliString,
    n_cir: usize,
    seed: u64,
    exec: Execution,
) -> Result<ShotBatch> {
    let records = run_shots(n_cir, seed, exec, |rng| {
        let v = ensemble.draw(rng)?;
        let o = sample_pauli_observable(&v.state, observable, rng)?;
        Ok(ShotRecord::plain(v.id, v.sign, o))
    })?;
    Ok(ShotBatch::new(records, seed))
}

/// Plain measurement of `observable` on `rho`.
pub fn run_unmitigated(
    rho: &DensityMatrix,
    observable: &PauliString,
    n_cir: usize,
    seed: u64,
    exec: Execution,
) -> Result<ShotBatch> {
    let records = run_shots(n_cir, seed, exec, |rng| {
        Ok(ShotRecord::plain(0, 1, sample_pauli_observable(rho, observable, rng)?))
    })?;
    Ok(ShotBatch::new(records, seed))
}

/// Hadamard-test shots with `Gamma` drawn uniformly from `gammas` per shot
/// (post-processing symmetry verification when `gammas` is a symmetry group).
pub fn run_hadamard(
    rho: &ComplexMatrix,
    gammas: &[ComplexMatrix],
    observable: &PauliString,
    n_cir: usize,
    seed: u64,
    exec: Execution,
) -> Result<ShotBatch> {
    if gammas.is_empty() {
        return Err(QemError::InvalidParameter("no Hadamard-test operators".into()));
    }
    let o = observable.to_matrix();
    let moments: Vec<JointMoments> = gammas
        .iter()
        .map(|g| hadamard_test_moments(rho, g, &o))
        .collect::<Result<_>>()?;
    let records = run_shots(n_cir, seed, exec, |rng| {
        let j = rng.random_range(0..moments.len());
        let (ov, gv) = sample_joint(&moments[j], rng)?;
        Ok(ShotRecord {
            variant_id: j as u64,
            sign: 1,
            o_value: ov,
            gamma_value: gv,
        })
    })?;
    Ok(ShotBatch::new(records, seed))
}

/// Post-processing symmetry verification through Hadamard tests.
pub fn sv_postprocess_estimate(
    rho: &DensityMatrix,
    group: &SymmetryGroup,
    observable: &PauliString,
    n_cir: usize,
    seed: u64,
    exec: Execution,
) -> Result<(RatioEstimate, ShotBatch)> {
    group.check_commutes(observable)?;
    let gammas: Vec<ComplexMatrix> = group.elements().iter().map(PauliString::to_matrix).collect();
    let batch = run_hadamard(rho, &gammas, observable, n_cir, seed, exec)?;
    Ok((ratio_estimate(&batch)?, batch))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectSvEstimate {
    pub estimate: f64,
    pub acceptance_rate: f64,
    pub accepted: usize,
    /// Variance of `estimate` from the spread of accepted outcomes.
    pub variance: f64,
    #[serde(skip)]
    pub batch: ShotBatch,
}

/// Measures the symmetry projector and the observable on every shot,
/// averaging the observable over accepted shots only.
pub fn direct_sv_estimate(
    rho: &DensityMatrix,
    group: &SymmetryGroup,
    observable: &PauliString,
    n_cir: usize,
    seed: u64,
    exec: Execution,
) -> Result<DirectSvEstimate> {
    group.check_commutes(observable)?;
    let pi = sv_projector(group);
    let q = trace_product(&pi, rho)?.re;
    let accepted_state = rho.sandwich(&pi, &pi)?;
    let complement = &ComplexMatrix::identity(rho.dim()) - &pi;
    let rejected_state = rho.sandwich(&complement, &complement)?;
    let o = observable.to_matrix();
    let mean_acc = if q > 0.0 { trace_product(&o, &accepted_state)?.re / q } else { 0.0 };
    let mean_rej = if q < 1.0 {
        trace_product(&o, &rejected_state)?.re / (1.0 - q)
    } else {
        0.0
    };
    let records = run_shots(n_cir, seed, exec, |rng| {
        let u: f64 = rng.random();
        let (g, mean) = if u < q { (1, mean_acc) } else { (0, mean_rej) };
        Ok(ShotRecord {
            variant_id: 0,
            sign: 1,
            o_value: sample_pm1(mean.clamp(-1.0, 1.0), rng)?,
            gamma_value: g,
        })
    })?;
    let batch = ShotBatch::new(records, seed);
    let (m, v, n) = mean_and_var(
        batch
            .records
            .iter()
            .filter(|r| r.gamma_value == 1)
            .map(|r| r.o_value as f64),
    );
    if n == 0 {
        return Err(QemError::NoAcceptedShots);
    }
    Ok(DirectSvEstimate {
        estimate: m,
        acceptance_rate: n as f64 / n_cir as f64,
        accepted: n,
        variance: v / n as f64,
        batch,
    })
}
