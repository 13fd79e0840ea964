//! Probabilistic error cancellation.

use std::collections::BTreeMap;

use crate::error::{QemError, Result};
use crate::linalg::{DensityMatrix, PauliString, Phase};
use crate::mitigation::ensemble::{LocationQuasi, ProductEnsemble, ResponseEnsemble, Variant};
use crate::mitigation::MethodTag;
use crate::noise::{
    evolve_exact, poisson_fault_prob, required_ell_max, Circuit, FaultLocation, NoiseModel,
    SyntheticModel,
};

const SOLVE_TOL: f64 = 1e-10;

fn chi(a: &PauliString, b: &PauliString) -> f64 {
    if a.commutes_with(b) {
        1.0
    } else {
        -1.0
    }
}

/// Pauli-transfer eigenvalue of `rho -> sum_k c_k P_k rho P_k` on `q`.
pub fn pauli_channel_eigenvalue(mixture: &[(f64, PauliString)], q: &PauliString) -> f64 {
    mixture.iter().map(|(c, p)| c * chi(p, q)).sum()
}

/// Group generated by the (phase-free) channel Paulis, identity first.
pub fn default_basis(mixture: &[(f64, PauliString)]) -> Result<Vec<PauliString>> {
    let n = mixture
        .first()
        .map(|(_, p)| p.num_qubits())
        .ok_or_else(|| QemError::InvalidChannel("empty channel".into()))?;
    let mut group = vec![PauliString::identity(n)];
    let key = |p: &PauliString| (p.x_mask(), p.z_mask());
    for (_, p) in mixture {
        let p = p.without_phase();
        if group.iter().any(|g| key(g) == key(&p)) {
            continue;
        }
        let mut extended = group.clone();
        for g in &group {
            let prod = g.compose(&p)?.with_phase(Phase::PlusOne);
            if !extended.iter().any(|e| key(e) == key(&prod)) {
                extended.push(prod);
            }
        }
        group = extended;
    }
    Ok(group)
}

fn union_support(mixture: &[(f64, PauliString)], basis: &[PauliString]) -> u64 {
    mixture
        .iter()
        .map(|(_, p)| p.support())
        .chain(basis.iter().map(PauliString::support))
        .fold(0, |a, b| a | b)
}

// Least squares by normal equations with partial pivoting.
fn solve_least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = rows[0].len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (row, &b) in rows.iter().zip(rhs) {
        for i in 0..m {
            for j in 0..m {
                a[i][j] += row[i] * row[j];
            }
            a[i][m] += row[i] * b;
        }
    }
    let scale = a.iter().map(|r| r[..m].iter().fold(0.0f64, |x, y| x.max(y.abs()))).fold(1.0f64, f64::max);
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        if a[piv][col].abs() < 1e-12 * scale {
            return Err(QemError::NonInvertibleChannel(
                "singular Pauli transfer matrix".into(),
            ));
        }
        a.swap(col, piv);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col {
                let f = row[col] / pivot_row[col];
                if f != 0.0 {
                    for c in col..=m {
                        row[c] -= f * pivot_row[c];
                    }
                }
            }
        }
    }
    Ok((0..m).map(|i| a[i][m] / a[i][i]).collect())
}

/// Quasi-probabilities `alpha` with `sum_j alpha_j (B_j o channel) = target`,
/// both channels given as Pauli mixtures (probabilities summing to one).
pub fn pec_quasi_coefficients(
    channel: &[(f64, PauliString)],
    target: &[(f64, PauliString)],
    basis: &[PauliString],
) -> Result<Vec<f64>> {
    if basis.is_empty() {
        return Err(QemError::InvalidParameter("empty correction basis".into()));
    }
    let n = basis[0].num_qubits();
    let support = union_support(channel, basis) | union_support(target, &[]);
    let qs = PauliString::enumerate_on_support(n, support);
    let rows: Vec<Vec<f64>> = qs
        .iter()
        .map(|q| {
            let lam = pauli_channel_eigenvalue(channel, q);
            basis.iter().map(|b| chi(b, q) * lam).collect()
        })
        .collect();
    let rhs: Vec<f64> = qs.iter().map(|q| pauli_channel_eigenvalue(target, q)).collect();
    let alpha = solve_least_squares(&rows, &rhs)?;
    let residual = rows
        .iter()
        .zip(&rhs)
        .map(|(r, b)| (r.iter().zip(&alpha).map(|(x, a)| x * a).sum::<f64>() - b).abs())
        .fold(0.0, f64::max);
    if residual > SOLVE_TOL {
        return Err(QemError::NonInvertibleChannel(format!(
            "basis cannot represent the inverse (residual {residual:.3e})"
        )));
    }
    Ok(alpha)
}

/// Quasi-probabilities inverting `channel` over `basis`.
pub fn pec_invert_channel(channel: &[(f64, PauliString)], basis: &[PauliString]) -> Result<Vec<f64>> {
    let n = basis
        .first()
        .ok_or_else(|| QemError::InvalidParameter("empty correction basis".into()))?
        .num_qubits();
    pec_quasi_coefficients(channel, &[(1.0, PauliString::identity(n))], basis)
}

/// Full location map `(1 - p) id + p * channel` as a Pauli mixture.
fn location_mixture(loc: &FaultLocation, rate: f64, num_qubits: u32) -> Result<Vec<(f64, PauliString)>> {
    let terms = loc
        .channel
        .as_pauli()
        .ok_or(QemError::NonPauliChannel(loc.id))?;
    let mut mix = vec![(1.0 - rate, PauliString::identity(num_qubits))];
    mix.extend(terms.iter().map(|(q, p)| (rate * q, *p)));
    Ok(mix)
}

/// Quasi-probability correction turning `loc` at its own rate into the same
/// channel at `rate * scale`.
pub fn location_quasi(loc: &FaultLocation, scale: f64, num_qubits: u32) -> Result<LocationQuasi> {
    let channel = location_mixture(loc, loc.rate, num_qubits)?;
    let target = location_mixture(loc, loc.rate * scale, num_qubits)?;
    let basis = default_basis(&channel)?;
    let coefficients = pec_quasi_coefficients(&channel, &target, &basis)?;
    Ok(LocationQuasi {
        corrections: basis,
        coefficients,
    })
}

fn check_lambda_em(lambda: f64, lambda_em: f64) -> Result<()> {
    if !(lambda_em >= 0.0) {
        return Err(QemError::NegativeRate(lambda_em));
    }
    if lambda_em > lambda * (1.0 + 1e-12) + 1e-15 {
        return Err(QemError::InvalidParameter(format!(
            "lambda_em {lambda_em} exceeds circuit fault rate {lambda}"
        )));
    }
    Ok(())
}

/// Product quasi-probability ensemble mitigating `model` down to `lambda_em`
/// by scaling every location rate by `lambda_em / lambda`.
pub fn pec_build_ensemble(
    circuit: &Circuit,
    model: &NoiseModel,
    initial: &DensityMatrix,
    lambda_em: f64,
) -> Result<ResponseEnsemble> {
    model.check_against(circuit)?;
    for loc in model.locations() {
        if loc.channel.as_pauli().is_none() {
            return Err(QemError::NonPauliChannel(loc.id));
        }
    }
    let lambda = model.lambda();
    check_lambda_em(lambda, lambda_em)?;
    if (lambda - lambda_em).abs() <= 1e-12 * lambda.max(1.0) {
        let noisy = evolve_exact(circuit, model, initial)?;
        return Ok(ResponseEnsemble::trivial(MethodTag::Pec, &noisy));
    }
    let scale = lambda_em / lambda;
    let mut locations = BTreeMap::new();
    for loc in model.locations() {
        if loc.rate > 0.0 {
            locations.insert(loc.id, location_quasi(loc, scale, circuit.num_qubits())?);
        }
    }
    ResponseEnsemble::product(
        MethodTag::Pec,
        ProductEnsemble {
            circuit: circuit.clone(),
            model: model.clone(),
            initial: initial.clone(),
            locations,
        },
    )
}

/// Exact Poisson-limit PEC on the orthogonal-error model: the `k`-th variant
/// forces `k` extra faults, with weight `Poisson(lambda - lambda_em; k)` and
/// sign `(-1)^k`. The mixture is `e^{-2 (lambda - lambda_em)} rho_{lambda_em}`.
pub fn pec_synthetic_ensemble(
    model: &SyntheticModel,
    lambda: f64,
    lambda_em: f64,
) -> Result<ResponseEnsemble> {
    check_lambda_em(lambda, lambda_em)?;
    let delta = (lambda - lambda_em).max(0.0);
    if delta == 0.0 {
        return Ok(ResponseEnsemble::trivial(MethodTag::Pec, model.state(lambda)?.state()));
    }
    let k_max = required_ell_max(delta)?;
    let raw: Vec<f64> = (0..=k_max)
        .map(|k| poisson_fault_prob(delta, k))
        .collect::<Result<_>>()?;
    let z: f64 = raw.iter().sum();
    let variants = raw
        .iter()
        .enumerate()
        .map(|(k, w)| {
            Ok(Variant {
                weight: w / z,
                sign: if k % 2 == 0 { 1 } else { -1 },
                state: model.shifted_state(lambda, k)?.into_matrix(),
                label: format!("extra_faults={k}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ResponseEnsemble::explicit(MethodTag::Pec, variants, (-2.0 * delta).exp() / z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::noise::{FaultChannel, GateSpec};
    use num_complex::Complex64;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn dephasing_inversion() {
        let basis = [p("I"), p("Z")];
        let a0 = pec_invert_channel(&[(1.0, p("I")), (0.0, p("Z"))], &basis).unwrap();
        assert!((a0[0] - 1.0).abs() < 1e-14 && a0[1].abs() < 1e-14);
        let a = pec_invert_channel(&[(0.9, p("I")), (0.1, p("Z"))], &basis).unwrap();
        assert!((a[0] - 1.125).abs() < 1e-12);
        assert!((a[1] + 0.125).abs() < 1e-12);

        // (1 + alpha) rho_p - alpha Z rho_p Z = rho_0 on |+>
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ComplexMatrix::outer(&[Complex64::new(s, 0.0), Complex64::new(s, 0.0)]);
        let z = p("Z");
        let mut rho_p = plus.scale_real(0.9);
        rho_p.add_scaled_real(&z.conjugate(&plus).unwrap(), 0.1);
        let mut back = rho_p.scale_real(a[0]);
        back.add_scaled_real(&z.conjugate(&rho_p).unwrap(), a[1]);
        assert!(back.approx_eq(&plus, 1e-14));
    }

    #[test]
    fn half_dephasing_is_singular() {
        let r = pec_invert_channel(&[(0.5, p("I")), (0.5, p("Z"))], &[p("I"), p("Z")]);
        assert!(matches!(r, Err(QemError::NonInvertibleChannel(_))));
    }

    #[test]
    fn depolarizing_inversion_composes_to_identity() {
        let q = 0.09;
        let mix = [(1.0 - q, p("I")), (q / 3.0, p("X")), (q / 3.0, p("Y")), (q / 3.0, p("Z"))];
        let basis = default_basis(&mix).unwrap();
        assert_eq!(basis.len(), 4);
        let alpha = pec_invert_channel(&mix, &basis).unwrap();
        assert!((alpha.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for qq in ["I", "X", "Y", "Z"] {
            let qq = p(qq);
            let lam = pauli_channel_eigenvalue(&mix, &qq);
            let composed: f64 = basis.iter().zip(&alpha).map(|(b, a)| a * chi(b, &qq) * lam).sum();
            assert!((composed - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_location_overhead() {
        let mut c = Circuit::new(1);
        c.push(GateSpec::new("h", &[0]), vec![0]).unwrap();
        let m = NoiseModel::new(
            vec![FaultLocation {
                id: 0,
                channel: FaultChannel::dephasing(1, 0).unwrap(),
                rate: 0.1,
            }],
            1,
        )
        .unwrap();
        let init = c.zero_state();
        let e = pec_build_ensemble(&c, &m, &init, 0.0).unwrap();
        assert!((e.q_em() - 0.8).abs() < 1e-12);
        let rho_em = e.mitigated_state().unwrap();
        assert!(rho_em.approx_eq(&c.evolve_noiseless(&init).unwrap(), 1e-12));

        let trivial = pec_build_ensemble(&c, &m, &init, 0.1).unwrap();
        assert_eq!(trivial.q_em(), 1.0);
        assert_eq!(trivial.variants().unwrap().len(), 1);
        assert!(pec_build_ensemble(&c, &m, &init, 0.2).is_err());
    }

    #[test]
    fn synthetic_ensemble_reaches_lower_rate() {
        let model = SyntheticModel::new(8, crate::noise::ComponentStyle::RandomMixtures { seed: 4 }).unwrap();
        for &(lambda, lambda_em) in &[(0.5, 0.0), (0.6, 0.3)] {
            let e = pec_synthetic_ensemble(&model, lambda, lambda_em).unwrap();
            let target = model.state(lambda_em).unwrap();
            let m = e.materialize().unwrap();
            assert!(m.approx_eq(&target.state().scale_real(e.q_em()), 1e-10));
            let delta: f64 = lambda - lambda_em;
            assert!((e.q_em() - (-2.0 * delta).exp()).abs() < 1e-11);
        }
    }
}
