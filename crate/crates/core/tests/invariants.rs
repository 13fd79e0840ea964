use proptest::prelude::*;
use qem_core::linalg::random::random_density_matrix;
use qem_core::linalg::{
    eigenvalues_hermitian, trace_product, ComplexMatrix, DensityMatrix, PauliString, Phase,
};
use qem_core::metrics::{
    purification_boost_lower_bound, purification_overhead_lower_bound, ExactInputs,
    MitigationReport,
};
use qem_core::mitigation::{
    build_extrapolation_plan, pec_synthetic_ensemble, purification_ensemble, sv_ensemble,
    subspace_ensemble, zne_ensemble, ExpansionBasis, MethodTag, PurificationConfig,
    ResponseEnsemble, SymmetryGroup, ZneStrategy,
};
use qem_core::noise::{ComponentStyle, FaultChannel, FaultLocation, SyntheticModel};
use qem_core::sampler::{run_ensemble, Execution};

fn pauli(n: u32, x: u64, z: u64, ph: u8) -> PauliString {
    let phase = [Phase::PlusOne, Phase::PlusI, Phase::MinusOne, Phase::MinusI][ph as usize % 4];
    PauliString::from_masks(n, x, z, phase)
}

fn sector_model(w: &[f64; 4]) -> SyntheticModel {
    let total: f64 = w.iter().sum();
    SyntheticModel::new(
        16,
        ComponentStyle::SymmetrySectors {
            generators: vec!["ZZII".parse().unwrap(), "IIZZ".parse().unwrap()],
            syndrome_weights: w.iter().map(|x| x / total).collect(),
        },
    )
    .unwrap()
}

fn sector_group(model: &SyntheticModel) -> SymmetryGroup {
    let g = SymmetryGroup::from_generators(model.generators().unwrap()).unwrap();
    let f = (0..g.len()).map(|m| model.detectable_fraction(m).unwrap()).collect();
    g.with_fractions(f).unwrap()
}

/// `Pi` assembled as the product of `(I + g)/2` over generators.
fn projector_from_generators(gens: &[PauliString]) -> ComplexMatrix {
    let d = gens[0].dim();
    let mut p = ComplexMatrix::identity(d);
    for g in gens {
        let half = (&ComplexMatrix::identity(d) + &g.to_matrix()).scale_real(0.5);
        p = &p * &half;
    }
    p
}

/// `rho^n` through the eigendecomposition.
fn eigen_power_trace(rho: &ComplexMatrix, n: u32) -> f64 {
    eigenvalues_hermitian(rho).unwrap().iter().map(|l| l.powi(n as i32)).sum()
}

fn fidelity_report(
    method: MethodTag,
    lambda: f64,
    model: &SyntheticModel,
    ensemble: &ResponseEnsemble,
    rho_lambda: &DensityMatrix,
    observable: &ComplexMatrix,
) -> MitigationReport {
    let em = ensemble.materialize().unwrap().scale_real(1.0 / ensemble.q_em());
    MitigationReport::exact(ExactInputs {
        method,
        lambda,
        rho0: model.rho0(),
        rho_lambda,
        rho_em: &em,
        q_em: ensemble.q_em(),
        observable,
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pauli_product_is_associative(
        a in (0u64..8, 0u64..8, 0u8..4),
        b in (0u64..8, 0u64..8, 0u8..4),
        c in (0u64..8, 0u64..8, 0u8..4),
    ) {
        let (p, q, r) = (pauli(3, a.0, a.1, a.2), pauli(3, b.0, b.1, b.2), pauli(3, c.0, c.1, c.2));
        let left = p.compose(&q).unwrap().compose(&r).unwrap();
        let right = p.compose(&q.compose(&r).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        // and the matrices agree with the algebra
        let m = &(&p.to_matrix() * &q.to_matrix()) * &r.to_matrix();
        prop_assert!(m.approx_eq(&left.to_matrix(), 1e-14));
    }

    #[test]
    fn purity_moments_agree(seed in 0u64..1000, n in 1u32..6, dim in prop::sample::select(vec![2usize, 4, 8])) {
        let rho = DensityMatrix::new(random_density_matrix(dim, seed)).unwrap();
        let direct = qem_core::linalg::matrix_power(&rho, n).unwrap().trace().re;
        prop_assert!((direct - eigen_power_trace(&rho, n)).abs() < 1e-9);
    }

    #[test]
    fn channels_preserve_trace_and_hermiticity(seed in 0u64..1000, rate in 0.0f64..1.0, which in 0usize..3) {
        let rho = random_density_matrix(4, seed);
        let channel = match which {
            0 => FaultChannel::dephasing(2, 1).unwrap(),
            1 => FaultChannel::depolarizing(2, 0).unwrap(),
            _ => FaultChannel::two_qubit_depolarizing(2, 0, 1).unwrap(),
        };
        let out = FaultLocation { id: 0, channel, rate }.apply(&rho).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(out.hermiticity_deviation() < 1e-10);
        prop_assert!(out.is_positive_semidefinite(1e-9));
    }

    #[test]
    fn synthetic_components_are_orthogonal(seed in 0u64..500, ell in 1usize..12) {
        let m = SyntheticModel::new(8, ComponentStyle::RandomMixtures { seed }).unwrap();
        let c = m.component(ell).unwrap();
        prop_assert!(trace_product(m.rho0(), &c).unwrap().norm() <= 1e-12);
        let s = sector_model(&[0.1, 0.4, 0.3, 0.2]);
        prop_assert!(trace_product(s.rho0(), &s.component(ell).unwrap()).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn pec_ensemble_materializes_target(seed in 0u64..200, lambda in 0.05f64..1.2, frac in 0.0f64..1.0) {
        let m = SyntheticModel::new(8, ComponentStyle::RandomMixtures { seed }).unwrap();
        let lambda_em = frac * lambda;
        let e = pec_synthetic_ensemble(&m, lambda, lambda_em).unwrap();
        let target = m.state(lambda_em).unwrap();
        let got = e.materialize().unwrap();
        prop_assert!(got.max_abs_diff(&target.state().scale_real(e.q_em())) < 1e-9);
        prop_assert!((e.q_em() / (-2.0 * (lambda - lambda_em)).exp() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zne_ensemble_matches_component_sum(seed in 0u64..200, lambda in 0.05f64..0.9, n in prop::sample::select(vec![1usize, 3, 5])) {
        let m = SyntheticModel::new(8, ComponentStyle::RandomMixtures { seed }).unwrap();
        let plan = build_extrapolation_plan(lambda, n, &ZneStrategy::EqualGap { m0: 1 }).unwrap();
        let states: Vec<DensityMatrix> = plan.rates.iter().map(|&l| m.state(l).unwrap().state().clone()).collect();
        let e = zne_ensemble(&plan, &states).unwrap();
        // (rho_0 + sum_{l >= n} c_l lambda^l / l! rho_l) / A
        let mut oracle = m.rho0().matrix().clone();
        let mut fact = 1.0;
        for ell in 1..80usize {
            fact *= ell as f64;
            let c_ell: f64 = (1..=n).map(|i| {
                let g: f64 = (1..=n).filter(|&j| j != i).map(|j| j as f64 / (j as f64 - i as f64)).product();
                g * (i as f64).powi(ell as i32)
            }).sum();
            let coeff = c_ell * lambda.powi(ell as i32) / fact;
            if ell < n {
                prop_assert!(c_ell.abs() < 1e-9);
                continue;
            }
            oracle.add_scaled_real(&m.component(ell).unwrap(), coeff);
        }
        let oracle = oracle.scale_real(1.0 / plan.a);
        let got = e.materialize().unwrap().scale_real(1.0 / e.q_em());
        prop_assert!(got.max_abs_diff(&oracle) < 1e-9, "diff {}", got.max_abs_diff(&oracle));
    }

    #[test]
    fn sv_and_subspace_ensembles_match_projection(w in prop::array::uniform4(0.05f64..1.0), lambda in 0.05f64..1.5) {
        let model = sector_model(&w);
        let group = sector_group(&model);
        let rho = model.state(lambda).unwrap().state().clone();
        let pi = projector_from_generators(model.generators().unwrap());
        let projected = rho.sandwich(&pi, &pi).unwrap();
        let q = projected.trace().re;
        let e = sv_ensemble(&rho, &group).unwrap();
        prop_assert!((e.q_em() - q).abs() < 1e-12);
        prop_assert!(e.materialize().unwrap().max_abs_diff(&projected) < 1e-9);

        let basis = ExpansionBasis::from_paulis(
            &["IIII".parse().unwrap(), "XXII".parse().unwrap(), "ZZII".parse().unwrap()],
            vec![0.8, -0.3, 0.5],
        ).unwrap();
        let gamma = basis.gamma();
        let expanded = rho.sandwich(&gamma, &gamma).unwrap();
        let s = subspace_ensemble(&rho, &basis).unwrap();
        // q_em carries the (sum |w|)^2 normalisation
        let norm = 1.6f64 * 1.6;
        prop_assert!((s.q_em() - expanded.trace().re / norm).abs() < 1e-12);
        prop_assert!(s.materialize().unwrap().max_abs_diff(&expanded.scale_real(1.0 / norm)) < 1e-9);
    }

    #[test]
    fn purification_ensemble_matches_power(seed in 0u64..300, n in 1u32..5) {
        let rho = DensityMatrix::new(random_density_matrix(4, seed)).unwrap();
        let e = purification_ensemble(&rho, PurificationConfig::new(n).unwrap()).unwrap();
        prop_assert!((e.q_em() - eigen_power_trace(&rho, n)).abs() < 1e-9);
        let mut pow = rho.matrix().clone();
        for _ in 1..n {
            pow = &pow * rho.matrix();
        }
        prop_assert!(e.materialize().unwrap().max_abs_diff(&pow) < 1e-12);
    }

    /// Fidelity as the observable: bias = 1 - fidelity.
    #[test]
    fn mitigation_reduces_bias_and_raises_variance(seed in 0u64..100, lambda in 0.05f64..0.6) {
        let m = SyntheticModel::new(16, ComponentStyle::RandomMixtures { seed }).unwrap();
        let noisy = m.state(lambda).unwrap();
        let rho = noisy.state();
        let proj = m.rho0().matrix().clone();
        let zero_mean: ComplexMatrix = "XXII".parse::<PauliString>().unwrap().to_matrix();
        let plan = build_extrapolation_plan(lambda, 3, &ZneStrategy::default()).unwrap();
        let states: Vec<DensityMatrix> = plan.rates.iter().map(|&l| m.state(l).unwrap().state().clone()).collect();
        let ensembles = [
            (MethodTag::Pec, pec_synthetic_ensemble(&m, lambda, 0.0).unwrap()),
            (MethodTag::Zne, zne_ensemble(&plan, &states).unwrap()),
            (MethodTag::Purification, purification_ensemble(rho, PurificationConfig::new(2).unwrap()).unwrap()),
        ];
        for (tag, e) in &ensembles {
            let r = fidelity_report(*tag, lambda, &m, e, rho, &proj);
            prop_assert!(r.fidelity_boost >= 1.0 - 1e-12, "{tag}: B = {}", r.fidelity_boost);
            prop_assert!(r.bias_after.abs() <= r.bias_before.abs() + 1e-12, "{tag}");
            // exact-mode identity r = B / sqrt(C)
            prop_assert!((r.extraction_rate - r.fidelity_boost / r.sampling_overhead.sqrt()).abs() < 1e-9);
            let z = fidelity_report(*tag, lambda, &m, e, rho, &zero_mean);
            prop_assert!(z.variance_after >= z.variance_before - 1e-12, "{tag}");
        }
    }

    #[test]
    fn jensen_bound_on_sector_model(w in prop::array::uniform4(0.0f64..1.0), lambda in 0.0f64..2.0) {
        prop_assume!(w.iter().sum::<f64>() > 0.1);
        let model = sector_model(&w);
        let group = sector_group(&model);
        let rho = model.state(lambda).unwrap();
        let pi = projector_from_generators(model.generators().unwrap());
        let q = trace_product(&pi, rho.state()).unwrap().re;
        prop_assert!(q >= (-2.0 * group.mean_fraction() * lambda).exp() - 1e-12);
    }

    #[test]
    fn purification_lower_bounds(seed in 0u64..100, lambda in 0.05f64..1.5, n in 2u32..5) {
        let m = SyntheticModel::new(16, ComponentStyle::RandomMixtures { seed }).unwrap();
        let noisy = m.state(lambda).unwrap();
        let e = purification_ensemble(noisy.state(), PurificationConfig::new(n).unwrap()).unwrap();
        let r = fidelity_report(MethodTag::Purification, lambda, &m, &e, noisy.state(), m.rho0().matrix());
        prop_assert!(r.fidelity_boost >= purification_boost_lower_bound(noisy.fidelity(), n) * (1.0 - 1e-12));
        prop_assert!(r.sampling_overhead >= purification_overhead_lower_bound(lambda, n) * (1.0 - 1e-9));
    }

    #[test]
    fn shot_batches_do_not_depend_on_workers(seed in any::<u64>(), n in 0usize..5000) {
        let rho = DensityMatrix::new(random_density_matrix(4, seed % 97)).unwrap();
        let g = SymmetryGroup::from_generators(&["ZZ".parse().unwrap()]).unwrap();
        let e = sv_ensemble(&rho, &g).unwrap();
        let obs: PauliString = "XX".parse().unwrap();
        let a = run_ensemble(&e, &obs, n, seed, Execution::Sequential).unwrap();
        let b = run_ensemble(&e, &obs, n, seed, Execution::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }
}
