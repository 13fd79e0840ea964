use qem_core::linalg::{DensityMatrix, PauliString, Phase};
use qem_core::noise::{
    evolve_exact, evolve_with_fault_path, poisson_fault_prob, sample_fault_path, Circuit,
    FaultChannel, FaultLocation, FaultPath, GateSpec, NoiseModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_qubit_circuit() -> (Circuit, NoiseModel) {
    let mut c = Circuit::new(2);
    c.push(GateSpec::new("h", &[0]), vec![0]).unwrap();
    c.push(GateSpec::new("cnot", &[0, 1]), vec![1]).unwrap();
    c.push(GateSpec::new("ry", &[1]).with_angle(0.7), vec![2]).unwrap();
    let locs = vec![
        FaultLocation {
            id: 0,
            channel: FaultChannel::dephasing(2, 0).unwrap(),
            rate: 0.11,
        },
        FaultLocation {
            id: 1,
            channel: FaultChannel::two_qubit_depolarizing(2, 0, 1).unwrap(),
            rate: 0.07,
        },
        FaultLocation {
            id: 2,
            channel: FaultChannel::depolarizing(2, 1).unwrap(),
            rate: 0.23,
        },
    ];
    (c, NoiseModel::new(locs, 2).unwrap())
}

#[test]
fn exact_evolution_equals_sum_over_fault_paths() {
    let (c, m) = two_qubit_circuit();
    let init = c.zero_state();
    let exact = evolve_exact(&c, &m, &init).unwrap();

    // every location: not fired, or fired on one of its branches
    let options: Vec<Vec<Option<usize>>> = m
        .locations()
        .map(|l| {
            let mut v = vec![None];
            v.extend((0..l.channel.branch_count()).map(Some));
            v
        })
        .collect();
    let ids: Vec<u32> = m.locations().map(|l| l.id).collect();
    let mut acc = qem_core::linalg::ComplexMatrix::zeros(4);
    let mut total_p = 0.0;
    let mut paths = 0;
    for a in &options[0] {
        for b in &options[1] {
            for d in &options[2] {
                let pairs: Vec<(u32, usize)> = [a, b, d]
                    .iter()
                    .zip(&ids)
                    .filter_map(|(o, &id)| o.map(|br| (id, br)))
                    .collect();
                let path = FaultPath::from_pairs(&pairs).unwrap();
                let p = path.probability(&m).unwrap();
                let out = evolve_with_fault_path(&c, &m, &path, &init).unwrap();
                acc.add_scaled_real(&out, p);
                total_p += p;
                paths += 1;
            }
        }
    }
    assert_eq!(paths, 2 * 16 * 4);
    assert!((total_p - 1.0).abs() < 1e-12);
    assert!(exact.max_abs_diff(&acc) < 1e-12);
    assert!((exact.trace().re - 1.0).abs() < 1e-10);
    assert!(exact.hermiticity_deviation() < 1e-10);
}

fn histogram(model: &NoiseModel, draws: usize, seed: u64, bins: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = vec![0usize; bins];
    for _ in 0..draws {
        let k = sample_fault_path(model, &mut rng).len();
        if k < bins {
            h[k] += 1;
        }
    }
    h.into_iter().map(|c| c as f64 / draws as f64).collect()
}

fn assert_poisson_3sigma(freq: &[f64], lambda: f64, draws: usize) {
    for (k, f) in freq.iter().enumerate() {
        let p = poisson_fault_prob(lambda, k).unwrap();
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        assert!(
            (f - p).abs() <= 3.0 * sigma + 1e-12,
            "k={k}: freq {f} vs Poisson {p} (3 sigma = {})",
            3.0 * sigma
        );
    }
}

fn bit_flip_model(rates: &[f64]) -> NoiseModel {
    let locs = rates
        .iter()
        .enumerate()
        .map(|(i, &r)| FaultLocation {
            id: i as u32,
            channel: FaultChannel::dephasing(1, 0).unwrap(),
            rate: r,
        })
        .collect();
    NoiseModel::new(locs, 1).unwrap()
}

#[test]
fn path_length_is_poisson_for_many_small_rates() {
    let model = bit_flip_model(&[0.005; 200]);
    assert!((model.lambda() - 1.0).abs() < 1e-12);
    let freq = histogram(&model, 100_000, 2024, 6);
    assert_poisson_3sigma(&freq, 1.0, 100_000);
}

#[test]
fn le_cam_heterogeneous_rates() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let raw: Vec<f64> = (0..400).map(|_| rng.random_range(0.5..1.5)).collect();
    let s: f64 = raw.iter().sum();
    let lambda = 0.8;
    let rates: Vec<f64> = raw.iter().map(|r| r * lambda / s).collect();
    // Le Cam: total variation to Poisson is at most sum p_i^2
    let le_cam: f64 = rates.iter().map(|p| p * p).sum();
    assert!(le_cam < 3e-3);
    let model = bit_flip_model(&rates);
    let freq = histogram(&model, 100_000, 5, 6);
    assert_poisson_3sigma(&freq, lambda, 100_000);
}

/// Every fault flips a uniformly random non-empty subset of six qubits, so a
/// faulty path almost never returns to `|0...0>`.
fn scrambling_circuit(locations: usize, lambda: f64) -> (Circuit, NoiseModel) {
    let n = 6u32;
    let terms: Vec<(f64, PauliString)> = (1u64..(1 << n))
        .map(|x| (1.0 / 63.0, PauliString::from_masks(n, x, 0, Phase::PlusOne)))
        .collect();
    let mut c = Circuit::new(n);
    let mut locs = Vec::new();
    for i in 0..locations {
        c.push(GateSpec::new("id", &[0]), vec![i as u32]).unwrap();
        locs.push(FaultLocation {
            id: i as u32,
            channel: FaultChannel::Pauli(terms.clone()),
            rate: lambda / locations as f64,
        });
    }
    (c, NoiseModel::new(locs, n).unwrap())
}

#[test]
fn orthogonal_faults_give_exponential_fidelity() {
    for lambda in [0.25, 0.5, 1.0] {
        let (c, m) = scrambling_circuit(100, lambda);
        let init = c.zero_state();
        let out = evolve_exact(&c, &m, &init).unwrap();
        let f = init.overlap(&out).unwrap();
        let rel = (f / (-lambda).exp() - 1.0).abs();
        assert!(rel < 0.02, "lambda {lambda}: F = {f}, rel {rel}");
    }
}

#[test]
fn sampled_paths_average_to_exact_state() {
    let (c, m) = two_qubit_circuit();
    let init: DensityMatrix = c.zero_state();
    let exact = evolve_exact(&c, &m, &init).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws = 20_000;
    let mut acc = qem_core::linalg::ComplexMatrix::zeros(4);
    for _ in 0..draws {
        let path = sample_fault_path(&m, &mut rng);
        acc.add_scaled_real(&evolve_with_fault_path(&c, &m, &path, &init).unwrap(), 1.0 / draws as f64);
    }
    // entries are bounded by 1, so 5 / sqrt(N) is a loose uniform bound
    assert!(exact.max_abs_diff(&acc) < 5.0 / (draws as f64).sqrt());
}
