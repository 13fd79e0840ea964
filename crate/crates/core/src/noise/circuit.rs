use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QemError, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, PauliString};
use crate::noise::gates::GateSpec;

const CHANNEL_TOL: f64 = 1e-10;

/// Schema version written into and required from circuit documents.
pub const CIRCUIT_SCHEMA_VERSION: u32 = 1;

/// Error channel attached to a fault location. When the location fires, the
/// channel is applied; otherwise the state passes untouched.
#[derive(Debug, Clone, PartialEq)]
pub enum FaultChannel {
    /// `rho -> sum_k q_k P_k rho P_k`
    Pauli(Vec<(f64, PauliString)>),
    /// `rho -> sum_k K_k rho K_k^dagger`; fires as a single event.
    Kraus(Vec<ComplexMatrix>),
}

impl FaultChannel {
    pub fn dephasing(num_qubits: u32, qubit: u32) -> Result<Self> {
        Ok(Self::Pauli(vec![(1.0, PauliString::single(num_qubits, qubit, 'Z')?)]))
    }

    /// Uniform mixture over the three non-identity single-qubit Paulis.
    pub fn depolarizing(num_qubits: u32, qubit: u32) -> Result<Self> {
        Ok(Self::Pauli(
            ['X', 'Y', 'Z']
                .iter()
                .map(|&l| Ok((1.0 / 3.0, PauliString::single(num_qubits, qubit, l)?)))
                .collect::<Result<_>>()?,
        ))
    }

    /// Uniform mixture over the 15 non-identity two-qubit Paulis on `(a, b)`.
    pub fn two_qubit_depolarizing(num_qubits: u32, a: u32, b: u32) -> Result<Self> {
        let support = (1u64 << (num_qubits - 1 - a)) | (1u64 << (num_qubits - 1 - b));
        let paulis: Vec<_> = PauliString::enumerate_on_support(num_qubits, support)
            .into_iter()
            .filter(|p| !p.is_identity_up_to_phase())
            .map(|p| (1.0 / 15.0, p))
            .collect();
        Ok(Self::Pauli(paulis))
    }

    pub fn validate(&self, num_qubits: u32) -> Result<()> {
        match self {
            FaultChannel::Pauli(terms) => {
                if terms.is_empty() {
                    return Err(QemError::InvalidChannel("empty Pauli channel".into()));
                }
                let mut total = 0.0;
                for (q, p) in terms {
                    if !(*q >= 0.0) {
                        return Err(QemError::InvalidChannel(format!("negative probability {q}")));
                    }
                    if p.num_qubits() != num_qubits {
                        return Err(QemError::InvalidChannel(format!(
                            "Pauli {p} does not act on {num_qubits} qubits"
                        )));
                    }
                    total += q;
                }
                if (total - 1.0).abs() > CHANNEL_TOL {
                    return Err(QemError::InvalidChannel(format!(
                        "Pauli probabilities sum to {total}"
                    )));
                }
            }
            FaultChannel::Kraus(ops) => {
                let dim = 1usize << num_qubits;
                if ops.is_empty() {
                    return Err(QemError::InvalidChannel("empty Kraus channel".into()));
                }
                let mut sum = ComplexMatrix::zeros(dim);
                for k in ops {
                    if k.dim() != dim {
                        return Err(QemError::DimensionMismatch {
                            left: k.dim(),
                            right: dim,
                        });
                    }
                    sum = &sum + &(&k.dagger() * k);
                }
                let dev = sum.max_abs_diff(&ComplexMatrix::identity(dim));
                if dev > CHANNEL_TOL {
                    return Err(QemError::InvalidChannel(format!(
                        "Kraus completeness violated by {dev:.3e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of distinct events a firing can select.
    pub fn branch_count(&self) -> usize {
        match self {
            FaultChannel::Pauli(terms) => terms.len(),
            FaultChannel::Kraus(_) => 1,
        }
    }

    /// Full channel map.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(rho.dim());
        match self {
            FaultChannel::Pauli(terms) => {
                for (q, p) in terms {
                    out.add_scaled_real(&p.conjugate(rho)?, *q);
                }
            }
            FaultChannel::Kraus(ops) => {
                for k in ops {
                    out = &out + &rho.conjugate_by(k)?;
                }
            }
        }
        Ok(out)
    }

    /// Map for a single branch of a firing.
    pub fn apply_branch(&self, branch: usize, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        match self {
            FaultChannel::Pauli(terms) => {
                let (_, p) = terms.get(branch).ok_or_else(|| {
                    QemError::InvalidParameter(format!("branch {branch} out of range"))
                })?;
                p.conjugate(rho)
            }
            FaultChannel::Kraus(_) if branch == 0 => self.apply(rho),
            FaultChannel::Kraus(_) => Err(QemError::InvalidParameter(format!(
                "Kraus channels fire as one event, got branch {branch}"
            ))),
        }
    }

    pub fn branch_probability(&self, branch: usize) -> f64 {
        match self {
            FaultChannel::Pauli(terms) => terms.get(branch).map_or(0.0, |t| t.0),
            FaultChannel::Kraus(_) => {
                if branch == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn as_pauli(&self) -> Option<&[(f64, PauliString)]> {
        match self {
            FaultChannel::Pauli(terms) => Some(terms),
            FaultChannel::Kraus(_) => None,
        }
    }
}

/// A place in the circuit where an error can occur with probability `rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultLocation {
    pub id: u32,
    pub channel: FaultChannel,
    pub rate: f64,
}

impl FaultLocation {
    /// `rho -> (1 - rate) rho + rate * channel(rho)`
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = rho.scale_real(1.0 - self.rate);
        out.add_scaled_real(&self.channel.apply(rho)?, self.rate);
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub gate: GateSpec,
    unitary: ComplexMatrix,
    pub faults: Vec<u32>,
}

impl Layer {
    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }
}

/// Ordered gate layers, each followed by its fault locations.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: u32,
    layers: Vec<Layer>,
}

impl Circuit {
    pub fn new(num_qubits: u32) -> Self {
        Self {
            num_qubits,
            layers: Vec::new(),
        }
    }

    /// Appends a gate; fails on non-unitary gates or reused fault ids.
    pub fn push(&mut self, gate: GateSpec, faults: Vec<u32>) -> Result<&mut Self> {
        let unitary = gate.materialize(self.num_qubits)?;
        let dev = unitary.unitarity_deviation();
        if dev > CHANNEL_TOL {
            return Err(QemError::NotUnitary(dev));
        }
        let used: BTreeSet<u32> = self.location_ids().into_iter().collect();
        let mut seen = BTreeSet::new();
        for &f in &faults {
            if used.contains(&f) || !seen.insert(f) {
                return Err(QemError::DuplicateLocation(f));
            }
        }
        self.layers.push(Layer {
            gate,
            unitary,
            faults,
        });
        Ok(self)
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn location_ids(&self) -> Vec<u32> {
        self.layers.iter().flat_map(|l| l.faults.iter().copied()).collect()
    }

    /// Walks the circuit, applying `at_location` at every fault location.
    pub fn evolve_with<F>(&self, initial: &ComplexMatrix, mut at_location: F) -> Result<ComplexMatrix>
    where
        F: FnMut(u32, ComplexMatrix) -> Result<ComplexMatrix>,
    {
        if initial.dim() != self.dim() {
            return Err(QemError::DimensionMismatch {
                left: initial.dim(),
                right: self.dim(),
            });
        }
        let mut rho = initial.clone();
        for layer in &self.layers {
            rho = rho.conjugate_by(&layer.unitary)?;
            for &id in &layer.faults {
                rho = at_location(id, rho)?;
            }
        }
        Ok(rho)
    }

    /// Output with every fault location disabled.
    pub fn evolve_noiseless(&self, initial: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.evolve_with(initial, |_, rho| Ok(rho))?)
    }

    pub fn zero_state(&self) -> DensityMatrix {
        DensityMatrix::basis_state(self.dim(), 0)
    }
}

/// The fault locations of a circuit together with their rates.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    locations: BTreeMap<u32, FaultLocation>,
}

impl NoiseModel {
    pub fn new(locations: Vec<FaultLocation>, num_qubits: u32) -> Result<Self> {
        let mut map = BTreeMap::new();
        for loc in locations {
            if !(0.0..=1.0).contains(&loc.rate) {
                return Err(QemError::InvalidChannel(format!(
                    "rate {} at location {} is outside [0, 1]",
                    loc.rate, loc.id
                )));
            }
            loc.channel.validate(num_qubits)?;
            if map.insert(loc.id, loc.clone()).is_some() {
                return Err(QemError::DuplicateLocation(loc.id));
            }
        }
        Ok(Self { locations: map })
    }

    /// Circuit fault rate: the sum of all location rates.
    pub fn lambda(&self) -> f64 {
        self.locations.values().map(|l| l.rate).sum()
    }

    pub fn locations(&self) -> impl Iterator<Item = &FaultLocation> {
        self.locations.values()
    }

    pub fn location(&self, id: u32) -> Result<&FaultLocation> {
        self.locations.get(&id).ok_or(QemError::UnknownLocation(id))
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// Every rate multiplied by `factor`; fails if a rate would exceed 1.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0) {
            return Err(QemError::NegativeRate(factor));
        }
        let mut out = self.clone();
        for loc in out.locations.values_mut() {
            loc.rate *= factor;
            if loc.rate > 1.0 {
                return Err(QemError::InvalidParameter(format!(
                    "scaling by {factor} pushes location {} above rate 1",
                    loc.id
                )));
            }
        }
        Ok(out)
    }

    /// Rescaled so the circuit fault rate equals `lambda`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let current = self.lambda();
        if current == 0.0 {
            return if lambda == 0.0 {
                Ok(self.clone())
            } else {
                Err(QemError::InvalidParameter(
                    "cannot rescale a noiseless model to a positive rate".into(),
                ))
            };
        }
        self.scaled(lambda / current)
    }

    /// Checks that every circuit location exists in the model and vice versa.
    pub fn check_against(&self, circuit: &Circuit) -> Result<()> {
        let ids = circuit.location_ids();
        for &id in &ids {
            self.location(id)?;
        }
        for &id in self.locations.keys() {
            if !ids.contains(&id) {
                return Err(QemError::UnknownLocation(id));
            }
        }
        Ok(())
    }
}

/// The set of locations that fired in one circuit run, with the selected branch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FaultPath {
    triggered: BTreeMap<u32, usize>,
}

impl FaultPath {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, location: u32, branch: usize) -> Result<()> {
        if self.triggered.insert(location, branch).is_some() {
            return Err(QemError::DuplicateLocation(location));
        }
        Ok(())
    }

    pub fn from_pairs(pairs: &[(u32, usize)]) -> Result<Self> {
        let mut path = Self::empty();
        for &(l, b) in pairs {
            path.insert(l, b)?;
        }
        Ok(path)
    }

    pub fn len(&self) -> usize {
        self.triggered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triggered.is_empty()
    }

    pub fn branch(&self, location: u32) -> Option<usize> {
        self.triggered.get(&location).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, usize)> + '_ {
        self.triggered.iter().map(|(&l, &b)| (l, b))
    }

    /// Probability of exactly this path under `model`.
    pub fn probability(&self, model: &NoiseModel) -> Result<f64> {
        for (id, _) in self.iter() {
            model.location(id)?;
        }
        Ok(model
            .locations()
            .map(|loc| match self.branch(loc.id) {
                Some(b) => loc.rate * loc.channel.branch_probability(b),
                None => 1.0 - loc.rate,
            })
            .product())
    }
}

/// Independent Bernoulli(rate) per location; on a firing, the branch is drawn
/// from the channel probabilities.
pub fn sample_fault_path<R: Rng + ?Sized>(model: &NoiseModel, rng: &mut R) -> FaultPath {
    let mut path = FaultPath::empty();
    for loc in model.locations() {
        let u: f64 = rng.random();
        if u < loc.rate {
            let branch = match &loc.channel {
                FaultChannel::Pauli(terms) => {
                    let v: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut chosen = terms.len() - 1;
                    for (i, (q, _)) in terms.iter().enumerate() {
                        acc += q;
                        if v < acc {
                            chosen = i;
                            break;
                        }
                    }
                    chosen
                }
                FaultChannel::Kraus(_) => 0,
            };
            path.triggered.insert(loc.id, branch);
        }
    }
    path
}

/// Exact noisy output: every location applies `(1 - p) rho + p channel(rho)`.
pub fn evolve_exact(
    circuit: &Circuit,
    model: &NoiseModel,
    initial: &DensityMatrix,
) -> Result<DensityMatrix> {
    model.check_against(circuit)?;
    let out = circuit.evolve_with(initial, |id, rho| model.location(id)?.apply(&rho))?;
    DensityMatrix::new(out)
}

/// Deterministic output with exactly the triggered branches inserted.
pub fn evolve_with_fault_path(
    circuit: &Circuit,
    model: &NoiseModel,
    path: &FaultPath,
    initial: &DensityMatrix,
) -> Result<DensityMatrix> {
    let ids = circuit.location_ids();
    for (id, _) in path.iter() {
        if !ids.contains(&id) {
            return Err(QemError::UnknownLocation(id));
        }
    }
    let out = circuit.evolve_with(initial, |id, rho| match path.branch(id) {
        Some(b) => model.location(id)?.channel.apply_branch(b, &rho),
        None => Ok(rho),
    })?;
    DensityMatrix::new(out)
}

// ---------------------------------------------------------------------------
// JSON document

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChannelTermDoc {
    pub p: f64,
    pub pauli: PauliString,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FaultDoc {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channel: Vec<ChannelTermDoc>,
    /// General Kraus operators as row-major `[re, im]` matrices; exclusive with `channel`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LayerDoc {
    pub gate: GateSpec,
    #[serde(default)]
    pub faults: Vec<FaultDoc>,
}

/// Serialized circuit plus noise model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CircuitDoc {
    pub schema_version: u32,
    pub num_qubits: u32,
    pub layers: Vec<LayerDoc>,
}

impl CircuitDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build(&self) -> Result<(Circuit, NoiseModel)> {
        if self.schema_version != CIRCUIT_SCHEMA_VERSION {
            return Err(QemError::InvalidParameter(format!(
                "unsupported circuit schema_version {}",
                self.schema_version
            )));
        }
        if self.num_qubits == 0 || self.num_qubits > 12 {
            return Err(QemError::InvalidParameter(format!(
                "num_qubits {} outside 1..=12",
                self.num_qubits
            )));
        }
        let mut circuit = Circuit::new(self.num_qubits);
        let mut locations = Vec::new();
        for layer in &self.layers {
            let ids = layer.faults.iter().map(|f| f.id).collect();
            circuit.push(layer.gate.clone(), ids)?;
            for f in &layer.faults {
                let channel = match (&f.kraus, f.channel.is_empty()) {
                    (Some(_), false) => {
                        return Err(QemError::InvalidChannel(format!(
                            "location {} has both a Pauli and a Kraus channel",
                            f.id
                        )))
                    }
                    (Some(ops), true) => FaultChannel::Kraus(
                        ops.iter()
                            .map(|m| {
                                let rows: Vec<Vec<Complex64>> = m
                                    .iter()
                                    .map(|r| r.iter().map(|&[a, b]| Complex64::new(a, b)).collect())
                                    .collect();
                                ComplexMatrix::from_rows(&rows)
                            })
                            .collect::<Result<_>>()?,
                    ),
                    (None, _) => {
                        FaultChannel::Pauli(f.channel.iter().map(|t| (t.p, t.pauli)).collect())
                    }
                };
                locations.push(FaultLocation {
                    id: f.id,
                    channel,
                    rate: f.rate,
                });
            }
        }
        let model = NoiseModel::new(locations, self.num_qubits)?;
        Ok((circuit, model))
    }

    /// Inverse of [`CircuitDoc::build`] for Pauli and Kraus models.
    pub fn from_parts(circuit: &Circuit, model: &NoiseModel) -> Result<Self> {
        let layers = circuit
            .layers()
            .iter()
            .map(|layer| {
                let faults = layer
                    .faults
                    .iter()
                    .map(|&id| {
                        let loc = model.location(id)?;
                        Ok(match &loc.channel {
                            FaultChannel::Pauli(terms) => FaultDoc {
                                id,
                                channel: terms
                                    .iter()
                                    .map(|&(p, pauli)| ChannelTermDoc { p, pauli })
                                    .collect(),
                                kraus: None,
                                rate: loc.rate,
                            },
                            FaultChannel::Kraus(ops) => FaultDoc {
                                id,
                                channel: Vec::new(),
                                kraus: Some(
                                    ops.iter()
                                        .map(|k| {
                                            (0..k.dim())
                                                .map(|r| k.row(r).iter().map(|z| [z.re, z.im]).collect())
                                                .collect()
                                        })
                                        .collect(),
                                ),
                                rate: loc.rate,
                            },
                        })
                    })
                    .collect::<Result<_>>()?;
                Ok(LayerDoc {
                    gate: layer.gate.clone(),
                    faults,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            schema_version: CIRCUIT_SCHEMA_VERSION,
            num_qubits: circuit.num_qubits(),
            layers,
        })
    }
}

/// `n` layers of `gate` on one qubit, each followed by one location with `channel(qubit)`.
pub fn uniform_noise_circuit(
    num_qubits: u32,
    depth: usize,
    rate: f64,
    mut gate_for_layer: impl FnMut(usize) -> GateSpec,
    mut channel_for_layer: impl FnMut(usize) -> Result<FaultChannel>,
) -> Result<(Circuit, NoiseModel)> {
    let mut circuit = Circuit::new(num_qubits);
    let mut locations = Vec::with_capacity(depth);
    for i in 0..depth {
        circuit.push(gate_for_layer(i), vec![i as u32])?;
        locations.push(FaultLocation {
            id: i as u32,
            channel: channel_for_layer(i)?,
            rate,
        });
    }
    let model = NoiseModel::new(locations, num_qubits)?;
    Ok((circuit, model))
}
