//! Noisy-state sources: the synthetic model or a circuit with its noise model.

use std::path::Path;

use qem_core::linalg::{ComplexMatrix, DensityMatrix, PauliString};
use qem_core::noise::{evolve_exact, Circuit, CircuitDoc, NoiseModel, SyntheticModel};
use qem_core::{QemError, Result};

use crate::config::SourceSpec;

#[derive(Debug, Clone)]
pub enum Source {
    Synthetic(SyntheticModel),
    Circuit {
        circuit: Circuit,
        model: NoiseModel,
        initial: DensityMatrix,
        ideal: DensityMatrix,
    },
}

/// Noisy state at one swept rate.
#[derive(Debug, Clone)]
pub struct Point {
    pub lambda: f64,
    pub rho: DensityMatrix,
    pub fidelity: f64,
    /// `(rho - F rho0) / (1 - F)`; `None` when the state is ideal.
    pub error_state: Option<ComplexMatrix>,
}

impl Point {
    /// `Tr(rho_err^n)`
    pub fn error_moment(&self, n: u32) -> Option<f64> {
        self.error_state.as_ref().map(|e| e.pow(n).trace().re)
    }
}

impl Source {
    /// Builds the source; errors are returned as diagnostic text.
    pub fn build(spec: &SourceSpec, base: &Path) -> std::result::Result<Self, String> {
        match spec {
            SourceSpec::Synthetic { dim, style } => SyntheticModel::new(*dim, style.clone())
                .map(Source::Synthetic)
                .map_err(|e| format!("source: {e}")),
            SourceSpec::Circuit { circuit, path } => {
                let doc = match (circuit, path) {
                    (Some(doc), None) => doc.clone(),
                    (None, Some(p)) => {
                        let full = base.join(p);
                        let text = std::fs::read_to_string(&full)
                            .map_err(|e| format!("source: cannot read {}: {e}", full.display()))?;
                        CircuitDoc::from_json(&text).map_err(|e| format!("source: {}: {e}", full.display()))?
                    }
                    _ => return Err("source: give exactly one of `circuit` or `path`".into()),
                };
                let (circuit, model) = doc.build().map_err(|e| format!("source: {e}"))?;
                let initial = circuit.zero_state();
                let ideal = circuit
                    .evolve_noiseless(&initial)
                    .map_err(|e| format!("source: {e}"))?;
                Ok(Source::Circuit {
                    circuit,
                    model,
                    initial,
                    ideal,
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Source::Synthetic(m) => m.dim(),
            Source::Circuit { circuit, .. } => circuit.dim(),
        }
    }

    /// Qubit count, if the dimension is a power of two.
    pub fn num_qubits(&self) -> Option<u32> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros())
    }

    pub fn rho0(&self) -> &DensityMatrix {
        match self {
            Source::Synthetic(m) => m.rho0(),
            Source::Circuit { ideal, .. } => ideal,
        }
    }

    /// Rate of the circuit's own noise model.
    pub fn native_lambda(&self) -> Option<f64> {
        match self {
            Source::Synthetic(_) => None,
            Source::Circuit { model, .. } => Some(model.lambda()),
        }
    }

    /// Largest location rate relative to the circuit fault rate.
    pub fn max_rate_share(&self) -> Option<f64> {
        match self {
            Source::Synthetic(_) => None,
            Source::Circuit { model, .. } => {
                let total = model.lambda();
                (total > 0.0).then(|| model.locations().map(|l| l.rate).fold(0.0, f64::max) / total)
            }
        }
    }

    pub fn sector_generators(&self) -> Option<&[PauliString]> {
        match self {
            Source::Synthetic(m) => m.generators(),
            Source::Circuit { .. } => None,
        }
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self, Source::Synthetic(_))
    }

    pub fn rescaled_model(&self, lambda: f64) -> Result<NoiseModel> {
        match self {
            Source::Circuit { model, .. } => {
                if (model.lambda() - lambda).abs() <= 1e-12 * lambda.max(1.0) {
                    Ok(model.clone())
                } else {
                    model.with_lambda(lambda)
                }
            }
            Source::Synthetic(_) => Err(QemError::InvalidParameter("synthetic source has no noise model".into())),
        }
    }

    /// Noisy state at rate `lambda`.
    pub fn state_at(&self, lambda: f64) -> Result<DensityMatrix> {
        match self {
            Source::Synthetic(m) => Ok(m.state(lambda)?.state().clone()),
            Source::Circuit { circuit, initial, .. } => {
                evolve_exact(circuit, &self.rescaled_model(lambda)?, initial)
            }
        }
    }

    pub fn point(&self, lambda: f64) -> Result<Point> {
        let rho = self.state_at(lambda)?;
        let rho0 = self.rho0();
        let fidelity = rho0.overlap(&rho)?;
        let error_state = (fidelity < 1.0 - 1e-12).then(|| {
            let mut e = rho.matrix().clone();
            e.add_scaled_real(rho0.matrix(), -fidelity);
            e.scale_real(1.0 / (1.0 - fidelity))
        });
        Ok(Point {
            lambda,
            rho,
            fidelity,
            error_state,
        })
    }

    /// Detected-fault fraction of every element of the group generated by
    /// `generators` (element `mask` = product of the generators in `mask`).
    ///
    /// Exact for a sector source built on the same generators. For circuits
    /// each Pauli fault is tested against the symmetry where it occurs, which
    /// ignores propagation through later gates; `None` for Kraus channels.
    pub fn detected_fractions(&self, generators: &[PauliString]) -> Option<Vec<f64>> {
        let masks = 0..1usize << generators.len();
        match self {
            Source::Synthetic(m) => {
                if m.generators()? != generators {
                    return None;
                }
                masks.map(|mask| m.detectable_fraction(mask)).collect()
            }
            Source::Circuit { model, .. } => {
                let total = model.lambda();
                if total <= 0.0 {
                    return None;
                }
                let mut out = Vec::new();
                for mask in masks {
                    let mut s = PauliString::identity(generators[0].num_qubits());
                    for (j, g) in generators.iter().enumerate() {
                        if mask >> j & 1 == 1 {
                            s = s.compose(g).ok()?;
                        }
                    }
                    let mut f = 0.0;
                    for loc in model.locations() {
                        let terms = loc.channel.as_pauli()?;
                        let anti: f64 = terms
                            .iter()
                            .filter(|(_, p)| !p.commutes_with(&s))
                            .map(|(w, _)| w)
                            .sum();
                        f += loc.rate * anti;
                    }
                    out.push(f / total);
                }
                Some(out)
            }
        }
    }
}
