//! Orthogonal-error model: `rho_lambda = sum_l P_lambda(l) rho_l` with
//! `rho_0` pure and every `rho_l` (l >= 1) orthogonal to it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QemError, Result};
use crate::linalg::random::random_density_matrix;
use crate::linalg::{ComplexMatrix, DensityMatrix, PauliString};
use crate::noise::poisson::{required_ell_max, truncated_poisson_weights};

/// How the `l`-fault components are built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentStyle {
    /// Every `rho_l` (l >= 1) is the maximally mixed state on the complement of `rho_0`.
    MaximallyMixed,
    /// Independent random full-rank mixtures on the complement, one per `l`.
    RandomMixtures { seed: u64 },
    /// Faults move the state between syndrome sectors of commuting Pauli
    /// generators. A single fault flips syndrome `s` with probability
    /// `syndrome_weights[s]` (bit `j` of `s` belongs to generator `j`).
    SymmetrySectors {
        generators: Vec<PauliString>,
        syndrome_weights: Vec<f64>,
    },
}

/// Generates `rho_l` for any fault count on demand.
#[derive(Debug, Clone)]
pub struct SyntheticModel {
    rho0: DensityMatrix,
    style: ComponentStyle,
    complement: ComplexMatrix,
    sectors: Option<Sectors>,
}

#[derive(Debug, Clone)]
struct Sectors {
    weights: Vec<f64>,
    // tau_s for every syndrome s; tau_0 excludes rho_0
    taus: Vec<ComplexMatrix>,
    generators: Vec<PauliString>,
}

fn xor_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i ^ j] += x * y;
        }
    }
    out
}

impl SyntheticModel {
    /// Model around the first computational basis state (or, for symmetry
    /// sectors, its projection onto the trivial sector).
    pub fn new(dim: usize, style: ComponentStyle) -> Result<Self> {
        if dim < 2 {
            return Err(QemError::InsufficientDimension(format!(
                "dim {dim} leaves no orthogonal complement"
            )));
        }
        match &style {
            ComponentStyle::SymmetrySectors {
                generators,
                syndrome_weights,
            } => Self::with_sectors(dim, generators, syndrome_weights, style.clone()),
            _ => Self::with_rho0(DensityMatrix::basis_state(dim, 0), style),
        }
    }

    /// Model around an arbitrary pure `rho0` (not for symmetry sectors).
    pub fn with_rho0(rho0: DensityMatrix, style: ComponentStyle) -> Result<Self> {
        let dim = rho0.dim();
        if dim < 2 {
            return Err(QemError::InsufficientDimension(format!(
                "dim {dim} leaves no orthogonal complement"
            )));
        }
        if (rho0.purity() - 1.0).abs() > 1e-10 {
            return Err(QemError::InvalidParameter("rho_0 must be pure".into()));
        }
        if matches!(style, ComponentStyle::SymmetrySectors { .. }) {
            return Err(QemError::InvalidParameter(
                "symmetry-sector models choose their own rho_0".into(),
            ));
        }
        let complement = &ComplexMatrix::identity(dim) - rho0.matrix();
        Ok(Self {
            rho0,
            style,
            complement,
            sectors: None,
        })
    }

    fn with_sectors(
        dim: usize,
        generators: &[PauliString],
        weights: &[f64],
        style: ComponentStyle,
    ) -> Result<Self> {
        let k = generators.len();
        if k == 0 || k > 16 {
            return Err(QemError::InvalidParameter(format!(
                "need 1..=16 generators, got {k}"
            )));
        }
        if weights.len() != 1 << k {
            return Err(QemError::LengthMismatch {
                expected: 1 << k,
                got: weights.len(),
            });
        }
        if weights.iter().any(|&w| !(w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
            return Err(QemError::InvalidParameter(
                "syndrome weights must be a probability vector".into(),
            ));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.dim() != dim {
                return Err(QemError::DimensionMismatch {
                    left: g.dim(),
                    right: dim,
                });
            }
            if !g.is_hermitian() || g.is_identity_up_to_phase() {
                return Err(QemError::InvalidParameter(format!(
                    "generator {g} must be a non-trivial Hermitian Pauli"
                )));
            }
            for h in &generators[..i] {
                if !g.commutes_with(h) {
                    return Err(QemError::NonCommuting(format!("{g} and {h}")));
                }
            }
        }
        let id = ComplexMatrix::identity(dim);
        let halves: Vec<[ComplexMatrix; 2]> = generators
            .iter()
            .map(|g| {
                let m = g.to_matrix();
                [(&id + &m).scale_real(0.5), (&id - &m).scale_real(0.5)]
            })
            .collect();
        let sector_dim = dim >> k;
        let mut projectors = Vec::with_capacity(1 << k);
        for s in 0..(1usize << k) {
            let mut p = id.clone();
            for (j, h) in halves.iter().enumerate() {
                p = &p * &h[(s >> j) & 1];
            }
            let tr = p.trace().re;
            if (tr - sector_dim as f64).abs() > 1e-9 || sector_dim == 0 {
                return Err(QemError::InvalidParameter(
                    "generators are not independent".into(),
                ));
            }
            projectors.push(p);
        }
        if sector_dim < 2 {
            return Err(QemError::InsufficientDimension(format!(
                "trivial sector has dimension {sector_dim}; need room for an error state"
            )));
        }
        // rho_0: trivial-sector projection of the first basis state it overlaps
        let pi0 = &projectors[0];
        let col = (0..dim)
            .find(|&c| pi0[(c, c)].re > 1e-9)
            .expect("non-empty sector has a diagonal entry");
        let v: Vec<_> = (0..dim).map(|r| pi0[(r, col)]).collect();
        let rho0 = DensityMatrix::pure(&v)?;
        let taus = projectors
            .iter()
            .enumerate()
            .map(|(s, p)| {
                if s == 0 {
                    (p - rho0.matrix()).scale_real(1.0 / (sector_dim - 1) as f64)
                } else {
                    p.scale_real(1.0 / sector_dim as f64)
                }
            })
            .collect();
        let complement = &id - rho0.matrix();
        Ok(Self {
            rho0,
            style,
            complement,
            sectors: Some(Sectors {
                weights: weights.to_vec(),
                taus,
                generators: generators.to_vec(),
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.rho0.dim()
    }

    pub fn rho0(&self) -> &DensityMatrix {
        &self.rho0
    }

    pub fn style(&self) -> &ComponentStyle {
        &self.style
    }

    /// Symmetry generators, when the model has sectors.
    pub fn generators(&self) -> Option<&[PauliString]> {
        self.sectors.as_ref().map(|s| s.generators.as_slice())
    }

    /// Fraction of single faults detected by the group element built from the
    /// generator subset `mask` (bit `j` = generator `j`).
    pub fn detectable_fraction(&self, mask: usize) -> Option<f64> {
        let sectors = self.sectors.as_ref()?;
        Some(
            sectors
                .weights
                .iter()
                .enumerate()
                .filter(|(s, _)| (s & mask).count_ones() % 2 == 1)
                .map(|(_, w)| w)
                .sum(),
        )
    }

    /// Average output state when exactly `ell` faults occurred.
    pub fn component(&self, ell: usize) -> Result<ComplexMatrix> {
        if ell == 0 {
            return Ok(self.rho0.matrix().clone());
        }
        Ok(match &self.style {
            ComponentStyle::MaximallyMixed => self
                .complement
                .scale_real(1.0 / (self.dim() - 1) as f64),
            ComponentStyle::RandomMixtures { seed } => {
                let r = random_density_matrix(
                    self.dim(),
                    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(ell as u64),
                );
                let m = r.sandwich(&self.complement, &self.complement)?;
                let t = m.trace().re;
                m.scale_real(1.0 / t)
            }
            ComponentStyle::SymmetrySectors { .. } => {
                let sectors = self.sectors.as_ref().expect("built with sectors");
                let mut dist = sectors.weights.clone();
                for _ in 1..ell {
                    dist = xor_convolve(&dist, &sectors.weights);
                }
                let mut m = ComplexMatrix::zeros(self.dim());
                for (w, tau) in dist.iter().zip(&sectors.taus) {
                    if *w != 0.0 {
                        m.add_scaled_real(tau, *w);
                    }
                }
                m
            }
        })
    }

    /// The noisy state at circuit fault rate `lambda`.
    pub fn state(&self, lambda: f64) -> Result<SyntheticNoisyState> {
        let ell_max = required_ell_max(lambda)?;
        self.state_truncated(lambda, ell_max)
    }

    fn state_truncated(&self, lambda: f64, ell_max: usize) -> Result<SyntheticNoisyState> {
        let (weights, truncated_mass) = truncated_poisson_weights(lambda, ell_max)?;
        let components = (0..=ell_max)
            .map(|l| self.component(l))
            .collect::<Result<Vec<_>>>()?;
        let mut rho = ComplexMatrix::zeros(self.dim());
        for (w, c) in weights.iter().zip(&components) {
            rho.add_scaled_real(c, *w);
        }
        Ok(SyntheticNoisyState {
            rho0: self.rho0.clone(),
            lambda,
            components,
            weights,
            ell_max,
            truncated_mass,
            rho: DensityMatrix::new(rho)?,
        })
    }

    /// `sum_l P_lambda(l) rho_{l + extra}`: the state with `extra` additional
    /// faults forced onto every path.
    pub fn shifted_state(&self, lambda: f64, extra: usize) -> Result<DensityMatrix> {
        let ell_max = required_ell_max(lambda)?;
        let (weights, _) = truncated_poisson_weights(lambda, ell_max)?;
        let mut rho = ComplexMatrix::zeros(self.dim());
        for (l, w) in weights.iter().enumerate() {
            rho.add_scaled_real(&self.component(l + extra)?, *w);
        }
        DensityMatrix::new(rho)
    }
}

/// A realised noisy state together with the components it was assembled from.
#[derive(Debug, Clone)]
pub struct SyntheticNoisyState {
    pub rho0: DensityMatrix,
    pub lambda: f64,
    /// `components[l]` is the average state after `l` faults; `components[0] = rho0`.
    pub components: Vec<ComplexMatrix>,
    /// Renormalised Poisson weights for `0..=ell_max`.
    pub weights: Vec<f64>,
    pub ell_max: usize,
    /// Poisson tail mass folded into `weights`.
    pub truncated_mass: f64,
    pub rho: DensityMatrix,
}

impl SyntheticNoisyState {
    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    /// `Tr(rho_0 rho_lambda)`
    pub fn fidelity(&self) -> f64 {
        self.rho0.overlap(&self.rho).expect("same dimension")
    }

    /// Normalised error part `rho_eps = (rho_lambda - F rho_0) / (1 - F)`,
    /// assembled from the stored components.
    pub fn error_state(&self) -> Result<DensityMatrix> {
        let mut m = ComplexMatrix::zeros(self.rho0.dim());
        let mut mass = 0.0;
        for (w, c) in self.weights.iter().zip(&self.components).skip(1) {
            m.add_scaled_real(c, *w);
            mass += w;
        }
        if mass <= 0.0 {
            return Err(QemError::InvalidParameter(
                "noiseless state has no error component".into(),
            ));
        }
        DensityMatrix::new(m.scale_real(1.0 / mass))
    }

    /// `Tr(rho_eps^n)`
    pub fn error_moment(&self, n: u32) -> Result<f64> {
        Ok(crate::linalg::matrix_power(&self.error_state()?, n)?.trace().re)
    }
}

/// One-shot builder: a model around `|0><0|` of dimension `dim` at rate `lambda`.
/// `ell_max = None` picks the smallest truncation with tail below `1e-12`.
pub fn build_synthetic_state<R: Rng + ?Sized>(
    dim: usize,
    lambda: f64,
    ell_max: Option<usize>,
    maximally_mixed: bool,
    rng: &mut R,
) -> Result<SyntheticNoisyState> {
    let style = if maximally_mixed {
        ComponentStyle::MaximallyMixed
    } else {
        ComponentStyle::RandomMixtures { seed: rng.random() }
    };
    let model = SyntheticModel::new(dim, style)?;
    let needed = required_ell_max(lambda)?;
    match ell_max {
        None => model.state(lambda),
        Some(l) if l >= needed => model.state_truncated(lambda, l),
        Some(l) => Err(QemError::InvalidParameter(format!(
            "ell_max {l} leaves Poisson tail above tolerance; need >= {needed}"
        ))),
    }
}
