use std::borrow::Cow;
use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{QemError, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, PauliString};
use crate::mitigation::MethodTag;
use crate::noise::{Circuit, NoiseModel};

const WEIGHT_TOL: f64 = 1e-12;

/// One response-measurement circuit: drawn with probability `weight`, its
/// outcome multiplied by `sign`, its (effective) output state `state`.
#[derive(Debug, Clone)]
pub struct Variant {
    pub weight: f64,
    pub sign: i8,
    pub state: ComplexMatrix,
    pub label: String,
}

/// Per-location quasi-probability draw for product ensembles.
#[derive(Debug, Clone)]
pub struct LocationQuasi {
    pub corrections: Vec<PauliString>,
    pub coefficients: Vec<f64>,
}

impl LocationQuasi {
    /// `sum_j |alpha_j|`
    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|a| a.abs()).sum()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.norm();
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        for (j, a) in self.coefficients.iter().enumerate() {
            acc += a.abs();
            if u < acc {
                return j;
            }
        }
        self.coefficients.len() - 1
    }
}

/// Noisy circuit with a Pauli correction drawn independently after every
/// fault location. Never enumerated: the number of variants is exponential in
/// the number of locations.
#[derive(Debug, Clone)]
pub struct ProductEnsemble {
    pub circuit: Circuit,
    pub model: NoiseModel,
    pub initial: DensityMatrix,
    pub locations: BTreeMap<u32, LocationQuasi>,
}

#[derive(Debug, Clone)]
enum Form {
    Explicit(Vec<Variant>),
    Product(Box<ProductEnsemble>),
}

/// Weighted signed circuit variants whose mixture is `q_em * rho_em`.
#[derive(Debug, Clone)]
pub struct ResponseEnsemble {
    method: MethodTag,
    q_em: f64,
    form: Form,
}

/// One draw from an ensemble.
#[derive(Debug, Clone)]
pub struct DrawnVariant<'a> {
    pub id: u64,
    pub sign: i8,
    pub state: Cow<'a, ComplexMatrix>,
}

impl ResponseEnsemble {
    pub fn explicit(method: MethodTag, variants: Vec<Variant>, q_em: f64) -> Result<Self> {
        if variants.is_empty() {
            return Err(QemError::InvalidParameter("ensemble has no variants".into()));
        }
        let dim = variants[0].state.dim();
        let mut total = 0.0;
        for v in &variants {
            if !(v.weight >= 0.0) {
                return Err(QemError::InvalidParameter(format!(
                    "negative variant weight {}",
                    v.weight
                )));
            }
            if v.sign != 1 && v.sign != -1 {
                return Err(QemError::InvalidParameter(format!("sign {} not +-1", v.sign)));
            }
            if v.state.dim() != dim {
                return Err(QemError::DimensionMismatch {
                    left: v.state.dim(),
                    right: dim,
                });
            }
            total += v.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(QemError::InvalidParameter(format!(
                "variant weights sum to {total}"
            )));
        }
        if !(q_em > 0.0 && q_em <= 1.0 + 1e-9) {
            return Err(QemError::InvalidParameter(format!("q_em {q_em} outside (0, 1]")));
        }
        Ok(Self {
            method,
            q_em,
            form: Form::Explicit(variants),
        })
    }

    pub fn product(method: MethodTag, ensemble: ProductEnsemble) -> Result<Self> {
        ensemble.model.check_against(&ensemble.circuit)?;
        for id in ensemble.locations.keys() {
            ensemble.model.location(*id)?;
        }
        let norm: f64 = ensemble.locations.values().map(LocationQuasi::norm).product();
        Ok(Self {
            method,
            q_em: 1.0 / norm,
            form: Form::Product(Box::new(ensemble)),
        })
    }

    /// Single unsigned variant: plain measurement of `state`.
    pub fn trivial(method: MethodTag, state: &DensityMatrix) -> Self {
        Self {
            method,
            q_em: 1.0,
            form: Form::Explicit(vec![Variant {
                weight: 1.0,
                sign: 1,
                state: state.matrix().clone(),
                label: "identity".into(),
            }]),
        }
    }

    pub fn method(&self) -> MethodTag {
        self.method
    }

    pub fn q_em(&self) -> f64 {
        self.q_em
    }

    pub fn dim(&self) -> usize {
        match &self.form {
            Form::Explicit(v) => v[0].state.dim(),
            Form::Product(p) => p.circuit.dim(),
        }
    }

    /// Enumerated variants, `None` for product ensembles.
    pub fn variants(&self) -> Option<&[Variant]> {
        match &self.form {
            Form::Explicit(v) => Some(v),
            Form::Product(_) => None,
        }
    }

    pub fn product_form(&self) -> Option<&ProductEnsemble> {
        match &self.form {
            Form::Explicit(_) => None,
            Form::Product(p) => Some(p),
        }
    }

    /// `sum_i p_i sign_i sigma_i`, which equals `q_em * rho_em`.
    pub fn materialize(&self) -> Result<ComplexMatrix> {
        match &self.form {
            Form::Explicit(variants) => {
                let mut m = ComplexMatrix::zeros(variants[0].state.dim());
                for v in variants {
                    m.add_scaled_real(&v.state, v.weight * v.sign as f64);
                }
                Ok(m)
            }
            Form::Product(p) => p.circuit.evolve_with(&p.initial, |id, rho| {
                let noisy = p.model.location(id)?.apply(&rho)?;
                match p.locations.get(&id) {
                    None => Ok(noisy),
                    Some(quasi) => {
                        let a = quasi.norm();
                        let mut out = ComplexMatrix::zeros(noisy.dim());
                        for (b, alpha) in quasi.corrections.iter().zip(&quasi.coefficients) {
                            out.add_scaled_real(&b.conjugate(&noisy)?, alpha / a);
                        }
                        Ok(out)
                    }
                }
            }),
        }
    }

    /// `materialize() / q_em`; flagged non-physical when not positive.
    pub fn mitigated_state(&self) -> Result<DensityMatrix> {
        let m = self.materialize()?.scale_real(1.0 / self.q_em);
        match DensityMatrix::new(m.clone()) {
            Ok(d) => Ok(d),
            Err(QemError::NotPositive) => DensityMatrix::non_physical(m),
            Err(e) => Err(e),
        }
    }

    /// Draws one variant according to the response weights.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DrawnVariant<'_>> {
        match &self.form {
            Form::Explicit(variants) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = variants.len() - 1;
                for (i, v) in variants.iter().enumerate() {
                    acc += v.weight;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                let v = &variants[pick];
                Ok(DrawnVariant {
                    id: pick as u64,
                    sign: v.sign,
                    state: Cow::Borrowed(&v.state),
                })
            }
            Form::Product(p) => {
                let mut choice = BTreeMap::new();
                let mut sign = 1i8;
                // FNV-1a over the non-identity choices
                let mut id: u64 = 0xcbf2_9ce4_8422_2325;
                for (&loc, quasi) in &p.locations {
                    let j = quasi.draw(rng);
                    if quasi.coefficients[j] < 0.0 {
                        sign = -sign;
                    }
                    if !quasi.corrections[j].is_identity_up_to_phase() {
                        for byte in loc.to_le_bytes().into_iter().chain([j as u8]) {
                            id ^= byte as u64;
                            id = id.wrapping_mul(0x0000_0100_0000_01b3);
                        }
                    }
                    choice.insert(loc, j);
                }
                let state = p.circuit.evolve_with(&p.initial, |loc, rho| {
                    let noisy = p.model.location(loc)?.apply(&rho)?;
                    match (choice.get(&loc), p.locations.get(&loc)) {
                        (Some(&j), Some(q)) => q.corrections[j].conjugate(&noisy),
                        _ => Ok(noisy),
                    }
                })?;
                Ok(DrawnVariant {
                    id,
                    sign,
                    state: Cow::Owned(state),
                })
            }
        }
    }
}
