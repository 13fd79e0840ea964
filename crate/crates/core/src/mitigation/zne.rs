//! Richardson coefficients and analytical (exponentially rescaled) extrapolation.

use serde::{Deserialize, Serialize};

use crate::error::{QemError, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix};
use crate::mitigation::ensemble::{ResponseEnsemble, Variant};
use crate::mitigation::MethodTag;

/// `gamma_i = prod_{k != i} lambda_k / (lambda_k - lambda_i)`
pub fn richardson_coeffs(rates: &[f64]) -> Result<Vec<f64>> {
    if rates.is_empty() {
        return Err(QemError::InvalidPlan("no probed rates".into()));
    }
    for (i, &r) in rates.iter().enumerate() {
        if !(r > 0.0) || !r.is_finite() {
            return Err(QemError::InvalidPlan(format!("rate {r} must be positive")));
        }
        if i > 0 {
            if r == rates[i - 1] {
                return Err(QemError::DuplicateRates);
            }
            if r < rates[i - 1] {
                return Err(QemError::InvalidPlan("rates must be strictly increasing".into()));
            }
        }
    }
    Ok((0..rates.len())
        .map(|i| {
            rates
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &lk)| lk / (lk - rates[i]))
                .product()
        })
        .collect())
}

/// `(A, A_abs) = (sum gamma_i e^{lambda_i}, sum |gamma_i| e^{lambda_i})` for
/// any valid rate tuple, odd or even.
pub fn analytic_normalizers(rates: &[f64]) -> Result<(f64, f64)> {
    let gamma = richardson_coeffs(rates)?;
    Ok(gamma
        .iter()
        .zip(rates)
        .fold((0.0, 0.0), |(a, b), (g, l)| (a + g * l.exp(), b + g.abs() * l.exp())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ZneStrategy {
    /// Caller-chosen rates; the first must equal the circuit fault rate.
    Explicit { rates: Vec<f64> },
    /// `lambda_m = (m0 + m - 1) * lambda / m0` for `m = 1..=n`.
    EqualGap { m0: u32 },
}

impl Default for ZneStrategy {
    fn default() -> Self {
        ZneStrategy::EqualGap { m0: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolationPlan {
    pub lambda: f64,
    pub n: usize,
    pub rates: Vec<f64>,
    pub gamma: Vec<f64>,
    pub alpha: Vec<f64>,
    pub a: f64,
    pub a_abs: f64,
    pub gap: Option<f64>,
    pub m0: Option<u32>,
}

pub fn equal_gap_rates(lambda: f64, n: usize, m0: u32) -> Result<Vec<f64>> {
    if m0 == 0 {
        return Err(QemError::InvalidPlan("m0 must be at least 1".into()));
    }
    let beta = lambda / m0 as f64;
    Ok((0..n).map(|m| (m0 as usize + m) as f64 * beta).collect())
}

/// Builds and validates a plan: odd `n` and `A > 1` are required.
pub fn build_extrapolation_plan(
    lambda: f64,
    n: usize,
    strategy: &ZneStrategy,
) -> Result<ExtrapolationPlan> {
    if n == 0 {
        return Err(QemError::InvalidPlan("n must be positive".into()));
    }
    if n.is_multiple_of(2) {
        return Err(QemError::EvenDataPoints(n));
    }
    if !(lambda > 0.0) {
        return Err(QemError::InvalidPlan(format!("lambda {lambda} must be positive")));
    }
    let (rates, gap, m0) = match strategy {
        ZneStrategy::Explicit { rates } => {
            if rates.len() != n {
                return Err(QemError::LengthMismatch {
                    expected: n,
                    got: rates.len(),
                });
            }
            if (rates[0] - lambda).abs() > 1e-12 * lambda.max(1.0) {
                return Err(QemError::InvalidPlan(format!(
                    "first probed rate {} must equal lambda {lambda}",
                    rates[0]
                )));
            }
            (rates.clone(), None, None)
        }
        ZneStrategy::EqualGap { m0 } => (
            equal_gap_rates(lambda, n, *m0)?,
            Some(lambda / *m0 as f64),
            Some(*m0),
        ),
    };
    let gamma = richardson_coeffs(&rates)?;
    let alpha: Vec<f64> = gamma.iter().zip(&rates).map(|(g, l)| g * l.exp()).collect();
    let a: f64 = alpha.iter().sum();
    let a_abs: f64 = alpha.iter().map(|x| x.abs()).sum();
    if !(a > 1.0) && n > 1 {
        return Err(QemError::InvalidPlan(format!("A = {a} <= 1")));
    }
    Ok(ExtrapolationPlan {
        lambda,
        n,
        rates,
        gamma,
        alpha,
        a,
        a_abs,
        gap,
        m0,
    })
}

/// `(1/A) sum alpha_i v_i`
pub fn zne_mitigated_value(values: &[f64], plan: &ExtrapolationPlan) -> Result<f64> {
    if values.len() != plan.n {
        return Err(QemError::LengthMismatch {
            expected: plan.n,
            got: values.len(),
        });
    }
    Ok(values.iter().zip(&plan.alpha).map(|(v, a)| v * a).sum::<f64>() / plan.a)
}

/// `c_l = sum gamma_i (lambda_i / lambda)^l`
pub fn suppression_coeffs(plan: &ExtrapolationPlan, ell: u32) -> f64 {
    plan.gamma
        .iter()
        .zip(&plan.rates)
        .map(|(g, l)| g * (l / plan.lambda).powi(ell as i32))
        .sum()
}

/// Response ensemble over the states at each probed rate: weight
/// `|alpha_i| / A_abs`, sign of `alpha_i`, and `q_em = A / A_abs`.
pub fn zne_ensemble(plan: &ExtrapolationPlan, states: &[DensityMatrix]) -> Result<ResponseEnsemble> {
    if states.len() != plan.n {
        return Err(QemError::LengthMismatch {
            expected: plan.n,
            got: states.len(),
        });
    }
    let variants = plan
        .alpha
        .iter()
        .zip(states)
        .zip(&plan.rates)
        .map(|((a, s), l)| Variant {
            weight: a.abs() / plan.a_abs,
            sign: if *a < 0.0 { -1 } else { 1 },
            state: s.matrix().clone(),
            label: format!("lambda={l}"),
        })
        .collect();
    ResponseEnsemble::explicit(MethodTag::Zne, variants, plan.a / plan.a_abs)
}

/// `(1/A) sum alpha_i rho_{lambda_i}`
pub fn zne_mitigated_state(plan: &ExtrapolationPlan, states: &[DensityMatrix]) -> Result<ComplexMatrix> {
    if states.len() != plan.n {
        return Err(QemError::LengthMismatch {
            expected: plan.n,
            got: states.len(),
        });
    }
    let mut m = ComplexMatrix::zeros(states[0].dim());
    for (a, s) in plan.alpha.iter().zip(states) {
        m.add_scaled_real(s, a / plan.a);
    }
    Ok(m)
}
