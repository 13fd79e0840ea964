//! Fidelity boost, sampling overhead and extraction rate: measured from
//! states or shots, and predicted in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{QemError, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix};
use crate::mitigation::MethodTag;

const FID_TOL: f64 = 1e-12;

/// `(B, C, r)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub b: f64,
    pub c: f64,
    pub r: f64,
}

/// Measured metrics of one method run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationReport {
    pub method: MethodTag,
    pub lambda: f64,
    pub p_em: f64,
    pub q_em: f64,
    pub fidelity_boost: f64,
    pub sampling_overhead: f64,
    pub extraction_rate: f64,
    pub bias_before: f64,
    pub bias_after: f64,
    /// Single-shot variances; divide by `n_cir` for the estimator variance.
    pub variance_before: f64,
    pub variance_after: f64,
    /// `0` for exact (matrix) evaluation.
    pub n_cir: usize,
    pub analytic_prediction: Option<Prediction>,
    pub notes: Vec<String>,
}

/// Inputs for an exact-mode report.
#[derive(Debug, Clone, Copy)]
pub struct ExactInputs<'a> {
    pub method: MethodTag,
    pub lambda: f64,
    pub rho0: &'a DensityMatrix,
    pub rho_lambda: &'a DensityMatrix,
    /// Normalised mitigated state (possibly non-physical).
    pub rho_em: &'a ComplexMatrix,
    pub q_em: f64,
    pub observable: &'a ComplexMatrix,
}

impl MitigationReport {
    /// Metrics from matrices: `p_em` from fidelities, `C = q^-2` (`q^-1` for
    /// direct post-selection, where rejected shots cost no sign cancellation).
    pub fn exact(inp: ExactInputs<'_>) -> Result<Self> {
        let b = fidelity_boost(inp.rho0, inp.rho_em, inp.rho_lambda)?;
        let p_em = 1.0 / b;
        let c = if inp.method == MethodTag::DirectSv {
            1.0 / inp.q_em
        } else {
            1.0 / (inp.q_em * inp.q_em)
        };
        let ideal = inp.rho0.expectation(inp.observable)?;
        let noisy = inp.rho_lambda.expectation(inp.observable)?;
        let em = crate::linalg::trace_product(inp.observable, inp.rho_em)?.re;
        let mut notes = Vec::new();
        if p_em > 1.0 + 1e-9 {
            notes.push(format!("p_em = {p_em:.6} exceeds 1: mitigation lowered the fidelity"));
        }
        if inp.q_em > p_em * (1.0 + 1e-9) {
            notes.push("q_em exceeds p_em".into());
        }
        notes.push("p_em uses the ideal state; simulator-only quantity".into());
        Ok(Self {
            method: inp.method,
            lambda: inp.lambda,
            p_em,
            q_em: inp.q_em,
            fidelity_boost: b,
            sampling_overhead: c,
            extraction_rate: inp.q_em / p_em,
            bias_before: noisy - ideal,
            bias_after: em - ideal,
            variance_before: 1.0 - noisy * noisy,
            variance_after: (c - em * em).max(0.0),
            n_cir: 0,
            analytic_prediction: None,
            notes,
        })
    }

    pub fn with_prediction(mut self, p: Prediction) -> Self {
        self.analytic_prediction = Some(p);
        self
    }
}

/// `Tr(rho0 rho_em) / Tr(rho0 rho_lambda)`
pub fn fidelity_boost(rho0: &DensityMatrix, rho_em: &ComplexMatrix, rho_lambda: &DensityMatrix) -> Result<f64> {
    let f_lambda = rho0.overlap(rho_lambda)?;
    if f_lambda <= FID_TOL {
        return Err(QemError::DegenerateOverlap);
    }
    Ok(crate::linalg::trace_product(rho0, rho_em)?.re / f_lambda)
}

/// `Var[em] / Var[unmitigated]`
pub fn empirical_overhead(var_em: f64, var_unmit: f64) -> Result<f64> {
    if var_unmit <= 0.0 {
        return Err(QemError::ZeroDenominator);
    }
    Ok(var_em / var_unmit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingParams {
    pub epsilon: f64,
    pub delta: f64,
    pub range_em: f64,
    pub range_unmit: f64,
}

impl HoeffdingParams {
    pub fn new(epsilon: f64, delta: f64, range_em: f64, range_unmit: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) || !(range_em > 0.0) || !(range_unmit > 0.0) {
            return Err(QemError::InvalidParameter(
                "need epsilon > 0, 0 < delta < 1 and positive ranges".into(),
            ));
        }
        Ok(Self {
            epsilon,
            delta,
            range_em,
            range_unmit,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoeffdingOverhead {
    pub n_cir_em: f64,
    pub n_cir_unmit: f64,
    pub ratio: f64,
}

/// Shots to reach precision `epsilon` with confidence `1 - delta`:
/// `ln(2/delta) / (2 epsilon^2) * range^2`.
pub fn hoeffding_overhead(p: &HoeffdingParams) -> HoeffdingOverhead {
    let base = (2.0 / p.delta).ln() / (2.0 * p.epsilon * p.epsilon);
    let n_em = base * p.range_em * p.range_em;
    let n_un = base * p.range_unmit * p.range_unmit;
    HoeffdingOverhead {
        n_cir_em: n_em,
        n_cir_unmit: n_un,
        ratio: n_em / n_un,
    }
}

/// Parameters of a closed-form row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum TableParams {
    Pec { lambda_em: f64 },
    /// Equal-gap extrapolation with `m0 = 1`.
    Zne { n: u32 },
    /// Detected-fault fractions `f_S`, one per group element.
    Sv { fractions: Vec<f64> },
    DirectSv { fractions: Vec<f64> },
    /// `error_moment = Tr(rho_err^n)`.
    Purification { n: u32, error_moment: f64 },
}

impl TableParams {
    pub fn method(&self) -> MethodTag {
        match self {
            TableParams::Pec { .. } => MethodTag::Pec,
            TableParams::Zne { .. } => MethodTag::Zne,
            TableParams::Sv { .. } => MethodTag::Sv,
            TableParams::DirectSv { .. } => MethodTag::DirectSv,
            TableParams::Purification { .. } => MethodTag::Purification,
        }
    }
}

/// Closed-form `(B, C, r)` under the Poisson orthogonal-error model.
pub fn table1_prediction(params: &TableParams, lambda: f64) -> Result<Prediction> {
    if !(lambda >= 0.0) {
        return Err(QemError::NegativeRate(lambda));
    }
    let el = lambda.exp();
    Ok(match params {
        TableParams::Pec { lambda_em } => {
            if !(*lambda_em >= 0.0 && *lambda_em <= lambda) {
                return Err(QemError::InvalidParameter(format!(
                    "lambda_em {lambda_em} outside [0, {lambda}]"
                )));
            }
            let d = lambda - lambda_em;
            Prediction {
                b: d.exp(),
                c: (4.0 * d).exp(),
                r: (-d).exp(),
            }
        }
        TableParams::Zne { n } => {
            if *n == 0 {
                return Err(QemError::InvalidPlan("n must be positive".into()));
            }
            if n % 2 == 0 {
                return Err(QemError::EvenDataPoints(*n as usize));
            }
            let a = (el - 1.0).powi(*n as i32) + 1.0;
            let a_abs = (el + 1.0).powi(*n as i32) - 1.0;
            Prediction {
                b: el / a,
                c: (a_abs / a).powi(2),
                r: el / a_abs,
            }
        }
        TableParams::Sv { fractions } | TableParams::DirectSv { fractions } => {
            if fractions.is_empty() || fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
                return Err(QemError::InvalidParameter("fractions must lie in [0, 1]".into()));
            }
            let s: f64 = fractions.iter().map(|f| (-2.0 * f * lambda).exp()).sum();
            let b = fractions.len() as f64 / s;
            let c = if matches!(params, TableParams::Sv { .. }) { b * b } else { b };
            Prediction { b, c, r: 1.0 }
        }
        TableParams::Purification { n, error_moment } => {
            if *n == 0 {
                return Err(QemError::InvalidParameter("n must be >= 1".into()));
            }
            if !(0.0..=1.0).contains(error_moment) {
                return Err(QemError::InvalidParameter(format!(
                    "error moment {error_moment} outside [0, 1]"
                )));
            }
            let den = 1.0 + (el - 1.0).powi(*n as i32) * error_moment;
            let nf = *n as f64;
            Prediction {
                b: el / den,
                c: ((nf * lambda).exp() / den).powi(2),
                r: (-(nf - 1.0) * lambda).exp(),
            }
        }
    })
}

/// Upper bound on the equal-gap extraction rate:
/// `binom(n + m0 - 2, n - 1)^-1 (1 + e^{lambda/m0})^{1-n}`.
pub fn equal_gap_bound(n: u32, m0: u32, lambda: f64) -> Result<f64> {
    if n == 0 || m0 == 0 {
        return Err(QemError::InvalidParameter("n and m0 must be positive".into()));
    }
    let k = (n - 1) as u64;
    let top = (n + m0 - 2) as u64;
    let mut binom = 1.0f64;
    for i in 0..k {
        binom = binom * (top - i) as f64 / (i + 1) as f64;
    }
    Ok((1.0 + (lambda / m0 as f64).exp()).powi(1 - n as i32) / binom)
}

/// Lower bound on purification's boost at fidelity `f`, from `Tr(rho_err^n) <= 1`.
pub fn purification_boost_lower_bound(fidelity: f64, n: u32) -> f64 {
    let inv = 1.0 / fidelity;
    inv / (1.0 + (inv - 1.0).powi(n as i32))
}

/// Lower bound on purification's overhead at rate `lambda`, from `Tr(rho_err^n) <= 1`.
pub fn purification_overhead_lower_bound(lambda: f64, n: u32) -> f64 {
    ((n as f64 * lambda).exp() / (1.0 + (lambda.exp() - 1.0).powi(n as i32))).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub b: f64,
    pub c: f64,
    pub r: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            b: 0.05,
            c: 1.0,
            r: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub rel_b: f64,
    pub rel_c: f64,
    pub rel_r: f64,
    pub pass_b: bool,
    pub pass_c: bool,
    pub pass_r: bool,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.pass_b && self.pass_c && self.pass_r
    }
}

fn rel(measured: f64, predicted: f64) -> f64 {
    if measured == predicted {
        0.0
    } else {
        (measured - predicted).abs() / predicted.abs().max(f64::MIN_POSITIVE)
    }
}

/// Relative errors of the measured metrics against a prediction.
pub fn compare_report(report: &MitigationReport, analytic: Prediction, tol: Tolerances) -> Comparison {
    let rel_b = rel(report.fidelity_boost, analytic.b);
    let rel_c = rel(report.sampling_overhead, analytic.c);
    let rel_r = rel(report.extraction_rate, analytic.r);
    Comparison {
        rel_b,
        rel_c,
        rel_r,
        pass_b: rel_b <= tol.b,
        pass_c: rel_c <= tol.c,
        pass_r: rel_r <= tol.r,
    }
}
