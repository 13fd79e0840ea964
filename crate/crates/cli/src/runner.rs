//! Flattens a plan into experiments and executes them.

use qem_core::linalg::{ComplexMatrix, DensityMatrix, PauliString};
use qem_core::metrics::{
    compare_report, table1_prediction, Comparison, ExactInputs, MitigationReport, Prediction, TableParams,
};
use qem_core::mitigation::{
    combined_expectation_sampled, pec_build_ensemble, pec_synthetic_ensemble, purification_ensemble,
    subspace_ensemble, subspace_optimize_weights, sv_ensemble, sv_mitigated_state, sv_projector,
    build_extrapolation_plan, zne_ensemble, EmSource, ExpansionBasis, MethodTag, PurificationConfig,
    ResponseEnsemble, SymmetryGroup, ZneStrategy,
};
use qem_core::sampler::{
    derive_seed, direct_sv_estimate, linear_estimate, run_ensemble, run_unmitigated,
    sv_postprocess_estimate, Execution, ShotBatch,
};
use qem_core::{QemError, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{MethodSpec, SourceSpec, SvMode};
use crate::source::{Point, Source};
use crate::validate::{group_generators, Plan};

const DEFAULT_REG_TOL: f64 = 1e-10;

/// One `(lambda, method, observable)` cell of the sweep.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub index: usize,
    pub lambda_index: usize,
    pub method_index: usize,
    pub observable_index: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub exact_only: bool,
    pub keep_shots: bool,
    pub exec: Execution,
}

/// Shot-level results.
#[derive(Debug, Clone, Serialize)]
pub struct Sampled {
    pub estimate: f64,
    pub std_error: f64,
    pub unmitigated: f64,
    pub unmitigated_std_error: f64,
    /// Ratio of estimator variances at equal shot counts.
    pub overhead: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip)]
    pub batch: Option<ShotBatch>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub index: usize,
    pub method: String,
    pub lambda: f64,
    pub observable: String,
    pub ideal: f64,
    pub mitigated_exact: f64,
    pub report: MitigationReport,
    /// Measured against analytic metrics, when a closed form exists.
    pub comparison: Option<Comparison>,
    pub sampled: Option<Sampled>,
}

pub fn experiments(plan: &Plan) -> Vec<Experiment> {
    let mut out = Vec::new();
    for li in 0..plan.lambdas.len() {
        for mi in 0..plan.config.methods.len() {
            for oi in 0..plan.config.observables.len() {
                out.push(Experiment {
                    index: out.len(),
                    lambda_index: li,
                    method_index: mi,
                    observable_index: oi,
                });
            }
        }
    }
    out
}

/// Noisy states for every swept rate.
pub fn points(plan: &Plan) -> Result<Vec<Point>> {
    plan.lambdas.par_iter().map(|l| plan.source.point(*l)).collect()
}

/// What the sampled stage needs besides the report.
enum Sampler {
    Linear(ResponseEnsemble),
    SvPostprocess(SymmetryGroup),
    SvDirect(SymmetryGroup),
    Combined(SymmetryGroup, u32),
}

struct Built {
    method: MethodTag,
    rho_em: ComplexMatrix,
    q_em: f64,
    prediction: Option<Prediction>,
    notes: Vec<String>,
    sampler: Sampler,
}

fn linear(ens: ResponseEnsemble, prediction: Option<Prediction>) -> Result<Built> {
    Ok(Built {
        method: ens.method(),
        rho_em: ens.mitigated_state()?.into_matrix(),
        q_em: ens.q_em(),
        prediction,
        notes: Vec::new(),
        sampler: Sampler::Linear(ens),
    })
}

fn group_for(generators: &Option<Vec<PauliString>>, source: &Source) -> Result<(SymmetryGroup, Option<Vec<f64>>)> {
    let gens = group_generators(generators, source)
        .ok_or_else(|| QemError::InvalidParameter("no symmetry generators".into()))?;
    let group = SymmetryGroup::from_generators(gens)?;
    group.check_stabilizes(source.rho0().matrix())?;
    let fractions = source.detected_fractions(gens);
    let group = match &fractions {
        Some(f) => group.with_fractions(f.clone())?,
        None => group,
    };
    Ok((group, fractions))
}

fn build(plan: &Plan, method: &MethodSpec, point: &Point, target: &PauliString) -> Result<Built> {
    let source = &plan.source;
    let lambda = point.lambda;
    let approx = !source.is_synthetic();
    let approx_note = || "analytic values assume the orthogonal-error model; approximate for circuits".to_string();
    let mut built = match method {
        MethodSpec::Pec {
            lambda_em,
            lambda_em_fraction,
        } => {
            let lem = lambda_em.unwrap_or(lambda * lambda_em_fraction.unwrap_or(0.0));
            let ens = match (source, &plan.config.source) {
                (Source::Synthetic(m), _) => pec_synthetic_ensemble(m, lambda, lem)?,
                (Source::Circuit { circuit, initial, .. }, SourceSpec::Circuit { .. }) => {
                    pec_build_ensemble(circuit, &source.rescaled_model(lambda)?, initial, lem)?
                }
                _ => unreachable!("source kind matches its spec"),
            };
            let pred = table1_prediction(&TableParams::Pec { lambda_em: lem }, lambda)?;
            linear(ens, Some(pred))?
        }
        MethodSpec::Zne { n, m0, rate_factors } => {
            let strategy = match rate_factors {
                Some(f) => ZneStrategy::Explicit {
                    rates: f.iter().map(|x| x * lambda).collect(),
                },
                None => ZneStrategy::EqualGap { m0: m0.unwrap_or(1) },
            };
            let zplan = build_extrapolation_plan(lambda, *n, &strategy)?;
            let states: Vec<DensityMatrix> = zplan
                .rates
                .iter()
                .map(|r| source.state_at(*r))
                .collect::<Result<_>>()?;
            let pred = if zplan.m0 == Some(1) {
                table1_prediction(&TableParams::Zne { n: *n as u32 }, lambda)?
            } else {
                let el = lambda.exp();
                Prediction {
                    b: el / zplan.a,
                    c: (zplan.a_abs / zplan.a).powi(2),
                    r: el / zplan.a_abs,
                }
            };
            linear(zne_ensemble(&zplan, &states)?, Some(pred))?
        }
        MethodSpec::Sv { generators, mode } => {
            let (group, fractions) = group_for(generators, source)?;
            match mode {
                SvMode::Postprocess => {
                    let pred = fractions
                        .map(|f| table1_prediction(&TableParams::Sv { fractions: f }, lambda))
                        .transpose()?;
                    let ens = sv_ensemble(&point.rho, &group)?;
                    Built {
                        method: MethodTag::Sv,
                        rho_em: ens.mitigated_state()?.into_matrix(),
                        q_em: ens.q_em(),
                        prediction: pred,
                        notes: Vec::new(),
                        sampler: Sampler::SvPostprocess(group),
                    }
                }
                SvMode::Direct => {
                    let pred = fractions
                        .map(|f| table1_prediction(&TableParams::DirectSv { fractions: f }, lambda))
                        .transpose()?;
                    let (state, q) = sv_mitigated_state(&point.rho, &group)?;
                    Built {
                        method: MethodTag::DirectSv,
                        rho_em: state.into_matrix(),
                        q_em: q,
                        prediction: pred,
                        notes: Vec::new(),
                        sampler: Sampler::SvDirect(group),
                    }
                }
            }
        }
        MethodSpec::Subspace {
            operators,
            weights,
            optimize_for,
            reg_tol,
        } => {
            let basis = match (weights, optimize_for) {
                (Some(w), _) => ExpansionBasis::from_paulis(operators, w.clone())?,
                (None, Some(t)) => {
                    let ops: Vec<ComplexMatrix> = operators.iter().map(PauliString::to_matrix).collect();
                    subspace_optimize_weights(&point.rho, &ops, &t.to_matrix(), reg_tol.unwrap_or(DEFAULT_REG_TOL))?
                }
                (None, None) => {
                    let ops: Vec<ComplexMatrix> = operators.iter().map(PauliString::to_matrix).collect();
                    subspace_optimize_weights(&point.rho, &ops, &target.to_matrix(), reg_tol.unwrap_or(DEFAULT_REG_TOL))?
                }
            };
            linear(subspace_ensemble(&point.rho, &basis)?, None)?
        }
        MethodSpec::Purification { n_copies } => {
            let cfg = PurificationConfig::new(*n_copies)?;
            let pred = point
                .error_moment(*n_copies)
                .map(|t| {
                    table1_prediction(
                        &TableParams::Purification {
                            n: *n_copies,
                            error_moment: t.clamp(0.0, 1.0),
                        },
                        lambda,
                    )
                })
                .transpose()?;
            linear(purification_ensemble(&point.rho, cfg)?, pred)?
        }
        MethodSpec::Combined { generators, n_copies } => {
            let (group, _) = group_for(generators, source)?;
            let pi = sv_projector(&group);
            let pow = point.rho.sandwich(&pi, &pi)?.pow(*n_copies);
            let q = pow.trace().re;
            if q <= 1e-14 {
                return Err(QemError::ZeroDenominator);
            }
            Built {
                method: MethodTag::Combined,
                rho_em: pow.scale_real(1.0 / q),
                q_em: q,
                prediction: None,
                notes: Vec::new(),
                sampler: Sampler::Combined(group, *n_copies),
            }
        }
    };
    if approx && built.prediction.is_some() && !matches!(method, MethodSpec::Zne { .. }) {
        built.notes.push(approx_note());
    }
    Ok(built)
}

fn sample(
    built: &Built,
    point: &Point,
    obs: &PauliString,
    n_cir: usize,
    seeds: (u64, u64),
    opts: RunOptions,
) -> Result<Sampled> {
    let (seed, seed_unmit) = seeds;
    let exec = opts.exec;
    let base = run_unmitigated(&point.rho, obs, n_cir, seed_unmit, exec)?;
    let base_est = linear_estimate(&base, 1.0)?;
    let (estimate, variance, acceptance_rate, warning, batch) = match &built.sampler {
        Sampler::Linear(ens) => {
            let batch = run_ensemble(ens, obs, n_cir, seed, exec)?;
            let e = linear_estimate(&batch, ens.q_em())?;
            (e.mean, e.variance, None, None, batch)
        }
        Sampler::SvPostprocess(group) => {
            let (r, batch) = sv_postprocess_estimate(&point.rho, group, obs, n_cir, seed, exec)?;
            (r.estimate, r.variance, None, r.warning, batch)
        }
        Sampler::SvDirect(group) => {
            let d = direct_sv_estimate(&point.rho, group, obs, n_cir, seed, exec)?;
            (d.estimate, d.variance, Some(d.acceptance_rate), None, d.batch)
        }
        Sampler::Combined(group, n) => {
            let c = combined_expectation_sampled(EmSource::State(&point.rho), group, *n, obs, n_cir, seed, exec)?;
            (c.ratio.estimate, c.ratio.variance, None, c.ratio.warning, c.batch)
        }
    };
    let overhead = (base_est.variance > 0.0).then(|| variance / base_est.variance);
    Ok(Sampled {
        estimate,
        std_error: variance.sqrt(),
        unmitigated: base_est.mean,
        unmitigated_std_error: base_est.std_error(),
        overhead,
        acceptance_rate,
        warning,
        batch: opts.keep_shots.then_some(batch),
    })
}

/// Runs a single experiment against precomputed noisy states.
pub fn run_one(plan: &Plan, points: &[Point], exp: &Experiment, seed: u64, opts: RunOptions) -> Result<Outcome> {
    let point = &points[exp.lambda_index];
    let method = &plan.config.methods[exp.method_index];
    let obs = &plan.config.observables[exp.observable_index];
    let built = build(plan, method, point, obs)?;
    let obs_m = obs.to_matrix();
    let mut report = MitigationReport::exact(ExactInputs {
        method: built.method,
        lambda: point.lambda,
        rho0: plan.source.rho0(),
        rho_lambda: &point.rho,
        rho_em: &built.rho_em,
        q_em: built.q_em,
        observable: &obs_m,
    })?;
    report.notes.extend(built.notes.iter().cloned());
    if let Some(p) = built.prediction {
        report = report.with_prediction(p);
    }
    let ideal = plan.source.rho0().expectation(&obs_m)?;
    let mitigated_exact = qem_core::linalg::trace_product(&obs_m, &built.rho_em)?.re;
    let sampled = if opts.exact_only {
        None
    } else {
        let n_cir = plan.config.n_cir;
        let seeds = (
            derive_seed(seed, exp.index as u64, "mitigated"),
            // shared by every method at the same (lambda, observable)
            derive_seed(
                seed,
                (exp.lambda_index * plan.config.observables.len() + exp.observable_index) as u64,
                "unmitigated",
            ),
        );
        report.n_cir = n_cir;
        Some(sample(&built, point, obs, n_cir, seeds, opts)?)
    };
    if let Some(w) = sampled.as_ref().and_then(|s| s.warning.clone()) {
        report.notes.push(w);
    }
    let tol = plan.config.tolerances.unwrap_or_default();
    let comparison = report.analytic_prediction.map(|p| compare_report(&report, p, tol));
    Ok(Outcome {
        index: exp.index,
        method: plan.labels[exp.method_index].clone(),
        lambda: point.lambda,
        observable: obs.to_string(),
        ideal,
        mitigated_exact,
        report,
        comparison,
        sampled,
    })
}

/// Runs every experiment on the current rayon pool. Results come back in
/// experiment order whatever the scheduling.
pub fn run_all(plan: &Plan, points: &[Point], seed: u64, opts: RunOptions) -> Vec<(Experiment, Result<Outcome>)> {
    let exps = experiments(plan);
    let results: Vec<Result<Outcome>> = exps.par_iter().map(|e| run_one(plan, points, e, seed, opts)).collect();
    exps.into_iter().zip(results).collect()
}
