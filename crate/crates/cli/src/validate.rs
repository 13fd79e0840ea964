//! Static checks run before any computation.

use std::fmt;
use std::path::Path;

use qem_core::linalg::{PauliString, DEFAULT_DIM_CAP};
use qem_core::mitigation::SymmetryGroup;
use qem_core::noise::ComponentStyle;

use crate::config::{ExperimentConfig, MethodSpec, SourceSpec, CONFIG_SCHEMA_VERSION};
use crate::error::LabError;
use crate::source::Source;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Schema,
    Cap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.severity {
            Severity::Schema => write!(f, "error: {}", self.message),
            Severity::Cap => write!(f, "cap: {}", self.message),
        }
    }
}

/// A config that passed validation, with its source built.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: ExperimentConfig,
    pub source: Source,
    pub lambdas: Vec<f64>,
    /// Output label per method block (`pec`, or `pec_2` for a repeated method).
    pub labels: Vec<String>,
}

struct Diags(Vec<Diagnostic>);

impl Diags {
    fn schema(&mut self, msg: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Schema,
            message: msg.into(),
        });
    }

    fn cap(&mut self, msg: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Cap,
            message: msg.into(),
        });
    }
}

/// Every problem found in `cfg`, plus the built source when it could be built.
/// `base` resolves relative paths inside the config.
pub fn diagnose(cfg: &ExperimentConfig, base: &Path) -> (Vec<Diagnostic>, Option<Source>) {
    let mut d = Diags(Vec::new());
    if cfg.schema_version != CONFIG_SCHEMA_VERSION {
        d.schema(format!(
            "schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
            cfg.schema_version
        ));
    }
    if cfg.n_cir < 1 {
        d.schema("n_cir must be at least 1");
    }
    if let Some(t) = &cfg.tolerances {
        if !(t.b > 0.0 && t.c > 0.0 && t.r > 0.0) {
            d.schema("tolerances must be positive");
        }
    }
    for (i, l) in cfg.lambdas.iter().enumerate() {
        if !(l.is_finite() && *l > 0.0) {
            d.schema(format!("lambdas[{i}] = {l}: rates must be finite and > 0"));
        }
    }

    let source = source_checks(cfg, base, &mut d);
    let lambdas = effective_lambdas(cfg, source.as_ref());
    if lambdas.is_empty() && !matches!(cfg.source, SourceSpec::Circuit { .. }) {
        d.schema("lambdas: a synthetic source needs at least one rate");
    }
    if let Some(src) = &source {
        if let Some(native) = src.native_lambda() {
            if native <= 0.0 && !cfg.lambdas.is_empty() {
                d.schema("lambdas: a noiseless circuit cannot be rescaled to a positive rate");
            }
            if cfg.lambdas.is_empty() && native <= 0.0 && !cfg.methods.is_empty() {
                d.schema("circuit noise model has rate 0; nothing to mitigate");
            }
            if let Some(share) = src.max_rate_share() {
                for l in &lambdas {
                    if share * l > 1.0 {
                        d.schema(format!("lambda {l} pushes a location rate above 1"));
                    }
                }
            }
        }
    }

    let nq = source.as_ref().and_then(Source::num_qubits);
    for (i, o) in cfg.observables.iter().enumerate() {
        if !o.is_hermitian() {
            d.schema(format!("observables[{i}] = {o} is not Hermitian"));
        }
        match (&source, nq) {
            (Some(_), None) => d.schema(format!(
                "observables[{i}]: source dimension is not a power of two, Pauli observables do not apply"
            )),
            (Some(_), Some(n)) if o.num_qubits() != n => {
                d.schema(format!("observables[{i}] = {o} acts on {} qubits, source has {n}", o.num_qubits()))
            }
            _ => {}
        }
    }

    for (i, m) in cfg.methods.iter().enumerate() {
        method_checks(i, m, cfg, source.as_ref(), &lambdas, &mut d);
    }
    (d.0, source)
}

fn source_checks(cfg: &ExperimentConfig, base: &Path, d: &mut Diags) -> Option<Source> {
    match &cfg.source {
        SourceSpec::Synthetic { dim, style } => {
            if *dim > DEFAULT_DIM_CAP {
                d.cap(format!("synthetic dim {dim} exceeds {DEFAULT_DIM_CAP}"));
                return None;
            }
            if let ComponentStyle::SymmetrySectors { generators, .. } = style {
                let k = generators.first().map(|g| g.num_qubits());
                if k.is_some_and(|k| 1usize << k != *dim) {
                    d.schema(format!("source: sector generators act on {} qubits but dim is {dim}", k.unwrap_or(0)));
                    return None;
                }
            }
        }
        SourceSpec::Circuit { circuit: Some(doc), path: None } => {
            if doc.num_qubits > 12 {
                d.cap(format!("{} qubits exceed the {DEFAULT_DIM_CAP}-dimensional cap", doc.num_qubits));
                return None;
            }
        }
        SourceSpec::Circuit { .. } => {}
    }
    match Source::build(&cfg.source, base) {
        Ok(s) => Some(s),
        Err(msg) => {
            if msg.contains("outside 1..=12") {
                d.cap(msg);
            } else {
                d.schema(msg);
            }
            None
        }
    }
}

/// The swept rates: the config grid, or the circuit's own rate.
pub fn effective_lambdas(cfg: &ExperimentConfig, source: Option<&Source>) -> Vec<f64> {
    if !cfg.lambdas.is_empty() {
        return cfg.lambdas.clone();
    }
    source
        .and_then(Source::native_lambda)
        .filter(|l| *l > 0.0)
        .map(|l| vec![l])
        .unwrap_or_default()
}

/// Generators used by an SV/combined block.
pub fn group_generators<'a>(explicit: &'a Option<Vec<PauliString>>, source: &'a Source) -> Option<&'a [PauliString]> {
    explicit.as_deref().or_else(|| source.sector_generators())
}

fn method_checks(
    i: usize,
    m: &MethodSpec,
    cfg: &ExperimentConfig,
    source: Option<&Source>,
    lambdas: &[f64],
    d: &mut Diags,
) {
    let at = format!("methods[{i}] ({})", m.name());
    let nq = source.and_then(Source::num_qubits);
    match m {
        MethodSpec::Pec {
            lambda_em,
            lambda_em_fraction,
        } => {
            match (lambda_em, lambda_em_fraction) {
                (Some(_), Some(_)) => d.schema(format!("{at}: give lambda_em or lambda_em_fraction, not both")),
                (Some(l), None) => {
                    if !(*l >= 0.0) {
                        d.schema(format!("{at}: lambda_em = {l} must be >= 0"));
                    }
                    for lam in lambdas {
                        if l > lam {
                            d.schema(format!(
                                "{at}: lambda_em = {l} exceeds lambda = {lam}; cancellation can only lower the rate"
                            ));
                        }
                    }
                }
                (None, Some(f)) if !(0.0..=1.0).contains(f) => {
                    d.schema(format!("{at}: lambda_em_fraction = {f} outside [0, 1]"))
                }
                _ => {}
            }
            if let Some(Source::Circuit { model, .. }) = source {
                for loc in model.locations() {
                    if loc.channel.as_pauli().is_none() {
                        d.schema(format!("{at}: location {} has a Kraus channel; cancellation needs Pauli channels", loc.id));
                    }
                }
            }
        }
        MethodSpec::Zne { n, m0, rate_factors } => {
            if *n == 0 {
                d.schema(format!("{at}: n must be at least 1"));
            } else if n % 2 == 0 {
                d.schema(format!(
                    "{at}: n = {n} is even; analytical extrapolation is only applicable with an odd number of data points (A < 1 for even n)"
                ));
            }
            if m0.is_some() && rate_factors.is_some() {
                d.schema(format!("{at}: give m0 or rate_factors, not both"));
            }
            if m0 == &Some(0) {
                d.schema(format!("{at}: m0 must be at least 1"));
            }
            if let Some(f) = rate_factors {
                if f.len() != *n {
                    d.schema(format!("{at}: {} rate_factors for n = {n}", f.len()));
                }
                if f.first().is_some_and(|x| *x != 1.0) {
                    d.schema(format!("{at}: the first rate factor must be 1"));
                }
                if f.windows(2).any(|w| !(w[1] > w[0])) {
                    d.schema(format!("{at}: rate_factors must be strictly increasing"));
                }
            }
            let top = match (rate_factors, m0) {
                (Some(f), _) => f.last().copied().unwrap_or(1.0),
                (None, m0) => {
                    let m0 = m0.unwrap_or(1).max(1) as f64;
                    (m0 + n.saturating_sub(1) as f64) / m0
                }
            };
            if let Some(share) = source.and_then(Source::max_rate_share) {
                for l in lambdas {
                    if share * l * top > 1.0 {
                        d.schema(format!("{at}: boosted rate {} pushes a location rate above 1", l * top));
                    }
                }
            }
        }
        MethodSpec::Sv { generators, .. } | MethodSpec::Combined { generators, .. } => {
            if let MethodSpec::Combined { n_copies: 0, .. } = m {
                d.schema(format!("{at}: n_copies must be at least 1"));
            }
            let Some(src) = source else { return };
            let Some(gens) = group_generators(generators, src) else {
                d.schema(format!("{at}: no generators given and the source has no symmetry sectors"));
                return;
            };
            if gens.is_empty() {
                d.schema(format!("{at}: empty generator list"));
                return;
            }
            if let Some(g) = gens.iter().find(|g| Some(g.num_qubits()) != nq) {
                d.schema(format!("{at}: generator {g} does not match the source qubit count"));
                return;
            }
            match SymmetryGroup::from_generators(gens) {
                Err(e) => d.schema(format!("{at}: {e}")),
                Ok(group) => {
                    if let Err(e) = group.check_stabilizes(src.rho0().matrix()) {
                        d.schema(format!("{at}: {e}"));
                    }
                    for o in &cfg.observables {
                        if let Err(e) = group.check_commutes(o) {
                            d.schema(format!("{at}: observable must commute with the symmetries: {e}"));
                        }
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
            if operators.is_empty() {
                d.schema(format!("{at}: operators must not be empty"));
            }
            if let Some(g) = operators.iter().chain(optimize_for).find(|g| nq.is_some_and(|n| g.num_qubits() != n)) {
                d.schema(format!("{at}: {g} does not match the source qubit count"));
            }
            match (weights, optimize_for) {
                (Some(_), Some(_)) => d.schema(format!("{at}: give weights or optimize_for, not both")),
                (Some(w), None) => {
                    if w.len() != operators.len() {
                        d.schema(format!("{at}: {} weights for {} operators", w.len(), operators.len()));
                    }
                    let s: f64 = w.iter().sum();
                    if (s - 1.0).abs() > 1e-9 {
                        d.schema(format!("{at}: weights sum to {s}, not 1"));
                    }
                }
                _ => {}
            }
            if reg_tol.is_some_and(|t| !(t > 0.0)) {
                d.schema(format!("{at}: reg_tol must be positive"));
            }
        }
        MethodSpec::Purification { n_copies } => {
            if *n_copies == 0 {
                d.schema(format!("{at}: n_copies must be at least 1"));
            }
        }
    }
}

/// Output labels; a method used more than once gets a numeric suffix.
pub fn method_labels(methods: &[MethodSpec]) -> Vec<String> {
    let mut seen = std::collections::BTreeMap::<&str, usize>::new();
    methods
        .iter()
        .map(|m| {
            let total = methods.iter().filter(|o| o.name() == m.name()).count();
            let k = seen.entry(m.name()).or_insert(0);
            *k += 1;
            if total > 1 {
                format!("{}_{}", m.name(), k)
            } else {
                m.name().to_string()
            }
        })
        .collect()
}

/// Validates `cfg`, failing with every schema diagnostic (exit 2) or, when
/// those are clean, every cap diagnostic (exit 3).
pub fn plan(cfg: ExperimentConfig, base: &Path) -> Result<Plan, LabError> {
    let (diags, source) = diagnose(&cfg, base);
    let schema: Vec<String> = diags
        .iter()
        .filter(|d| d.severity == Severity::Schema)
        .map(|d| d.message.clone())
        .collect();
    if !schema.is_empty() {
        return Err(LabError::Schema(schema));
    }
    let caps: Vec<String> = diags.into_iter().map(|d| d.message).collect();
    if !caps.is_empty() {
        return Err(LabError::Cap(caps.join("; ")));
    }
    let source = source.ok_or_else(|| LabError::Schema(vec!["source could not be built".into()]))?;
    let lambdas = effective_lambdas(&cfg, Some(&source));
    let labels = method_labels(&cfg.methods);
    Ok(Plan {
        config: cfg,
        source,
        lambdas,
        labels,
    })
}
