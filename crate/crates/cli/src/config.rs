//! Experiment configuration files.

use std::path::{Path, PathBuf};

use qem_core::linalg::PauliString;
use qem_core::metrics::Tolerances;
use qem_core::noise::{CircuitDoc, ComponentStyle};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub source: SourceSpec,
    /// Circuit fault rates to sweep. Optional for circuit sources, where the
    /// model's own rate is used when empty.
    #[serde(default)]
    pub lambdas: Vec<f64>,
    pub methods: Vec<MethodSpec>,
    pub observables: Vec<PauliString>,
    pub n_cir: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Orthogonal-error model around `|0...0>`.
    Synthetic { dim: usize, style: ComponentStyle },
    /// Inline circuit document or a path relative to the config file.
    Circuit {
        #[serde(default)]
        circuit: Option<CircuitDoc>,
        #[serde(default)]
        path: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvMode {
    /// Hadamard-test post-processing with the ratio estimator.
    #[default]
    Postprocess,
    /// Measure the symmetries and discard failing shots.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Pec {
        /// Absolute target rate.
        #[serde(default)]
        lambda_em: Option<f64>,
        /// Target rate as a fraction of each swept rate.
        #[serde(default)]
        lambda_em_fraction: Option<f64>,
    },
    Zne {
        n: usize,
        /// Equal-gap offset; `lambda_m = (m0 + m - 1) lambda / m0`.
        #[serde(default)]
        m0: Option<u32>,
        /// Explicit probe rates as multiples of the swept rate (first = 1).
        #[serde(default)]
        rate_factors: Option<Vec<f64>>,
    },
    Sv {
        /// Defaults to the generators of a symmetry-sector source.
        #[serde(default)]
        generators: Option<Vec<PauliString>>,
        #[serde(default)]
        mode: SvMode,
    },
    Subspace {
        operators: Vec<PauliString>,
        /// Fixed weights summing to one.
        #[serde(default)]
        weights: Option<Vec<f64>>,
        /// Optimise the weights for this target instead.
        #[serde(default)]
        optimize_for: Option<PauliString>,
        #[serde(default)]
        reg_tol: Option<f64>,
    },
    Purification { n_copies: u32 },
    Combined {
        #[serde(default)]
        generators: Option<Vec<PauliString>>,
        n_copies: u32,
    },
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Pec { .. } => "pec",
            MethodSpec::Zne { .. } => "zne",
            MethodSpec::Sv { mode: SvMode::Direct, .. } => "direct_sv",
            MethodSpec::Sv { .. } => "sv",
            MethodSpec::Subspace { .. } => "subspace",
            MethodSpec::Purification { .. } => "purification",
            MethodSpec::Combined { .. } => "combined",
        }
    }
}

/// One line per configurable method, for `list-methods`.
pub const METHOD_HELP: &[(&str, &str)] = &[
    ("pec", "probabilistic error cancellation; lambda_em | lambda_em_fraction (default full)"),
    ("zne", "analytical extrapolation; n (odd), m0 | rate_factors"),
    ("sv", "symmetry verification; generators, mode = postprocess | direct"),
    ("subspace", "subspace expansion; operators, weights | optimize_for, reg_tol"),
    ("purification", "multi-copy purification; n_copies"),
    ("combined", "symmetry verification with purification; generators, n_copies"),
];

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::Schema(vec![format!("config: {e}")]))
    }

    /// Reads and parses a config; the returned bytes feed the manifest hash.
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), LabError> {
        let bytes = std::fs::read(path).map_err(|e| LabError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| LabError::Schema(vec!["config is not UTF-8".into()]))?;
        Ok((Self::from_json(&text)?, bytes))
    }
}
