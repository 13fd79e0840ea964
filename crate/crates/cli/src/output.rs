//! CSV, JSON-lines and manifest writers. Everything here runs on a single
//! thread after the experiments finish, so files are never interleaved.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::LabError;
use crate::runner::Outcome;

pub const RESULTS_CSV: &str = "results.csv";
pub const REPORTS_JSONL: &str = "reports.jsonl";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const PLOT_FILES: [(&str, Metric); 3] = [
    ("plot_B.csv", Metric::B),
    ("plot_C.csv", Metric::C),
    ("plot_r.csv", Metric::R),
];

pub const RESULTS_HEADER: &str = "method,lambda,B_analytic,B_measured,C_analytic,C_measured,r_analytic,r_measured,\
observable,p_em,q_em,ideal,bias_before,bias_after,estimate,std_error,unmitigated,C_sampled,n_cir,within_tolerance";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    B,
    C,
    R,
}

/// Nine significant digits, shortest round-trip form. Empty for `None`.
pub fn fmt9(x: Option<f64>) -> String {
    match x {
        None => String::new(),
        Some(v) if !v.is_finite() => format!("{v}"),
        Some(v) => {
            let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
            // avoid "-0"
            format!("{}", if rounded == 0.0 { 0.0 } else { rounded })
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn metric(o: &Outcome, m: Metric) -> (Option<f64>, f64) {
    let p = o.report.analytic_prediction;
    match m {
        Metric::B => (p.map(|p| p.b), o.report.fidelity_boost),
        Metric::C => (p.map(|p| p.c), o.report.sampling_overhead),
        Metric::R => (p.map(|p| p.r), o.report.extraction_rate),
    }
}

pub fn results_csv(outcomes: &[Outcome]) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for o in outcomes {
        let r = &o.report;
        let (b_a, b_m) = metric(o, Metric::B);
        let (c_a, c_m) = metric(o, Metric::C);
        let (r_a, r_m) = metric(o, Metric::R);
        let sm = o.sampled.as_ref();
        let fields = [
            csv_field(&o.method),
            fmt9(Some(o.lambda)),
            fmt9(b_a),
            fmt9(Some(b_m)),
            fmt9(c_a),
            fmt9(Some(c_m)),
            fmt9(r_a),
            fmt9(Some(r_m)),
            csv_field(&o.observable),
            fmt9(Some(r.p_em)),
            fmt9(Some(r.q_em)),
            fmt9(Some(o.ideal)),
            fmt9(Some(r.bias_before)),
            fmt9(Some(r.bias_after)),
            fmt9(sm.map(|s| s.estimate)),
            fmt9(sm.map(|s| s.std_error)),
            fmt9(sm.map(|s| s.unmitigated)),
            fmt9(sm.and_then(|s| s.overhead)),
            r.n_cir.to_string(),
            o.comparison.map(|c| c.passed().to_string()).unwrap_or_default(),
        ];
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

/// Long-format plot data: one row per `(method, lambda)`, taken from the
/// first observable (the three metrics do not depend on it). The `r` file
/// lists methods by decreasing mean extraction rate, rows by decreasing `r`.
pub fn plot_csv(outcomes: &[Outcome], m: Metric) -> String {
    let mut rows: Vec<(&Outcome, Option<f64>, f64)> = Vec::new();
    for o in outcomes {
        if rows.iter().any(|(p, ..)| p.method == o.method && p.lambda == o.lambda) {
            continue;
        }
        let (a, v) = metric(o, m);
        rows.push((o, a, v));
    }
    if m == Metric::R {
        let mut means: Vec<(String, f64)> = Vec::new();
        for (o, _, v) in &rows {
            match means.iter_mut().find(|(name, _)| *name == o.method) {
                Some(e) => e.1 += v,
                None => means.push((o.method.clone(), *v)),
            }
        }
        for (name, total) in means.iter_mut() {
            *total /= rows.iter().filter(|(o, ..)| &o.method == name).count() as f64;
        }
        means.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let rank = |name: &str| means.iter().position(|(n, _)| n == name).unwrap_or(usize::MAX);
        rows.sort_by(|a, b| {
            rank(&a.0.method)
                .cmp(&rank(&b.0.method))
                .then(b.2.total_cmp(&a.2))
                .then(a.0.lambda.total_cmp(&b.0.lambda))
        });
    }
    let mut s = String::from("method,lambda,analytic,measured\n");
    for (o, a, v) in rows {
        let _ = writeln!(s, "{},{},{},{}", csv_field(&o.method), fmt9(Some(o.lambda)), fmt9(a), fmt9(Some(v)));
    }
    s
}

pub fn reports_jsonl(outcomes: &[Outcome]) -> Result<String, serde_json::Error> {
    let mut s = String::new();
    for o in outcomes {
        s.push_str(&serde_json::to_string(o)?);
        s.push('\n');
    }
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentEntry {
    pub index: usize,
    pub method: String,
    pub lambda: f64,
    pub observable: String,
    pub status: String,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub config_sha256: String,
    pub master_seed: u64,
    pub exact_only: bool,
    pub stages: Vec<StageTiming>,
    pub experiments: Vec<ExperimentEntry>,
    pub files: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, LabError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| LabError::Io { path: path.clone(), source: e })?;
    Ok(path)
}

pub fn create_dir(dir: &Path) -> Result<(), LabError> {
    fs::create_dir_all(dir).map_err(|e| LabError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}
