use std::io::{self, BufRead, Write};

use rand::Rng;

use crate::error::{QemError, Result};
use crate::linalg::{ComplexMatrix, PauliString};

pub const SHOT_CSV_HEADER: &str = "variant_id,sign,o_value,gamma_value";

/// Outcome of one circuit run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotRecord {
    pub variant_id: u64,
    pub sign: i8,
    pub o_value: i8,
    /// `+-1` for Hadamard-test shots, `0/1` for direct post-selection,
    /// `1` when no calibration outcome is recorded.
    pub gamma_value: i8,
}

impl ShotRecord {
    pub fn plain(variant_id: u64, sign: i8, o_value: i8) -> Self {
        Self {
            variant_id,
            sign,
            o_value,
            gamma_value: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotBatch {
    pub records: Vec<ShotRecord>,
    pub n_cir: usize,
    pub master_seed: u64,
}

impl ShotBatch {
    pub fn new(records: Vec<ShotRecord>, master_seed: u64) -> Self {
        Self {
            n_cir: records.len(),
            records,
            master_seed,
        }
    }

    /// Mean of `sign * o_value`.
    pub fn signed_mean(&self) -> f64 {
        self.records
            .iter()
            .map(|r| (r.sign * r.o_value) as f64)
            .sum::<f64>()
            / self.n_cir.max(1) as f64
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{SHOT_CSV_HEADER}")?;
        for r in &self.records {
            writeln!(out, "{},{},{},{}", r.variant_id, r.sign, r.o_value, r.gamma_value)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R, master_seed: u64) -> Result<Self> {
        let mut lines = input.lines();
        let bad = |msg: String| QemError::InvalidParameter(msg);
        match lines.next() {
            Some(Ok(h)) if h.trim() == SHOT_CSV_HEADER => {}
            _ => return Err(bad("missing shot CSV header".into())),
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad(format!("row {}: expected 4 fields", i + 1)));
            }
            let parse = |s: &str| s.trim().parse::<i64>().map_err(|e| bad(format!("row {}: {e}", i + 1)));
            records.push(ShotRecord {
                variant_id: f[0].trim().parse().map_err(|e| bad(format!("row {}: {e}", i + 1)))?,
                sign: parse(f[1])? as i8,
                o_value: parse(f[2])? as i8,
                gamma_value: parse(f[3])? as i8,
            });
        }
        Ok(Self::new(records, master_seed))
    }
}

/// `+1` with probability `(1 + mean)/2`, else `-1`.
pub fn sample_pm1<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<i8> {
    if !(mean.abs() <= 1.0 + 1e-9) {
        return Err(QemError::InconsistentMoments(mean));
    }
    let u: f64 = rng.random();
    Ok(if u < (1.0 + mean) / 2.0 { 1 } else { -1 })
}

/// Born-rule outcome of measuring a Hermitian Pauli observable.
pub fn sample_pauli_observable<R: Rng + ?Sized>(
    rho: &ComplexMatrix,
    observable: &PauliString,
    rng: &mut R,
) -> Result<i8> {
    if !observable.is_hermitian() {
        return Err(QemError::InvalidParameter(format!(
            "observable {observable} is not involutory"
        )));
    }
    let mean = observable.expectation(rho)?.re;
    sample_pm1(mean, rng)
}
