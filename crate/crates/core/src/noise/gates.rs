use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QemError, Result};
use crate::linalg::{ComplexMatrix, PauliString};

/// Declarative gate as it appears in circuit documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub kind: String,
    #[serde(default)]
    pub params: GateParams,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateParams {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub qubits: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<PauliString>,
    /// Row-major `[re, im]` entries for `kind = "unitary"` acting on `qubits`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

pub const GATE_KINDS: &[&str] = &[
    "id", "x", "y", "z", "h", "s", "sdg", "t", "rx", "ry", "rz", "cnot", "cz", "swap",
    "pauli_rotation", "unitary",
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn local_matrix(kind: &str, angle: Option<f64>) -> Result<(usize, ComplexMatrix)> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let need_angle = || {
        angle.ok_or_else(|| QemError::InvalidParameter(format!("gate {kind:?} needs an angle")))
    };
    let one = |rows: [[Complex64; 2]; 2]| {
        ComplexMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]).expect("2x2")
    };
    Ok(match kind {
        "id" => (1, ComplexMatrix::identity(2)),
        "x" => (1, one([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]])),
        "y" => (1, one([[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]])),
        "z" => (1, ComplexMatrix::from_real_diagonal(&[1.0, -1.0])),
        "h" => (1, one([[c(s, 0.), c(s, 0.)], [c(s, 0.), c(-s, 0.)]])),
        "s" => (1, one([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 1.)]])),
        "sdg" => (1, one([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., -1.)]])),
        "t" => (1, one([[c(1., 0.), c(0., 0.)], [c(0., 0.), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]])),
        "rx" => {
            let t = need_angle()? / 2.0;
            (1, one([[c(t.cos(), 0.), c(0., -t.sin())], [c(0., -t.sin()), c(t.cos(), 0.)]]))
        }
        "ry" => {
            let t = need_angle()? / 2.0;
            (1, one([[c(t.cos(), 0.), c(-t.sin(), 0.)], [c(t.sin(), 0.), c(t.cos(), 0.)]]))
        }
        "rz" => {
            let t = need_angle()? / 2.0;
            (1, one([[Complex64::from_polar(1.0, -t), c(0., 0.)], [c(0., 0.), Complex64::from_polar(1.0, t)]]))
        }
        "cnot" => {
            let mut m = ComplexMatrix::zeros(4);
            m[(0, 0)] = c(1., 0.);
            m[(1, 1)] = c(1., 0.);
            m[(2, 3)] = c(1., 0.);
            m[(3, 2)] = c(1., 0.);
            (2, m)
        }
        "cz" => (2, ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 1.0, -1.0])),
        "swap" => {
            let mut m = ComplexMatrix::zeros(4);
            m[(0, 0)] = c(1., 0.);
            m[(1, 2)] = c(1., 0.);
            m[(2, 1)] = c(1., 0.);
            m[(3, 3)] = c(1., 0.);
            (2, m)
        }
        other => {
            return Err(QemError::InvalidParameter(format!("unknown gate kind {other:?}")))
        }
    })
}

/// Lifts a `2^k x 2^k` operator on `qubits` (first listed = most significant
/// local bit) to the full `num_qubits` register.
pub fn embed(local: &ComplexMatrix, qubits: &[u32], num_qubits: u32) -> Result<ComplexMatrix> {
    let k = qubits.len();
    if local.dim() != 1 << k {
        return Err(QemError::DimensionMismatch {
            left: local.dim(),
            right: 1 << k,
        });
    }
    for (i, &q) in qubits.iter().enumerate() {
        if q >= num_qubits || qubits[..i].contains(&q) {
            return Err(QemError::InvalidParameter(format!(
                "invalid qubit list {qubits:?} for {num_qubits} qubits"
            )));
        }
    }
    let n = num_qubits as usize;
    let dim = 1usize << n;
    let bits: Vec<usize> = qubits.iter().map(|&q| n - 1 - q as usize).collect();
    let mask: usize = bits.iter().map(|b| 1usize << b).sum();
    let local_index = |full: usize| -> usize {
        bits.iter()
            .fold(0usize, |acc, &b| (acc << 1) | ((full >> b) & 1))
    };
    let scatter = |base: usize, loc: usize| -> usize {
        let mut out = base & !mask;
        for (i, &b) in bits.iter().enumerate() {
            if (loc >> (k - 1 - i)) & 1 == 1 {
                out |= 1 << b;
            }
        }
        out
    };
    let mut full = ComplexMatrix::zeros(dim);
    for col in 0..dim {
        let lc = local_index(col);
        for lr in 0..(1 << k) {
            let v = local[(lr, lc)];
            if v != c(0.0, 0.0) {
                full[(scatter(col, lr), col)] = v;
            }
        }
    }
    Ok(full)
}

/// `exp(-i angle/2 P)` for a Hermitian Pauli string.
pub fn pauli_rotation(pauli: &PauliString, angle: f64) -> Result<ComplexMatrix> {
    if !pauli.is_hermitian() {
        return Err(QemError::InvalidParameter(format!(
            "rotation generator {pauli} is not Hermitian"
        )));
    }
    let half = angle / 2.0;
    let mut u = ComplexMatrix::identity(pauli.dim()).scale_real(half.cos());
    u.add_scaled(&pauli.to_matrix(), c(0.0, -half.sin()));
    Ok(u)
}

impl GateSpec {
    pub fn new(kind: &str, qubits: &[u32]) -> Self {
        Self {
            kind: kind.to_string(),
            params: GateParams {
                qubits: qubits.to_vec(),
                ..Default::default()
            },
        }
    }

    pub fn with_angle(mut self, angle: f64) -> Self {
        self.params.angle = Some(angle);
        self
    }

    /// Full-register unitary for this gate.
    pub fn materialize(&self, num_qubits: u32) -> Result<ComplexMatrix> {
        let kind = self.kind.to_ascii_lowercase();
        match kind.as_str() {
            "pauli_rotation" => {
                let p = self.params.pauli.ok_or_else(|| {
                    QemError::InvalidParameter("pauli_rotation needs a pauli".into())
                })?;
                if p.num_qubits() != num_qubits {
                    return Err(QemError::DimensionMismatch {
                        left: p.num_qubits() as usize,
                        right: num_qubits as usize,
                    });
                }
                let angle = self.params.angle.ok_or_else(|| {
                    QemError::InvalidParameter("pauli_rotation needs an angle".into())
                })?;
                pauli_rotation(&p, angle)
            }
            "unitary" => {
                let rows = self.params.matrix.as_ref().ok_or_else(|| {
                    QemError::InvalidParameter("unitary gate needs a matrix".into())
                })?;
                let rows: Vec<Vec<Complex64>> = rows
                    .iter()
                    .map(|r| r.iter().map(|&[re, im]| c(re, im)).collect())
                    .collect();
                let local = ComplexMatrix::from_rows(&rows)?;
                let qubits: Vec<u32> = if self.params.qubits.is_empty() {
                    (0..num_qubits).collect()
                } else {
                    self.params.qubits.clone()
                };
                embed(&local, &qubits, num_qubits)
            }
            _ => {
                let (arity, local) = local_matrix(&kind, self.params.angle)?;
                if self.params.qubits.len() != arity {
                    if kind == "id" && self.params.qubits.is_empty() {
                        return Ok(ComplexMatrix::identity(1 << num_qubits));
                    }
                    return Err(QemError::InvalidParameter(format!(
                        "gate {kind:?} acts on {arity} qubit(s), got {:?}",
                        self.params.qubits
                    )));
                }
                embed(&local, &self.params.qubits, num_qubits)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_matches_kron() {
        let x = GateSpec::new("x", &[1]).materialize(2).unwrap();
        let expected = crate::linalg::tensor(
            &ComplexMatrix::identity(2),
            &"X".parse::<PauliString>().unwrap().to_matrix(),
        )
        .unwrap();
        assert!(x.approx_eq(&expected, 0.0));
    }

    #[test]
    fn cnot_orientation() {
        // control 1, target 0: |01> -> |11>
        let u = GateSpec::new("cnot", &[1, 0]).materialize(2).unwrap();
        assert_eq!(u[(3, 1)], c(1.0, 0.0));
        assert_eq!(u[(0, 0)], c(1.0, 0.0));
        assert_eq!(u[(2, 2)], c(1.0, 0.0));
    }

    #[test]
    fn all_gates_unitary() {
        for kind in GATE_KINDS {
            let spec = match *kind {
                "cnot" | "cz" | "swap" => GateSpec::new(kind, &[0, 2]),
                "pauli_rotation" => GateSpec {
                    kind: kind.to_string(),
                    params: GateParams {
                        pauli: Some("XYZ".parse().unwrap()),
                        angle: Some(0.3),
                        ..Default::default()
                    },
                },
                "unitary" => continue,
                _ => GateSpec::new(kind, &[1]).with_angle(0.7),
            };
            assert!(spec.materialize(3).unwrap().is_unitary(1e-12), "{kind}");
        }
    }
}
