use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QemError, Result};
use crate::linalg::ComplexMatrix;

/// Global phase of a Pauli string, an integer power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    fn from_exponent(k: u8) -> Self {
        match k & 3 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    fn exponent(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::PlusOne => Complex64::new(1.0, 0.0),
            Phase::PlusI => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

/// An n-qubit Pauli operator `phase * P_0 (x) P_1 (x) ... (x) P_{n-1}`.
///
/// Qubit 0 is the leftmost tensor factor and maps to the most significant bit
/// of a computational-basis index. Internally the operator is kept as
/// `i^k X^x Z^z`, so products reduce to xor on the masks plus a phase count.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    num_qubits: u32,
    x: u64,
    z: u64,
    // exponent of i in the X^x Z^z form
    k: u8,
}

impl PauliString {
    pub const MAX_QUBITS: u32 = 32;

    pub fn identity(num_qubits: u32) -> Self {
        assert!((1..=Self::MAX_QUBITS).contains(&num_qubits));
        Self {
            num_qubits,
            x: 0,
            z: 0,
            k: 0,
        }
    }

    /// Builds from basis-index bit masks and an explicit phase on the letter form.
    pub fn from_masks(num_qubits: u32, x_mask: u64, z_mask: u64, phase: Phase) -> Self {
        assert!((1..=Self::MAX_QUBITS).contains(&num_qubits));
        let full = (1u64 << num_qubits) - 1;
        assert!(x_mask & !full == 0 && z_mask & !full == 0, "mask exceeds qubit count");
        let ny = (x_mask & z_mask).count_ones() as u8;
        Self {
            num_qubits,
            x: x_mask,
            z: z_mask,
            k: (phase.exponent() + ny) & 3,
        }
    }

    /// Single-qubit letter `letter` on `qubit`, identity elsewhere.
    pub fn single(num_qubits: u32, qubit: u32, letter: char) -> Result<Self> {
        if qubit >= num_qubits {
            return Err(QemError::InvalidParameter(format!(
                "qubit {qubit} out of range for {num_qubits} qubits"
            )));
        }
        let bit = 1u64 << (num_qubits - 1 - qubit);
        let (x, z) = match letter.to_ascii_uppercase() {
            'I' => (0, 0),
            'X' => (bit, 0),
            'Y' => (bit, bit),
            'Z' => (0, bit),
            other => {
                return Err(QemError::InvalidParameter(format!(
                    "unknown Pauli letter {other:?}"
                )))
            }
        };
        Ok(Self::from_masks(num_qubits, x, z, Phase::PlusOne))
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Phase relative to the tensor product of letters.
    pub fn phase(&self) -> Phase {
        let ny = (self.x & self.z).count_ones() as u8;
        Phase::from_exponent(self.k.wrapping_sub(ny) & 3)
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Hermitian exactly when the letter-form phase is real.
    pub fn is_hermitian(&self) -> bool {
        matches!(self.phase(), Phase::PlusOne | Phase::MinusOne)
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        let sym = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        sym.is_multiple_of(2)
    }

    /// Same operator with the phase stripped back to +1 on the letter form.
    pub fn without_phase(&self) -> Self {
        Self::from_masks(self.num_qubits, self.x, self.z, Phase::PlusOne)
    }

    pub fn with_phase(&self, phase: Phase) -> Self {
        Self::from_masks(self.num_qubits, self.x, self.z, phase)
    }

    pub fn letter(&self, qubit: u32) -> char {
        let bit = 1u64 << (self.num_qubits - 1 - qubit);
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    /// Letter string without phase prefix.
    pub fn label(&self) -> String {
        (0..self.num_qubits).map(|q| self.letter(q)).collect()
    }

    /// Product `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.num_qubits != other.num_qubits {
            return Err(QemError::DimensionMismatch {
                left: self.num_qubits as usize,
                right: other.num_qubits as usize,
            });
        }
        // X^a Z^b X^c Z^d = (-1)^{|b & c|} X^{a^c} Z^{b^d}
        let swaps = (self.z & other.x).count_ones() as u8;
        Ok(Self {
            num_qubits: self.num_qubits,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            k: (self.k + other.k + 2 * (swaps & 1)) & 3,
        })
    }

    /// Column `col` of the operator: the single non-zero entry `(row, value)`.
    #[inline]
    pub fn column_entry(&self, col: usize) -> (usize, Complex64) {
        let row = col ^ self.x as usize;
        let sign = if (self.z & col as u64).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let phase = Phase::from_exponent(self.k).to_complex();
        (row, phase * sign)
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d);
        for col in 0..d {
            let (row, v) = self.column_entry(col);
            m[(row, col)] = v;
        }
        m
    }

    /// `P * rho * P^dagger` by index permutation, no dense products.
    pub fn conjugate(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim();
        if rho.dim() != d {
            return Err(QemError::DimensionMismatch {
                left: d,
                right: rho.dim(),
            });
        }
        let mut out = ComplexMatrix::zeros(d);
        for r in 0..d {
            let (pr, vr) = self.column_entry(r);
            for c in 0..d {
                let (pc, vc) = self.column_entry(c);
                out[(pr, pc)] = vr * rho[(r, c)] * vc.conj();
            }
        }
        Ok(out)
    }

    /// `Tr(P rho)` in O(dim).
    pub fn expectation(&self, rho: &ComplexMatrix) -> Result<Complex64> {
        let d = self.dim();
        if rho.dim() != d {
            return Err(QemError::DimensionMismatch {
                left: d,
                right: rho.dim(),
            });
        }
        // Tr(P rho) = sum_c P[row(c), c] * rho[c, row(c)]
        Ok((0..d)
            .map(|c| {
                let (r, v) = self.column_entry(c);
                v * rho[(c, r)]
            })
            .sum())
    }

    /// Every Pauli string on `num_qubits` qubits acting only on `support`
    /// (a basis-index bit mask), phase +1, in a fixed enumeration order.
    pub fn enumerate_on_support(num_qubits: u32, support: u64) -> Vec<Self> {
        let bits: Vec<u64> = (0..num_qubits)
            .map(|q| 1u64 << (num_qubits - 1 - q))
            .filter(|b| support & b != 0)
            .collect();
        let count = 1usize << (2 * bits.len());
        (0..count)
            .map(|code| {
                let (mut x, mut z) = (0u64, 0u64);
                for (i, &b) in bits.iter().enumerate() {
                    let letter = (code >> (2 * i)) & 3;
                    if letter & 1 != 0 {
                        x |= b;
                    }
                    if letter & 2 != 0 {
                        z |= b;
                    }
                }
                Self::from_masks(num_qubits, x, z, Phase::PlusOne)
            })
            .collect()
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }
}

impl Mul for PauliString {
    type Output = PauliString;

    fn mul(self, rhs: PauliString) -> PauliString {
        self.compose(&rhs).expect("Pauli product qubit-count mismatch")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase() {
            Phase::PlusOne => "",
            Phase::MinusOne => "-",
            Phase::PlusI => "i",
            Phase::MinusI => "-i",
        };
        write!(f, "{prefix}{}", self.label())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = QemError;

    /// Parses labels such as `"XZ"`, `"-IYY"`, `"iZ"`, `"+X"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (Phase::MinusI, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (Phase::PlusI, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (Phase::PlusI, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MinusOne, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::PlusOne, r)
        } else {
            (Phase::PlusOne, s)
        };
        let n = rest.chars().count() as u32;
        if n == 0 || n > Self::MAX_QUBITS {
            return Err(QemError::InvalidParameter(format!(
                "Pauli label {s:?} must have 1..={} letters",
                Self::MAX_QUBITS
            )));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, ch) in rest.chars().enumerate() {
            let bit = 1u64 << (n - 1 - q as u32);
            match ch.to_ascii_uppercase() {
                'I' => {}
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                }
                'Z' => z |= bit,
                other => {
                    return Err(QemError::InvalidParameter(format!(
                        "unknown Pauli letter {other:?} in {s:?}"
                    )))
                }
            }
        }
        Ok(Self::from_masks(n, x, z, phase))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
