use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{QemError, Result};

/// Largest Hilbert-space dimension any tensor product may reach unless the
/// caller passes an explicit cap.
pub const DEFAULT_DIM_CAP: usize = 1 << 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from row vectors; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(QemError::InvalidParameter("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(QemError::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Outer product `|v><v|` (no normalisation applied).
    pub fn outer(v: &[Complex64]) -> Self {
        Self::outer2(v, v)
    }

    /// Outer product `|a><b|`.
    pub fn outer2(a: &[Complex64], b: &[Complex64]) -> Self {
        assert_eq!(a.len(), b.len());
        Self::from_fn(a.len(), |r, c| a[r] * b[c].conj())
    }

    /// Projector onto computational basis state `index`.
    pub fn basis_projector(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut m = Self::zeros(dim);
        m.data[index * dim + index] = ONE;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        Self::from_fn(d, |r, c| self.data[c * d + r].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &Self, s: Complex64) {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add_scaled");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn add_scaled_real(&mut self, other: &Self, s: f64) {
        self.add_scaled(other, Complex64::new(s, 0.0));
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(QemError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            let out_row = &mut out[i * d..(i + 1) * d];
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * d..(k + 1) * d];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { dim: d, data: out })
    }

    /// `u * self * u^dagger`
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.matmul(self)?.matmul(&u.dagger())
    }

    /// `a * self * b^dagger`
    pub fn sandwich(&self, a: &Self, b: &Self) -> Result<Self> {
        a.matmul(self)?.matmul(&b.dagger())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).collect()
    }

    /// Largest entrywise modulus of `self - self^dagger`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                let dev = (self.data[r * d + c] - self.data[c * d + r].conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch in max_abs_diff");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Deviation of `U^dagger U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self
            .dagger()
            .matmul(self)
            .expect("square matrix times its adjoint");
        prod.max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Integer power by repeated squaring; `pow(0)` is the identity.
    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::identity(self.dim);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.matmul(&base).expect("same dimension");
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base).expect("same dimension");
            }
        }
        result
    }

    /// Kronecker product `self (x) other`, refusing results above `cap`.
    pub fn kron_with_cap(&self, other: &Self, cap: usize) -> Result<Self> {
        let dim = self
            .dim
            .checked_mul(other.dim)
            .ok_or(QemError::DimensionCap {
                dim: usize::MAX,
                cap,
            })?;
        if dim > cap {
            return Err(QemError::DimensionCap { dim, cap });
        }
        let (da, db) = (self.dim, other.dim);
        let mut out = vec![ZERO; dim * dim];
        for ar in 0..da {
            for ac in 0..da {
                let a = self.data[ar * da + ac];
                if a == ZERO {
                    continue;
                }
                for br in 0..db {
                    let row = ar * db + br;
                    for bc in 0..db {
                        out[row * dim + ac * db + bc] = a * other.data[br * db + bc];
                    }
                }
            }
        }
        Ok(Self { dim, data: out })
    }

    /// Attempts a Cholesky factorisation of `self + shift * I`; success means
    /// every eigenvalue of the Hermitian part exceeds `-shift`.
    pub fn is_positive_semidefinite(&self, shift: f64) -> bool {
        let d = self.dim;
        let mut l = vec![ZERO; d * d];
        for j in 0..d {
            let mut diag = self.data[j * d + j].re + shift;
            for k in 0..j {
                diag -= l[j * d + k].norm_sqr();
            }
            if diag <= 0.0 {
                return false;
            }
            let ljj = diag.sqrt();
            l[j * d + j] = Complex64::new(ljj, 0.0);
            for i in (j + 1)..d {
                let mut s = self.data[i * d + j];
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = s / ljj;
            }
        }
        true
    }

    /// `self * v`
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(rhs, ONE);
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(rhs, -ONE);
        out
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale(-ONE)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let cells: Vec<String> = self
                .row(r)
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// `Tr(a * b)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.dim != b.dim {
        return Err(QemError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    let d = a.dim;
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            acc += a.data[i * d + k] * b.data[k * d + i];
        }
    }
    Ok(acc)
}

/// Real part of `Tr(a * b)`, the expectation value when both are Hermitian.
pub fn expectation(observable: &ComplexMatrix, state: &ComplexMatrix) -> Result<f64> {
    Ok(trace_product(observable, state)?.re)
}

/// Kronecker product with the default dimension cap.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.kron_with_cap(b, DEFAULT_DIM_CAP)
}

/// `m^{(x) n}` with the given dimension cap.
pub fn tensor_power(m: &ComplexMatrix, n: usize, cap: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(QemError::InvalidParameter("tensor power needs n >= 1".into()));
    }
    let mut out = m.clone();
    for _ in 1..n {
        out = out.kron_with_cap(m, cap)?;
    }
    Ok(out)
}
