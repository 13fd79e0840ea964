//! Cyclic Jacobi eigensolver for Hermitian matrices and a regularised
//! generalized eigensolver built on top of it.

use num_complex::Complex64;

use crate::error::{QemError, Result};
use crate::linalg::ComplexMatrix;

/// Convergence threshold on the off-diagonal Frobenius norm, relative to
/// `max(1, ||A||_F)`.
pub const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V diag(values) V^dagger` with ascending values.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        let d = self.vectors.dim();
        (0..d).map(|r| self.vectors[(r, k)]).collect()
    }
}

fn off_diagonal_norm(a: &[Complex64], d: usize) -> f64 {
    let mut s = 0.0;
    for r in 0..d {
        for c in 0..d {
            if r != c {
                s += a[r * d + c].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Diagonalises a Hermitian matrix with cyclic complex Jacobi rotations.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let dev = m.hermiticity_deviation();
    let scale = m.frobenius_norm().max(1.0);
    if dev > 1e-8 * scale {
        return Err(QemError::NotHermitian(dev));
    }
    let d = m.dim();
    // work on the exactly Hermitian part
    let mut a: Vec<Complex64> = ComplexMatrix::from_fn(d, |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5)
        .as_slice()
        .to_vec();
    let mut v: Vec<Complex64> = ComplexMatrix::identity(d).as_slice().to_vec();

    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, d) <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let u = apq / r;
                let app = a[p * d + p].re;
                let aqq = a[q * d + q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = D R with D = diag(1, conj(u)) on (p, q)
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -u.conj() * s;
                let jqq = u.conj() * c;

                // A <- A J (columns p, q)
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = akp * jpp + akq * jqp;
                    a[k * d + q] = akp * jpq + akq * jqq;
                }
                // A <- J^dagger A (rows p, q)
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[q * d + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[p * d + q] = Complex64::new(0.0, 0.0);
                a[q * d + p] = Complex64::new(0.0, 0.0);
                a[p * d + p].im = 0.0;
                a[q * d + q].im = 0.0;
                // V <- V J
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = vkp * jpp + vkq * jqp;
                    v[k * d + q] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[i * d + i].re.total_cmp(&a[j * d + j].re));
    let values = order.iter().map(|&i| a[i * d + i].re).collect();
    let vectors = ComplexMatrix::from_fn(d, |r, c| v[r * d + order[c]]);
    Ok(HermitianEigen { values, vectors })
}

pub fn eigenvalues_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.values)
}

/// Solution of the pencil `h w = E s w` restricted to the regular part of `s`.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[k]` solves the pencil for `values[k]`; normalised so that
    /// `w^dagger s w = 1`.
    pub vectors: Vec<Vec<Complex64>>,
    /// Number of overlap directions discarded below `reg_tol`.
    pub discarded: usize,
}

/// Solves `h w = E s w` after projecting out every eigendirection of `s`
/// whose eigenvalue is below `reg_tol`.
pub fn generalized_eigensolve(
    h: &ComplexMatrix,
    s: &ComplexMatrix,
    reg_tol: f64,
) -> Result<GeneralizedEigen> {
    if h.dim() != s.dim() {
        return Err(QemError::DimensionMismatch {
            left: h.dim(),
            right: s.dim(),
        });
    }
    let d = h.dim();
    let overlap = hermitian_eigen(s)?;
    let kept: Vec<usize> = (0..d).filter(|&k| overlap.values[k] > reg_tol).collect();
    if kept.is_empty() {
        return Err(QemError::DegenerateOverlap);
    }
    let m = kept.len();
    // X = U_kept diag(1/sqrt(s_k)), a d x m isometry onto the regular subspace
    let x: Vec<Vec<Complex64>> = kept
        .iter()
        .map(|&k| {
            let inv = 1.0 / overlap.values[k].sqrt();
            overlap.vector(k).into_iter().map(|z| z * inv).collect()
        })
        .collect();
    // reduced h' = X^dagger h X (m x m)
    let hx: Vec<Vec<Complex64>> = x.iter().map(|col| h.apply(col)).collect();
    let reduced = ComplexMatrix::from_fn(m, |i, j| {
        x[i].iter().zip(&hx[j]).map(|(a, b)| a.conj() * b).sum()
    });
    let inner = hermitian_eigen(&reduced)?;
    let vectors = (0..m)
        .map(|k| {
            let y = inner.vector(k);
            (0..d)
                .map(|r| (0..m).map(|j| x[j][r] * y[j]).sum())
                .collect()
        })
        .collect();
    Ok(GeneralizedEigen {
        values: inner.values,
        vectors,
        discarded: d - m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_density_matrix, random_hermitian};

    fn residual(h: &ComplexMatrix, s: &ComplexMatrix, e: f64, w: &[Complex64]) -> f64 {
        let hw = h.apply(w);
        let sw = s.apply(w);
        hw.iter()
            .zip(&sw)
            .map(|(a, b)| (a - b * e).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn diagonal_pencil() {
        let h = ComplexMatrix::from_real_diagonal(&[2.0, 1.0]);
        let s = ComplexMatrix::identity(2);
        let sol = generalized_eigensolve(&h, &s, 1e-12).unwrap();
        assert!((sol.values[0] - 1.0).abs() < 1e-14);
        let w = &sol.vectors[0];
        assert!(w[0].norm() < 1e-14);
        assert!((w[1].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_overlap_confined_to_regular_subspace() {
        let h = ComplexMatrix::from_real_diagonal(&[-5.0, 1.0, 2.0]);
        let s = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 1.0]);
        let sol = generalized_eigensolve(&h, &s, 1e-10).unwrap();
        assert_eq!(sol.discarded, 1);
        assert_eq!(sol.values.len(), 2);
        assert!((sol.values[0] - 1.0).abs() < 1e-14);
        for w in &sol.vectors {
            assert!(w[0].norm() < 1e-14);
        }
    }

    #[test]
    fn degenerate_overlap_error() {
        let h = ComplexMatrix::identity(2);
        let s = ComplexMatrix::zeros(2);
        assert!(matches!(
            generalized_eigensolve(&h, &s, 1e-12),
            Err(QemError::DegenerateOverlap)
        ));
    }

    #[test]
    fn random_pencils_have_small_residual() {
        for seed in 0..20 {
            let h = random_hermitian(3, seed);
            let s = random_density_matrix(3, seed + 100);
            let sol = generalized_eigensolve(&h, &s, 1e-12).unwrap();
            for (e, w) in sol.values.iter().zip(&sol.vectors) {
                assert!(residual(&h, &s, *e, w) <= 1e-8);
            }
            assert!(sol.values.windows(2).all(|p| p[0] <= p[1]));
        }
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        for seed in 0..10 {
            let m = random_hermitian(6, seed);
            let eig = hermitian_eigen(&m).unwrap();
            let diag = ComplexMatrix::from_real_diagonal(&eig.values);
            let rebuilt = diag.conjugate_by(&eig.vectors).unwrap();
            assert!(rebuilt.approx_eq(&m, 1e-11));
            assert!(eig.vectors.is_unitary(1e-12));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(hermitian_eigen(&m), Err(QemError::NotHermitian(_))));
    }
}
