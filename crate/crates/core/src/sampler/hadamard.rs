//! Hadamard-test statistics: ancilla prepared in `|+>`, controlled `Gamma`
//! on the system, then `X` on the ancilla and `O` on the system.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QemError, Result};
use crate::linalg::{tensor, trace_product, ComplexMatrix};

const MOMENT_TOL: f64 = 1e-12;

/// First and second moments of the `(O, Gamma)` outcome pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointMoments {
    pub e_o: f64,
    pub e_gamma: f64,
    pub e_o_gamma: f64,
}

impl JointMoments {
    /// `p[a][b]` for `o = +1, -1` (a = 0, 1) and `gamma = +1, -1` (b = 0, 1).
    pub fn distribution(&self) -> [[f64; 2]; 2] {
        let mut p = [[0.0; 2]; 2];
        for (ai, a) in [1.0, -1.0].into_iter().enumerate() {
            for (bi, b) in [1.0, -1.0].into_iter().enumerate() {
                p[ai][bi] = (1.0 + a * self.e_o + b * self.e_gamma + a * b * self.e_o_gamma) / 4.0;
            }
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let min = self
            .distribution()
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -MOMENT_TOL {
            return Err(QemError::InconsistentMoments(min));
        }
        Ok(())
    }
}

/// `e_o_gamma = Re Tr(O Gamma rho)`, `e_gamma = Re Tr(Gamma rho)` and
/// `e_o = Tr(O (rho + Gamma rho Gamma^dagger)) / 2`.
pub fn hadamard_test_moments(
    rho: &ComplexMatrix,
    gamma_op: &ComplexMatrix,
    observable: &ComplexMatrix,
) -> Result<JointMoments> {
    let d = rho.dim();
    for m in [gamma_op, observable] {
        if m.dim() != d {
            return Err(QemError::DimensionMismatch {
                left: m.dim(),
                right: d,
            });
        }
    }
    let g_rho = gamma_op.matmul(rho)?;
    let e_gamma = g_rho.trace().re;
    let e_o_gamma = trace_product(observable, &g_rho)?.re;
    let rotated = rho.conjugate_by(gamma_op)?;
    let e_o = (trace_product(observable, rho)?.re + trace_product(observable, &rotated)?.re) / 2.0;
    Ok(JointMoments {
        e_o,
        e_gamma,
        e_o_gamma,
    })
}

/// Draws `(o, gamma)` from the distribution fixed by `moments`.
pub fn sample_joint<R: Rng + ?Sized>(moments: &JointMoments, rng: &mut R) -> Result<(i8, i8)> {
    moments.validate()?;
    let p = moments.distribution();
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (ai, a) in [1i8, -1].into_iter().enumerate() {
        for (bi, b) in [1i8, -1].into_iter().enumerate() {
            acc += p[ai][bi].max(0.0);
            if u < acc {
                return Ok((a, b));
            }
        }
    }
    Ok((-1, -1))
}

/// Outcome distribution of the explicit ancilla circuit, same layout as
/// [`JointMoments::distribution`]. `observable` must square to the identity.
pub fn ancilla_joint_distribution(
    rho: &ComplexMatrix,
    gamma_op: &ComplexMatrix,
    observable: &ComplexMatrix,
) -> Result<[[f64; 2]; 2]> {
    let d = rho.dim();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| Complex64::new(x, 0.0);
    let plus = ComplexMatrix::outer(&[c(h), c(h)]);
    let minus = ComplexMatrix::outer(&[c(h), c(-h)]);
    // |0><0| (x) I + |1><1| (x) Gamma
    let mut cu = ComplexMatrix::zeros(2 * d);
    for r in 0..d {
        cu[(r, r)] = c(1.0);
        for col in 0..d {
            cu[(d + r, d + col)] = gamma_op[(r, col)];
        }
    }
    let state = tensor(&plus, rho)?.conjugate_by(&cu)?;
    let id = ComplexMatrix::identity(d);
    let proj_o = [
        (&id + observable).scale_real(0.5),
        (&id - observable).scale_real(0.5),
    ];
    let mut p = [[0.0; 2]; 2];
    for (bi, anc) in [&plus, &minus].into_iter().enumerate() {
        for (ai, po) in proj_o.iter().enumerate() {
            p[ai][bi] = trace_product(&tensor(anc, po)?, &state)?.re;
        }
    }
    Ok(p)
}
