use crate::error::{QemError, Result};

/// Tail mass left out of any truncated Poisson sum.
pub const POISSON_TAIL_TOL: f64 = 1e-12;

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `e^{-lambda} lambda^ell / ell!`, the probability of exactly `ell` faults.
pub fn poisson_fault_prob(lambda: f64, ell: usize) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(QemError::NegativeRate(lambda));
    }
    if lambda == 0.0 {
        return Ok(if ell == 0 { 1.0 } else { 0.0 });
    }
    Ok((-lambda + ell as f64 * lambda.ln() - ln_factorial(ell)).exp())
}

/// `sum_{l > ell_max} P(l)`, summed forward so small tails keep precision.
pub fn poisson_tail(lambda: f64, ell_max: usize) -> Result<f64> {
    let mut term = poisson_fault_prob(lambda, ell_max + 1)?;
    let mut tail = 0.0;
    let mut l = ell_max + 1;
    while term > 0.0 {
        tail += term;
        l += 1;
        term *= lambda / l as f64;
        if term < tail * 1e-18 {
            break;
        }
    }
    Ok(tail)
}

/// Smallest `ell_max` whose Poisson tail is below [`POISSON_TAIL_TOL`].
pub fn required_ell_max(lambda: f64) -> Result<usize> {
    let mut l = 0;
    while poisson_tail(lambda, l)? >= POISSON_TAIL_TOL {
        l += 1;
    }
    Ok(l)
}

/// Poisson weights for `0..=ell_max`, renormalised so they sum to one.
/// Returns the weights and the truncated (folded-in) mass.
pub fn truncated_poisson_weights(lambda: f64, ell_max: usize) -> Result<(Vec<f64>, f64)> {
    let raw: Vec<f64> = (0..=ell_max)
        .map(|l| poisson_fault_prob(lambda, l))
        .collect::<Result<_>>()?;
    let tail = poisson_tail(lambda, ell_max)?;
    let total: f64 = raw.iter().sum();
    Ok((raw.iter().map(|w| w / total).collect(), tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(poisson_fault_prob(0.0, 0).unwrap(), 1.0);
        assert_eq!(poisson_fault_prob(0.0, 3).unwrap(), 0.0);
        assert!((poisson_fault_prob(1.0, 0).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!((poisson_fault_prob(2.0, 2).unwrap() - 0.270_670_566_473_225_4).abs() < 1e-15);
    }

    #[test]
    fn negative_lambda_rejected() {
        assert!(matches!(poisson_fault_prob(-0.1, 0), Err(QemError::NegativeRate(_))));
    }

    #[test]
    fn truncation_meets_tolerance() {
        for &lambda in &[0.0, 0.1, 0.5, 1.0, 3.0, 7.5] {
            let l = required_ell_max(lambda).unwrap();
            assert!(poisson_tail(lambda, l).unwrap() < POISSON_TAIL_TOL);
            if l > 0 {
                assert!(poisson_tail(lambda, l - 1).unwrap() >= POISSON_TAIL_TOL);
            }
            let (w, _) = truncated_poisson_weights(lambda, l).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}
