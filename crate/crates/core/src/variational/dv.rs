//! The Donsker-Varadhan variational form of the KL divergence on a finite
//! alphabet.

use crate::discrete::Pmf;
use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Scalar};

pub const DV_DEFAULT_STEPS: usize = 2000;
pub const DV_DEFAULT_LR: f64 = 0.5;
const DV_CONVERGENCE_WINDOW: usize = 10;
const DV_CONVERGENCE_TOL: f64 = 1e-12;

/// A real-valued function on the alphabet, one value per symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> CriticVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "critic value {i} is not finite"
            )));
        }
        Ok(CriticVector { values })
    }

    pub fn constant(value: T, len: usize) -> Self {
        CriticVector {
            values: vec![value; len],
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// `E_p[g] − ln E_q[e^g]`, with the log-partition computed by a max-shifted
/// log-sum-exp. Never exceeds `D(p ‖ q)`.
pub fn dv_value<T: Scalar>(p: &Pmf<T>, q: &Pmf<T>, g: &CriticVector<T>) -> Result<T> {
    p.check_same_alphabet(q)?;
    if g.values.len() != p.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} critic values", p.len()),
            found: g.values.len().to_string(),
        });
    }
    Ok(dv_raw(p.probs(), q.probs(), &g.values))
}

fn dv_raw<T: Scalar>(p: &[T], q: &[T], g: &[T]) -> T {
    let mean: T = p
        .iter()
        .zip(g)
        .filter(|(&pi, _)| pi > T::zero())
        .map(|(&pi, &gi)| pi * gi)
        .sum();
    let log_z = log_sum_exp(
        q.iter()
            .zip(g)
            .filter(|(&qi, _)| qi > T::zero())
            .map(|(&qi, &gi)| qi.ln() + gi),
    );
    mean - log_z
}

#[derive(Clone, Debug)]
pub struct DvFit<T> {
    pub critic: CriticVector<T>,
    pub value: T,
    pub iterations: usize,
}

/// Maximizes [`dv_value`] over `g`.
///
/// The ascent direction is the gradient `p − r` (with `r ∝ q e^g`)
/// preconditioned by the inverse of the Gibbs weights `r`, taken in log form:
/// `g ← g + lr · ln(p / r)`. The error in `g` contracts by `1 − lr` per step
/// independently of how small the smallest probability is.
pub fn dv_supremum<T: Scalar>(p: &Pmf<T>, q: &Pmf<T>, steps: usize, lr: T) -> Result<DvFit<T>> {
    p.check_same_alphabet(q)?;
    if !p.has_full_support() || !q.has_full_support() {
        return Err(Error::SupportViolation(
            "the supremum form needs full-support p and q".into(),
        ));
    }
    if !(lr > T::zero() && lr <= T::one()) {
        return Err(Error::InvalidArgument("lr must lie in (0, 1]".into()));
    }
    let (pp, qq) = (p.probs(), q.probs());
    let log_p: Vec<T> = pp.iter().map(|v| v.ln()).collect();
    let log_q: Vec<T> = qq.iter().map(|v| v.ln()).collect();
    let mut g = vec![T::zero(); p.len()];
    let mut values = vec![dv_raw(pp, qq, &g)];
    let mut iterations = 0;
    let tol = T::c(DV_CONVERGENCE_TOL);
    for step in 1..=steps {
        let logits: Vec<T> = log_q.iter().zip(&g).map(|(&a, &b)| a + b).collect();
        let log_z = log_sum_exp(logits.iter().copied());
        for (gi, (&lp, &lg)) in g.iter_mut().zip(log_p.iter().zip(&logits)) {
            *gi += lr * (lp - (lg - log_z));
        }
        values.push(dv_raw(pp, qq, &g));
        iterations = step;
        if step >= DV_CONVERGENCE_WINDOW {
            let now = values[step];
            let before = values[step - DV_CONVERGENCE_WINDOW];
            if (now - before).abs() < tol {
                break;
            }
        }
    }
    Ok(DvFit {
        value: *values.last().expect("nonempty"),
        critic: CriticVector { values: g },
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::kl_divergence;

    fn pq() -> (Pmf<f64>, Pmf<f64>) {
        (
            Pmf::<f64>::from_probs(vec![0.75, 0.25]).unwrap(),
            Pmf::<f64>::from_probs(vec![0.5, 0.5]).unwrap(),
        )
    }

    #[test]
    fn constant_critic_is_zero() {
        let (p, q) = pq();
        let v = dv_value(&p, &q, &CriticVector::constant(3.7, 2)).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn log_ratio_critic_attains_kl() {
        let (p, q) = pq();
        let g = CriticVector::new(vec![(1.5f64).ln(), (0.5f64).ln()]).unwrap();
        let kl = kl_divergence(&p, &q).unwrap().value();
        assert!((dv_value(&p, &q, &g).unwrap() - kl).abs() < 1e-15);
    }

    #[test]
    fn hand_evaluated_critic() {
        let (p, q) = pq();
        let g = CriticVector::new(vec![1.0, 0.0]).unwrap();
        let v = dv_value(&p, &q, &g).unwrap();
        let oracle = 0.75 - (0.5 * 1f64.exp() + 0.5).ln();
        assert!((v - oracle).abs() < 1e-15);
        assert!((v - 0.129885).abs() < 1e-6);
        assert!(v <= 0.130812);
    }

    #[test]
    fn supremum_examples() {
        let (p, q) = pq();
        let same = dv_supremum(&p, &p, DV_DEFAULT_STEPS, DV_DEFAULT_LR).unwrap();
        assert!(same.value.abs() < 1e-12);
        let fit = dv_supremum(&p, &q, DV_DEFAULT_STEPS, DV_DEFAULT_LR).unwrap();
        let kl = kl_divergence(&p, &q).unwrap().value();
        assert!((fit.value - kl).abs() < 1e-6);
        assert!((fit.value - 0.130812).abs() < 1e-6);
        assert!(fit.iterations < DV_DEFAULT_STEPS);
    }

    #[test]
    fn supremum_handles_tiny_masses() {
        let p = Pmf::<f64>::from_probs(vec![0.999, 0.0009, 0.0001]).unwrap();
        let q = Pmf::<f64>::from_probs(vec![0.0001, 0.0009, 0.999]).unwrap();
        let fit = dv_supremum(&p, &q, DV_DEFAULT_STEPS, DV_DEFAULT_LR).unwrap();
        let kl = kl_divergence(&p, &q).unwrap().value();
        assert!((fit.value - kl).abs() < 1e-6, "{} vs {}", fit.value, kl);
    }

    #[test]
    fn supremum_rejects_missing_support() {
        let p = Pmf::<f64>::from_probs(vec![1.0, 0.0]).unwrap();
        let q = Pmf::<f64>::from_probs(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            dv_supremum(&p, &q, 10, 0.5),
            Err(Error::SupportViolation(_))
        ));
    }
}
