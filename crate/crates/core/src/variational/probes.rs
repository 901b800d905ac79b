//! Numerical probes for convexity, concavity, Jensen and continuity
//! statements. Each probe reports its worst slack (`rhs − lhs` for an
//! inequality `lhs ≤ rhs`) together with the witnessing input.

use crate::discrete::{entropy, kl_divergence, mutual_information, CondPmf, JointPmf2, Pmf};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The fixed α grid `{0, 0.1, ..., 1.0}`.
pub fn alpha_grid<T: Scalar>() -> Vec<T> {
    (0..=10).map(|i| T::c(i as f64 / 10.0)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport<T> {
    pub checks: usize,
    pub worst_slack: T,
    pub witness: Option<String>,
}

impl<T: Scalar> Default for ProbeReport<T> {
    fn default() -> Self {
        ProbeReport {
            checks: 0,
            worst_slack: T::infinity(),
            witness: None,
        }
    }
}

impl<T: Scalar> ProbeReport<T> {
    pub fn record(&mut self, slack: T, witness: impl FnOnce() -> String) {
        self.checks += 1;
        if slack < self.worst_slack || slack.is_nan() {
            self.worst_slack = slack;
            self.witness = Some(witness());
        }
    }

    pub fn merge(&mut self, other: ProbeReport<T>) {
        self.checks += other.checks;
        if other.worst_slack < self.worst_slack || other.worst_slack.is_nan() {
            self.worst_slack = other.worst_slack;
            self.witness = other.witness;
        }
    }

    /// True when no check fell below `-tol`.
    pub fn holds(&self, tol: T) -> bool {
        self.worst_slack >= -tol
    }
}

fn check_alphas<T: Scalar>(alphas: &[T]) -> Result<()> {
    if alphas.iter().any(|&a| !(a >= T::zero() && a <= T::one())) {
        return Err(Error::InvalidArgument("alphas must lie in [0, 1]".into()));
    }
    Ok(())
}

/// Joint convexity of `D(P ‖ Q)` along mixtures of two pairs.
pub fn kl_convexity_probe<T: Scalar>(
    pair1: (&Pmf<T>, &Pmf<T>),
    pair2: (&Pmf<T>, &Pmf<T>),
    alphas: &[T],
) -> Result<ProbeReport<T>> {
    check_alphas(alphas)?;
    let d1 = kl_divergence(pair1.0, pair1.1)?;
    let d2 = kl_divergence(pair2.0, pair2.1)?;
    let mut report = ProbeReport::default();
    for &a in alphas {
        let pm = pair1.0.mix(pair2.0, a)?;
        let qm = pair1.1.mix(pair2.1, a)?;
        let lhs = kl_divergence(&pm, &qm)?;
        let rhs = d1.weighted(a) + d2.weighted(T::one() - a);
        let slack = match (lhs, rhs) {
            (_, r) if !r.is_finite() => T::infinity(),
            (l, r) => r.value() - l.value(),
        };
        report.record(slack, || {
            format!(
                "alpha={a} p1={:?} q1={:?} p2={:?} q2={:?}",
                pair1.0.probs(),
                pair1.1.probs(),
                pair2.0.probs(),
                pair2.1.probs()
            )
        });
    }
    Ok(report)
}

/// Concavity of `H(P)`: `H(αP1 + (1−α)P2) ≥ αH(P1) + (1−α)H(P2)`.
pub fn entropy_concavity_probe<T: Scalar>(
    p1: &Pmf<T>,
    p2: &Pmf<T>,
    alphas: &[T],
) -> Result<ProbeReport<T>> {
    check_alphas(alphas)?;
    let (h1, h2) = (entropy(p1), entropy(p2));
    let mut report = ProbeReport::default();
    for &a in alphas {
        let lhs = a * h1 + (T::one() - a) * h2;
        let rhs = entropy(&p1.mix(p2, a)?);
        report.record(rhs - lhs, || {
            format!("alpha={a} p1={:?} p2={:?}", p1.probs(), p2.probs())
        });
    }
    Ok(report)
}

/// Shape of `I(X;Y)` as a function of its factors.
#[derive(Clone, Debug)]
pub struct MiShapeReport<T> {
    /// Concavity in `P_X` with the channel fixed to `channel1`.
    pub concave_in_input: ProbeReport<T>,
    /// Convexity in `P_{Y|X}` with the input fixed to `px1`.
    pub convex_in_channel: ProbeReport<T>,
}

pub fn mi_concavity_convexity_probe<T: Scalar>(
    px1: &Pmf<T>,
    px2: &Pmf<T>,
    channel1: &CondPmf<T>,
    channel2: &CondPmf<T>,
    alphas: &[T],
) -> Result<MiShapeReport<T>> {
    check_alphas(alphas)?;
    let mi = |px: &Pmf<T>, ch: &CondPmf<T>| -> Result<T> {
        Ok(mutual_information(&JointPmf2::from_factors(px, ch)?))
    };
    let (i1, i2) = (mi(px1, channel1)?, mi(px2, channel1)?);
    let (k1, k2) = (mi(px1, channel1)?, mi(px1, channel2)?);
    let mut concave = ProbeReport::default();
    let mut convex = ProbeReport::default();
    for &a in alphas {
        let b = T::one() - a;
        let mixed_input = mi(&px1.mix(px2, a)?, channel1)?;
        concave.record(mixed_input - (a * i1 + b * i2), || {
            format!("alpha={a} px1={:?} px2={:?}", px1.probs(), px2.probs())
        });
        let mixed_channel = mi(px1, &channel1.mix(channel2, a)?)?;
        convex.record((a * k1 + b * k2) - mixed_channel, || {
            format!(
                "alpha={a} ch1={:?} ch2={:?}",
                channel1.probs(),
                channel2.probs()
            )
        });
    }
    Ok(MiShapeReport {
        concave_in_input: concave,
        convex_in_channel: convex,
    })
}

/// Returns `(E[f(X)], f(E[X]))` for `X` taking `values[i]` with
/// probability `p[i]`.
pub fn jensen_probe<T: Scalar>(f: impl Fn(T) -> T, p: &Pmf<T>, values: &[T]) -> Result<(T, T)> {
    if values.len() != p.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} values", p.len()),
            found: values.len().to_string(),
        });
    }
    let lhs: T = p.probs().iter().zip(values).map(|(&w, &x)| w * f(x)).sum();
    let mean: T = p.probs().iter().zip(values).map(|(&w, &x)| w * x).sum();
    Ok((lhs, f(mean)))
}

/// Moves mass `eps` from the most to the least probable symbol and returns
/// `|H(p') − H(p)|` for each `eps`; the perturbation has total-variation size
/// `eps`.
pub fn entropy_continuity_probe<T: Scalar>(p: &Pmf<T>, eps: &[T]) -> Result<Vec<T>> {
    let probs = p.probs();
    let (hi, _) =
        probs.iter().enumerate().fold(
            (0, T::neg_infinity()),
            |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
        );
    let (lo, _) =
        probs.iter().enumerate().fold(
            (0, T::infinity()),
            |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
        );
    if hi == lo {
        return Err(Error::InvalidArgument("need at least two symbols".into()));
    }
    let h = entropy(p);
    eps.iter()
        .map(|&e| {
            if e > probs[hi] {
                return Err(Error::InvalidArgument(
                    "perturbation exceeds available mass".into(),
                ));
            }
            let mut moved = probs.to_vec();
            moved[hi] -= e;
            moved[lo] += e;
            let pp = Pmf::new(p.alphabet().to_vec(), moved)?;
            Ok((entropy(&pp) - h).abs())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Pmf<f64> {
        Pmf::<f64>::from_probs(v.to_vec()).unwrap()
    }

    #[test]
    fn kl_convexity_endpoints_and_identical_pairs_are_tight() {
        let (p1, q1) = (p(&[0.2, 0.8]), p(&[0.6, 0.4]));
        let (p2, q2) = (p(&[0.7, 0.3]), p(&[0.1, 0.9]));
        let r = kl_convexity_probe((&p1, &q1), (&p2, &q2), &[0.0, 1.0]).unwrap();
        assert!(r.worst_slack.abs() < 1e-15);
        let r = kl_convexity_probe((&p1, &q1), (&p1, &q1), &alpha_grid()).unwrap();
        assert!(r.worst_slack.abs() < 1e-15);
        let r = kl_convexity_probe((&p1, &q1), (&p2, &q2), &alpha_grid()).unwrap();
        assert_eq!(r.checks, 11);
        assert!(r.holds(1e-12));
        assert!(kl_convexity_probe((&p1, &q1), (&p2, &q2), &[1.5]).is_err());
    }

    #[test]
    fn mi_shape_probe_endpoints() {
        let (a, b) = (p(&[0.3, 0.7]), p(&[0.9, 0.1]));
        let c1 = CondPmf::<f64>::from_rows(&[vec![0.8, 0.2], vec![0.25, 0.75]]).unwrap();
        let c2 = CondPmf::<f64>::from_rows(&[vec![0.5, 0.5], vec![0.1, 0.9]]).unwrap();
        let r = mi_concavity_convexity_probe(&a, &a, &c1, &c1, &alpha_grid()).unwrap();
        assert!(r.concave_in_input.worst_slack.abs() < 1e-15);
        assert!(r.convex_in_channel.worst_slack.abs() < 1e-15);
        let r = mi_concavity_convexity_probe(&a, &b, &c1, &c2, &[0.0, 1.0]).unwrap();
        assert!(r.concave_in_input.worst_slack.abs() < 1e-15);
        assert!(r.convex_in_channel.worst_slack.abs() < 1e-15);
        let r = mi_concavity_convexity_probe(&a, &b, &c1, &c2, &alpha_grid()).unwrap();
        assert!(r.concave_in_input.holds(1e-12) && r.convex_in_channel.holds(1e-12));
    }

    #[test]
    fn jensen_examples() {
        let w = p(&[0.3, 0.7]);
        let (l, r) = jensen_probe(|x: f64| 2.0 * x + 1.0, &w, &[-1.0, 4.0]).unwrap();
        assert!((l - r).abs() < 1e-15);
        let (l, r) = jensen_probe(|x: f64| x * x, &w, &[-1.0, 4.0]).unwrap();
        assert!((l - (0.3 + 0.7 * 16.0)).abs() < 1e-12);
        assert!((r - (-0.3 + 0.7 * 4.0f64).powi(2)).abs() < 1e-12);
        assert!(l >= r);
        let (l, r) = jensen_probe(|t: f64| t * t.ln(), &w, &[0.5, 3.0]).unwrap();
        assert!(l >= r - 1e-12);
    }

    #[test]
    fn entropy_concavity() {
        let r = entropy_concavity_probe(&p(&[0.1, 0.9]), &p(&[0.8, 0.2]), &alpha_grid()).unwrap();
        assert!(r.holds(0.0));
    }

    #[test]
    fn continuity_gaps_shrink() {
        let gaps = entropy_continuity_probe(&p(&[0.5, 0.3, 0.2]), &[1e-2, 1e-4, 1e-6]).unwrap();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
    }
}
