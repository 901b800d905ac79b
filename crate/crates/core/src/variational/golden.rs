use crate::discrete::measures::kl_of;
use crate::discrete::{Axis, ExtReal, JointPmf2, Pmf};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The two divergence terms whose difference is the mutual information:
/// `D(P_{A|B} ‖ Q_A | P_B) − D(P_A ‖ Q_A)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoldenTerms<T> {
    pub conditional: ExtReal<T>,
    pub penalty: ExtReal<T>,
}

impl<T: Scalar> GoldenTerms<T> {
    /// `conditional − penalty`, undefined when either term is infinite.
    pub fn difference(&self) -> Option<T> {
        Some(self.conditional.finite()? - self.penalty.finite()?)
    }
}

/// Splits `I(X;Y)` around an auxiliary marginal `q` placed on `aux` (the
/// variable whose conditional is compared against `q`).
pub fn golden_decomposition<T: Scalar>(
    j: &JointPmf2<T>,
    q: &Pmf<T>,
    aux: Axis,
) -> Result<GoldenTerms<T>> {
    if q.alphabet() != j.labels(aux) {
        return Err(Error::AlphabetMismatch(
            "auxiliary distribution must range over the selected axis".into(),
        ));
    }
    let given = aux.other();
    let cond = j.conditional(given);
    let weights = j.marginal(given);
    let mut conditional = ExtReal::zero();
    for (i, &w) in weights.probs().iter().enumerate() {
        let row = cond.probs().row(i).to_vec();
        conditional = conditional + kl_of(&row, q.probs()).weighted(w);
    }
    let penalty = kl_of(j.marginal(aux).probs(), q.probs());
    Ok(GoldenTerms {
        conditional,
        penalty,
    })
}
