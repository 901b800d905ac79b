//! Entropy, divergence and mutual information on finite tables. All values
//! are in nats, with `0 · ln 0 = 0`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::tables::{Axis, Axis3, CondPmf, ExtReal, JointPmf2, JointPmf3, JointPmfN, Pmf};

/// Largest number of conditioning variables accepted by [`mi_chain_rule_terms`].
pub const CHAIN_RULE_MAX_VARS: usize = 4;

pub(crate) fn entropy_of<'a, T: Scalar>(probs: impl IntoIterator<Item = &'a T>) -> T {
    let mut h = T::zero();
    for &p in probs {
        if p > T::zero() {
            h -= p * p.ln();
        }
    }
    h
}

pub(crate) fn kl_of<T: Scalar>(p: &[T], q: &[T]) -> ExtReal<T> {
    let mut d = T::zero();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == T::zero() {
            continue;
        }
        if qi == T::zero() {
            return ExtReal::Infinite;
        }
        d += pi * (pi / qi).ln();
    }
    ExtReal::Finite(d)
}

pub fn entropy<T: Scalar>(p: &Pmf<T>) -> T {
    entropy_of(p.probs())
}

pub fn joint_entropy<T: Scalar>(j: &JointPmf2<T>) -> T {
    entropy_of(j.probs().iter())
}

/// `H(target | given) = H(X, Y) − H(given)`.
pub fn conditional_entropy<T: Scalar>(j: &JointPmf2<T>, given: Axis) -> T {
    joint_entropy(j) - entropy(&j.marginal(given))
}

/// `D(p ‖ q) = Σ p ln(p/q)`; infinite when `q` misses part of `p`'s support.
pub fn kl_divergence<T: Scalar>(p: &Pmf<T>, q: &Pmf<T>) -> Result<ExtReal<T>> {
    p.check_same_alphabet(q)?;
    Ok(kl_of(p.probs(), q.probs()))
}

/// `Σ_x w(x) · D(p(·|x) ‖ q(·|x))`; rows with zero weight contribute nothing.
pub fn conditional_kl<T: Scalar>(
    p: &CondPmf<T>,
    q: &CondPmf<T>,
    weights: &Pmf<T>,
) -> Result<ExtReal<T>> {
    p.check_same_alphabets(q)?;
    if weights.alphabet() != p.given_alphabet() {
        return Err(Error::AlphabetMismatch(
            "weights must range over the conditioning alphabet".into(),
        ));
    }
    let mut total = ExtReal::zero();
    for (i, &w) in weights.probs().iter().enumerate() {
        let row_p = p.probs().row(i);
        let row_q = q.probs().row(i);
        let d = kl_of(&row_p.to_vec(), &row_q.to_vec());
        total = total + d.weighted(w);
    }
    Ok(total)
}

/// Mutual information by direct summation of
/// `Σ p(x,y) ln(p(x,y) / (p(x) p(y)))`.
pub fn mutual_information<T: Scalar>(j: &JointPmf2<T>) -> T {
    let px = j.marginal(Axis::Rows);
    let py = j.marginal(Axis::Cols);
    mi_terms(j, px.probs(), py.probs())
}

pub(crate) fn mi_terms<T: Scalar>(j: &JointPmf2<T>, px: &[T], py: &[T]) -> T {
    let mut acc = T::zero();
    for ((r, c), &p) in j.probs().indexed_iter() {
        if p > T::zero() {
            acc += p * (p / (px[r] * py[c])).ln();
        }
    }
    acc
}

/// Mutual information as `D(P_{X,Y} ‖ P_X ⊗ P_Y)`.
pub fn mutual_information_via_kl<T: Scalar>(j: &JointPmf2<T>) -> T {
    let product = JointPmf2::product(&j.marginal(Axis::Rows), &j.marginal(Axis::Cols))
        .expect("product of valid marginals is valid");
    kl_of(
        &j.probs().iter().copied().collect::<Vec<_>>(),
        &product.probs().iter().copied().collect::<Vec<_>>(),
    )
    .finite()
    .expect("joint is absolutely continuous w.r.t. the product of its marginals")
}

/// Mutual information as `H(X) + H(Y) − H(X, Y)`.
pub fn mutual_information_via_entropies<T: Scalar>(j: &JointPmf2<T>) -> T {
    entropy(&j.marginal(Axis::Rows)) + entropy(&j.marginal(Axis::Cols)) - joint_entropy(j)
}

/// Mutual information as `H(target) − H(target | given)`.
pub fn mutual_information_via_conditional<T: Scalar>(j: &JointPmf2<T>, given: Axis) -> T {
    entropy(&j.marginal(given.other())) - conditional_entropy(j, given)
}

/// Mutual information as `Σ_y p(y) D(P_{X|Y=y} ‖ P_X)` (or the transposed
/// orientation when `given` is `Rows`).
pub fn mutual_information_via_conditional_kl<T: Scalar>(j: &JointPmf2<T>, given: Axis) -> T {
    let cond = j.conditional(given);
    let target = j.marginal(given.other());
    let weights = j.marginal(given);
    let mut acc = T::zero();
    for (i, &w) in weights.probs().iter().enumerate() {
        if w > T::zero() {
            let row = cond.probs().row(i);
            let d = kl_of(&row.to_vec(), target.probs());
            acc += w * d
                .finite()
                .expect("conditional is dominated by the marginal");
        }
    }
    acc
}

fn other_two(conditioning: Axis3) -> (usize, usize) {
    match conditioning {
        Axis3::X => (1, 2),
        Axis3::Y => (0, 2),
        Axis3::Z => (0, 1),
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// `I(A; B | C)` where `C` is the `conditioning` axis and `A`, `B` are the
/// other two axes in order, computed as `H(A|C) − H(A|B,C)`.
pub fn conditional_mutual_information<T: Scalar>(j: &JointPmf3<T>, conditioning: Axis3) -> T {
    let t = j.to_table();
    let c = conditioning.index();
    let (a, b) = other_two(conditioning);
    let h_ac = entropy_of_axes(&t, &sorted(vec![a, c]));
    let h_c = entropy_of_axes(&t, &[c]);
    let h_abc = entropy_of_axes(&t, &[0, 1, 2]);
    let h_bc = entropy_of_axes(&t, &sorted(vec![b, c]));
    (h_ac - h_c) - (h_abc - h_bc)
}

/// `I(A; B | C)` by direct summation of
/// `Σ p(a,b,c) ln(p(a,b,c) p(c) / (p(a,c) p(b,c)))`.
pub fn conditional_mutual_information_direct<T: Scalar>(
    j: &JointPmf3<T>,
    conditioning: Axis3,
) -> T {
    let c = conditioning.index();
    let (a, b) = other_two(conditioning);
    let pc = j.marginal(conditioning);
    let ax = |k: usize| match k {
        0 => Axis3::X,
        1 => Axis3::Y,
        _ => Axis3::Z,
    };
    // rows = A or B, cols = C
    let pac = j.marginal2(ax(a), conditioning).expect("distinct axes");
    let pbc = j.marginal2(ax(b), conditioning).expect("distinct axes");
    let mut acc = T::zero();
    for (idx, &p) in j.probs().indexed_iter() {
        if p > T::zero() {
            let idx = [idx.0, idx.1, idx.2];
            let (ia, ib, ic) = (idx[a], idx[b], idx[c]);
            let num = p * pc.probs()[ic];
            let den = pac.probs()[[ia, ic]] * pbc.probs()[[ib, ic]];
            acc += p * (num / den).ln();
        }
    }
    acc
}

/// Entropy of the marginal over `axes`.
pub fn entropy_of_axes<T: Scalar>(j: &JointPmfN<T>, axes: &[usize]) -> T {
    if axes.is_empty() {
        return T::zero();
    }
    entropy_of(j.marginal_probs(axes).iter())
}

/// `I(A; B)` between two disjoint groups of axes of an n-way table.
pub fn mutual_information_groups<T: Scalar>(j: &JointPmfN<T>, a: &[usize], b: &[usize]) -> T {
    let union = sorted(a.iter().chain(b).copied().collect());
    entropy_of_axes(j, &sorted(a.to_vec())) + entropy_of_axes(j, &sorted(b.to_vec()))
        - entropy_of_axes(j, &union)
}

/// `I(A; B | C)` for disjoint axis groups of an n-way table.
pub fn conditional_mutual_information_groups<T: Scalar>(
    j: &JointPmfN<T>,
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> T {
    let ac = sorted(a.iter().chain(c).copied().collect());
    let bc = sorted(b.iter().chain(c).copied().collect());
    let abc = sorted(a.iter().chain(b).chain(c).copied().collect());
    entropy_of_axes(j, &ac) + entropy_of_axes(j, &bc)
        - entropy_of_axes(j, &abc)
        - entropy_of_axes(j, &sorted(c.to_vec()))
}

/// Terms `I(X_i; Y | X_1, ..., X_{i−1})` of the mutual-information chain
/// rule, for a table whose last axis is `Y` and whose leading axes are
/// `X_1, ..., X_n`.
pub fn mi_chain_rule_terms<T: Scalar>(j: &JointPmfN<T>) -> Result<Vec<T>> {
    let n = j.ndim().saturating_sub(1);
    if n == 0 {
        return Err(Error::InvalidArgument(
            "chain rule needs at least one X axis and the Y axis".into(),
        ));
    }
    if n > CHAIN_RULE_MAX_VARS {
        return Err(Error::TooLarge {
            what: "number of X variables",
            size: n,
            limit: CHAIN_RULE_MAX_VARS,
        });
    }
    let y = n;
    Ok((0..n)
        .map(|i| {
            let prefix: Vec<usize> = (0..i).collect();
            conditional_mutual_information_groups(j, &[i], &[y], &prefix)
        })
        .collect())
}
