//! Partition suprema: the Gelfand-Yaglom-Perez form of KL divergence and its
//! rectangle-partition form for mutual information.

use std::collections::HashSet;

use crate::discrete::{Axis, ExtReal, JointPmf2, Pmf};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const GYP_MAX_ALPHABET: usize = 8;
pub const GYP_MI_MAX_ALPHABET: usize = 5;

/// Disjoint blocks of symbol labels covering an alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<String>>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<String>>, alphabet: &[String]) -> Result<Self> {
        let mut seen = HashSet::new();
        for label in blocks.iter().flatten() {
            if !alphabet.contains(label) {
                return Err(Error::InvalidArgument(format!("`{label}` not in alphabet")));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "`{label}` appears in two blocks"
                )));
            }
        }
        if seen.len() != alphabet.len() || blocks.iter().any(Vec::is_empty) {
            return Err(Error::InvalidArgument(
                "blocks must be nonempty and cover the alphabet".into(),
            ));
        }
        Ok(Partition { blocks })
    }

    fn from_rgs(rgs: &[usize], alphabet: &[String]) -> Self {
        let nblocks = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); nblocks];
        for (label, &b) in alphabet.iter().zip(rgs) {
            blocks[b].push(label.clone());
        }
        Partition { blocks }
    }

    pub fn blocks(&self) -> &[Vec<String>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// All restricted-growth strings of length `n` with at most `max_blocks`
/// distinct values, in lexicographic order. Each string is the canonical
/// form of one set partition.
pub fn restricted_growth_strings(n: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 || max_blocks == 0 {
        return out;
    }
    let mut cur = vec![0usize; n];
    fn rec(
        i: usize,
        used: usize,
        cur: &mut Vec<usize>,
        max_blocks: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        let hi = (used + 1).min(max_blocks);
        for b in 0..hi {
            cur[i] = b;
            rec(i + 1, used.max(b + 1), cur, max_blocks, out);
        }
    }
    rec(1, 1, &mut cur, max_blocks, &mut out);
    out
}

fn block_sums<T: Scalar>(probs: &[T], rgs: &[usize]) -> Vec<T> {
    let nblocks = rgs.iter().max().map_or(0, |m| m + 1);
    let mut sums = vec![T::zero(); nblocks];
    for (&p, &b) in probs.iter().zip(rgs) {
        sums[b] += p;
    }
    sums
}

fn partition_value<T: Scalar>(p: &[T], q: &[T], rgs: &[usize]) -> ExtReal<T> {
    let (pe, qe) = (block_sums(p, rgs), block_sums(q, rgs));
    let mut acc = T::zero();
    for (&a, &b) in pe.iter().zip(&qe) {
        if a == T::zero() {
            continue;
        }
        if b == T::zero() {
            return ExtReal::Infinite;
        }
        acc += a * (a / b).ln();
    }
    ExtReal::Finite(acc)
}

/// Coarsening never raises the value mathematically, so an apparent gain
/// smaller than this is rounding and the finer candidate is kept.
fn rounding_margin<T: Scalar>(best: T) -> T {
    T::epsilon() * T::c(64.0) * (T::one() + best.abs())
}

#[derive(Clone, Debug)]
pub struct GypFit<T> {
    pub best: Partition,
    pub value: ExtReal<T>,
}

/// Supremum over partitions into at most `max_blocks` blocks of
/// `Σ P[E] ln(P[E]/Q[E])`. Candidates are scanned from finest to coarsest.
pub fn gyp_supremum<T: Scalar>(p: &Pmf<T>, q: &Pmf<T>, max_blocks: usize) -> Result<GypFit<T>> {
    p.check_same_alphabet(q)?;
    if p.len() > GYP_MAX_ALPHABET {
        return Err(Error::TooLarge {
            what: "alphabet",
            size: p.len(),
            limit: GYP_MAX_ALPHABET,
        });
    }
    if max_blocks == 0 {
        return Err(Error::InvalidArgument(
            "max_blocks must be at least 1".into(),
        ));
    }
    let mut best: Option<(Vec<usize>, ExtReal<T>)> = None;
    for rgs in restricted_growth_strings(p.len(), max_blocks)
        .into_iter()
        .rev()
    {
        let v = partition_value(p.probs(), q.probs(), &rgs);
        let better = match &best {
            None => true,
            Some((_, ExtReal::Infinite)) => false,
            Some((_, ExtReal::Finite(b))) => match v {
                ExtReal::Infinite => true,
                ExtReal::Finite(x) => x > *b + rounding_margin(*b),
            },
        };
        if better {
            best = Some((rgs, v));
        }
    }
    let (rgs, value) = best.expect("at least one partition");
    Ok(GypFit {
        best: Partition::from_rgs(&rgs, p.alphabet()),
        value,
    })
}

#[derive(Clone, Debug)]
pub struct GypMiFit<T> {
    pub rows: Partition,
    pub cols: Partition,
    pub value: T,
}

fn rectangle_value<T: Scalar>(
    j: &JointPmf2<T>,
    px: &[T],
    py: &[T],
    rr: &[usize],
    cr: &[usize],
) -> T {
    let (pe, pf) = (block_sums(px, rr), block_sums(py, cr));
    let mut cells = ndarray::Array2::<T>::zeros((pe.len(), pf.len()));
    for ((r, c), &v) in j.probs().indexed_iter() {
        cells[[rr[r], cr[c]]] += v;
    }
    let mut acc = T::zero();
    for ((e, f), &v) in cells.indexed_iter() {
        if v > T::zero() {
            acc += v * (v / (pe[e] * pf[f])).ln();
        }
    }
    acc
}

/// Supremum of the rectangle-partition form of `I(X;Y)` over partitions of
/// each alphabet into at most `max_blocks` blocks.
pub fn gyp_mi_supremum<T: Scalar>(j: &JointPmf2<T>, max_blocks: usize) -> Result<GypMiFit<T>> {
    let (nr, nc) = j.probs().dim();
    for n in [nr, nc] {
        if n > GYP_MI_MAX_ALPHABET {
            return Err(Error::TooLarge {
                what: "alphabet",
                size: n,
                limit: GYP_MI_MAX_ALPHABET,
            });
        }
    }
    if max_blocks == 0 {
        return Err(Error::InvalidArgument(
            "max_blocks must be at least 1".into(),
        ));
    }
    let px = j.marginal(Axis::Rows);
    let py = j.marginal(Axis::Cols);
    let row_parts = restricted_growth_strings(nr, max_blocks);
    let col_parts = restricted_growth_strings(nc, max_blocks);
    let mut best: Option<(usize, usize, T)> = None;
    for (ri, rr) in row_parts.iter().enumerate().rev() {
        for (ci, cr) in col_parts.iter().enumerate().rev() {
            let v = rectangle_value(j, px.probs(), py.probs(), rr, cr);
            if best.is_none_or(|(_, _, b)| v > b + rounding_margin(b)) {
                best = Some((ri, ci, v));
            }
        }
    }
    let (ri, ci, value) = best.expect("at least one rectangle partition");
    Ok(GypMiFit {
        rows: Partition::from_rgs(&row_parts[ri], j.row_labels()),
        cols: Partition::from_rgs(&col_parts[ci], j.col_labels()),
        value,
    })
}
