//! Batch-level bounds on a score matrix `S[i][j] = g(x_i, y_j)` (or a
//! log-density matrix), each with its gradient with respect to the matrix.
//! Diagonal entries are the paired samples; off-diagonal entries stand in for
//! draws from the product of marginals.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Scalar};

fn check_square<T>(s: &ArrayView2<'_, T>) -> Result<usize> {
    let (r, c) = s.dim();
    if r != c {
        return Err(Error::ShapeMismatch {
            expected: "square matrix".into(),
            found: format!("{r}x{c}"),
        });
    }
    if r < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {r}"
        )));
    }
    Ok(r)
}

fn mean_diag<T: Scalar>(s: &ArrayView2<'_, T>, n: usize) -> T {
    (0..n).map(|i| s[[i, i]]).sum::<T>() / T::c(n as f64)
}

fn off_diag<'a, T: Scalar>(s: &'a ArrayView2<'_, T>) -> impl Iterator<Item = T> + Clone + 'a {
    s.indexed_iter()
        .filter(|((i, j), _)| i != j)
        .map(|(_, &v)| v)
}

fn column_off_diag<'a, T: Scalar>(
    s: &'a ArrayView2<'_, T>,
    j: usize,
    shift: T,
) -> impl Iterator<Item = T> + Clone + 'a {
    s.column(j)
        .into_iter()
        .enumerate()
        .filter(move |(i, _)| *i != j)
        .map(move |(_, &v)| v - shift)
}

/// Donsker-Varadhan: mean paired score minus the log of the mean
/// off-diagonal exponentiated score.
pub fn dv_bound<T: Scalar>(s: ArrayView2<'_, T>) -> Result<T> {
    let n = check_square(&s)?;
    let pairs = T::c((n * (n - 1)) as f64);
    Ok(mean_diag(&s, n) - (log_sum_exp(off_diag(&s)) - pairs.ln()))
}

pub fn dv_bound_grad<T: Scalar>(s: ArrayView2<'_, T>) -> Result<(T, Array2<T>)> {
    let n = check_square(&s)?;
    let value = dv_bound(s)?;
    let lse = log_sum_exp(off_diag(&s));
    let inv_n = T::one() / T::c(n as f64);
    let grad = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            inv_n
        } else {
            -(s[[i, j]] - lse).exp()
        }
    });
    Ok((value, grad))
}

/// Per-column partition terms `E_j = mean_{i≠j} exp(S_ij − log_a_j)`.
fn tuba_partitions<T: Scalar>(s: &ArrayView2<'_, T>, n: usize, log_a: &[T]) -> Vec<T> {
    let ln_m = T::c((n - 1) as f64).ln();
    (0..n)
        .map(|j| (log_sum_exp(column_off_diag(s, j, log_a[j])) - ln_m).exp())
        .collect()
}

fn check_baseline<T>(n: usize, log_a: &[T]) -> Result<()> {
    if log_a.len() != n {
        return Err(Error::ShapeMismatch {
            expected: format!("{n} baseline values"),
            found: log_a.len().to_string(),
        });
    }
    Ok(())
}

/// Tractable unnormalized bound with baseline `a(y_j) = exp(log_a[j])`:
/// mean paired score minus `mean_j [E_j + log a(y_j) − 1]`.
pub fn tuba_bound<T: Scalar>(s: ArrayView2<'_, T>, log_a: &[T]) -> Result<T> {
    let n = check_square(&s)?;
    check_baseline(n, log_a)?;
    let parts = tuba_partitions(&s, n, log_a);
    let penalty = parts
        .iter()
        .zip(log_a)
        .map(|(&e, &la)| e + la - T::one())
        .sum::<T>()
        / T::c(n as f64);
    Ok(mean_diag(&s, n) - penalty)
}

/// Value, gradient in the scores, gradient in `log_a`.
pub fn tuba_bound_grad<T: Scalar>(
    s: ArrayView2<'_, T>,
    log_a: &[T],
) -> Result<(T, Array2<T>, Vec<T>)> {
    let n = check_square(&s)?;
    check_baseline(n, log_a)?;
    let value = tuba_bound(s, log_a)?;
    let nf = T::c(n as f64);
    let ln_m = T::c((n - 1) as f64).ln();
    let grad = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            T::one() / nf
        } else {
            -(s[[i, j]] - log_a[j] - ln_m).exp() / nf
        }
    });
    let d_log_a = tuba_partitions(&s, n, log_a)
        .into_iter()
        .map(|e| (e - T::one()) / nf)
        .collect();
    Ok((value, grad, d_log_a))
}

/// The tractable bound with the baseline fixed at `a ≡ e`: mean paired score
/// minus `e⁻¹` times the mean off-diagonal exponentiated score.
pub fn nwj_bound<T: Scalar>(s: ArrayView2<'_, T>) -> Result<T> {
    let n = check_square(&s)?;
    tuba_bound(s, &vec![T::one(); n])
}

pub fn nwj_bound_grad<T: Scalar>(s: ArrayView2<'_, T>) -> Result<(T, Array2<T>)> {
    let n = check_square(&s)?;
    let (v, g, _) = tuba_bound_grad(s, &vec![T::one(); n])?;
    Ok((v, g))
}

/// Contrastive bound, `mean_i [S_ii − ln((1/K) Σ_j exp S_ij)]`; never above `ln K`.
pub fn infonce_bound<T: Scalar>(s: ArrayView2<'_, T>) -> Result<T> {
    let n = check_square(&s)?;
    let ln_k = T::c(n as f64).ln();
    let total: T = (0..n)
        .map(|i| s[[i, i]] - (log_sum_exp(s.row(i).iter().copied()) - ln_k))
        .sum();
    Ok(total / T::c(n as f64))
}

pub fn infonce_bound_grad<T: Scalar>(s: ArrayView2<'_, T>) -> Result<(T, Array2<T>)> {
    let n = check_square(&s)?;
    let value = infonce_bound(s)?;
    let nf = T::c(n as f64);
    let mut grad = Array2::zeros((n, n));
    for i in 0..n {
        let lse = log_sum_exp(s.row(i).iter().copied());
        for j in 0..n {
            let soft = (s[[i, j]] - lse).exp();
            grad[[i, j]] = ((if i == j { T::one() } else { T::zero() }) - soft) / nf;
        }
    }
    Ok((value, grad))
}

/// Unnormalized bound with the log partition of each `y_j` replaced by its
/// batch estimate. Biased; reported for diagnostics only.
pub fn uba_diagnostic<T: Scalar>(s: ArrayView2<'_, T>) -> Result<T> {
    let n = check_square(&s)?;
    let ln_m = T::c((n - 1) as f64).ln();
    let log_z: T = (0..n)
        .map(|j| log_sum_exp(column_off_diag(&s, j, T::zero())) - ln_m)
        .sum::<T>()
        / T::c(n as f64);
    Ok(mean_diag(&s, n) - log_z)
}

/// Leave-one-out upper bound from `L[i][j] = log p(y_i | x_j)`.
pub fn l1out_bound<T: Scalar>(l: ArrayView2<'_, T>) -> Result<T> {
    let n = check_square(&l)?;
    let ln_m = T::c((n - 1) as f64).ln();
    let total: T = (0..n)
        .map(|i| {
            let others = l
                .row(i)
                .into_iter()
                .enumerate()
                .filter(move |(j, _)| *j != i)
                .map(|(_, &v)| v);
            l[[i, i]] - (log_sum_exp(others) - ln_m)
        })
        .sum();
    Ok(total / T::c(n as f64))
}
