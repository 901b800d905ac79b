//! Correlated Gaussian benchmark tasks with closed-form ground truth.
//!
//! `X ~ N(0, I_d)` and `Y = ρX + sqrt(1 − ρ²) ε` with `ε ~ N(0, I_d)`, so each
//! coordinate pair is a standard bivariate normal with correlation `ρ` and
//! `I(X; Y) = −(d/2) ln(1 − ρ²)`.

use std::f64::consts::{E, PI};

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, NormalStream};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianTask<T> {
    dim: usize,
    rho: T,
}

impl<T: Scalar> GaussianTask<T> {
    pub fn new(dim: usize, rho: T) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dim must be at least 1".into()));
        }
        if rho.is_nan() || rho.abs() >= T::one() {
            return Err(Error::InvalidArgument(format!(
                "|rho| must be < 1, got {rho}"
            )));
        }
        Ok(GaussianTask { dim, rho })
    }

    /// The positive correlation whose task has mutual information `mi`.
    pub fn from_target_mi(dim: usize, mi: T) -> Result<Self> {
        if mi.is_nan() || mi < T::zero() || !mi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "target MI must be finite and >= 0, got {mi}"
            )));
        }
        let d = T::c(dim as f64);
        // 1 − ρ² = exp(−2 I / d)
        let rho = (-(-T::c(2.0) * mi / d).exp_m1()).sqrt();
        Self::new(dim, rho)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn true_mi(&self) -> T {
        -T::c(self.dim as f64 / 2.0) * (-self.rho * self.rho).ln_1p()
    }

    /// Differential entropy `h(X) = (d/2) ln(2πe)`.
    pub fn entropy_x(&self) -> T {
        T::c(self.dim as f64 / 2.0 * (2.0 * PI * E).ln())
    }

    fn cond_var(&self) -> T {
        T::one() - self.rho * self.rho
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::ShapeMismatch {
                expected: format!("vector of length {}", self.dim),
                found: len.to_string(),
            });
        }
        Ok(())
    }

    /// `log N(y; ρx, (1 − ρ²) I)`.
    pub fn cond_log_density(&self, y: &[T], x: &[T]) -> Result<T> {
        self.check_dim(y.len())?;
        self.check_dim(x.len())?;
        let var = self.cond_var();
        let sq: T = y
            .iter()
            .zip(x)
            .map(|(&a, &b)| (a - self.rho * b).powi(2))
            .sum();
        Ok(-T::c(self.dim as f64 / 2.0) * (T::c(2.0 * PI) * var).ln() - sq / (T::c(2.0) * var))
    }

    /// `log N(y; 0, I)`.
    pub fn marginal_log_density(&self, y: &[T]) -> Result<T> {
        self.check_dim(y.len())?;
        let sq: T = y.iter().map(|&a| a * a).sum();
        Ok(-T::c(self.dim as f64 / 2.0 * (2.0 * PI).ln()) - sq / T::c(2.0))
    }

    /// Matrix `L[i][j] = log p(y_i | x_j)` for every pairing in the batch.
    pub fn cond_log_density_matrix(&self, batch: &SampleBatch<T>) -> Array2<T> {
        let var = self.cond_var();
        let cross = batch.ys.dot(&batch.xs.t());
        let ysq = row_sq_norms(&batch.ys);
        let xsq = row_sq_norms(&batch.xs);
        let norm = -T::c(self.dim as f64 / 2.0) * (T::c(2.0 * PI) * var).ln();
        let two = T::c(2.0);
        let rho = self.rho;
        Array2::from_shape_fn(cross.dim(), |(i, j)| {
            let sq = ysq[i] - two * rho * cross[[i, j]] + rho * rho * xsq[j];
            norm - sq.max(T::zero()) / (two * var)
        })
    }

    /// Draws `n` pairs from stream 0 of `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleBatch<T>> {
        self.sample_stream(n, seed, 0)
    }

    /// Draws `n` pairs from the generator keyed by `(seed, stream)`.
    pub fn sample_stream(&self, n: usize, seed: u64, stream: u64) -> Result<SampleBatch<T>> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "batches need at least 2 samples, got {n}"
            )));
        }
        let d = self.dim;
        let mut normals = NormalStream::new(stream_rng(seed, stream));
        let rho = self.rho.to_f64_lossy();
        let noise_scale = (1.0 - rho * rho).sqrt();
        let mut xs = Array2::zeros((n, d));
        let mut ys = Array2::zeros((n, d));
        for i in 0..n {
            for k in 0..d {
                let x = normals.next_normal();
                let e = normals.next_normal();
                xs[[i, k]] = T::c(x);
                ys[[i, k]] = T::c(rho * x + noise_scale * e);
            }
        }
        Ok(SampleBatch {
            xs,
            ys,
            seed,
            stream,
            task: *self,
        })
    }
}

fn sq_norm<T: Scalar>(v: ArrayView1<'_, T>) -> T {
    v.iter().map(|&a| a * a).sum()
}

fn row_sq_norms<T: Scalar>(m: &Array2<T>) -> Array1<T> {
    m.axis_iter(Axis(0)).map(sq_norm).collect()
}

/// Paired samples `(x_i, y_i)`, one per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch<T> {
    pub xs: Array2<T>,
    pub ys: Array2<T>,
    pub seed: u64,
    pub stream: u64,
    pub task: GaussianTask<T>,
}

impl<T: Scalar> SampleBatch<T> {
    pub fn len(&self) -> usize {
        self.xs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.nrows() == 0
    }
}
