//! Gaussian variational decoder `q(x | y) = N(x; μ(y), diag(exp(log_var)))`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2};

use crate::critic::{Mlp, ParamSet};
use crate::error::{Error, Result};
use crate::gaussian::SampleBatch;
use crate::rng::stream_rng;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct DecoderParams<T> {
    pub mean: Mlp<T>,
    pub log_var: Array1<T>,
}

impl<T: Scalar> DecoderParams<T> {
    pub fn init(dim: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        let mut sizes = vec![dim];
        sizes.extend(hidden);
        sizes.push(dim);
        Ok(DecoderParams {
            mean: Mlp::init(&sizes, &mut stream_rng(seed, 2))?,
            log_var: Array1::zeros(dim),
        })
    }

    pub fn new(mean: Mlp<T>, log_var: Array1<T>) -> Result<Self> {
        if mean.input_dim() != mean.output_dim() || mean.output_dim() != log_var.len() {
            return Err(Error::ShapeMismatch {
                expected: format!(
                    "square mean network with {} log-variances",
                    mean.output_dim()
                ),
                found: format!(
                    "{} -> {}, {}",
                    mean.input_dim(),
                    mean.output_dim(),
                    log_var.len()
                ),
            });
        }
        Ok(DecoderParams { mean, log_var })
    }

    /// `log q(x_i | y_i)` for each row.
    pub fn log_density(&self, xs: ArrayView2<'_, T>, ys: ArrayView2<'_, T>) -> Result<Vec<T>> {
        Ok(self.forward(xs, ys)?.0)
    }

    fn forward(
        &self,
        xs: ArrayView2<'_, T>,
        ys: ArrayView2<'_, T>,
    ) -> Result<(Vec<T>, crate::critic::MlpCache<T>)> {
        if xs.dim() != ys.dim() || xs.ncols() != self.log_var.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("matching n x {} samples", self.log_var.len()),
                found: format!("{:?} and {:?}", xs.dim(), ys.dim()),
            });
        }
        let cache = self.mean.forward(ys)?;
        let half = T::c(0.5);
        let ln2pi = T::c((2.0 * PI).ln());
        let out = xs
            .outer_iter()
            .zip(cache.output.outer_iter())
            .map(|(x, mu)| {
                let mut acc = T::zero();
                for k in 0..x.len() {
                    let lv = self.log_var[k];
                    let r = x[k] - mu[k];
                    acc -= half * (ln2pi + lv + r * r * (-lv).exp());
                }
                acc
            })
            .collect();
        Ok((out, cache))
    }

    /// Mean log-density over the batch and its parameter gradient.
    pub fn mean_log_density_grad(&self, batch: &SampleBatch<T>) -> Result<(T, DecoderParams<T>)> {
        let (vals, cache) = self.forward(batch.xs.view(), batch.ys.view())?;
        let n = batch.len();
        let nf = T::c(n as f64);
        let value = vals.iter().copied().sum::<T>() / nf;
        let d = self.log_var.len();
        let prec = self.log_var.mapv(|lv| (-lv).exp());
        let mut d_mu = Array2::zeros((n, d));
        let mut d_lv = Array1::zeros(d);
        let half = T::c(0.5);
        for i in 0..n {
            for k in 0..d {
                let r = batch.xs[[i, k]] - cache.output[[i, k]];
                d_mu[[i, k]] = r * prec[k] / nf;
                d_lv[k] += half * (r * r * prec[k] - T::one()) / nf;
            }
        }
        let mean = self.mean.backward(&cache, d_mu.view())?;
        Ok((
            value,
            DecoderParams {
                mean,
                log_var: d_lv,
            },
        ))
    }
}

impl<T: Scalar> ParamSet<T> for DecoderParams<T> {
    fn tensors(&self) -> Vec<&[T]> {
        let mut v = self.mean.tensors();
        v.push(self.log_var.as_slice().expect("standard layout"));
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = self.mean.tensors_mut();
        v.push(self.log_var.as_slice_mut().expect("standard layout"));
        v
    }
}
