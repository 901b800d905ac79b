//! Fully connected ReLU network with a linear output layer.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::params::ParamSet;

#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    /// `fan_in × fan_out`
    pub w: Array2<T>,
    pub b: Array1<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    layers: Vec<Dense<T>>,
}

/// Inputs to every layer, kept for the backward pass.
#[derive(Clone, Debug)]
pub struct MlpCache<T> {
    inputs: Vec<Array2<T>>,
    pub output: Array2<T>,
}

impl<T> MlpCache<T> {
    pub fn rows(&self) -> usize {
        self.output.nrows()
    }
}

impl<T: Scalar> Mlp<T> {
    /// `sizes = [input, hidden..., output]`; weights uniform in
    /// `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn init<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "layer sizes must be nonzero with at least input and output, got {sizes:?}"
            )));
        }
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let w = Array2::from_shape_simple_fn((fan_in, fan_out), || {
                    T::c(rng.random_range(-bound..bound))
                });
                Dense {
                    w,
                    b: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Mlp { layers })
    }

    pub fn from_layers(layers: Vec<Dense<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument(
                "network needs at least one layer".into(),
            ));
        }
        for pair in layers.windows(2) {
            if pair[0].w.ncols() != pair[1].w.nrows() {
                return Err(Error::ShapeMismatch {
                    expected: format!("layer input {}", pair[0].w.ncols()),
                    found: pair[1].w.nrows().to_string(),
                });
            }
        }
        if layers.iter().any(|l| l.b.len() != l.w.ncols()) {
            return Err(Error::InvalidArgument(
                "bias length must equal fan_out".into(),
            ));
        }
        Ok(Mlp { layers })
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").w.ncols()
    }

    pub fn forward(&self, input: ArrayView2<'_, T>) -> Result<MlpCache<T>> {
        if input.ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} input columns", self.input_dim()),
                found: input.ncols().to_string(),
            });
        }
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut a = input.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.w);
            z += &layer.b;
            if l < last {
                z.mapv_inplace(|v| v.max(T::zero()));
            }
            inputs.push(a);
            a = z;
        }
        Ok(MlpCache { inputs, output: a })
    }

    /// Parameter gradients of `Σ upstream ⊙ output`.
    pub fn backward(&self, cache: &MlpCache<T>, upstream: ArrayView2<'_, T>) -> Result<Mlp<T>> {
        if upstream.dim() != cache.output.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", cache.output.dim()),
                found: format!("{:?}", upstream.dim()),
            });
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = upstream.as_standard_layout().into_owned();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let a = &cache.inputs[l];
            let gw = a.t().dot(&delta).as_standard_layout().into_owned();
            let gb = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut prev = delta.dot(&layer.w.t());
                // a is post-ReLU, so a > 0 exactly where the unit was active
                prev.zip_mut_with(a, |d, &act| {
                    if act <= T::zero() {
                        *d = T::zero();
                    }
                });
                delta = prev;
            }
            grads.push(Dense { w: gw, b: gb });
        }
        grads.reverse();
        Ok(Mlp { layers: grads })
    }
}

impl<T: Scalar> ParamSet<T> for Mlp<T> {
    fn tensors(&self) -> Vec<&[T]> {
        self.layers
            .iter()
            .flat_map(|l| {
                [
                    l.w.as_slice().expect("standard layout"),
                    l.b.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                [
                    l.w.as_slice_mut().expect("standard layout"),
                    l.b.as_slice_mut().expect("standard layout"),
                ]
            })
            .collect()
    }
}
