use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::params::ParamSet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig<T> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
}

impl<T: Scalar> Default for AdamConfig<T> {
    fn default() -> Self {
        AdamConfig {
            lr: T::c(5e-4),
            beta1: T::c(0.9),
            beta2: T::c(0.999),
            eps: T::c(1e-8),
        }
    }
}

/// Bias-corrected first and second moment accumulators.
#[derive(Clone, Debug)]
pub struct AdamState<T, P> {
    m: P,
    v: P,
    step: u64,
    config: AdamConfig<T>,
}

impl<T: Scalar, P: ParamSet<T>> AdamState<T, P> {
    pub fn new(params: &P, config: AdamConfig<T>) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
            config,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn config(&self) -> &AdamConfig<T> {
        &self.config
    }

    /// Moves `params` against `grads` (descent).
    pub fn step(&mut self, params: &mut P, grads: &P) -> Result<()> {
        let layout = self.m.layout();
        if params.layout() != layout || grads.layout() != layout {
            return Err(Error::ShapeMismatch {
                expected: format!("{layout:?}"),
                found: format!("{:?} / {:?}", params.layout(), grads.layout()),
            });
        }
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let t = self.step as i32;
        let c1 = T::one() - beta1.powi(t);
        let c2 = T::one() - beta2.powi(t);
        let one = T::one();
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
        {
            for i in 0..p.len() {
                m[i] = beta1 * m[i] + (one - beta1) * g[i];
                v[i] = beta2 * v[i] + (one - beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
