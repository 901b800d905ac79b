use crate::scalar::Scalar;

/// A bundle of parameter tensors that optimizers and gradient checks can
/// walk as flat slices. Gradients use the same type as the parameters.
pub trait ParamSet<T: Scalar>: Clone {
    fn tensors(&self) -> Vec<&[T]>;

    fn tensors_mut(&mut self) -> Vec<&mut [T]>;

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill(T::zero());
        }
        z
    }

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
    }

    fn scale(&mut self, k: T) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= k);
        }
    }

    /// Shapes as flat lengths, for compatibility checks.
    fn layout(&self) -> Vec<usize> {
        self.tensors().iter().map(|t| t.len()).collect()
    }
}

impl<T: Scalar> ParamSet<T> for Vec<T> {
    fn tensors(&self) -> Vec<&[T]> {
        vec![self.as_slice()]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        vec![self.as_mut_slice()]
    }
}
