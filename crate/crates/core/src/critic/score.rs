//! Critic `g(x, y)` and the batch score matrix `S[i][j] = g(x_i, y_j)`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::gaussian::SampleBatch;
use crate::rng::stream_rng;
use crate::scalar::Scalar;

use super::mlp::{Mlp, MlpCache};
use super::params::ParamSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticForm {
    /// One network on the concatenation `[x, y]`.
    Joint,
    /// Inner product of two towers `h(x) · u(y)`.
    Separable,
}

impl fmt::Display for CriticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriticForm::Joint => "joint",
            CriticForm::Separable => "separable",
        })
    }
}

impl FromStr for CriticForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(CriticForm::Joint),
            "separable" => Ok(CriticForm::Separable),
            _ => Err(Error::InvalidArgument(format!("unknown critic form `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticArch {
    pub form: CriticForm,
    pub hidden: Vec<usize>,
    /// Embedding width of each tower (separable form only).
    pub embed: usize,
}

impl Default for CriticArch {
    fn default() -> Self {
        CriticArch {
            form: CriticForm::Separable,
            hidden: vec![256, 256],
            embed: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CriticParams<T> {
    Joint(Mlp<T>),
    Separable { x_tower: Mlp<T>, y_tower: Mlp<T> },
}

/// Forward intermediates needed by [`critic_backward`].
#[derive(Clone, Debug)]
pub enum ScoreCache<T> {
    Joint(MlpCache<T>),
    Separable { x: MlpCache<T>, y: MlpCache<T> },
}

impl<T> ScoreCache<T> {
    /// Number of network rows evaluated per tower: `n²` for the joint form,
    /// `(n, n)` for the separable form.
    pub fn rows_forwarded(&self) -> (usize, usize) {
        match self {
            ScoreCache::Joint(c) => (c.rows(), 0),
            ScoreCache::Separable { x, y } => (x.rows(), y.rows()),
        }
    }
}

/// Seeded initialization for inputs of dimension `dim`.
pub fn init_critic<T: Scalar>(arch: &CriticArch, dim: usize, seed: u64) -> Result<CriticParams<T>> {
    if dim == 0
        || arch.hidden.contains(&0)
        || (arch.form == CriticForm::Separable && arch.embed == 0)
    {
        return Err(Error::InvalidArgument(format!(
            "invalid critic architecture {arch:?} for dim {dim}"
        )));
    }
    let mut rng = stream_rng(seed, 0);
    match arch.form {
        CriticForm::Joint => {
            let mut sizes = vec![2 * dim];
            sizes.extend(&arch.hidden);
            sizes.push(1);
            Ok(CriticParams::Joint(Mlp::init(&sizes, &mut rng)?))
        }
        CriticForm::Separable => {
            let mut sizes = vec![dim];
            sizes.extend(&arch.hidden);
            sizes.push(arch.embed);
            let x_tower = Mlp::init(&sizes, &mut rng)?;
            let y_tower = Mlp::init(&sizes, &mut rng)?;
            Ok(CriticParams::Separable { x_tower, y_tower })
        }
    }
}

fn pair_rows<T: Scalar>(xs: ArrayView2<'_, T>, ys: ArrayView2<'_, T>) -> Array2<T> {
    let (n, dx) = xs.dim();
    let dy = ys.ncols();
    let mut out = Array2::zeros((n * n, dx + dy));
    for i in 0..n {
        for j in 0..n {
            let mut row = out.row_mut(i * n + j);
            row.slice_mut(ndarray::s![..dx]).assign(&xs.row(i));
            row.slice_mut(ndarray::s![dx..]).assign(&ys.row(j));
        }
    }
    out
}

pub fn score_forward<T: Scalar>(
    params: &CriticParams<T>,
    xs: ArrayView2<'_, T>,
    ys: ArrayView2<'_, T>,
) -> Result<(Array2<T>, ScoreCache<T>)> {
    if xs.nrows() != ys.nrows() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} rows of y", xs.nrows()),
            found: ys.nrows().to_string(),
        });
    }
    let n = xs.nrows();
    match params {
        CriticParams::Joint(net) => {
            let cache = net.forward(pair_rows(xs, ys).view())?;
            let scores = cache
                .output
                .clone()
                .into_shape_with_order((n, n))
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok((scores, ScoreCache::Joint(cache)))
        }
        CriticParams::Separable { x_tower, y_tower } => {
            let x = x_tower.forward(xs)?;
            let y = y_tower.forward(ys)?;
            let scores = x.output.dot(&y.output.t());
            Ok((scores, ScoreCache::Separable { x, y }))
        }
    }
}

/// `S[i][j] = g(x_i, y_j)`; the diagonal holds the paired scores.
pub fn score_matrix<T: Scalar>(
    params: &CriticParams<T>,
    batch: &SampleBatch<T>,
) -> Result<Array2<T>> {
    Ok(score_forward(params, batch.xs.view(), batch.ys.view())?.0)
}

/// Parameter gradients of `Σ_ij upstream[i][j] · S[i][j]`.
pub fn critic_backward<T: Scalar>(
    params: &CriticParams<T>,
    cache: &ScoreCache<T>,
    upstream: ArrayView2<'_, T>,
) -> Result<CriticParams<T>> {
    match (params, cache) {
        (CriticParams::Joint(net), ScoreCache::Joint(c)) => {
            let n = upstream.nrows();
            if upstream.dim() != (n, n) || c.rows() != n * n {
                return Err(Error::ShapeMismatch {
                    expected: format!("square upstream matching {} pairs", c.rows()),
                    found: format!("{:?}", upstream.dim()),
                });
            }
            let flat = upstream
                .as_standard_layout()
                .into_owned()
                .into_shape_with_order((n * n, 1))
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(CriticParams::Joint(net.backward(c, flat.view())?))
        }
        (CriticParams::Separable { x_tower, y_tower }, ScoreCache::Separable { x, y }) => {
            if upstream.dim() != (x.rows(), y.rows()) {
                return Err(Error::ShapeMismatch {
                    expected: format!("({}, {})", x.rows(), y.rows()),
                    found: format!("{:?}", upstream.dim()),
                });
            }
            let d_hx = upstream.dot(&y.output);
            let d_uy = upstream.t().dot(&x.output);
            Ok(CriticParams::Separable {
                x_tower: x_tower.backward(x, d_hx.view())?,
                y_tower: y_tower.backward(y, d_uy.view())?,
            })
        }
        _ => Err(Error::InvalidArgument(
            "cache does not match critic form".into(),
        )),
    }
}

/// Recomputes the forward pass and returns parameter gradients.
pub fn backward<T: Scalar>(
    params: &CriticParams<T>,
    batch: &SampleBatch<T>,
    upstream: ArrayView2<'_, T>,
) -> Result<CriticParams<T>> {
    let (_, cache) = score_forward(params, batch.xs.view(), batch.ys.view())?;
    critic_backward(params, &cache, upstream)
}

impl<T: Scalar> ParamSet<T> for CriticParams<T> {
    fn tensors(&self) -> Vec<&[T]> {
        match self {
            CriticParams::Joint(n) => n.tensors(),
            CriticParams::Separable { x_tower, y_tower } => {
                let mut v = x_tower.tensors();
                v.extend(y_tower.tensors());
                v
            }
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        match self {
            CriticParams::Joint(n) => n.tensors_mut(),
            CriticParams::Separable { x_tower, y_tower } => {
                let mut v = x_tower.tensors_mut();
                v.extend(y_tower.tensors_mut());
                v
            }
        }
    }
}

/// Baseline network over `y` emitting `log a(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineParams<T> {
    net: Mlp<T>,
}

impl<T: Scalar> BaselineParams<T> {
    pub fn init(dim: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        let mut sizes = vec![dim];
        sizes.extend(hidden);
        sizes.push(1);
        Ok(BaselineParams {
            net: Mlp::init(&sizes, &mut stream_rng(seed, 1))?,
        })
    }

    /// A baseline fixed at `log a(y) = log_a` for every `y`.
    pub fn constant(dim: usize, log_a: T) -> Result<Self> {
        let mut net = Mlp::init(&[dim, 1], &mut stream_rng(0, 0))?;
        let layer = &mut net.layers_mut()[0];
        layer.w.fill(T::zero());
        layer.b.fill(log_a);
        Ok(BaselineParams { net })
    }

    pub fn from_mlp(net: Mlp<T>) -> Result<Self> {
        if net.output_dim() != 1 {
            return Err(Error::InvalidArgument(
                "baseline must have scalar output".into(),
            ));
        }
        Ok(BaselineParams { net })
    }

    pub fn forward(&self, ys: ArrayView2<'_, T>) -> Result<(Vec<T>, MlpCache<T>)> {
        let cache = self.net.forward(ys)?;
        let out = cache.output.index_axis(Axis(1), 0).to_vec();
        Ok((out, cache))
    }

    pub fn log_a(&self, ys: ArrayView2<'_, T>) -> Result<Vec<T>> {
        Ok(self.forward(ys)?.0)
    }

    pub fn backward(&self, cache: &MlpCache<T>, upstream: &[T]) -> Result<Self> {
        let up = Array2::from_shape_vec((upstream.len(), 1), upstream.to_vec())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(BaselineParams {
            net: self.net.backward(cache, up.view())?,
        })
    }
}

impl<T: Scalar> ParamSet<T> for BaselineParams<T> {
    fn tensors(&self) -> Vec<&[T]> {
        self.net.tensors()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        self.net.tensors_mut()
    }
}
