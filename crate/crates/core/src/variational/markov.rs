use ndarray::Array3;
use rand::Rng;

use crate::discrete::random::{random_cond, random_pmf};
use crate::discrete::{
    conditional_mutual_information, mutual_information, Axis3, CondPmf, JointPmf3, Pmf,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A Markov chain `X → Y → Z` given by its factors.
#[derive(Clone, Debug)]
pub struct MarkovChainSpec<T> {
    px: Pmf<T>,
    py_given_x: CondPmf<T>,
    pz_given_y: CondPmf<T>,
}

impl<T: Scalar> MarkovChainSpec<T> {
    pub fn new(px: Pmf<T>, py_given_x: CondPmf<T>, pz_given_y: CondPmf<T>) -> Result<Self> {
        if px.alphabet() != py_given_x.given_alphabet() {
            return Err(Error::AlphabetMismatch(
                "P_X vs P_{Y|X} conditioning alphabet".into(),
            ));
        }
        if py_given_x.target_alphabet() != pz_given_y.given_alphabet() {
            return Err(Error::AlphabetMismatch(
                "P_{Y|X} target vs P_{Z|Y} conditioning alphabet".into(),
            ));
        }
        Ok(MarkovChainSpec {
            px,
            py_given_x,
            pz_given_y,
        })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, nx: usize, ny: usize, nz: usize) -> Self {
        MarkovChainSpec {
            px: random_pmf(rng, nx),
            py_given_x: random_cond(rng, nx, ny),
            pz_given_y: random_cond(rng, ny, nz),
        }
    }

    pub fn px(&self) -> &Pmf<T> {
        &self.px
    }

    pub fn py_given_x(&self) -> &CondPmf<T> {
        &self.py_given_x
    }

    pub fn pz_given_y(&self) -> &CondPmf<T> {
        &self.pz_given_y
    }
}

/// Materializes `P(x, y, z) = P(x) P(y|x) P(z|y)`.
pub fn markov_joint<T: Scalar>(spec: &MarkovChainSpec<T>) -> JointPmf3<T> {
    let (nx, ny) = spec.py_given_x.probs().dim();
    let nz = spec.pz_given_y.probs().ncols();
    let arr = Array3::from_shape_fn((nx, ny, nz), |(x, y, z)| {
        spec.px.probs()[x] * spec.py_given_x.probs()[[x, y]] * spec.pz_given_y.probs()[[y, z]]
    });
    JointPmf3::new(
        [
            spec.px.alphabet().to_vec(),
            spec.py_given_x.target_alphabet().to_vec(),
            spec.pz_given_y.target_alphabet().to_vec(),
        ],
        arr,
    )
    .expect("product of valid factors is a valid table")
}

#[derive(Clone, Copy, Debug)]
pub struct DpiReport<T> {
    pub ixy: T,
    pub ixz: T,
    /// `I(X; Y | Z)`.
    pub ixy_given_z: T,
    /// `I(X; Z | Y)`; zero for a Markov chain.
    pub ixz_given_y: T,
}

impl<T: Scalar> DpiReport<T> {
    /// Smallest slack among `I(X;Y) ≥ I(X;Z)` and `I(X;Y|Z) ≤ I(X;Y)`.
    pub fn worst_slack(&self) -> T {
        (self.ixy - self.ixz).min(self.ixy - self.ixy_given_z)
    }

    pub fn holds(&self, tol: T) -> bool {
        self.worst_slack() >= -tol
    }
}

pub fn dpi_check<T: Scalar>(spec: &MarkovChainSpec<T>) -> DpiReport<T> {
    let j = markov_joint(spec);
    let pair = |a, b| mutual_information(&j.marginal2(a, b).expect("distinct axes"));
    DpiReport {
        ixy: pair(Axis3::X, Axis3::Y),
        ixz: pair(Axis3::X, Axis3::Z),
        ixy_given_z: conditional_mutual_information(&j, Axis3::Z),
        ixz_given_y: conditional_mutual_information(&j, Axis3::Y),
    }
}
