//! Validated probability tables over labeled finite alphabets.

use std::collections::HashSet;
use std::fmt;

use ndarray::{Array2, Array3, ArrayD, Axis as NdAxis, IxDyn};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A nonnegative extended real: a finite value in nats or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> ExtReal<T> {
    pub fn zero() -> Self {
        ExtReal::Finite(T::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The finite value, or `None` at infinity.
    pub fn finite(self) -> Option<T> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    /// Collapses to a float, mapping infinity to `T::infinity()`.
    pub fn value(self) -> T {
        self.finite().unwrap_or_else(T::infinity)
    }

    /// `weight · self` with the measure-theoretic convention `0 · ∞ = 0`.
    pub fn weighted(self, weight: T) -> Self {
        if weight == T::zero() {
            return ExtReal::zero();
        }
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(weight * v),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }
}

impl<T: Scalar> std::ops::Add for ExtReal<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

impl<T: Scalar> PartialOrd for ExtReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl<T: Scalar> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => fmt::Display::fmt(v, f),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

/// Selects one axis of a two-dimensional table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::Rows => Axis::Cols,
            Axis::Cols => Axis::Rows,
        }
    }

    fn index(self) -> usize {
        match self {
            Axis::Rows => 0,
            Axis::Cols => 1,
        }
    }
}

/// Selects one axis of a three-dimensional table `(X, Y, Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis3 {
    X,
    Y,
    Z,
}

impl Axis3 {
    pub fn index(self) -> usize {
        match self {
            Axis3::X => 0,
            Axis3::Y => 1,
            Axis3::Z => 2,
        }
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn check_labels(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn check_entries<'a, T: Scalar>(values: impl Iterator<Item = &'a T>) -> Result<()> {
    let mut sum = T::zero();
    for (index, &v) in values.enumerate() {
        if !v.is_finite() || v < T::zero() {
            return Err(Error::BadProbability {
                index,
                value: v.to_f64_lossy(),
            });
        }
        sum += v;
    }
    if (sum - T::one()).abs() > T::prob_tol() {
        return Err(Error::NotNormalized {
            sum: sum.to_f64_lossy(),
            tol: T::prob_tol().to_f64_lossy(),
        });
    }
    Ok(())
}

/// A probability mass function over an ordered alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf<T> {
    alphabet: Vec<String>,
    probs: Vec<T>,
}

impl<T: Scalar> Pmf<T> {
    pub fn new(alphabet: Vec<String>, probs: Vec<T>) -> Result<Self> {
        if alphabet.len() != probs.len() {
            return Err(Error::LengthMismatch {
                labels: alphabet.len(),
                probs: probs.len(),
            });
        }
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty alphabet".into()));
        }
        check_labels(&alphabet)?;
        check_entries(probs.iter())?;
        Ok(Pmf { alphabet, probs })
    }

    /// Labels the symbols `"0"`, `"1"`, ...
    pub fn from_probs(probs: Vec<T>) -> Result<Self> {
        Self::new(default_labels(probs.len()), probs)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("empty alphabet".into()));
        }
        let p = T::one() / T::c(n as f64);
        Self::from_probs(vec![p; n])
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn has_full_support(&self) -> bool {
        self.probs.iter().all(|&p| p > T::zero())
    }

    pub fn check_same_alphabet(&self, other: &Self) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(format!(
                "{:?} vs {:?}",
                self.alphabet, other.alphabet
            )));
        }
        Ok(())
    }

    /// `alpha · self + (1 − alpha) · other`.
    pub fn mix(&self, other: &Self, alpha: T) -> Result<Self> {
        self.check_same_alphabet(other)?;
        let beta = T::one() - alpha;
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(&a, &b)| alpha * a + beta * b)
            .collect();
        Self::new(self.alphabet.clone(), probs)
    }
}

/// A joint distribution of two variables; rows index `X`, columns index `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf2<T> {
    rows: Vec<String>,
    cols: Vec<String>,
    probs: Array2<T>,
}

impl<T: Scalar> JointPmf2<T> {
    pub fn new(rows: Vec<String>, cols: Vec<String>, probs: Array2<T>) -> Result<Self> {
        if probs.nrows() != rows.len() || probs.ncols() != cols.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", rows.len(), cols.len()),
                found: format!("{}x{}", probs.nrows(), probs.ncols()),
            });
        }
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty table".into()));
        }
        check_labels(&rows)?;
        check_labels(&cols)?;
        check_entries(probs.iter())?;
        Ok(JointPmf2 { rows, cols, probs })
    }

    pub fn from_array(probs: Array2<T>) -> Result<Self> {
        let (r, c) = probs.dim();
        Self::new(default_labels(r), default_labels(c), probs)
    }

    /// Row-major nested vectors, e.g. `vec![vec![0.4, 0.1], vec![0.1, 0.4]]`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        let flat: Vec<T> = rows.iter().flatten().copied().collect();
        let arr = Array2::from_shape_vec((rows.len(), ncols), flat)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::from_array(arr)
    }

    /// The product distribution `px ⊗ py`.
    pub fn product(px: &Pmf<T>, py: &Pmf<T>) -> Result<Self> {
        let probs = Array2::from_shape_fn((px.len(), py.len()), |(i, j)| px.probs[i] * py.probs[j]);
        Self::new(px.alphabet.clone(), py.alphabet.clone(), probs)
    }

    /// `P_X(x) · P_{Y|X}(y|x)`.
    pub fn from_factors(px: &Pmf<T>, channel: &CondPmf<T>) -> Result<Self> {
        if px.alphabet != channel.given {
            return Err(Error::AlphabetMismatch(
                "marginal alphabet does not match the channel's conditioning alphabet".into(),
            ));
        }
        let probs = Array2::from_shape_fn(channel.probs.dim(), |(i, j)| {
            px.probs[i] * channel.probs[[i, j]]
        });
        Self::new(channel.given.clone(), channel.target.clone(), probs)
    }

    pub fn probs(&self) -> &Array2<T> {
        &self.probs
    }

    pub fn row_labels(&self) -> &[String] {
        &self.rows
    }

    pub fn col_labels(&self) -> &[String] {
        &self.cols
    }

    pub fn labels(&self, axis: Axis) -> &[String] {
        match axis {
            Axis::Rows => &self.rows,
            Axis::Cols => &self.cols,
        }
    }

    /// Marginal distribution of the variable on `axis`.
    pub fn marginal(&self, axis: Axis) -> Pmf<T> {
        let summed = self.probs.sum_axis(NdAxis(axis.other().index()));
        Pmf {
            alphabet: self.labels(axis).to_vec(),
            probs: summed.to_vec(),
        }
    }

    pub fn transpose(&self) -> Self {
        JointPmf2 {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            probs: self.probs.t().as_standard_layout().into_owned(),
        }
    }

    /// Row-major flattening into a single alphabet with labels `"row|col"`.
    pub fn flatten(&self) -> Pmf<T> {
        let alphabet = self
            .rows
            .iter()
            .flat_map(|r| self.cols.iter().map(move |c| format!("{r}|{c}")))
            .collect();
        Pmf {
            alphabet,
            probs: self.probs.iter().copied().collect(),
        }
    }

    /// The conditional of the non-`given` variable. Rows whose conditioning
    /// symbol has zero mass are set to uniform; they carry zero weight in any
    /// expectation over the joint.
    pub fn conditional(&self, given: Axis) -> CondPmf<T> {
        let oriented = match given {
            Axis::Rows => self.probs.clone(),
            Axis::Cols => self.probs.t().as_standard_layout().into_owned(),
        };
        let (ng, nt) = oriented.dim();
        let mut probs = oriented;
        for mut row in probs.rows_mut() {
            let s: T = row.iter().copied().sum();
            if s > T::zero() {
                row.mapv_inplace(|v| v / s);
            } else {
                row.fill(T::one() / T::c(nt as f64));
            }
        }
        debug_assert_eq!(probs.nrows(), ng);
        CondPmf {
            given: self.labels(given).to_vec(),
            target: self.labels(given.other()).to_vec(),
            probs,
        }
    }

    pub fn to_table(&self) -> JointPmfN<T> {
        JointPmfN {
            labels: vec![self.rows.clone(), self.cols.clone()],
            probs: self.probs.clone().into_dyn(),
        }
    }
}

/// A joint distribution of three variables `(X, Y, Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf3<T> {
    labels: [Vec<String>; 3],
    probs: Array3<T>,
}

impl<T: Scalar> JointPmf3<T> {
    pub fn new(labels: [Vec<String>; 3], probs: Array3<T>) -> Result<Self> {
        let (a, b, c) = probs.dim();
        if [a, b, c] != [labels[0].len(), labels[1].len(), labels[2].len()] {
            return Err(Error::ShapeMismatch {
                expected: format!(
                    "{}x{}x{}",
                    labels[0].len(),
                    labels[1].len(),
                    labels[2].len()
                ),
                found: format!("{a}x{b}x{c}"),
            });
        }
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty table".into()));
        }
        for l in &labels {
            check_labels(l)?;
        }
        check_entries(probs.iter())?;
        Ok(JointPmf3 { labels, probs })
    }

    pub fn from_array(probs: Array3<T>) -> Result<Self> {
        let (a, b, c) = probs.dim();
        Self::new(
            [default_labels(a), default_labels(b), default_labels(c)],
            probs,
        )
    }

    pub fn probs(&self) -> &Array3<T> {
        &self.probs
    }

    pub fn labels(&self, axis: Axis3) -> &[String] {
        &self.labels[axis.index()]
    }

    pub fn marginal(&self, axis: Axis3) -> Pmf<T> {
        let k = axis.index();
        let mut arr = self.probs.clone().into_dyn();
        for ax in (0..3).rev().filter(|&a| a != k) {
            arr = arr.sum_axis(NdAxis(ax));
        }
        Pmf {
            alphabet: self.labels[k].clone(),
            probs: arr.iter().copied().collect(),
        }
    }

    /// Two-variable marginal keeping axes `first` (rows) and `second` (cols).
    pub fn marginal2(&self, first: Axis3, second: Axis3) -> Result<JointPmf2<T>> {
        if first == second {
            return Err(Error::InvalidArgument(
                "marginal2 needs two distinct axes".into(),
            ));
        }
        let drop = 3 - first.index() - second.index();
        let summed = self.probs.sum_axis(NdAxis(drop));
        let probs = if first.index() < second.index() {
            summed
        } else {
            summed.t().as_standard_layout().into_owned()
        };
        Ok(JointPmf2 {
            rows: self.labels[first.index()].clone(),
            cols: self.labels[second.index()].clone(),
            probs,
        })
    }

    pub fn to_table(&self) -> JointPmfN<T> {
        JointPmfN {
            labels: self.labels.to_vec(),
            probs: self.probs.clone().into_dyn(),
        }
    }
}

/// A conditional distribution: one row per conditioning symbol, each row a
/// distribution over the target alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct CondPmf<T> {
    given: Vec<String>,
    target: Vec<String>,
    probs: Array2<T>,
}

impl<T: Scalar> CondPmf<T> {
    pub fn new(given: Vec<String>, target: Vec<String>, probs: Array2<T>) -> Result<Self> {
        if probs.nrows() != given.len() || probs.ncols() != target.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", given.len(), target.len()),
                found: format!("{}x{}", probs.nrows(), probs.ncols()),
            });
        }
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty conditional table".into()));
        }
        check_labels(&given)?;
        check_labels(&target)?;
        for row in probs.rows() {
            check_entries(row.iter())?;
        }
        Ok(CondPmf {
            given,
            target,
            probs,
        })
    }

    pub fn from_array(probs: Array2<T>) -> Result<Self> {
        let (g, t) = probs.dim();
        Self::new(default_labels(g), default_labels(t), probs)
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        let flat: Vec<T> = rows.iter().flatten().copied().collect();
        let arr = Array2::from_shape_vec((rows.len(), ncols), flat)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::from_array(arr)
    }

    pub fn given_alphabet(&self) -> &[String] {
        &self.given
    }

    pub fn target_alphabet(&self) -> &[String] {
        &self.target
    }

    pub fn probs(&self) -> &Array2<T> {
        &self.probs
    }

    /// The target distribution for conditioning symbol `index`.
    pub fn row(&self, index: usize) -> Pmf<T> {
        Pmf {
            alphabet: self.target.clone(),
            probs: self.probs.row(index).to_vec(),
        }
    }

    pub fn check_same_alphabets(&self, other: &Self) -> Result<()> {
        if self.given != other.given || self.target != other.target {
            return Err(Error::AlphabetMismatch(
                "conditional tables have different alphabets".into(),
            ));
        }
        Ok(())
    }

    /// Row-wise `alpha · self + (1 − alpha) · other`.
    pub fn mix(&self, other: &Self, alpha: T) -> Result<Self> {
        self.check_same_alphabets(other)?;
        let beta = T::one() - alpha;
        let probs = &self.probs * alpha + &other.probs * beta;
        Self::new(self.given.clone(), self.target.clone(), probs)
    }
}

/// A joint distribution over any number of variables, used for chain-rule
/// decompositions.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmfN<T> {
    labels: Vec<Vec<String>>,
    probs: ArrayD<T>,
}

impl<T: Scalar> JointPmfN<T> {
    pub fn new(labels: Vec<Vec<String>>, probs: ArrayD<T>) -> Result<Self> {
        let shape: Vec<usize> = labels.iter().map(Vec::len).collect();
        if shape != probs.shape() {
            return Err(Error::ShapeMismatch {
                expected: format!("{shape:?}"),
                found: format!("{:?}", probs.shape()),
            });
        }
        if probs.is_empty() || shape.is_empty() {
            return Err(Error::InvalidArgument("empty table".into()));
        }
        for l in &labels {
            check_labels(l)?;
        }
        check_entries(probs.iter())?;
        Ok(JointPmfN { labels, probs })
    }

    pub fn from_array(probs: ArrayD<T>) -> Result<Self> {
        let labels = probs.shape().iter().map(|&n| default_labels(n)).collect();
        Self::new(labels, probs)
    }

    pub fn ndim(&self) -> usize {
        self.probs.ndim()
    }

    pub fn probs(&self) -> &ArrayD<T> {
        &self.probs
    }

    pub fn labels(&self) -> &[Vec<String>] {
        &self.labels
    }

    /// Marginal table over `axes` (any order; result keeps ascending axis order).
    pub fn marginal_probs(&self, axes: &[usize]) -> ArrayD<T> {
        let mut arr = self.probs.clone();
        for ax in (0..self.ndim()).rev() {
            if !axes.contains(&ax) {
                arr = arr.sum_axis(NdAxis(ax));
            }
        }
        if arr.ndim() == 0 {
            arr = arr
                .into_shape_with_order(IxDyn(&[1]))
                .expect("scalar reshape");
        }
        arr
    }
}
