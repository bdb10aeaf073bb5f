//! Feed-forward networks with relu/identity activations over exact rationals.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_traits::{One, Signed, Zero};

use super::GnnError;
use crate::rational::{self, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Id,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Id => "id",
        }
    }

    pub fn apply(self, q: Q) -> Q {
        match self {
            Activation::Relu => rational::relu(&q),
            Activation::Id => q,
        }
    }
}

/// One layer `act(Ax + b)`; `weights` is row-major with one row per output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dense {
    weights: Vec<Vec<Q>>,
    bias: Vec<Q>,
    cols: usize,
    act: Activation,
}

impl Dense {
    pub fn new(weights: Vec<Vec<Q>>, bias: Vec<Q>, cols: usize, act: Activation) -> Result<Self, GnnError> {
        if bias.len() != weights.len() {
            return Err(GnnError::Dimension { what: "bias", expected: weights.len(), found: bias.len() });
        }
        for row in &weights {
            if row.len() != cols {
                return Err(GnnError::Dimension { what: "weight row", expected: cols, found: row.len() });
            }
        }
        Ok(Dense { weights, bias, cols, act })
    }

    /// Zero-bias layer from integer weights; handy for hand-built networks.
    pub fn from_ints(weights: &[&[i64]], bias: &[i64], act: Activation) -> Result<Self, GnnError> {
        let cols = weights.first().map_or(0, |r| r.len());
        let w = weights.iter().map(|r| r.iter().map(|&v| rational::int(v)).collect()).collect();
        let b = bias.iter().map(|&v| rational::int(v)).collect();
        Dense::new(w, b, cols, act)
    }

    pub fn rows(&self) -> usize {
        self.weights.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[Vec<Q>] {
        &self.weights
    }

    pub fn bias(&self) -> &[Q] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.act
    }

    fn affine(&self, x: &[Q]) -> Vec<Q> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| {
                let mut acc = b.clone();
                for (w, xi) in row.iter().zip(x) {
                    if !w.is_zero() && !xi.is_zero() {
                        acc += w * xi;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn eval(&self, x: &[Q]) -> Vec<Q> {
        self.affine(x).into_iter().map(|v| self.act.apply(v)).collect()
    }

    /// Maximum absolute row sum over the given input columns.
    fn row_norm(&self, cols: Range<usize>) -> Q {
        let sums: Vec<Q> = self.weights.iter().map(|row| row[cols.clone()].iter().map(|w| w.abs()).sum()).collect();
        sums.into_iter().fold(Q::zero(), |a, b| if b > a { b } else { a })
    }
}

/// Composition of dense layers. A network without layers is the identity on
/// `input_dim` coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fnn {
    input_dim: usize,
    layers: Vec<Dense>,
}

fn identity_matrix(n: usize) -> Vec<Vec<Q>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>], inner: usize, cols: usize) -> Vec<Vec<Q>> {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = Q::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            acc += &row[k] * &b[k][j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

impl Fnn {
    pub fn new(input_dim: usize, layers: Vec<Dense>) -> Result<Self, GnnError> {
        let mut dim = input_dim;
        for l in &layers {
            if l.cols != dim {
                return Err(GnnError::Dimension { what: "layer input", expected: dim, found: l.cols });
            }
            dim = l.rows();
        }
        Ok(Fnn { input_dim, layers })
    }

    /// The single layer `x` with `A = I`, `b = 0`.
    pub fn identity(dim: usize) -> Fnn {
        Fnn::affine(identity_matrix(dim), vec![Q::zero(); dim], dim).expect("square identity")
    }

    /// The single identity-activation layer `Ax + b`.
    pub fn affine(weights: Vec<Vec<Q>>, bias: Vec<Q>, cols: usize) -> Result<Fnn, GnnError> {
        Ok(Fnn { input_dim: cols, layers: vec![Dense::new(weights, bias, cols, Activation::Id)?] })
    }

    /// Picks the listed coordinates, in order.
    pub fn select(input_dim: usize, coords: &[usize]) -> Fnn {
        let w = coords
            .iter()
            .map(|&c| (0..input_dim).map(|j| if j == c { Q::one() } else { Q::zero() }).collect())
            .collect();
        Fnn::affine(w, vec![Q::zero(); coords.len()], input_dim).expect("selection")
    }

    /// The constant map to `values`.
    pub fn constant(input_dim: usize, values: Vec<Q>) -> Fnn {
        let w = vec![vec![Q::zero(); input_dim]; values.len()];
        Fnn::affine(w, values, input_dim).expect("constant")
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(self.input_dim, Dense::rows)
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn eval(&self, x: &[Q]) -> Result<Vec<Q>, GnnError> {
        if x.len() != self.input_dim {
            return Err(GnnError::Dimension { what: "FNN input", expected: self.input_dim, found: x.len() });
        }
        let mut cur = x.to_vec();
        for l in &self.layers {
            cur = l.eval(&cur);
        }
        Ok(cur)
    }

    /// True for zero layers or one id layer with `A = I`, `b = 0`.
    pub fn is_identity(&self) -> bool {
        match self.layers.as_slice() {
            [] => true,
            [l] => {
                l.act == Activation::Id
                    && l.rows() == self.input_dim
                    && l.bias.iter().all(Zero::is_zero)
                    && l.weights == identity_matrix(self.input_dim)
            }
            _ => false,
        }
    }

    /// Sum of the bitsizes of all weights and biases.
    pub fn bitsize(&self) -> u64 {
        self.layers
            .iter()
            .map(|l| l.weights.iter().flatten().chain(&l.bias).map(rational::bitsize).sum::<u64>())
            .sum()
    }

    /// Product of the layers' induced sup-norms (maximum absolute row sums).
    pub fn lipschitz_bound(&self) -> Q {
        self.lipschitz_bound_on(0..self.input_dim)
    }

    /// Sup-norm Lipschitz bound with respect to the inputs in `cols` only,
    /// the remaining inputs held fixed.
    pub fn lipschitz_bound_on(&self, cols: Range<usize>) -> Q {
        let mut it = self.layers.iter();
        let Some(first) = it.next() else {
            return if cols.is_empty() { Q::zero() } else { Q::one() };
        };
        let mut acc = first.row_norm(cols);
        for l in it {
            acc *= l.row_norm(0..l.cols);
        }
        acc
    }

    /// Coordinatewise output bounds for inputs in the box `[lo, hi]`.
    pub fn interval(&self, lo: &[Q], hi: &[Q]) -> (Vec<Q>, Vec<Q>) {
        let (mut lo, mut hi) = (lo.to_vec(), hi.to_vec());
        for l in &self.layers {
            let mut nlo = Vec::with_capacity(l.rows());
            let mut nhi = Vec::with_capacity(l.rows());
            for (row, b) in l.weights.iter().zip(&l.bias) {
                let (mut a, mut z) = (b.clone(), b.clone());
                for (j, w) in row.iter().enumerate() {
                    if w.is_positive() {
                        a += w * &lo[j];
                        z += w * &hi[j];
                    } else if w.is_negative() {
                        a += w * &hi[j];
                        z += w * &lo[j];
                    }
                }
                nlo.push(l.act.apply(a));
                nhi.push(l.act.apply(z));
            }
            lo = nlo;
            hi = nhi;
        }
        (lo, hi)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Fnn) -> Result<Fnn, GnnError> {
        if other.input_dim != self.output_dim() {
            return Err(GnnError::Dimension { what: "composition", expected: self.output_dim(), found: other.input_dim });
        }
        let mut layers = self.layers.clone();
        layers.extend(other.layers.iter().cloned());
        Ok(Fnn { input_dim: self.input_dim, layers })
    }

    /// Equivalent network whose layers are all relu except a final id
    /// layer. Hidden id layers are folded into their successors.
    pub fn normal_form(&self) -> Fnn {
        let mut out = Vec::new();
        let mut pending: Option<(Vec<Vec<Q>>, Vec<Q>)> = None;
        let mut dim = self.input_dim;
        for l in &self.layers {
            let (w, b) = match pending.take() {
                None => (l.weights.clone(), l.bias.clone()),
                Some((pw, pb)) => {
                    let w = mat_mul(&l.weights, &pw, l.cols, dim);
                    (w, l.affine(&pb))
                }
            };
            let cols = dim;
            match l.act {
                Activation::Id => pending = Some((w, b)),
                Activation::Relu => {
                    out.push(Dense { weights: w, bias: b, cols, act: Activation::Relu });
                    dim = l.rows();
                }
            }
        }
        let last = match pending {
            Some((w, b)) => Dense { weights: w, bias: b, cols: dim, act: Activation::Id },
            None => Dense { weights: identity_matrix(dim), bias: vec![Q::zero(); dim], cols: dim, act: Activation::Id },
        };
        out.push(last);
        Fnn { input_dim: self.input_dim, layers: out }
    }

    /// Normal form with `extra` additional relu layers carrying the hidden
    /// state unchanged before the final id layer.
    fn padded(&self, extra: usize) -> Fnn {
        let nf = self.normal_form();
        if extra == 0 {
            return nf;
        }
        let mut layers = nf.layers;
        let last = layers.pop().expect("normal form has a final layer");
        if layers.is_empty() {
            // The final layer reads the raw (signed) input: split it first.
            let n = self.input_dim;
            let mut split = identity_matrix(n);
            split.extend(identity_matrix(n).into_iter().map(|r| r.into_iter().map(|v| -v).collect::<Vec<_>>()));
            layers.push(Dense { weights: split, bias: vec![Q::zero(); 2 * n], cols: n, act: Activation::Relu });
            for _ in 1..extra {
                layers.push(Dense {
                    weights: identity_matrix(2 * n),
                    bias: vec![Q::zero(); 2 * n],
                    cols: 2 * n,
                    act: Activation::Relu,
                });
            }
            let w = last.weights.iter().map(|r| r.iter().cloned().chain(r.iter().map(|v| -v)).collect()).collect();
            layers.push(Dense { weights: w, bias: last.bias, cols: 2 * n, act: Activation::Id });
        } else {
            let h = last.cols;
            for _ in 0..extra {
                layers.push(Dense { weights: identity_matrix(h), bias: vec![Q::zero(); h], cols: h, act: Activation::Relu });
            }
            layers.push(last);
        }
        Fnn { input_dim: self.input_dim, layers }
    }

    /// Block-diagonal stack: `(x, y) ↦ (self(x), other(y))`.
    pub fn parallel(&self, other: &Fnn) -> Fnn {
        let (da, db) = (self.normal_form().depth(), other.normal_form().depth());
        let depth = da.max(db);
        let a = self.padded(depth - da);
        let b = other.padded(depth - db);
        let layers = a
            .layers
            .iter()
            .zip(&b.layers)
            .map(|(la, lb)| {
                let cols = la.cols + lb.cols;
                let mut w = Vec::with_capacity(la.rows() + lb.rows());
                for r in &la.weights {
                    let mut row = r.clone();
                    row.extend(core::iter::repeat_n(Q::zero(), lb.cols));
                    w.push(row);
                }
                for r in &lb.weights {
                    let mut row = vec![Q::zero(); la.cols];
                    row.extend(r.iter().cloned());
                    w.push(row);
                }
                let mut bias = la.bias.clone();
                bias.extend(lb.bias.iter().cloned());
                Dense { weights: w, bias, cols, act: la.act }
            })
            .collect();
        Fnn { input_dim: self.input_dim + other.input_dim, layers }
    }

    /// `x ↦ (self(x), other(x))`.
    pub fn fanout(&self, other: &Fnn) -> Result<Fnn, GnnError> {
        if self.input_dim != other.input_dim {
            return Err(GnnError::Dimension { what: "fanout", expected: self.input_dim, found: other.input_dim });
        }
        let n = self.input_dim;
        let mut dup = identity_matrix(n);
        dup.extend(identity_matrix(n));
        let dup = Fnn::affine(dup, vec![Q::zero(); 2 * n], n)?;
        Ok(dup.then(&self.parallel(other))?.normal_form())
    }

    /// Concatenates the outputs of several networks on a shared input.
    pub fn fanout_all(parts: &[Fnn]) -> Result<Fnn, GnnError> {
        let mut it = parts.iter();
        let first = it.next().expect("at least one part").clone();
        it.try_fold(first, |acc, f| acc.fanout(f))
    }
}

#[cfg(test)]
mod tests;
