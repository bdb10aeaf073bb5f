//! Message-passing GNNs over exact rationals.
//!
//! A side-1 layer sends `msg(f(w))` from each neighbour `w`; a side-2 layer
//! sends `msg(f(v), f(w))` to the receiver `v`, receiver state first.
//! Aggregating an empty neighbourhood gives the zero vector.

mod fnn;

use alloc::vec::Vec;

use num_traits::Zero;
use thiserror::Error;

use crate::graph::{GraphError, LabelledGraph, Signal};
use crate::rational::{self, Q};

pub use fnn::{Activation, Dense, Fnn};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GnnError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension { what: &'static str, expected: usize, found: usize },
    #[error("classification needs output dimension 1, the network has {0}")]
    OutputDimension(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub fn number(self) -> u8 {
        match self {
            Side::One => 1,
            Side::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregation {
    Sum,
    Mean,
    Max,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Sum => "sum",
            Aggregation::Mean => "mean",
            Aggregation::Max => "max",
        }
    }

    /// Aggregates equal-length vectors; the empty multiset gives zeros.
    pub fn apply(self, messages: &[Vec<Q>], dim: usize) -> Vec<Q> {
        let mut out = alloc::vec![Q::zero(); dim];
        let Some(first) = messages.first() else {
            return out;
        };
        match self {
            Aggregation::Sum | Aggregation::Mean => {
                for m in messages {
                    for (o, x) in out.iter_mut().zip(m) {
                        *o += x;
                    }
                }
                if self == Aggregation::Mean {
                    let k = rational::int(messages.len() as i64);
                    for o in &mut out {
                        *o /= &k;
                    }
                }
            }
            Aggregation::Max => {
                out.clone_from(first);
                for m in &messages[1..] {
                    for (o, x) in out.iter_mut().zip(m) {
                        if x > o {
                            o.clone_from(x);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GnnLayer {
    side: Side,
    msg: Fnn,
    agg: Aggregation,
    comb: Fnn,
}

impl GnnLayer {
    /// Checks `msg: R^p -> R^r` (or `R^2p` on side 2) and `comb: R^(p+r) -> R^q`.
    pub fn new(side: Side, msg: Fnn, agg: Aggregation, comb: Fnn) -> Result<Self, GnnError> {
        let r = msg.output_dim();
        if comb.input_dim() < r {
            return Err(GnnError::Dimension { what: "combination input", expected: r, found: comb.input_dim() });
        }
        let p = comb.input_dim() - r;
        let expected_msg_in = match side {
            Side::One => p,
            Side::Two => 2 * p,
        };
        if msg.input_dim() != expected_msg_in {
            return Err(GnnError::Dimension { what: "message input", expected: expected_msg_in, found: msg.input_dim() });
        }
        Ok(GnnLayer { side, msg, agg, comb })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn msg(&self) -> &Fnn {
        &self.msg
    }

    pub fn agg(&self) -> Aggregation {
        self.agg
    }

    pub fn comb(&self) -> &Fnn {
        &self.comb
    }

    pub fn input_dim(&self) -> usize {
        self.comb.input_dim() - self.msg.output_dim()
    }

    pub fn message_dim(&self) -> usize {
        self.msg.output_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.comb.output_dim()
    }

    pub fn depth(&self) -> usize {
        self.msg.depth() + self.comb.depth()
    }

    pub fn size(&self) -> u64 {
        self.msg.bitsize() + self.comb.bitsize()
    }

    /// `comb(x, agg(messages))` for one vertex.
    fn combine(&self, state: &[Q], messages: &[Vec<Q>]) -> Result<Vec<Q>, GnnError> {
        let mut input = state.to_vec();
        input.extend(self.agg.apply(messages, self.message_dim()));
        self.comb.eval(&input)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gnn {
    input_dim: usize,
    layers: Vec<GnnLayer>,
}

impl Gnn {
    pub fn new(input_dim: usize, layers: Vec<GnnLayer>) -> Result<Self, GnnError> {
        let mut dim = input_dim;
        for l in &layers {
            if l.input_dim() != dim {
                return Err(GnnError::Dimension { what: "layer input", expected: dim, found: l.input_dim() });
            }
            dim = l.output_dim();
        }
        Ok(Gnn { input_dim, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(self.input_dim, GnnLayer::output_dim)
    }

    pub fn layers(&self) -> &[GnnLayer] {
        &self.layers
    }

    /// The largest side used by any layer (1 for the empty network).
    pub fn side(&self) -> Side {
        if self.layers.iter().any(|l| l.side == Side::Two) {
            Side::Two
        } else {
            Side::One
        }
    }
}

pub fn layer_apply(layer: &GnnLayer, g: &LabelledGraph, signal: &Signal) -> Result<Signal, GnnError> {
    signal.check_order(g)?;
    if signal.dim() != layer.input_dim() {
        return Err(GnnError::Dimension { what: "signal", expected: layer.input_dim(), found: signal.dim() });
    }
    let n = g.order();
    let mut rows = Vec::with_capacity(n);
    match layer.side {
        Side::One => {
            let sent: Vec<Vec<Q>> = (0..n).map(|w| layer.msg.eval(signal.row(w))).collect::<Result<_, _>>()?;
            for v in 0..n {
                let msgs: Vec<Vec<Q>> = g.neighbours(v).iter().map(|&w| sent[w].clone()).collect();
                rows.push(layer.combine(signal.row(v), &msgs)?);
            }
        }
        Side::Two => {
            for v in 0..n {
                let msgs: Vec<Vec<Q>> = g
                    .neighbours(v)
                    .iter()
                    .map(|&w| {
                        let mut pair = signal.row(v).to_vec();
                        pair.extend_from_slice(signal.row(w));
                        layer.msg.eval(&pair)
                    })
                    .collect::<Result<_, _>>()?;
                rows.push(layer.combine(signal.row(v), &msgs)?);
            }
        }
    }
    Ok(Signal::new(layer.output_dim(), rows)?)
}

pub fn gnn_run(net: &Gnn, g: &LabelledGraph, signal: &Signal) -> Result<Signal, GnnError> {
    signal.check_order(g)?;
    if signal.dim() != net.input_dim {
        return Err(GnnError::Dimension { what: "signal", expected: net.input_dim, found: signal.dim() });
    }
    let mut cur = signal.clone();
    for l in &net.layers {
        cur = layer_apply(l, g, &cur)?;
    }
    Ok(cur)
}

/// Per-layer signals, input first.
pub fn gnn_trace(net: &Gnn, g: &LabelledGraph, signal: &Signal) -> Result<Vec<Signal>, GnnError> {
    let mut out = alloc::vec![signal.clone()];
    for l in &net.layers {
        let next = layer_apply(l, g, out.last().expect("non-empty"))?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Classification {
    pub selected: Vec<usize>,
    pub rejected: Vec<usize>,
    /// Vertices whose output lies strictly between 1/4 and 3/4.
    pub undefined: Vec<usize>,
}

impl Classification {
    pub fn is_total(&self) -> bool {
        self.undefined.is_empty()
    }
}

/// Runs the network on the graph's Boolean labels and splits the vertices
/// by the 3/4 and 1/4 thresholds.
pub fn classify(net: &Gnn, g: &LabelledGraph) -> Result<Classification, GnnError> {
    if net.output_dim() != 1 {
        return Err(GnnError::OutputDimension(net.output_dim()));
    }
    let out = gnn_run(net, g, &Signal::from_labels(g))?;
    Ok(classify_signal(&out))
}

pub fn classify_signal(out: &Signal) -> Classification {
    let hi = rational::ratio(3, 4);
    let lo = rational::ratio(1, 4);
    let mut c = Classification::default();
    for v in 0..out.len() {
        let y = &out.row(v)[0];
        if *y >= hi {
            c.selected.push(v);
        } else if *y <= lo {
            c.rejected.push(v);
        } else {
            c.undefined.push(v);
        }
    }
    c
}

pub fn lipschitz_bound(f: &Fnn) -> Q {
    f.lipschitz_bound()
}

/// Total bitsize of all weights and biases.
pub fn gnn_size(net: &Gnn) -> u64 {
    net.layers.iter().map(GnnLayer::size).sum()
}

/// Sum of the depths of all message and combination networks.
pub fn gnn_depth(net: &Gnn) -> usize {
    net.layers.iter().map(GnnLayer::depth).sum()
}

#[cfg(test)]
mod tests;
