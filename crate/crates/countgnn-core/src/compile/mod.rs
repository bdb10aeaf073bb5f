//! GNN-to-GNN transformations: identity-message normalisation, pulling
//! affine MEAN messages into the combination, and 2-GNN to 1-GNN
//! compilation for MAX (exact) and MEAN (within a given error).

mod idmsg;
mod linmean;
mod max;
mod mean;
mod table;

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::gnn::{Aggregation, GnnError, GnnLayer, Side};
use crate::rational::Q;

pub use idmsg::normalize_identity_messages;
pub use linmean::pull_linear_mean;
pub use max::{compile_max_2to1, reachable_values_max, MaxCompilation, ValueSet, DEFAULT_VALUE_SET_CAP};
pub use mean::{compile_mean_2to1, MeanCompilation, MeanOptions, ProportionGrid, StageBudget};
pub use table::{boolean_cube, fnn_from_table, one_hot};

#[cfg(test)]
mod tests;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("layer {0} is a side-2 layer")]
    SideTwoLayer(usize),
    #[error("layer {layer} aggregates with {found}, expected {expected}")]
    Aggregation { layer: usize, expected: &'static str, found: &'static str },
    #[error("layer {0} does not have a single affine id-activation message layer")]
    NonlinearMessage(usize),
    #[error("{what}: projected size {projected} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, projected: u128, cap: u128 },
    #[error("table point {0} repeats an earlier point with a different value")]
    ConflictingTable(usize),
    #[error("unsupported network shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Gnn(#[from] GnnError),
}

/// The message a layer sends to `receiver` from `sender`.
pub(crate) fn message(layer: &GnnLayer, receiver: &[Q], sender: &[Q]) -> Result<Vec<Q>, GnnError> {
    match layer.side() {
        Side::One => layer.msg().eval(sender),
        Side::Two => {
            let mut pair = receiver.to_vec();
            pair.extend_from_slice(sender);
            layer.msg().eval(&pair)
        }
    }
}

pub(crate) fn require_aggregation(layers: &[GnnLayer], agg: Aggregation) -> Result<(), CompileError> {
    for (i, l) in layers.iter().enumerate() {
        if l.agg() != agg {
            return Err(CompileError::Aggregation { layer: i + 1, expected: agg.name(), found: l.agg().name() });
        }
    }
    Ok(())
}

/// Coordinatewise state bounds after one MEAN or MAX layer, for input
/// states in `[lo, hi]`. The aggregate lies in the hull of the message
/// bounds and 0 (the empty neighbourhood).
pub(crate) fn layer_interval(layer: &GnnLayer, lo: &[Q], hi: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let (mlo, mhi) = match layer.side() {
        Side::One => layer.msg().interval(lo, hi),
        Side::Two => {
            let (mut l2, mut h2) = (lo.to_vec(), hi.to_vec());
            l2.extend_from_slice(lo);
            h2.extend_from_slice(hi);
            layer.msg().interval(&l2, &h2)
        }
    };
    let mut clo = lo.to_vec();
    let mut chi = hi.to_vec();
    clo.extend(mlo.into_iter().map(|v| if v.is_positive() { Q::zero() } else { v }));
    chi.extend(mhi.into_iter().map(|v| if v.is_negative() { Q::zero() } else { v }));
    layer.comb().interval(&clo, &chi)
}
