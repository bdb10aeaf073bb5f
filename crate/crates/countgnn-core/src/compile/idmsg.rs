//! Moving message functions into the previous layer's combination.

use alloc::vec::Vec;

use super::CompileError;
use crate::gnn::{Fnn, Gnn, GnnLayer, Side};

/// Equivalent 1-GNN with d+1 layers whose messages are all the identity.
/// Layer 0 widens the state `x` to `(x, msg¹(x))`; layer i combines
/// `(x, μ)` with the aggregate `(z_x, z_μ)` into `(y, msg^{i+1}(y))` for
/// `y = comb^i(x, z_μ)`, the last layer into `comb^d(x, z_μ)`.
pub fn normalize_identity_messages(net: &Gnn) -> Result<Gnn, CompileError> {
    if let Some(i) = net.layers().iter().position(|l| l.side() == Side::Two) {
        return Err(CompileError::SideTwoLayer(i + 1));
    }
    let layers = net.layers();
    let d = layers.len();
    let p = net.input_dim();
    let widen = |y_dim: usize, next: Option<&GnnLayer>| -> Result<Fnn, CompileError> {
        let id = Fnn::identity(y_dim);
        Ok(match next {
            Some(l) => id.fanout(l.msg())?,
            None => id,
        })
    };
    let mut out = Vec::with_capacity(d + 1);
    let sel = Fnn::select(2 * p, &(0..p).collect::<Vec<_>>());
    let comb0 = sel.then(&widen(p, layers.first())?)?.normal_form();
    out.push(GnnLayer::new(Side::One, Fnn::identity(p), layers.first().map_or(crate::gnn::Aggregation::Sum, |l| l.agg()), comb0)?);
    for (i, l) in layers.iter().enumerate() {
        let (pi, ri) = (l.input_dim(), l.message_dim());
        let s = pi + ri;
        let coords: Vec<usize> = (0..pi).chain(s + pi..2 * s).collect();
        let comb = Fnn::select(2 * s, &coords).then(l.comb())?.then(&widen(l.output_dim(), layers.get(i + 1))?)?.normal_form();
        out.push(GnnLayer::new(Side::One, Fnn::identity(s), l.agg(), comb)?);
    }
    Ok(Gnn::new(p, out)?)
}
