//! Pulling affine messages out of MEAN aggregation.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::{layer_interval, require_aggregation, CompileError};
use crate::gnn::{Activation, Aggregation, Dense, Fnn, Gnn, GnnLayer, Side};
use crate::rational::Q;

/// Equivalent 1-GNN for a 2-GNN whose layers are MEAN with a single affine
/// message layer `A₁x + A₂x' + b`. The mean of the messages equals
/// `A₁x + b + A₂·MEAN(x')` when the neighbourhood is non-empty and 0 when it
/// is empty. A prepended layer adds a constant-1 channel whose mean `e`
/// flags a non-empty neighbourhood; each compiled combination applies the
/// gate `relu(u - B(1-e)) - relu(-u - B(1-e))`, with `B` bounding `|A₁x + b|`
/// over Boolean inputs.
pub fn pull_linear_mean(net: &Gnn) -> Result<Gnn, CompileError> {
    let layers = net.layers();
    require_aggregation(layers, Aggregation::Mean)?;
    for (i, l) in layers.iter().enumerate() {
        if l.side() != Side::Two {
            return Err(CompileError::Shape(alloc::format!("layer {} is not a side-2 layer", i + 1)));
        }
        let m = l.msg();
        if m.depth() != 1 || m.layers()[0].activation() != Activation::Id {
            return Err(CompileError::NonlinearMessage(i + 1));
        }
    }
    let p = net.input_dim();
    if layers.is_empty() {
        return Ok(net.clone());
    }
    let mut lo = vec![Q::zero(); p];
    let mut hi = vec![Q::one(); p];
    let mut out = Vec::with_capacity(layers.len() + 1);
    let sel = Fnn::select(2 * p, &(0..p).collect::<Vec<_>>());
    out.push(GnnLayer::new(Side::One, Fnn::identity(p), Aggregation::Mean, sel.fanout(&Fnn::constant(2 * p, vec![Q::one()]))?)?);
    for (i, l) in layers.iter().enumerate() {
        let pi = l.input_dim();
        let dense = &l.msg().layers()[0];
        let r = dense.rows();
        // Isolated-vertex bound: |A₁x + b| over the state box.
        let own = Fnn::affine(dense.weights().iter().map(|row| row[..pi].to_vec()).collect(), dense.bias().to_vec(), pi)?;
        let (ulo, uhi) = own.interval(&lo, &hi);
        let bound: Vec<Q> = ulo.iter().zip(&uhi).map(|(a, b)| if a.abs() > b.abs() { a.abs() } else { b.abs() }).collect();
        // Compiled combination input: (x, 1, z_x, e), width 2(pi + 1).
        let w = 2 * (pi + 1);
        let e = w - 1;
        let mut gate_w = Vec::with_capacity(2 * r);
        let mut gate_b = Vec::with_capacity(2 * r);
        for sign in [Q::one(), -Q::one()] {
            for (j, row) in dense.weights().iter().enumerate() {
                let mut g = vec![Q::zero(); w];
                for k in 0..pi {
                    g[k] = &sign * &row[k];
                    g[pi + 1 + k] = &sign * &row[pi + k];
                }
                g[e] = bound[j].clone();
                gate_w.push(g);
                gate_b.push(&sign * &dense.bias()[j] - &bound[j]);
            }
        }
        let mut diff = vec![vec![Q::zero(); 2 * r]; r];
        for (j, row) in diff.iter_mut().enumerate() {
            row[j] = Q::one();
            row[r + j] = -Q::one();
        }
        let gate = Fnn::new(
            w,
            vec![Dense::new(gate_w, gate_b, w, Activation::Relu)?, Dense::new(diff, vec![Q::zero(); r], 2 * r, Activation::Id)?],
        )?;
        let x = Fnn::select(w, &(0..pi).collect::<Vec<_>>());
        let mut comb = x.fanout(&gate)?.then(l.comb())?;
        if i + 1 < layers.len() {
            comb = comb.fanout(&Fnn::constant(w, vec![Q::one()]))?;
        }
        out.push(GnnLayer::new(Side::One, Fnn::identity(pi + 1), Aggregation::Mean, comb.normal_form())?);
        let (nlo, nhi) = layer_interval(l, &lo, &hi);
        lo = nlo;
        hi = nhi;
    }
    Ok(Gnn::new(p, out)?)
}
