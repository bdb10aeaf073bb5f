//! Exact 2-GNN to 1-GNN compilation for MAX aggregation over one-hot states.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use super::table::{boolean_cube, fnn_from_table, one_hot};
use super::{message, require_aggregation, CompileError};
use crate::gnn::{Aggregation, Fnn, Gnn, GnnLayer, Side};
use crate::rational::Q;

pub const DEFAULT_VALUE_SET_CAP: usize = 4096;

/// Candidate signal values at one stage, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSet {
    pub values: Vec<Vec<Q>>,
    pub stage: usize,
    /// Set when the values were not checked for joint realizability.
    pub over_approx: bool,
}

impl ValueSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, v: &[Q]) -> Option<usize> {
        self.values.binary_search_by(|x| x.as_slice().cmp(v)).ok()
    }
}

fn coord_max(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| if x >= y { x.clone() } else { y.clone() }).collect()
}

fn cap_error(what: &'static str, projected: u128, cap: usize) -> CompileError {
    CompileError::CapExceeded { what, projected, cap: cap as u128 }
}

/// All coordinatewise maxima of non-empty subsets of `msgs`.
fn max_closure(msgs: &[Vec<Q>], cap: usize) -> Result<Vec<Vec<Q>>, CompileError> {
    let mut set: Vec<Vec<Q>> = msgs.to_vec();
    set.sort();
    set.dedup();
    let mut frontier = set.clone();
    while !frontier.is_empty() {
        let mut fresh = Vec::new();
        for a in &frontier {
            for b in msgs {
                let m = coord_max(a, b);
                if set.binary_search(&m).is_err() && !fresh.contains(&m) {
                    fresh.push(m);
                }
            }
        }
        set.extend(fresh.iter().cloned());
        set.sort();
        if set.len() > cap {
            return Err(cap_error("message maxima", set.len() as u128, cap));
        }
        frontier = fresh;
    }
    Ok(set)
}

fn next_stage(layer: &GnnLayer, d: &ValueSet, cap: usize) -> Result<ValueSet, CompileError> {
    let mut out = Vec::new();
    for x in &d.values {
        let msgs: Vec<Vec<Q>> = d.values.iter().map(|y| message(layer, x, y)).collect::<Result<_, _>>()?;
        let mut aggs = max_closure(&msgs, cap)?;
        aggs.push(vec![Q::zero(); layer.message_dim()]);
        for a in aggs {
            let mut input = x.clone();
            input.extend(a);
            out.push(layer.comb().eval(&input)?);
        }
        if out.len() > cap.saturating_mul(d.len()) {
            out.sort();
            out.dedup();
        }
    }
    out.sort();
    out.dedup();
    if out.len() > cap {
        return Err(cap_error("value set", out.len() as u128, cap));
    }
    Ok(ValueSet { values: out, stage: d.stage + 1, over_approx: true })
}

/// Over-approximation of the stage-`stage` states reachable from Boolean
/// inputs of width `label_width`.
pub fn reachable_values_max(net: &Gnn, label_width: usize, stage: usize, cap: usize) -> Result<ValueSet, CompileError> {
    Ok(stages(net, label_width, stage, cap)?.pop().expect("stage 0 exists"))
}

fn stages(net: &Gnn, label_width: usize, upto: usize, cap: usize) -> Result<Vec<ValueSet>, CompileError> {
    if label_width != net.input_dim() {
        return Err(CompileError::Shape(alloc::format!("label width {label_width} but input dimension {}", net.input_dim())));
    }
    if upto > net.layers().len() {
        return Err(CompileError::Shape(alloc::format!("stage {upto} beyond depth {}", net.layers().len())));
    }
    let initial = 1u128 << label_width.min(127);
    if label_width >= 64 || initial > cap as u128 {
        return Err(cap_error("value set", initial, cap));
    }
    let mut out = vec![ValueSet { values: boolean_cube(label_width), stage: 0, over_approx: false }];
    out[0].values.sort();
    for layer in &net.layers()[..upto] {
        let next = next_stage(layer, out.last().expect("non-empty"), cap)?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MaxCompilation {
    pub gnn: Gnn,
    /// Value sets for stages `0..d`, which index the one-hot states.
    pub value_sets: Vec<ValueSet>,
}

/// 1-GNN with identity messages and MAX aggregation that agrees exactly with
/// `net` on Boolean inputs. States are one-hot over the stage's value set;
/// the MAX of neighbour one-hots is the set of neighbour states, from which
/// the combination table recovers the original aggregate. Isolated vertices
/// see the zero mask, which the table maps to `comb(x, 0)`.
pub fn compile_max_2to1(net: &Gnn, cap: usize) -> Result<MaxCompilation, CompileError> {
    let layers = net.layers();
    require_aggregation(layers, Aggregation::Max)?;
    let d = layers.len();
    let p = net.input_dim();
    if d == 0 {
        return Ok(MaxCompilation { gnn: net.clone(), value_sets: Vec::new() });
    }
    let sets = stages(net, p, d - 1, cap)?;
    let mut out = Vec::with_capacity(d + 1);
    let d0 = &sets[0];
    let hot0: Vec<Vec<Q>> = (0..d0.len()).map(|i| one_hot(d0.len(), i)).collect();
    let encode = fnn_from_table(p, &d0.values, &hot0)?;
    let sel = Fnn::select(2 * p, &(0..p).collect::<Vec<_>>());
    out.push(GnnLayer::new(Side::One, Fnn::identity(p), Aggregation::Max, sel.then(&encode)?.normal_form())?);
    for (i, layer) in layers.iter().enumerate() {
        let dom = &sets[i];
        let n = dom.len();
        let points = (n as u128) << n.min(127);
        if n >= 64 || points > cap as u128 {
            return Err(cap_error("combination table", points, cap));
        }
        let next_index: Option<BTreeMap<&[Q], usize>> =
            sets.get(i + 1).map(|s| s.values.iter().enumerate().map(|(k, v)| (v.as_slice(), k)).collect());
        let mut domain = Vec::with_capacity(points as usize);
        let mut values = Vec::with_capacity(points as usize);
        for (j, x) in dom.values.iter().enumerate() {
            let msgs: Vec<Vec<Q>> = dom.values.iter().map(|y| message(layer, x, y)).collect::<Result<_, _>>()?;
            for mask in 0u64..(1u64 << n) {
                let mut agg: Option<Vec<Q>> = None;
                for (k, m) in msgs.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        agg = Some(match agg {
                            None => m.clone(),
                            Some(a) => coord_max(&a, m),
                        });
                    }
                }
                let mut input = x.clone();
                input.extend(agg.unwrap_or_else(|| vec![Q::zero(); layer.message_dim()]));
                let y = layer.comb().eval(&input)?;
                let mut point = one_hot(n, j);
                point.extend((0..n).map(|k| if mask >> k & 1 == 1 { num_traits::One::one() } else { Q::zero() }));
                domain.push(point);
                values.push(match &next_index {
                    Some(index) => one_hot(index.len(), *index.get(y.as_slice()).expect("value sets are closed under the layer")),
                    None => y,
                });
            }
        }
        let comb = fnn_from_table(2 * n, &domain, &values)?;
        out.push(GnnLayer::new(Side::One, Fnn::identity(n), Aggregation::Max, comb)?);
    }
    Ok(MaxCompilation { gnn: Gnn::new(p, out)?, value_sets: sets })
}
