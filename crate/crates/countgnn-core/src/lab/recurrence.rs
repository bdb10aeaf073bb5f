//! Per-side states of 1-GNNs on complete bipartite graphs, and the
//! falsification harness built on them.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::LabError;
use crate::gnn::{Activation, Aggregation, Dense, Fnn, Gnn, GnnLayer, Side};
use crate::rational::{self, Q};

/// States of a U-vertex (`f`) and a V-vertex (`g`) of K_{m,n} after each
/// layer, input first. An empty side has no trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideTrace {
    pub m: u64,
    pub n: u64,
    pub f: Option<Vec<Vec<Q>>>,
    pub g: Option<Vec<Vec<Q>>>,
}

impl SideTrace {
    pub fn depth(&self) -> usize {
        self.f.as_ref().or(self.g.as_ref()).map_or(0, |t| t.len() - 1)
    }
}

fn check_sum_side_one(net: &Gnn) -> Result<(), LabError> {
    for (i, l) in net.layers().iter().enumerate() {
        if l.side() != Side::One {
            return Err(LabError::SideTwoLayer(i + 1));
        }
        if l.agg() != Aggregation::Sum {
            return Err(LabError::NotSum(i + 1));
        }
    }
    Ok(())
}

fn scaled(v: Vec<Q>, k: u64) -> Vec<Q> {
    let k = Q::from_integer(k.into());
    v.into_iter().map(|x| x * &k).collect()
}

/// Every U-vertex has the same state, and so has every V-vertex, so SUM
/// over the n neighbours of a U-vertex is `n·msg(g)`:
/// `f' = comb(f, n·msg(g))`, `g' = comb(g, m·msg(f))`. Runs in O(depth)
/// without building the graph; `x0` is the common input state.
pub fn bipartite_side_recurrence(net: &Gnn, m: u64, n: u64, x0: &[Q]) -> Result<SideTrace, LabError> {
    check_sum_side_one(net)?;
    if x0.len() != net.input_dim() {
        return Err(LabError::Dimension { expected: net.input_dim(), found: x0.len() });
    }
    let mut f = vec![x0.to_vec()];
    let mut g = vec![x0.to_vec()];
    for l in net.layers() {
        let (fu, gv) = (f.last().expect("non-empty"), g.last().expect("non-empty"));
        // an empty side sends nothing; its own state is never observed
        let from_v = if n > 0 { scaled(l.msg().eval(gv)?, n) } else { vec![rational::zero(); l.message_dim()] };
        let from_u = if m > 0 { scaled(l.msg().eval(fu)?, m) } else { vec![rational::zero(); l.message_dim()] };
        let mut fin = fu.clone();
        fin.extend(from_v);
        let mut gin = gv.clone();
        gin.extend(from_u);
        let nf = l.comb().eval(&fin)?;
        let ng = l.comb().eval(&gin)?;
        f.push(nf);
        g.push(ng);
    }
    Ok(SideTrace { m, n, f: (m > 0).then_some(f), g: (n > 0).then_some(g) })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub m: u64,
    pub n: u64,
    /// `'U'` or `'V'`.
    pub side: char,
    pub output: Q,
    pub expected_selected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FalsifyVerdict {
    FailsAt { n: u64, violation: Violation },
    Survives { checked: u64 },
}

impl FalsifyVerdict {
    pub fn fails(&self) -> bool {
        matches!(self, FalsifyVerdict::FailsAt { .. })
    }
}

/// Checks, for each n in the range, that `net` meets the 3/4–1/4 margin for
/// the larger-degree-neighbour query on K_{n-1,n} and K_{n+1,n}. On
/// K_{m,n} with m ≥ 1 the V side is selected exactly when m < n and the U
/// side exactly when m > n. Returns the first n with a violation.
pub fn falsify_1gnn(net: &Gnn, n_range: core::ops::RangeInclusive<u64>) -> Result<FalsifyVerdict, LabError> {
    check_sum_side_one(net)?;
    if net.output_dim() != 1 {
        return Err(LabError::OutputDimension(net.output_dim()));
    }
    let hi = rational::ratio(3, 4);
    let lo = rational::ratio(1, 4);
    let x0 = vec![rational::zero(); net.input_dim()];
    let mut checked = 0;
    for n in n_range {
        if n == 0 {
            continue;
        }
        for m in [n - 1, n + 1] {
            let t = bipartite_side_recurrence(net, m, n, &x0)?;
            // an isolated vertex has no neighbour at all, so it is never selected
            let sides = [('U', &t.f, m > n), ('V', &t.g, m > 0 && m < n)];
            for (side, trace, selected) in sides {
                let Some(trace) = trace else { continue };
                let y = &trace.last().expect("non-empty")[0];
                let ok = if selected { *y >= hi } else { *y <= lo };
                if !ok {
                    let violation = Violation { m, n, side, output: y.clone(), expected_selected: selected };
                    return Ok(FalsifyVerdict::FailsAt { n, violation });
                }
            }
        }
        checked += 1;
    }
    Ok(FalsifyVerdict::Survives { checked })
}

fn random_q<R: Rng + ?Sized>(rng: &mut R) -> Q {
    rational::ratio(rng.gen_range(-8..=8), rng.gen_range(1..=4))
}

fn random_dense<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Dense {
    let w = (0..rows).map(|_| (0..cols).map(|_| random_q(rng)).collect()).collect();
    let b = (0..rows).map(|_| random_q(rng)).collect();
    let act = if rng.gen_bool(0.7) { Activation::Relu } else { Activation::Id };
    Dense::new(w, b, cols, act).expect("consistent shapes")
}

fn random_fnn<R: Rng + ?Sized>(rng: &mut R, input: usize, output: usize, max_width: usize) -> Fnn {
    let depth = rng.gen_range(1..=2);
    let mut layers = Vec::with_capacity(depth);
    let mut dim = input;
    for i in 0..depth {
        let rows = if i + 1 == depth { output } else { rng.gen_range(1..=max_width) };
        layers.push(random_dense(rng, rows, dim));
        dim = rows;
    }
    Fnn::new(input, layers).expect("consistent shapes")
}

/// A random SUM 1-GNN on unlabelled graphs with at most `max_layers` layers
/// and state and message widths at most `max_width`; the output has
/// dimension 1.
pub fn random_1gnn<R: Rng + ?Sized>(rng: &mut R, max_layers: usize, max_width: usize) -> Gnn {
    let d = rng.gen_range(1..=max_layers.max(1));
    let mut dim = 0;
    let mut layers = Vec::with_capacity(d);
    for i in 0..d {
        let r = rng.gen_range(1..=max_width);
        let q = if i + 1 == d { 1 } else { rng.gen_range(1..=max_width) };
        let msg = random_fnn(rng, dim, r, max_width);
        let comb = random_fnn(rng, dim + r, q, max_width);
        layers.push(GnnLayer::new(Side::One, msg, Aggregation::Sum, comb).expect("consistent shapes"));
        dim = q;
    }
    Gnn::new(0, layers).expect("dimensions chain")
}

fn ints(w: &[&[i64]], b: &[i64], act: Activation) -> Dense {
    Dense::from_ints(w, b, act).expect("hand-built layer")
}

fn degree_layer() -> GnnLayer {
    let msg = Fnn::constant(0, vec![rational::one()]);
    GnnLayer::new(Side::One, msg, Aggregation::Sum, Fnn::identity(1)).expect("degree layer")
}

/// Hand-built SUM 1-GNNs that look plausible for the query. The last one is
/// exact on K_{n±1,n} up to `n = squares`, using a piecewise-linear square
/// that is exact on the integers `0..=squares`.
pub fn adversarial_candidates(squares: i64) -> Vec<(String, Gnn)> {
    let mut out = Vec::new();
    let one = |comb: Fnn| Gnn::new(0, vec![GnnLayer::new(Side::One, Fnn::new(0, vec![]).unwrap(), Aggregation::Sum, comb).unwrap()]);
    out.push(("constant-3/4".into(), one(Fnn::constant(0, vec![rational::ratio(3, 4)])).unwrap()));
    // own degree against the neighbours' degree sum divided by own degree is
    // not linear; try s - k·d for a few k instead
    for k in [1i64, 2] {
        let comb = Fnn::new(
            2,
            vec![ints(&[&[-k, 1], &[-k, 1]], &[0, -1], Activation::Relu), ints(&[&[1, -1]], &[0], Activation::Id)],
        )
        .unwrap();
        let l2 = GnnLayer::new(Side::One, Fnn::identity(1), Aggregation::Sum, comb).unwrap();
        out.push((alloc::format!("clamp(nbr-degree-sum - {k}*deg)"), Gnn::new(0, vec![degree_layer(), l2]).unwrap()));
    }
    // min(1, relu(deg - 3)) after a degree layer
    let comb = Fnn::new(1, vec![ints(&[&[1], &[1]], &[-3, -4], Activation::Relu), ints(&[&[1, -1]], &[0], Activation::Id)]).unwrap();
    let l2 = GnnLayer::new(Side::One, Fnn::constant(1, vec![]), Aggregation::Sum, comb).unwrap();
    out.push(("clamp(deg - 3)".into(), Gnn::new(0, vec![degree_layer(), l2]).unwrap()));
    // min(1, relu(s - sq(d))) with sq(d) = d + 2 Σ_{k<K} relu(d - k)
    let k_max = squares.max(2);
    let mut w1: Vec<Vec<Q>> = Vec::new();
    let mut b1: Vec<Q> = Vec::new();
    for k in 1..k_max {
        w1.push(vec![rational::one(), rational::zero()]);
        b1.push(rational::int(-k));
    }
    w1.push(vec![rational::one(), rational::zero()]);
    b1.push(rational::zero());
    w1.push(vec![rational::zero(), rational::one()]);
    b1.push(rational::zero());
    let h = w1.len();
    let mut t: Vec<Q> = vec![rational::int(-2); h];
    t[h - 2] = rational::int(-1);
    t[h - 1] = rational::one();
    let l_a = Dense::new(w1, b1, 2, Activation::Relu).unwrap();
    let l_b = Dense::new(vec![t.clone(), t], vec![rational::zero(), rational::int(-1)], h, Activation::Relu).unwrap();
    let l_c = ints(&[&[1, -1]], &[0], Activation::Id);
    let comb = Fnn::new(2, vec![l_a, l_b, l_c]).unwrap();
    let l2 = GnnLayer::new(Side::One, Fnn::identity(1), Aggregation::Sum, comb).unwrap();
    out.push((alloc::format!("square-compare(K={k_max})"), Gnn::new(0, vec![degree_layer(), l2]).unwrap()));
    out
}
