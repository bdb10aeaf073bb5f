//! 2-GNN to 1-GNN compilation for MEAN aggregation.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::table::{boolean_cube, fnn_from_table, one_hot};
use super::{layer_interval, message, require_aggregation, CompileError};
use crate::gnn::{Activation, Aggregation, Dense, Fnn, Gnn, GnnLayer, Side};
use crate::rational::{self, Q};

/// Proportion vectors of length `n` whose entries are multiples of
/// `1/denominator` and sum to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProportionGrid {
    pub denominator: usize,
    pub n: usize,
    pub points: Vec<Vec<Q>>,
}

#[cfg(test)]
pub(crate) fn tests_binomial(n: usize, k: usize) -> u128 {
    binomial(n as u128, k as u128)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

impl ProportionGrid {
    pub fn new(n: usize, denominator: usize, cap: usize) -> Result<Self, CompileError> {
        if n == 0 || denominator == 0 {
            return Err(CompileError::Shape(alloc::format!("empty proportion grid (n = {n}, 1/δ = {denominator})")));
        }
        let size = binomial((n + denominator - 1) as u128, (n - 1) as u128);
        if size > cap as u128 {
            return Err(CompileError::CapExceeded { what: "proportion grid", projected: size, cap: cap as u128 });
        }
        let mut points = Vec::with_capacity(size as usize);
        let mut parts = vec![0usize; n];
        fn fill(i: usize, left: usize, parts: &mut Vec<usize>, den: usize, out: &mut Vec<Vec<Q>>) {
            if i + 1 == parts.len() {
                parts[i] = left;
                out.push(parts.iter().map(|&b| rational::ratio(b as i64, den as i64)).collect());
                return;
            }
            for b in (0..=left).rev() {
                parts[i] = b;
                fill(i + 1, left - b, parts, den, out);
            }
        }
        fill(0, denominator, &mut parts, denominator, &mut points);
        Ok(ProportionGrid { denominator, n, points })
    }

    pub fn delta(&self) -> Q {
        rational::ratio(1, self.denominator as i64)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct MeanOptions {
    pub eps: Q,
    pub depth_cap: usize,
    /// Bound on the one-hot width and on interpolation grid points.
    pub grid_cap: usize,
}

impl MeanOptions {
    pub fn new(eps: Q) -> Self {
        MeanOptions { eps, depth_cap: 2, grid_cap: 4096 }
    }
}

/// Constants chosen for one compiled stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageBudget {
    pub stage: usize,
    /// Worst-case deviation this stage can add.
    pub error_bound: Q,
    /// Interpolation spacing (0 for the exact first stage).
    pub spacing: Q,
    pub grid_points: usize,
    pub product_steps: usize,
    pub lipschitz_comb: Q,
    pub lipschitz_msg: Q,
}

#[derive(Debug, Clone)]
pub struct MeanCompilation {
    pub gnn: Gnn,
    pub budgets: Vec<StageBudget>,
}

impl MeanCompilation {
    pub fn error_bound(&self) -> Q {
        self.budgets.iter().map(|b| b.error_bound.clone()).sum()
    }
}

fn max_q(a: Q, b: Q) -> Q {
    if a >= b {
        a
    } else {
        b
    }
}

fn ceil_usize(q: &Q) -> usize {
    q.ceil().to_integer().to_usize().unwrap_or(usize::MAX)
}

/// `gate(u, e) = relu(u - B(1-e)) - relu(-u - B(1-e))` for each pair of
/// (u, e) columns; equals `e·u` whenever `e ∈ {0, 1}` and `|u| <= B`.
/// Returns the relu layer rows for one product.
fn gate_rows(width: usize, u: usize, e: usize, bound: &Q, scale: &Q) -> [(Vec<Q>, Q); 2] {
    let mut pos = vec![Q::zero(); width];
    pos[u] = scale.clone();
    pos[e] = bound.clone();
    let mut neg = vec![Q::zero(); width];
    neg[u] = -scale.clone();
    neg[e] = bound.clone();
    [(pos, -bound.clone()), (neg, -bound.clone())]
}

/// Stage-1 combination over `(one-hot x, proportions π)`: the mean message
/// is `Σ_x e_x · M_x π`, computed exactly with one gate per `(x, coordinate)`.
fn exact_first_stage(layer: &GnnLayer, cube: &[Vec<Q>]) -> Result<Fnn, CompileError> {
    let n = cube.len();
    let p = layer.input_dim();
    let r = layer.message_dim();
    let w = 2 * n;
    let mut rows = Vec::new();
    let mut bias = Vec::new();
    // relu(e_j) carries the one-hot through
    for j in 0..n {
        let mut row = vec![Q::zero(); w];
        row[j] = Q::one();
        rows.push(row);
        bias.push(Q::zero());
    }
    for (j, x) in cube.iter().enumerate() {
        let cols: Vec<Vec<Q>> = cube.iter().map(|y| message(layer, x, y)).collect::<Result<_, _>>()?;
        for c in 0..r {
            let bound = cols.iter().map(|m| m[c].abs()).fold(Q::zero(), max_q);
            for sign in [Q::one(), -Q::one()] {
                let mut row = vec![Q::zero(); w];
                for k in 0..n {
                    row[n + k] = &sign * &cols[k][c];
                }
                row[j] = bound.clone();
                rows.push(row);
                bias.push(-bound.clone());
            }
        }
    }
    let hidden = Dense::new(rows, bias, w, Activation::Relu)?;
    let h = hidden.rows();
    let mut out_rows = Vec::with_capacity(p + r);
    for i in 0..p {
        let mut row = vec![Q::zero(); h];
        for (j, x) in cube.iter().enumerate() {
            row[j] = x[i].clone();
        }
        out_rows.push(row);
    }
    for c in 0..r {
        let mut row = vec![Q::zero(); h];
        for j in 0..n {
            let base = n + (j * r + c) * 2;
            row[base] = Q::one();
            row[base + 1] = -Q::one();
        }
        out_rows.push(row);
    }
    let readout = Dense::new(out_rows, vec![Q::zero(); p + r], h, Activation::Id)?;
    Ok(Fnn::new(w, vec![hidden, readout])?.then(layer.comb())?)
}

/// Hat functions on `t_k = lo + k·h`, `k = 0..=k_max`: a partition of unity
/// on `[lo, lo + k_max·h]` reproducing linear functions.
fn hat_basis(lo: &Q, h: &Q, k_max: usize) -> Result<Fnn, CompileError> {
    if k_max == 0 {
        return Ok(Fnn::constant(1, vec![Q::one()]));
    }
    let t = |k: usize| lo + h * rational::int(k as i64);
    let hidden_w = (0..=k_max).map(|_| vec![Q::one()]).collect();
    let hidden_b = (0..=k_max).map(|k| -t(k)).collect();
    let hidden = Dense::new(hidden_w, hidden_b, 1, Activation::Relu)?;
    let inv = Q::one() / h;
    let mut rows = Vec::with_capacity(k_max + 1);
    let mut bias = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut row = vec![Q::zero(); k_max + 1];
        if k == 0 {
            row[0] = -inv.clone();
            row[1] = inv.clone();
            bias.push(Q::one());
        } else {
            row[k - 1] = inv.clone();
            row[k] = rational::int(-2) * &inv;
            if k < k_max {
                row[k + 1] = inv.clone();
            } else {
                row[k] = -inv.clone();
            }
            bias.push(Q::zero());
        }
        rows.push(row);
    }
    let readout = Dense::new(rows, bias, k_max + 1, Activation::Id)?;
    Ok(Fnn::new(1, vec![hidden, readout])?)
}

/// Stage-2 combination over `(own hats η, mean neighbour hats ρ)`:
/// `Σ_j η_j · Ψ(t_j, ρ)` with `Ψ(a, ρ) = comb(a, Σ_k ρ_k msg(a, t_k))`.
/// Each product `η·u` is approximated by `(1/S) Σ_s gate(u, clamp(Sη - s))`,
/// exact when `η ∈ {0, 1}` and off by at most `B/(4S)` otherwise.
fn interpolated_stage(layer: &GnnLayer, grid: &[Q], steps: usize, bound: &Q) -> Result<Fnn, CompileError> {
    let m = grid.len();
    let w = 2 * m;
    let q = layer.output_dim();
    let r = layer.message_dim();
    let mut parts = Vec::with_capacity(m + 1);
    for a in grid {
        let mut rows = vec![vec![Q::zero(); w]];
        let mut bias = vec![a.clone()];
        let msgs: Vec<Vec<Q>> = grid.iter().map(|b| message(layer, core::slice::from_ref(a), core::slice::from_ref(b))).collect::<Result<_, _>>()?;
        for c in 0..r {
            let mut row = vec![Q::zero(); w];
            for (k, msg) in msgs.iter().enumerate() {
                row[m + k] = msg[c].clone();
            }
            rows.push(row);
            bias.push(Q::zero());
        }
        parts.push(Fnn::affine(rows, bias, w)?.then(layer.comb())?);
    }
    // clamp(S·η_j - s, 0, 1) for all j, s
    let s_q = rational::int(steps as i64);
    let mut cw = Vec::with_capacity(2 * m * steps);
    let mut cb = Vec::with_capacity(2 * m * steps);
    for j in 0..m {
        for s in 0..steps {
            for shift in [0i64, 1] {
                let mut row = vec![Q::zero(); w];
                row[j] = s_q.clone();
                cw.push(row);
                cb.push(-rational::int(s as i64 + shift));
            }
        }
    }
    let mut diff = vec![vec![Q::zero(); 2 * m * steps]; m * steps];
    for (i, row) in diff.iter_mut().enumerate() {
        row[2 * i] = Q::one();
        row[2 * i + 1] = -Q::one();
    }
    parts.push(Fnn::new(
        w,
        vec![
            Dense::new(cw, cb, w, Activation::Relu)?,
            Dense::new(diff, vec![Q::zero(); m * steps], 2 * m * steps, Activation::Id)?,
        ],
    )?);
    let features = Fnn::fanout_all(&parts)?;
    // features: Ψ_0 .. Ψ_{m-1} (q each), then c_{j,s}
    let fw = m * q + m * steps;
    let mut gw = Vec::new();
    let mut gb = Vec::new();
    for j in 0..m {
        for s in 0..steps {
            for o in 0..q {
                for (row, b) in gate_rows(fw, j * q + o, m * q + j * steps + s, bound, &Q::one()) {
                    gw.push(row);
                    gb.push(b);
                }
            }
        }
    }
    let gates = Dense::new(gw, gb, fw, Activation::Relu)?;
    let inv_s = Q::one() / &s_q;
    let mut out = vec![vec![Q::zero(); gates.rows()]; q];
    for j in 0..m {
        for s in 0..steps {
            for o in 0..q {
                let base = ((j * steps + s) * q + o) * 2;
                out[o][base] = inv_s.clone();
                out[o][base + 1] = -inv_s.clone();
            }
        }
    }
    let readout = Dense::new(out, vec![Q::zero(); q], gates.rows(), Activation::Id)?;
    Ok(features.then(&Fnn::new(fw, vec![gates, readout])?)?.normal_form())
}

/// 1-GNN approximating a MEAN 2-GNN within `eps` (sup norm) on Boolean
/// inputs. Layer 0 one-hot encodes the labels. The first stage is exact:
/// the mean of one-hot neighbour states is the proportion vector, and the
/// mean message is bilinear in one-hot and proportions. A second stage is
/// supported when the intermediate state is one-dimensional: states are
/// carried as hat-function coordinates and the error is bounded from the
/// Lipschitz constants of the second layer.
pub fn compile_mean_2to1(net: &Gnn, options: &MeanOptions) -> Result<MeanCompilation, CompileError> {
    let layers = net.layers();
    require_aggregation(layers, Aggregation::Mean)?;
    if !options.eps.is_positive() {
        return Err(CompileError::Shape("eps must be positive".into()));
    }
    let d = layers.len();
    if d > options.depth_cap.min(2) {
        return Err(CompileError::Shape(alloc::format!("depth {d} exceeds the supported depth {}", options.depth_cap.min(2))));
    }
    let p = net.input_dim();
    if d == 0 {
        return Ok(MeanCompilation { gnn: net.clone(), budgets: Vec::new() });
    }
    let n = 1u128 << p.min(127);
    if p >= 64 || n > options.grid_cap as u128 {
        return Err(CompileError::CapExceeded { what: "one-hot width", projected: n, cap: options.grid_cap as u128 });
    }
    let cube = boolean_cube(p);
    let n = cube.len();
    let hot: Vec<Vec<Q>> = (0..n).map(|i| one_hot(n, i)).collect();
    let encode = fnn_from_table(p, &cube, &hot)?;
    let sel = Fnn::select(2 * p, &(0..p).collect::<Vec<_>>());
    let mut out = vec![GnnLayer::new(Side::One, Fnn::identity(p), Aggregation::Mean, sel.then(&encode)?.normal_form())?];
    let mut first = exact_first_stage(&layers[0], &cube)?;
    let mut budgets = vec![StageBudget {
        stage: 1,
        error_bound: Q::zero(),
        spacing: Q::zero(),
        grid_points: n,
        product_steps: 1,
        lipschitz_comb: layers[0].comb().lipschitz_bound(),
        lipschitz_msg: layers[0].msg().lipschitz_bound(),
    }];
    if d == 2 {
        let second = &layers[1];
        if second.input_dim() != 1 {
            return Err(CompileError::Shape(alloc::format!(
                "the second stage needs a one-dimensional intermediate state, found {}",
                second.input_dim()
            )));
        }
        let (lo, hi) = layer_interval(&layers[0], &vec![Q::zero(); p], &vec![Q::one(); p]);
        let (lo, hi) = (lo[0].clone(), hi[0].clone());
        let r = second.message_dim();
        let l_cx = second.comb().lipschitz_bound_on(0..1);
        let l_cz = second.comb().lipschitz_bound_on(1..1 + r);
        let (l_ma, l_mb) = match second.side() {
            Side::One => (Q::zero(), second.msg().lipschitz_bound()),
            Side::Two => (second.msg().lipschitz_bound_on(0..1), second.msg().lipschitz_bound_on(1..2)),
        };
        let lip = &l_cz * &l_mb + &l_cx + &l_cz * &l_ma;
        // Interpolation error <= lip·h/2 <= eps/2
        let half = &options.eps / rational::int(2);
        let per_unit = if lip.is_zero() { Q::one() } else { (&lip / &options.eps).ceil() };
        let h = if lip.is_zero() { max_q(&hi - &lo, Q::one()) } else { Q::one() / per_unit };
        let k_max = if hi > lo { ceil_usize(&((&hi - &lo) / &h)) } else { 0 };
        if k_max + 1 > options.grid_cap {
            return Err(CompileError::CapExceeded {
                what: "interpolation grid",
                projected: k_max as u128 + 1,
                cap: options.grid_cap as u128,
            });
        }
        let grid: Vec<Q> = (0..=k_max).map(|k| &lo + &h * rational::int(k as i64)).collect();
        // |Ψ(t_j, ρ)| over proportions ρ: the aggregate lies in the hull of
        // the grid messages and 0.
        let mut bound = Q::zero();
        for a in &grid {
            let msgs: Vec<Vec<Q>> = grid.iter().map(|b| message(second, core::slice::from_ref(a), core::slice::from_ref(b))).collect::<Result<_, _>>()?;
            let mut in_lo = vec![a.clone()];
            let mut in_hi = vec![a.clone()];
            for c in 0..r {
                in_lo.push(msgs.iter().map(|m| m[c].clone()).fold(Q::zero(), |x, y| if y < x { y } else { x }));
                in_hi.push(msgs.iter().map(|m| m[c].clone()).fold(Q::zero(), max_q));
            }
            let (olo, ohi) = second.comb().interval(&in_lo, &in_hi);
            for v in olo.iter().chain(&ohi) {
                bound = max_q(bound, v.abs());
            }
        }
        // Product error <= B/(2S) <= eps/4
        let steps = if bound.is_zero() { 1 } else { ceil_usize(&(rational::int(2) * &bound / &options.eps)).max(1) };
        if (k_max + 1).saturating_mul(steps) > options.grid_cap.saturating_mul(16) {
            return Err(CompileError::CapExceeded {
                what: "product gates",
                projected: (k_max as u128 + 1) * steps as u128,
                cap: options.grid_cap as u128 * 16,
            });
        }
        let interp = if k_max == 0 { Q::zero() } else { &lip * &h / rational::int(2) };
        let product = if k_max == 0 { Q::zero() } else { &bound / rational::int(2 * steps as i64) };
        debug_assert!(interp <= half);
        budgets.push(StageBudget {
            stage: 2,
            error_bound: interp + product,
            spacing: h.clone(),
            grid_points: k_max + 1,
            product_steps: steps,
            lipschitz_comb: &l_cx + &l_cz,
            lipschitz_msg: &l_ma + &l_mb,
        });
        first = first.then(&hat_basis(&lo, &h, k_max)?)?;
        out.push(GnnLayer::new(Side::One, Fnn::identity(n), Aggregation::Mean, first.normal_form())?);
        let comb2 = interpolated_stage(second, &grid, steps, &bound)?;
        out.push(GnnLayer::new(Side::One, Fnn::identity(k_max + 1), Aggregation::Mean, comb2)?);
    } else {
        out.push(GnnLayer::new(Side::One, Fnn::identity(n), Aggregation::Mean, first.normal_form())?);
    }
    Ok(MeanCompilation { gnn: Gnn::new(p, out)?, budgets })
}
