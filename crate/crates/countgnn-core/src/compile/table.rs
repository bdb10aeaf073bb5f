//! FNNs reproducing a finite table exactly.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::CompileError;
use crate::gnn::{Activation, Dense, Fnn};
use crate::rational::{self, Q};

/// A network that maps every `domain[i]` to `values[i]`. Tables that an
/// affine map fits exactly get a single id layer. Otherwise the points are
/// projected injectively onto a line, `<w, x>` with `w = (1, t, t^2, ...)`,
/// and the read-out interpolates the values piecewise linearly between
/// consecutive projections: one relu unit per breakpoint.
pub fn fnn_from_table(input_dim: usize, domain: &[Vec<Q>], values: &[Vec<Q>]) -> Result<Fnn, CompileError> {
    if domain.len() != values.len() {
        return Err(CompileError::Shape(alloc::format!("{} domain points but {} values", domain.len(), values.len())));
    }
    let out_dim = match values.first() {
        Some(v) => v.len(),
        None => return Ok(Fnn::constant(input_dim, Vec::new())),
    };
    let mut table: BTreeMap<&[Q], &[Q]> = BTreeMap::new();
    for (i, (x, y)) in domain.iter().zip(values).enumerate() {
        if x.len() != input_dim || y.len() != out_dim {
            return Err(CompileError::Shape(alloc::format!("table row {i} has the wrong width")));
        }
        if let Some(prev) = table.insert(x, y) {
            if prev != y.as_slice() {
                return Err(CompileError::ConflictingTable(i));
            }
        }
    }
    let points: Vec<(&[Q], &[Q])> = table.into_iter().collect();
    if let Some(f) = affine_fit(input_dim, out_dim, &points) {
        return Ok(f);
    }
    let w = injective_direction(input_dim, &points);
    let mut proj: Vec<(Q, &[Q])> = points.iter().map(|(x, y)| (dot(&w, x), *y)).collect();
    proj.sort_by(|a, b| a.0.cmp(&b.0));
    let k = proj.len();
    // f(s) = v_1 + sum_j (slope_j - slope_{j-1}) relu(s - s_j), valid for s >= s_1
    let mut coeffs: Vec<Vec<Q>> = vec![Vec::with_capacity(k - 1); out_dim];
    let mut prev_slope = vec![Q::zero(); out_dim];
    for j in 0..k - 1 {
        let ds = &proj[j + 1].0 - &proj[j].0;
        for c in 0..out_dim {
            let slope = (&proj[j + 1].1[c] - &proj[j].1[c]) / &ds;
            coeffs[c].push(&slope - &prev_slope[c]);
            prev_slope[c] = slope;
        }
    }
    let hidden_w: Vec<Vec<Q>> = (0..k - 1).map(|_| w.clone()).collect();
    let hidden_b: Vec<Q> = proj[..k - 1].iter().map(|(s, _)| -s.clone()).collect();
    let hidden = Dense::new(hidden_w, hidden_b, input_dim, Activation::Relu)?;
    let out_b: Vec<Q> = proj[0].1.to_vec();
    let readout = Dense::new(coeffs, out_b, k - 1, Activation::Id)?;
    Ok(Fnn::new(input_dim, vec![hidden, readout])?)
}

fn dot(w: &[Q], x: &[Q]) -> Q {
    let mut acc = Q::zero();
    for (a, b) in w.iter().zip(x) {
        if !b.is_zero() {
            acc += a * b;
        }
    }
    acc
}

fn injective_direction(dim: usize, points: &[(&[Q], &[Q])]) -> Vec<Q> {
    // Each colliding pair rules out at most dim - 1 values of t.
    let mut t = 1i64;
    loop {
        let mut w = Vec::with_capacity(dim);
        let mut p = Q::one();
        for _ in 0..dim {
            w.push(p.clone());
            p *= rational::int(t);
        }
        let mut proj: Vec<Q> = points.iter().map(|(x, _)| dot(&w, x)).collect();
        proj.sort();
        if proj.windows(2).all(|a| a[0] != a[1]) {
            return w;
        }
        t += 1;
    }
}

/// Exact affine interpolation by Gaussian elimination, if one exists.
fn affine_fit(dim: usize, out_dim: usize, points: &[(&[Q], &[Q])]) -> Option<Fnn> {
    let cols = dim + 1;
    let mut rows: Vec<Vec<Q>> = points
        .iter()
        .map(|(x, y)| {
            let mut r = x.to_vec();
            r.push(Q::one());
            r.extend(y.iter().cloned());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Q::one() / &rows[r][c];
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..rows[i].len() {
                    let sub = &f * &rows[r][j];
                    rows[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| row[cols..].iter().any(|v| !v.is_zero())) {
        return None;
    }
    let mut theta = vec![vec![Q::zero(); cols]; out_dim];
    for (i, &c) in pivots.iter().enumerate() {
        for o in 0..out_dim {
            theta[o][c] = rows[i][cols + o].clone();
        }
    }
    let weights = theta.iter().map(|t| t[..dim].to_vec()).collect();
    let bias = theta.iter().map(|t| t[dim].clone()).collect();
    Fnn::affine(weights, bias, dim).ok()
}

/// All points of `{0,1}^dim`; point `i` has bit `j` of `i` at coordinate `j`.
pub fn boolean_cube(dim: usize) -> Vec<Vec<Q>> {
    (0..1usize << dim)
        .map(|i| (0..dim).map(|j| if i >> j & 1 == 1 { Q::one() } else { Q::zero() }).collect())
        .collect()
}

pub fn one_hot(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}
