//! Tabular sweep output.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::LabError;
use crate::gnn::{gnn_run, Gnn};
use crate::graph::{make_complete_bipartite, Signal};
use crate::rational::{self, Q};

pub const CSV_HEADER: &str = "n,m,side,layer,coordinate,decimal,rational";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub n: u64,
    pub m: u64,
    pub side: char,
    pub layer: usize,
    pub coordinate: usize,
    pub value: Q,
}

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{}",
            self.n,
            self.m,
            self.side,
            self.layer,
            self.coordinate,
            rational::format_decimal(&self.value, 6),
            rational::format(&self.value)
        );
        s
    }
}

/// Header plus one line per row, newline-terminated.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

/// Final U-side output of `net` on K_{n-1,n} and K_{n+1,n}, two rows per n,
/// computed on the materialized graphs so side-2 networks work too.
pub fn q1_sweep_rows(net: &Gnn, n_range: core::ops::RangeInclusive<u64>) -> Result<Vec<SweepRow>, LabError> {
    if net.output_dim() != 1 {
        return Err(LabError::OutputDimension(net.output_dim()));
    }
    let mut rows = Vec::new();
    for n in n_range {
        if n < 2 {
            continue;
        }
        rows.extend(q1_sweep_at(net, n)?);
    }
    Ok(rows)
}

/// The two rows for one n.
pub fn q1_sweep_at(net: &Gnn, n: u64) -> Result<[SweepRow; 2], LabError> {
    let row = |m: u64| -> Result<SweepRow, LabError> {
        let g = make_complete_bipartite(m as usize, n as usize);
        let x = Signal::zeros(g.order(), net.input_dim());
        let out = gnn_run(net, &g, &x)?;
        Ok(SweepRow { n, m, side: 'U', layer: net.layers().len(), coordinate: 0, value: out.row(0)[0].clone() })
    };
    Ok([row(n - 1)?, row(n + 1)?])
}
