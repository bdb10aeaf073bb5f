//! Text formats for graphs, signals and GNNs.
//!
//! Graph:
//! ```text
//! graph n=3 labels=1
//! edge 0 1
//! edge 1 2
//! label 0 1
//! label 1 0
//! label 2 0
//! ```
//! Signal: `signal dim=<d>` then `<v> <r_1> ... <r_d>` for every vertex in
//! order. GNN: `gnn layers=<d> in=<p> out=<q>`, then per layer
//! `layer side=<1|2> agg=<sum|mean|max>` followed by a `msg` and a `comb`
//! block. A block is `fnn in=<p> layers=<k>`, then per dense layer a line
//! `<rows> <cols> act=<relu|id>` and `rows` lines of `cols` weights followed
//! by the bias. Side-2 messages read `(receiver, sender)`. Lines starting
//! with `#` and blank lines are ignored everywhere.

use std::collections::HashMap;
use std::fmt::Write;

use countgnn_core::gnn::{Activation, Aggregation, Dense, Fnn, Gnn, GnnError, GnnLayer, Side};
use countgnn_core::graph::{GraphError, LabelledGraph, Signal};
use countgnn_core::rational::{self, Q};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unexpected end of input, expected {0}")]
    Eof(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Gnn(#[from] GnnError),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

/// Non-comment lines with 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Lines { inner: it.peekable() }
    }

    fn next(&mut self, what: &'static str) -> Result<(usize, &'a str), FormatError> {
        self.inner.next().ok_or(FormatError::Eof(what))
    }

    fn peek_keyword(&mut self) -> Option<&'a str> {
        self.inner.peek().and_then(|(_, l)| l.split_whitespace().next())
    }

    fn is_done(&mut self) -> bool {
        self.inner.peek().is_none()
    }
}

/// `key=value` fields after a leading keyword.
fn header<'a>(line: usize, text: &'a str, keyword: &str) -> Result<HashMap<&'a str, &'a str>, FormatError> {
    let mut words = text.split_whitespace();
    if words.next() != Some(keyword) {
        return Err(syntax(line, format!("expected `{keyword}`")));
    }
    words
        .map(|w| w.split_once('=').ok_or_else(|| syntax(line, format!("expected key=value, found `{w}`"))))
        .collect()
}

fn field<T: std::str::FromStr>(line: usize, fields: &HashMap<&str, &str>, key: &str) -> Result<T, FormatError> {
    let raw = fields.get(key).ok_or_else(|| syntax(line, format!("missing `{key}=`")))?;
    raw.parse().map_err(|_| syntax(line, format!("bad value for `{key}`: `{raw}`")))
}

fn number<T: std::str::FromStr>(line: usize, word: &str) -> Result<T, FormatError> {
    word.parse().map_err(|_| syntax(line, format!("expected a number, found `{word}`")))
}

fn rat(line: usize, word: &str) -> Result<Q, FormatError> {
    rational::parse(word).map_err(|_| syntax(line, format!("expected a rational, found `{word}`")))
}

pub fn write_graph(g: &LabelledGraph) -> String {
    let mut s = format!("graph n={} labels={}\n", g.order(), g.label_width());
    for (u, v) in g.edges() {
        let _ = writeln!(s, "edge {u} {v}");
    }
    if g.label_width() > 0 {
        for v in 0..g.order() {
            let bits: String = g.labels(v).iter().map(|&b| if b { '1' } else { '0' }).collect();
            let _ = writeln!(s, "label {v} {bits}");
        }
    }
    s
}

fn read_graph_from(lines: &mut Lines) -> Result<LabelledGraph, FormatError> {
    let (ln, text) = lines.next("graph header")?;
    let f = header(ln, text, "graph")?;
    let n: usize = field(ln, &f, "n")?;
    let width: usize = field(ln, &f, "labels")?;
    let mut edges = Vec::new();
    let mut labels: Vec<Option<Vec<bool>>> = vec![None; n];
    while let Some(kw) = lines.peek_keyword() {
        if kw != "edge" && kw != "label" {
            break;
        }
        let (ln, text) = lines.next("edge or label")?;
        let words: Vec<&str> = text.split_whitespace().collect();
        match (kw, words.len()) {
            ("edge", 3) => edges.push((number(ln, words[1])?, number(ln, words[2])?)),
            ("label", 3) => {
                let v: usize = number(ln, words[1])?;
                if v >= n {
                    return Err(syntax(ln, format!("label for vertex {v} outside 0..{n}")));
                }
                let row = words[2]
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(syntax(ln, format!("bad label bit `{c}`"))),
                    })
                    .collect::<Result<Vec<bool>, _>>()?;
                if labels[v].replace(row).is_some() {
                    return Err(syntax(ln, format!("vertex {v} labelled twice")));
                }
            }
            ("label", 2) if width == 0 => {
                let v: usize = number(ln, words[1])?;
                if v >= n {
                    return Err(syntax(ln, format!("label for vertex {v} outside 0..{n}")));
                }
                labels[v] = Some(Vec::new());
            }
            _ => return Err(syntax(ln, format!("malformed `{kw}` line"))),
        }
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(v, l)| match l {
            Some(l) => Ok(l),
            None if width == 0 => Ok(Vec::new()),
            None => Err(FormatError::Syntax { line: ln, msg: format!("vertex {v} has no label line") }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LabelledGraph::new(n, width, &edges, labels)?)
}

pub fn read_graph(text: &str) -> Result<LabelledGraph, FormatError> {
    let mut lines = Lines::new(text);
    let g = read_graph_from(&mut lines)?;
    if let Some((ln, _)) = lines.inner.next() {
        return Err(syntax(ln, "trailing content after the graph"));
    }
    Ok(g)
}

/// Several graph documents back to back.
pub fn read_graphs(text: &str) -> Result<Vec<LabelledGraph>, FormatError> {
    let mut lines = Lines::new(text);
    let mut out = Vec::new();
    while !lines.is_done() {
        out.push(read_graph_from(&mut lines)?);
    }
    Ok(out)
}

pub fn write_signal(s: &Signal) -> String {
    let mut out = format!("signal dim={}\n", s.dim());
    for (v, row) in s.rows().iter().enumerate() {
        let _ = write!(out, "{v}");
        for x in row {
            let _ = write!(out, " {}", rational::format(x));
        }
        out.push('\n');
    }
    out
}

pub fn read_signal(text: &str) -> Result<Signal, FormatError> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next("signal header")?;
    let f = header(ln, head, "signal")?;
    let dim: usize = field(ln, &f, "dim")?;
    let mut rows = Vec::new();
    while !lines.is_done() {
        let (ln, text) = lines.next("signal row")?;
        let words: Vec<&str> = text.split_whitespace().collect();
        let v: usize = number(ln, words[0])?;
        if v != rows.len() {
            return Err(syntax(ln, format!("expected row {}, found {v}", rows.len())));
        }
        if words.len() != dim + 1 {
            return Err(syntax(ln, format!("row {v} has {} entries, expected {dim}", words.len() - 1)));
        }
        rows.push(words[1..].iter().map(|w| rat(ln, w)).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(Signal::new(dim, rows)?)
}

fn write_fnn(out: &mut String, tag: &str, f: &Fnn) {
    let _ = writeln!(out, "{tag}");
    let _ = writeln!(out, "fnn in={} layers={}", f.input_dim(), f.depth());
    for d in f.layers() {
        let _ = writeln!(out, "{} {} act={}", d.rows(), d.cols(), d.activation().name());
        for (w, b) in d.weights().iter().zip(d.bias()) {
            let mut words: Vec<String> = w.iter().map(rational::format).collect();
            words.push(rational::format(b));
            let _ = writeln!(out, "{}", words.join(" "));
        }
    }
}

pub fn write_gnn(net: &Gnn) -> String {
    let mut out = format!("gnn layers={} in={} out={}\n", net.layers().len(), net.input_dim(), net.output_dim());
    for l in net.layers() {
        let _ = writeln!(out, "layer side={} agg={}", l.side().number(), l.agg().name());
        write_fnn(&mut out, "msg", l.msg());
        write_fnn(&mut out, "comb", l.comb());
    }
    out
}

fn read_fnn(lines: &mut Lines, tag: &'static str) -> Result<Fnn, FormatError> {
    let (ln, text) = lines.next(tag)?;
    if text != tag {
        return Err(syntax(ln, format!("expected `{tag}`")));
    }
    let (ln, text) = lines.next("fnn header")?;
    let f = header(ln, text, "fnn")?;
    let depth: usize = field(ln, &f, "layers")?;
    let input: usize = field(ln, &f, "in")?;
    let mut layers = Vec::with_capacity(depth);
    for _ in 0..depth {
        let (ln, text) = lines.next("dense layer header")?;
        let words: Vec<&str> = text.split_whitespace().collect();
        if words.len() != 3 {
            return Err(syntax(ln, "expected `<rows> <cols> act=<relu|id>`"));
        }
        let rows: usize = number(ln, words[0])?;
        let cols: usize = number(ln, words[1])?;
        let act = match words[2] {
            "act=relu" => Activation::Relu,
            "act=id" => Activation::Id,
            other => return Err(syntax(ln, format!("unknown activation `{other}`"))),
        };
        let mut weights = Vec::with_capacity(rows);
        let mut bias = Vec::with_capacity(rows);
        for _ in 0..rows {
            let (ln, text) = lines.next("weight row")?;
            let mut entries = text.split_whitespace().map(|w| rat(ln, w)).collect::<Result<Vec<_>, _>>()?;
            if entries.len() != cols + 1 {
                return Err(syntax(ln, format!("expected {cols} weights and a bias, found {} entries", entries.len())));
            }
            bias.push(entries.pop().expect("non-empty"));
            weights.push(entries);
        }
        layers.push(Dense::new(weights, bias, cols, act)?);
    }
    Ok(Fnn::new(input, layers)?)
}

pub fn read_gnn(text: &str) -> Result<Gnn, FormatError> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next("gnn header")?;
    let f = header(ln, head, "gnn")?;
    let depth: usize = field(ln, &f, "layers")?;
    let input: usize = field(ln, &f, "in")?;
    let output: usize = field(ln, &f, "out")?;
    let mut layers = Vec::with_capacity(depth);
    for _ in 0..depth {
        let (ln, text) = lines.next("layer header")?;
        let lf = header(ln, text, "layer")?;
        let side = match field::<u8>(ln, &lf, "side")? {
            1 => Side::One,
            2 => Side::Two,
            s => return Err(syntax(ln, format!("side must be 1 or 2, found {s}"))),
        };
        let agg = match *lf.get("agg").ok_or_else(|| syntax(ln, "missing `agg=`"))? {
            "sum" => Aggregation::Sum,
            "mean" => Aggregation::Mean,
            "max" => Aggregation::Max,
            other => return Err(syntax(ln, format!("unknown aggregation `{other}`"))),
        };
        let msg = read_fnn(&mut lines, "msg")?;
        let comb = read_fnn(&mut lines, "comb")?;
        layers.push(GnnLayer::new(side, msg, agg, comb)?);
    }
    if let Some((ln, _)) = lines.inner.next() {
        return Err(syntax(ln, "trailing content after the last layer"));
    }
    let net = Gnn::new(input, layers)?;
    if net.output_dim() != output {
        return Err(syntax(ln, format!("header says out={output}, the layers give {}", net.output_dim())));
    }
    Ok(net)
}
