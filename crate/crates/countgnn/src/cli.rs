//! Command-line front end.
//!
//! Exit codes: 0 success or pass, 1 counterexample or falsification found,
//! 2 usage or input error, 3 a cap was exceeded.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use countgnn_core::compile::{
    compile_max_2to1, compile_mean_2to1, normalize_identity_messages, pull_linear_mean, CompileError, MeanOptions,
    DEFAULT_VALUE_SET_CAP,
};
use countgnn_core::gnn::{classify_signal, gnn_run, Gnn, GnnError};
use countgnn_core::graph::{color_refinement, cr_equivalent_graphs, GraphError, Signal};
use countgnn_core::lab::{
    adversarial_candidates, falsify_1gnn, fast_convergence_probe, logistic_probe, q1_sweep_at, random_1gnn,
    rows_to_csv, sign_stability_probe, build_q1_2gnn, FalsifyVerdict, LabError, NicePolynomial, Orientation,
};
use countgnn_core::logic::translate::{
    gc_to_mc, guarded_to_modal, hash_collision_rate, hash_hypothesis_holds, prime_supply_threshold, prime_table,
    check_prime_supply, render_at_prime, EquivalenceOutcome, GraphSource, TranslateError,
};
use countgnn_core::logic::{
    classify_fragment, parse_formula_with, parse_term, print_formula, to_simple_form, BoundError, BuiltinRegistry, CompiledFormula,
    EvalError, Expr, NVar, ParseOptions, Valuation, Value,
};
use countgnn_core::rational::{self, Q};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::formats::{self, FormatError};
use crate::oracle::{max_deviation, parallel_equivalence};
use crate::parallel::ordered_map;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
    Jsonl,
}

#[derive(Debug, Parser)]
#[command(name = "countgnn", version, about = "Counting logics and message-passing GNNs over exact rationals")]
pub struct Cli {
    /// Worker threads for enumeration-heavy commands.
    #[arg(long, global = true, default_value_t = NonZeroUsize::MIN)]
    pub workers: NonZeroUsize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a formula or term on a graph.
    Eval(EvalArgs),
    /// Parse a formula and print it back.
    Parse(ParseArgs),
    /// Report fragment membership.
    CheckFragment(FormulaInput),
    /// Rewrite into simple form.
    Normalize(NormalizeArgs),
    /// Translate between fragments.
    Translate(TranslateArgs),
    /// Compare two formulas on a family of graphs.
    Equiv(EquivArgs),
    /// Run or compile GNNs.
    #[command(subcommand)]
    Gnn(GnnCommand),
    /// Color Refinement.
    Cr(CrArgs),
    /// Complete-bipartite experiments.
    #[command(subcommand)]
    Lab(LabCommand),
    /// Prime tables and the prime-supply threshold.
    Primes(PrimesArgs),
    /// Collision rates of prime fingerprints on random sets.
    Hashdemo(HashArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct FormulaInput {
    /// Formula file.
    #[arg(long, visible_alias = "in", value_name = "FILE")]
    pub formula: Option<PathBuf>,
    /// Formula text.
    #[arg(short = 'e', long, value_name = "TEXT")]
    pub expr: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: FormulaInput,
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    /// Vertex for the single free vertex variable.
    #[arg(long)]
    pub at: Option<usize>,
    /// Further assignments, `x2=0` or `y1=5`.
    #[arg(long = "set", value_name = "VAR=VALUE")]
    pub assignments: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[command(flatten)]
    pub input: FormulaInput,
    /// Restrict to the variables x1, x2.
    #[arg(long)]
    pub two_variable: bool,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    #[command(flatten)]
    pub input: FormulaInput,
    /// Degree of a free number variable, `y1=1`.
    #[arg(long = "deg", value_name = "VAR=DEG", value_parser = parse_degree)]
    pub degrees: Vec<(NVar, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TranslateMode {
    GcMc,
    GuardedModal,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    #[arg(long, value_enum)]
    pub mode: TranslateMode,
    #[command(flatten)]
    pub input: FormulaInput,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// JSON-lines diagnostics for guarded-modal.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Replace every majority vote by this prime.
    #[arg(long)]
    pub prime: Option<u64>,
    #[arg(long = "deg", value_name = "VAR=DEG", value_parser = parse_degree)]
    pub degrees: Vec<(NVar, u32)>,
}

#[derive(Debug, Args)]
pub struct EquivArgs {
    #[arg(long, value_name = "FILE", required_unless_present = "lhs_expr")]
    pub lhs: Option<PathBuf>,
    #[arg(long, value_name = "FILE", required_unless_present = "rhs_expr")]
    pub rhs: Option<PathBuf>,
    #[arg(long, value_name = "TEXT", conflicts_with = "lhs")]
    pub lhs_expr: Option<String>,
    #[arg(long, value_name = "TEXT", conflicts_with = "rhs")]
    pub rhs_expr: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub enum_min: usize,
    #[arg(long, default_value_t = 4)]
    pub enum_max: usize,
    #[arg(long, default_value_t = 0)]
    pub labels: usize,
    /// Random graphs instead of enumeration.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Order of the random graphs.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[arg(long, default_value = "1/2")]
    pub edge_prob: String,
    #[arg(long = "deg", value_name = "VAR=DEG", value_parser = parse_degree)]
    pub degrees: Vec<(NVar, u32)>,
    /// Where to write a counterexample graph.
    #[arg(long, value_name = "FILE")]
    pub cex_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GnnCommand {
    /// Run a network on a graph.
    Run(GnnRunArgs),
    /// Transform a network.
    Compile(GnnCompileArgs),
}

#[derive(Debug, Args)]
pub struct GnnRunArgs {
    #[arg(long, value_name = "FILE")]
    pub gnn: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    /// Input signal; defaults to the graph's Boolean labels.
    #[arg(long, value_name = "FILE")]
    pub signal: Option<PathBuf>,
    /// Print the 3/4-1/4 classification instead of the output signal.
    #[arg(long)]
    pub classify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompileMode {
    Idmsg,
    Linmean,
    Max21,
    Mean21,
}

#[derive(Debug, Args)]
pub struct GnnCompileArgs {
    #[arg(long, value_enum)]
    pub mode: CompileMode,
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "1/8")]
    pub eps: String,
    /// Value-set cap (max21) or grid cap (mean21).
    #[arg(long, default_value_t = DEFAULT_VALUE_SET_CAP)]
    pub cap: usize,
    /// Compare compiled and original networks on every enumerated graph.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 4)]
    pub enum_max: usize,
    /// Label width of the verification graphs; must equal the input dimension.
    #[arg(long)]
    pub labels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CrArgs {
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    /// Second graph to compare against.
    #[arg(long, value_name = "FILE")]
    pub other: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LabCommand {
    /// Sweep the 2-GNN for the larger-degree-neighbour query over K_{n±1,n}.
    Q1(Q1Args),
    /// Search for n where 1-GNNs miss the query margin.
    Falsify(FalsifyArgs),
    /// Numerical probes for nice polynomials.
    Probe(ProbeArgs),
}

#[derive(Debug, Args)]
pub struct Q1Args {
    #[arg(long, default_value_t = 2)]
    pub nmin: u64,
    #[arg(long)]
    pub nmax: u64,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(id = "candidates", required = true, multiple = true)]
pub struct FalsifyCandidates {
    #[arg(long, value_name = "FILE")]
    pub gnn: Option<PathBuf>,
    /// Number of random networks.
    #[arg(long)]
    pub random: Option<usize>,
    /// Include the hand-built candidates.
    #[arg(long)]
    pub adversarial: bool,
}

#[derive(Debug, Args)]
pub struct FalsifyArgs {
    #[command(flatten)]
    pub candidates: FalsifyCandidates,
    #[arg(long, default_value_t = 200)]
    pub nmax: u64,
    #[arg(long, default_value_t = 6)]
    pub max_layers: usize,
    #[arg(long, default_value_t = 8)]
    pub max_width: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeKind {
    NiceSign,
    FastConv,
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Perturbation {
    None,
    /// `p + 2^-n`
    Pow2,
    /// `p + 1/n`
    InvN,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long, value_enum)]
    pub kind: ProbeKind,
    /// Coefficients `a_0,a_1,...` of the nice polynomial.
    #[arg(long, allow_hyphen_values = true)]
    pub poly: String,
    #[arg(long)]
    pub co_nice: bool,
    #[arg(long, default_value_t = 2)]
    pub r: u32,
    #[arg(long, default_value = "1..100")]
    pub nrange: String,
    /// The sampled function for fast-conv and logistic.
    #[arg(long, value_enum, default_value_t = Perturbation::None)]
    pub perturb: Perturbation,
}

#[derive(Debug, Args)]
pub struct PrimesArgs {
    /// Print the primes up to this bound.
    #[arg(long)]
    pub limit: Option<u64>,
    /// Find the supply threshold and check it up to this n.
    #[arg(long)]
    pub supply_max: Option<u64>,
}

#[derive(Debug, Args)]
pub struct HashArgs {
    /// Members are below 2^bits (at most 64).
    #[arg(long, default_value_t = 16)]
    pub bits: u64,
    #[arg(long, default_value_t = 2)]
    pub k: u64,
    /// Set size.
    #[arg(long, default_value_t = 4)]
    pub size: usize,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Cap(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Cap(_) => 3,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        usage(e)
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Graph(g) => g.into(),
            other => usage(other),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            other => usage(other),
        }
    }
}

impl From<GnnError> for CliError {
    fn from(e: GnnError) -> Self {
        match e {
            GnnError::Graph(g) => g.into(),
            other => usage(other),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::RangeTooLarge(_) => CliError::Cap(e.to_string()),
            other => usage(other),
        }
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        usage(e)
    }
}

impl From<TranslateError> for CliError {
    fn from(e: TranslateError) -> Self {
        match e {
            TranslateError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            TranslateError::Graph(g) => g.into(),
            TranslateError::Eval(ev) => ev.into(),
            other => usage(other),
        }
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            CompileError::Gnn(g) => g.into(),
            other => usage(other),
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Gnn(g) => g.into(),
            other => usage(other),
        }
    }
}

fn parse_degree(s: &str) -> Result<(NVar, u32), String> {
    let (var, deg) = s.split_once('=').ok_or("expected VAR=DEG")?;
    let var = var.trim().trim_start_matches('y');
    let var: NVar = var.parse().map_err(|_| format!("bad number variable `{var}`"))?;
    let deg: u32 = deg.trim().parse().map_err(|_| format!("bad degree `{deg}`"))?;
    Ok((var, deg))
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<u64>, CliError> {
    let (a, b) = s.split_once("..").ok_or_else(|| usage(format!("expected a..b, found `{s}`")))?;
    let b = b.trim_start_matches('=');
    let a: u64 = a.trim().parse().map_err(|_| usage(format!("bad range start `{a}`")))?;
    let b: u64 = b.trim().parse().map_err(|_| usage(format!("bad range end `{b}`")))?;
    Ok(a..=b)
}

fn parse_q(s: &str) -> Result<Q, CliError> {
    rational::parse(s).map_err(|_| usage(format!("expected a rational, found `{s}`")))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn input_text(input: &FormulaInput) -> Result<String, CliError> {
    match (&input.formula, &input.expr) {
        (Some(p), _) => read_file(p),
        (None, Some(t)) => Ok(t.clone()),
        (None, None) => Err(usage("give --formula or --expr")),
    }
}

fn read_formula(input: &FormulaInput, opts: &ParseOptions) -> Result<Expr, CliError> {
    parse_formula_with(input_text(input)?.trim(), opts).map_err(usage)
}

/// A formula, or failing that a term; the formula's parse error is reported.
fn read_formula_or_term(input: &FormulaInput) -> Result<Expr, CliError> {
    let text = input_text(input)?;
    parse_formula_with(text.trim(), &ParseOptions::general()).or_else(|e| parse_term(text.trim()).map_err(|_| usage(e)))
}

fn formula_from(path: &Option<PathBuf>, expr: &Option<String>) -> Result<Expr, CliError> {
    read_formula(&FormulaInput { formula: path.clone(), expr: expr.clone() }, &ParseOptions::general())
}

fn degree_map(d: &[(NVar, u32)]) -> BTreeMap<NVar, u32> {
    d.iter().copied().collect()
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Bool(b) => b.to_string(),
        Value::Num(n) => n.to_string(),
    }
}

fn value_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Bool(b) => json!(b),
        Value::Num(n) => json!(n.to_string()),
    }
}

fn valuation_text(val: &Valuation) -> String {
    let mut parts: Vec<String> = val.vertex.iter().map(|(x, v)| format!("x{x}={v}")).collect();
    parts.extend(val.number.iter().map(|(y, n)| format!("y{y}={n}")));
    parts.join(" ")
}

/// Parses and runs one command line, writing results to `out` and
/// diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let ctx = Ctx { workers: cli.workers, seed: cli.seed, format: cli.format };
    match &cli.command {
        Command::Eval(a) => ctx.eval(a, out),
        Command::Parse(a) => ctx.parse(a, out),
        Command::CheckFragment(a) => ctx.check_fragment(a, out),
        Command::Normalize(a) => ctx.normalize(a, out),
        Command::Translate(a) => ctx.translate(a, out),
        Command::Equiv(a) => ctx.equiv(a, out),
        Command::Gnn(GnnCommand::Run(a)) => ctx.gnn_run(a, out),
        Command::Gnn(GnnCommand::Compile(a)) => ctx.gnn_compile(a, out),
        Command::Cr(a) => ctx.cr(a, out),
        Command::Lab(LabCommand::Q1(a)) => ctx.lab_q1(a, out),
        Command::Lab(LabCommand::Falsify(a)) => ctx.lab_falsify(a, out),
        Command::Lab(LabCommand::Probe(a)) => ctx.lab_probe(a, out),
        Command::Primes(a) => ctx.primes(a, out),
        Command::Hashdemo(a) => ctx.hashdemo(a, out),
    }
}

struct Ctx {
    workers: NonZeroUsize,
    seed: u64,
    format: OutputFormat,
}

impl Ctx {
    fn jsonl(&self) -> bool {
        self.format == OutputFormat::Jsonl
    }

    fn eval(&self, a: &EvalArgs, out: &mut dyn Write) -> Result<i32, CliError> {
        let e = read_formula_or_term(&a.input)?;
        let g = formats::read_graph(&read_file(&a.graph)?)?;
        let reg = BuiltinRegistry::standard();
        let compiled = CompiledFormula::compile(&e, &reg)?;
        let mut val = Valuation::new();
        for s in &a.assignments {
            let (var, v) = s.split_once('=').ok_or_else(|| usage(format!("expected VAR=VALUE, found `{s}`")))?;
            let bad = || usage(format!("bad assignment `{s}`"));
            if let Some(x) = var.strip_prefix('x') {
                val.vertex.insert(x.parse().map_err(|_| bad())?, v.parse().map_err(|_| bad())?);
            } else if let Some(y) = var.strip_prefix('y') {
                val.number.insert(y.parse().map_err(|_| bad())?, v.parse::<u64>().map_err(|_| bad())?.into());
            } else {
                return Err(bad());
            }
        }
        let free: Vec<_> = compiled.free_vertex_vars().iter().filter(|x| !val.vertex.contains_key(x)).copied().collect();
        let mut ev = compiled.evaluator(&g)?;
        match (free.as_slice(), a.at) {
            ([x], None) if !compiled.is_term() => {
                let mut selected = Vec::new();
                for v in 0..g.order() {
                    let mut vv = val.clone();
                    vv.vertex.insert(*x, v);
                    if ev.eval_bool(&vv)? {
                        selected.push(v);
                    }
                }
                if self.jsonl() {
                    writeln!(out, "{}", json!({ "vertices": selected }))?;
                } else {
                    for v in selected {
                        writeln!(out, "{v}")?;
                    }
                }
            }
            (rest, at) => {
                match (rest, at) {
                    ([x], Some(v)) => {
                        val.vertex.insert(*x, v);
                    }
                    ([], None) => {}
                    ([], Some(_)) => return Err(usage("--at given but the formula has no free vertex variable")),
                    _ => return Err(usage(format!("{} free vertex variables are unassigned; use --set", rest.len()))),
                }
                let value = ev.eval(&val)?;
                if self.jsonl() {
                    writeln!(out, "{}", json!({ "value": value_json(&value) }))?;
                } else {
                    writeln!(out, "{}", value_text(&value))?;
                }
            }
        }
        Ok(0)
    }

    fn parse(&self, a: &ParseArgs, out: &mut dyn Write) -> Result<i32, CliError> {
        let opts = if a.two_variable { ParseOptions::default() } else { ParseOptions::general() };
        let e = read_formula(&a.input, &opts)?;
        let sort = if e.is_term() { "term" } else { "formula" };
        if self.jsonl() {
            writeln!(out, "{}", json!({ "sort": sort, "text": print_formula(&e), "size": e.size() }))?;
        } else {
            writeln!(out, "{}", print_formula(&e))?;
        }
        Ok(0)
    }

    fn check_fragment(&self, a: &FormulaInput, out: &mut dyn Write) -> Result<i32, CliError> {
        let e = read_formula(a, &ParseOptions::general())?;
        let r = classify_fragment(&e);
        let rows = [
            ("C", r.is_c),
            ("C2", r.is_c2),
            ("GC", r.is_gc),
            ("MC", r.is_mc),
            ("FO+C2", r.is_foc2),
            ("GFO+C", r.is_gfoc),
            ("MFO+C", r.is_mfoc),
            ("arithmetical", r.is_arithmetical),
        ];
        if self.jsonl() {
            let map: serde_json::Map<String, serde_json::Value> =
                rows.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            writeln!(out, "{}", serde_json::Value::Object(map))?;
        } else {
            for (k, v) in rows {
                writeln!(out, "{k} {}", if v { "yes" } else { "no" })?;
            }
            let fv: Vec<String> = r.free_vertex.iter().map(|x| format!("x{x}")).collect();
            let fnv: Vec<String> = r.free_number.iter().map(|y| format!("y{y}")).collect();
            writeln!(out, "free {}", fv.into_iter().chain(fnv).collect::<Vec<_>>().join(" "))?;
        }
        Ok(0)
    }

    fn normalize(&self, a: &NormalizeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
        let e = read_formula(&a.input, &ParseOptions::general())?;
        let s = to_simple_form(&e, &degree_map(&a.degrees))?;
        if self.jsonl() {
            writeln!(out, "{}", json!({ "simple": print_formula(&s) }))?;
        } else {
            writeln!(out, "{}", print_formula(&s))?;
        }
        Ok(0)
    }

    fn translate(&self, a: &TranslateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
        let e = read_formula(&a.input, &ParseOptions::general())?;
        let (result, report) = match a.mode {
            TranslateMode::GcMc => (gc_to_mc(&e)?, None),
            TranslateMode::GuardedModal => {
                let t = guarded_to_modal(&e, &degree_map(&a.degrees))?;
                let f = match a.prime {
                    Some(p) => render_at_prime(&t, p),
                    None => t.formula.clone(),
                };
                let rep = json!({
                    "n0": t.n0, "c": t.c, "q": t.q, "k0": t.k0, "d": t.d, "sites": t.sites.len(),
                });
                (f, Some(rep))
            }
        };
        let text = print_formula(&result);
        if let (Some(path), Some(rep)) = (&a.report, &report) {
            write_file(path, &format!("{rep}\n"))?;
        }
        match &a.out {
            Some(path) => write_file(path, &format!("{text}\n"))?,
            None if self.jsonl() => writeln!(out, "{}", json!({ "formula": text, "report": report }))?,
            None => writeln!(out, "{text}")?,
        }
        Ok(0)
    }

    fn equiv(&self, a: &EquivArgs, out: &mut dyn Write) -> Result<i32, CliError> {
        let lhs = formula_from(&a.lhs, &a.lhs_expr)?;
        let rhs = formula_from(&a.rhs, &a.rhs_expr)?;
        let source = match a.samples {
            Some(samples) => GraphSource::Random {
                samples,
                min_order: a.order,
                max_order: a.order,
                labels: a.labels,
                edge_prob: rational::to_f64(&parse_q(&a.edge_prob)?),
                seed: self.seed,
            },
            None => GraphSource::Enumerate { min_order: a.enum_min, max_order: a.enum_max, labels: a.labels },
        };
        let reg = BuiltinRegistry::standard();
        match parallel_equivalence(&lhs, &rhs, &source, &degree_map(&a.degrees), &reg, self.workers)? {
            EquivalenceOutcome::Pass { graphs, checks } => {
                if self.jsonl() {
                    writeln!(out, "{}", json!({ "result": "pass", "graphs": graphs, "checks": checks }))?;
                } else {
                    writeln!(out, "pass")?;
                    writeln!(out, "graphs {graphs} checks {checks}")?;
                }
                Ok(0)
            }
            EquivalenceOutcome::Counterexample(c) => {
                let dump = formats::write_graph(&c.graph);
                if self.jsonl() {
                    let line = json!({
                        "result": "counterexample",
                        "valuation": valuation_text(&c.valuation),
                        "lhs": value_json(&c.lhs),
                        "rhs": value_json(&c.rhs),
                        "graph": dump,
                    });
                    writeln!(out, "{line}")?;
                } else {
                    writeln!(out, "# counterexample")?;
                    writeln!(out, "# at {}", valuation_text(&c.valuation))?;
                    writeln!(out, "# lhs {} rhs {}", value_text(&c.lhs), value_text(&c.rhs))?;
                    write!(out, "{dump}")?;
                }
                if let Some(path) = &a.cex_out {
                    write_file(path, &dump)?;
                }
                Ok(1)
            }
        }
    }

    fn gnn_run(&self, a: &GnnRunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
        let net = formats::read_gnn(&read_file(&a.gnn)?)?;
        let g = formats::read_graph(&read_file(&a.graph)?)?;
        let x = match &a.signal {
            Some(p) => formats::read_signal(&read_file(p)?)?,
            None => Signal::from_labels(&g),
        };
        let y = gnn_run(&net, &g, &x)?;
        if a.classify {
            if y.dim() != 1 {
                return Err(GnnError::OutputDimension(y.dim()).into());
            }
            let c = classify_signal(&y);
            let mut verdicts = vec![""; y.len()];
            for (set, name) in [(&c.selected, "selected"), (&c.rejected, "rejected"), (&c.undefined, "undefined")] {
                for &v in set {
                    verdicts[v] = name;
                }
            }
            for (v, verdict) in verdicts.iter().enumerate() {
                match self.format {
                    OutputFormat::Jsonl => writeln!(out, "{}", json!({ "vertex": v, "class": verdict }))?,
                    OutputFormat::Csv => writeln!(out, "{v},{verdict}")?,
                    OutputFormat::Text => writeln!(out, "{v} {verdict}")?,
                }
            }
            return Ok(0);
        }
        match self.format {
            OutputFormat::Text => write!(out, "{}", formats::write_signal(&y))?,
            OutputFormat::Csv => {
                let head: Vec<String> = (0..y.dim()).map(|i| format!("y{i}")).collect();
                writeln!(out, "vertex,{}", head.join(","))?;
                for (v, row) in y.rows().iter().enumerate() {
                    let cells: Vec<String> = row.iter().map(rational::format).collect();
                    writeln!(out, "{v},{}", cells.join(","))?;
                }
            }
            OutputFormat::Jsonl => {
                for (v, row) in y.rows().iter().enumerate() {
                    let cells: Vec<String> = row.iter().map(rational::format).collect();
                    writeln!(out, "{}", json!({ "vertex": v, "output": cells }))?;
                }
            }
        }
        Ok(0)
    }

    fn gnn_compile(&self, a: &GnnCompileArgs, out: &mut dyn Write) -> Result<i32, CliError> {
        let net = formats::read_gnn(&read_file(&a.input)?)?;
        let eps = parse_q(&a.eps)?;
        let (compiled, tolerance): (Gnn, Option<Q>) = match a.mode {
            CompileMode::Idmsg => (normalize_identity_messages(&net)?, None),
            CompileMode::Linmean => (pull_linear_mean(&net)?, None),
            CompileMode::Max21 => (compile_max_2to1(&net, a.cap)?.gnn, None),
            CompileMode::Mean21 => {
                let mut opts = MeanOptions::new(eps.clone());
                opts.grid_cap = a.cap;
                (compile_mean_2to1(&net, &opts)?.gnn, Some(eps.clone()))
            }
        };
        let text = formats::write_gnn(&compiled);
        match &a.out {
            Some(p) => write_file(p, &text)?,
            None if !a.verify => write!(out, "{text}")?,
            None => {}
        }
        if !a.verify {
            return Ok(0);
        }
        let labels = a.labels.unwrap_or(net.input_dim());
        if labels != net.input_dim() {
            return Err(usage(format!("--labels {labels} does not match the input dimension {}", net.input_dim())));
        }
        let source = GraphSource::Enumerate { min_order: 1, max_order: a.enum_max, labels };
        let dev = max_deviation(&net, &compiled, &source, self.workers)?;
        let ok = match &tolerance {
            None => dev == rational::zero(),
            Some(eps) => dev < *eps,
        };
        if self.jsonl() {
            let line = json!({
                "mode": format!("{:?}", a.mode).to_lowercase(),
                "graphs": source.len()?,
                "max_deviation": rational::format(&dev),
                "pass": ok,
            });
            writeln!(out, "{line}")?;
        } else {
            writeln!(out, "graphs {}", source.len()?)?;
            writeln!(out, "max deviation {}", rational::format(&dev))?;
            writeln!(out, "{}", if ok { "pass" } else { "fail" })?;
        }
        Ok(if ok { 0 } else { 1 })
    }

    fn cr(&self, a: &CrArgs, out: &mut dyn Write) -> Result<i32, CliError> {
        let g = formats::read_graph(&read_file(&a.graph)?)?;
        if let Some(p) = &a.other {
            let h = formats::read_graph(&read_file(p)?)?;
            let eq = cr_equivalent_graphs(&g, &h);
            if self.jsonl() {
                writeln!(out, "{}", json!({ "cr_equivalent": eq }))?;
            } else {
                writeln!(out, "cr-equivalent {eq}")?;
            }
            return Ok(0);
        }
        let c = color_refinement(&g);
        match self.format {
            OutputFormat::Text => {
                for (v, col) in c.colors.iter().enumerate() {
                    writeln!(out, "{v} {col}")?;
                }
                writeln!(out, "classes {} rounds {}", c.classes(), c.rounds)?;
            }
            OutputFormat::Csv => {
                writeln!(out, "vertex,color")?;
                for (v, col) in c.colors.iter().enumerate() {
                    writeln!(out, "{v},{col}")?;
                }
            }
            OutputFormat::Jsonl => {
                writeln!(out, "{}", json!({ "colors": c.colors, "classes": c.classes(), "rounds": c.rounds }))?;
            }
        }
        Ok(0)
    }

    fn lab_q1(&self, a: &Q1Args, out: &mut dyn Write) -> Result<i32, CliError> {
        let net = build_q1_2gnn();
        let start = a.nmin.max(2);
        let ns: Vec<u64> = (start..=a.nmax).collect();
        let chunks = ordered_map(ns.len() as u64, self.workers, |i| q1_sweep_at(&net, ns[i as usize]));
        let mut rows = Vec::with_capacity(2 * ns.len());
        for c in chunks {
            rows.extend(c?);
        }
        let text = if self.jsonl() {
            rows.iter()
                .map(|r| {
                    let line = json!({
                        "n": r.n, "m": r.m, "side": r.side.to_string(), "layer": r.layer,
                        "coordinate": r.coordinate, "value": rational::format(&r.value),
                    });
                    format!("{line}\n")
                })
                .collect()
        } else {
            rows_to_csv(&rows)
        };
        match &a.out {
            Some(p) => {
                write_file(p, &text)?;
                writeln!(out, "{} rows", rows.len())?;
            }
            None => write!(out, "{text}")?,
        }
        Ok(0)
    }

    fn lab_falsify(&self, a: &FalsifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
        let mut nets: Vec<(String, Gnn)> = Vec::new();
        if let Some(p) = &a.candidates.gnn {
            nets.push((p.display().to_string(), formats::read_gnn(&read_file(p)?)?));
        }
        if let Some(count) = a.candidates.random {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for i in 0..count {
                nets.push((format!("random-{i}"), random_1gnn(&mut rng, a.max_layers, a.max_width)));
            }
        }
        if a.candidates.adversarial {
            nets.extend(adversarial_candidates(20));
        }
        let verdicts = ordered_map(nets.len() as u64, self.workers, |i| falsify_1gnn(&nets[i as usize].1, 1..=a.nmax));
        let mut failures = 0;
        for ((name, _), v) in nets.iter().zip(verdicts) {
            let v = v?;
            match (&v, self.format) {
                (FalsifyVerdict::FailsAt { n, violation }, OutputFormat::Jsonl) => {
                    let line = json!({
                        "network": name, "fails_at": n, "m": violation.m, "side": violation.side.to_string(),
                        "output": rational::format(&violation.output), "expected_selected": violation.expected_selected,
                    });
                    writeln!(out, "{line}")?;
                }
                (FalsifyVerdict::FailsAt { n, violation }, _) => writeln!(
                    out,
                    "{name} fails at n={n}: K_{{{},{}}} side {} output {} expected {}",
                    violation.m,
                    violation.n,
                    violation.side,
                    rational::format(&violation.output),
                    if violation.expected_selected { ">= 3/4" } else { "<= 1/4" }
                )?,
                (FalsifyVerdict::Survives { checked }, OutputFormat::Jsonl) => {
                    writeln!(out, "{}", json!({ "network": name, "survives": checked }))?
                }
                (FalsifyVerdict::Survives { checked }, _) => writeln!(out, "{name} survives {checked} values of n")?,
            }
            if v.fails() {
                failures += 1;
            }
        }
        if !self.jsonl() {
            writeln!(out, "{failures} of {} networks fail", nets.len())?;
        }
        Ok(if failures > 0 { 1 } else { 0 })
    }

    fn lab_probe(&self, a: &ProbeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
        let coeffs = a.poly.split(',').map(|c| parse_q(c.trim())).collect::<Result<Vec<_>, _>>()?;
        let orientation = if a.co_nice { Orientation::CoNice } else { Orientation::Nice };
        let p = NicePolynomial::new(coeffs, orientation);
        let range = parse_range(&a.nrange)?;
        let perturb = a.perturb;
        let f = |m: u64, n: u64| -> Q {
            let base = p.eval_at(m, n);
            match perturb {
                Perturbation::None => base,
                Perturbation::Pow2 => base + Q::new(1.into(), num_bigint::BigInt::from(1) << n as usize),
                Perturbation::InvN => base + rational::ratio(1, n.max(1) as i64),
            }
        };
        match a.kind {
            ProbeKind::NiceSign => {
                let r = sign_stability_probe(&p, *range.end())?;
                let n0 = r.n0.map_or("none".to_string(), |n| n.to_string());
                if self.jsonl() {
                    writeln!(out, "{}", json!({ "sign": r.sign, "n0": r.n0, "n_max": r.n_max }))?;
                } else {
                    writeln!(out, "sign {} n0 {n0} n_max {}", r.sign, r.n_max)?;
                }
            }
            ProbeKind::FastConv => {
                let ok = fast_convergence_probe(f, &p, a.r, range);
                if self.jsonl() {
                    writeln!(out, "{}", json!({ "fast_convergence": ok }))?;
                } else {
                    writeln!(out, "fast-convergence {}", if ok { "holds" } else { "fails" })?;
                }
            }
            ProbeKind::Logistic => {
                let r = logistic_probe(f, &p, range, a.r as i32);
                let tail = r.tail_start.map_or("none".to_string(), |n| n.to_string());
                if self.jsonl() {
                    let line = json!({ "case": format!("{:?}", r.case).to_lowercase(), "limit": r.limit, "tail_start": r.tail_start });
                    writeln!(out, "{line}")?;
                } else {
                    writeln!(out, "case {:?} limit {} tail from {tail}", r.case, r.limit)?;
                }
            }
        }
        Ok(0)
    }

    fn primes(&self, a: &PrimesArgs, out: &mut dyn Write) -> Result<i32, CliError> {
        let limit = a.limit.or(if a.supply_max.is_none() { Some(100) } else { None });
        if let Some(limit) = limit {
            let table = prime_table(limit)?;
            if self.jsonl() {
                writeln!(out, "{}", json!({ "limit": limit, "count": table.len(), "largest": table.last() }))?;
            } else {
                writeln!(out, "primes up to {limit}: {}", table.len())?;
                if table.len() <= 100 {
                    let words: Vec<String> = table.iter().map(u64::to_string).collect();
                    writeln!(out, "{}", words.join(" "))?;
                }
            }
        }
        if let Some(max) = a.supply_max {
            let threshold = prime_supply_threshold(max)?;
            let mut holds = true;
            for n in threshold..=max {
                holds &= check_prime_supply(n)?;
            }
            if self.jsonl() {
                writeln!(out, "{}", json!({ "supply_threshold": threshold, "checked_to": max, "holds": holds }))?;
            } else {
                writeln!(out, "supply threshold {threshold}, holds up to {max}: {holds}")?;
            }
            return Ok(if holds { 0 } else { 1 });
        }
        Ok(0)
    }

    fn hashdemo(&self, a: &HashArgs, out: &mut dyn Write) -> Result<i32, CliError> {
        if a.bits == 0 || a.bits > 64 || a.k == 0 || a.size < 2 {
            return Err(usage("need 1 <= bits <= 64, k >= 1 and size >= 2"));
        }
        let needed = a.k * a.bits * (a.size as u64).pow(2);
        let primes = first_primes(needed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let bound = Q::new(1.into(), (a.k as i64).into());
        let mut worst = rational::zero();
        for i in 0..a.samples {
            let set: Vec<BigUint> = (0..a.size)
                .map(|_| {
                    let x: u64 = rng.gen();
                    BigUint::from(if a.bits == 64 { x } else { x & ((1u64 << a.bits) - 1) })
                })
                .collect();
            debug_assert!(hash_hypothesis_holds(&set, a.bits, a.k, &primes));
            let rate = hash_collision_rate(&set, &primes);
            match self.format {
                OutputFormat::Jsonl => writeln!(out, "{}", json!({ "sample": i, "rate": rational::format(&rate) }))?,
                _ => writeln!(out, "sample {i} collision rate {}", rational::format(&rate))?,
            }
            if rate > worst {
                worst = rate;
            }
        }
        let ok = worst < bound;
        if !self.jsonl() {
            writeln!(out, "primes {} worst {} bound {} {}", primes.len(), rational::format(&worst), rational::format(&bound), if ok { "pass" } else { "fail" })?;
        }
        Ok(if ok { 0 } else { 1 })
    }
}

/// The first `count` primes.
pub fn first_primes(count: u64) -> Result<Vec<u64>, CliError> {
    let mut limit = 64u64;
    loop {
        let mut t = prime_table(limit)?;
        if t.len() as u64 >= count {
            t.truncate(count as usize);
            return Ok(t);
        }
        limit *= 2;
    }
}
