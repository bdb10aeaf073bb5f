//! First-order logic with counting: syntax, fragments, evaluation and the
//! formula-to-formula translations.

pub mod ast;
pub mod bound;
pub mod builtins;
pub mod eval;
pub mod fragment;
pub mod parse;
pub mod print;
pub mod simple;
pub mod translate;

pub use ast::{swap_vertex_variables, Binder, CmpOp, Expr, NVar, Sort, SwapError, VVar};
pub use parse::{parse_formula, parse_formula_with, parse_term, ParseError, ParseOptions};
pub use print::print_formula;
pub use bound::{term_bound_polynomial, variable_degrees, BoundError, BoundPolynomial};
pub use fragment::{classify_fragment, FragmentReport};
pub use simple::{is_simple, to_simple_form};
pub use builtins::{is_prime, register_standard_builtins, BuiltinRegistry, DuplicateBuiltin};
pub use eval::{eval, query_set, query_set_compiled, CompiledFormula, EvalError, Evaluator, Valuation, Value};
