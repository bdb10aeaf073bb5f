//! Formula translations and the brute-force oracles used to check them.

pub mod equiv;
pub mod gc;
pub mod modal;
pub mod primes;

use alloc::string::String;
use thiserror::Error;

use super::bound::BoundError;
use super::eval::EvalError;
use crate::graph::GraphError;

pub use equiv::{equivalence_check, Counterexample, EquivalenceJob, EquivalenceOutcome, GraphSource};
pub use gc::gc_to_mc;
pub use modal::{
    check_claims, first_good_prime, good_prime_check, guarded_to_modal, hash_codes, inequality_threshold,
    is_good_prime, render_at_prime, residue, DistinctCodes, ClaimReport, SiteReport, TranslationResult, XFormula, DEFAULT_CODE_BIT_CAP,
};
pub use primes::{
    check_prime_supply, hash_collision_rate, hash_hypothesis_holds, prime_supply_threshold, prime_table,
    PRIME_TABLE_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("input is not in {0}")]
    NotInFragment(&'static str),
    #[error("input has {0} free vertex variables; at most one is allowed")]
    TooManyFreeVertexVariables(usize),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    UnsupportedShape(String),
    #[error("{what} {value} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, value: u64, cap: u64 },
    #[error("no order threshold for q = {q}, a = {a}, c = {c}")]
    NoThreshold { q: u64, a: u32, c: u32 },
}
