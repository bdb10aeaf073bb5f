//! Complete-bipartite separation toolkit.

mod poly;
mod q1;
mod recurrence;
mod sweep;

use thiserror::Error;

use crate::gnn::GnnError;

pub use poly::{
    fast_convergence_probe, is_co_nice, is_nice, logistic_probe, nice_combine, relu_target, sign_stability_probe,
    LogisticCase, LogisticProbe, NicePolynomial, Orientation, Poly2, SignProbe,
};
pub use q1::{build_q1_2gnn, q1_expected};
pub use recurrence::{
    adversarial_candidates, bipartite_side_recurrence, falsify_1gnn, random_1gnn, FalsifyVerdict, SideTrace, Violation,
};
pub use sweep::{q1_sweep_at, q1_sweep_rows, rows_to_csv, SweepRow, CSV_HEADER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    #[error("layer {0} does not aggregate with SUM")]
    NotSum(usize),
    #[error("layer {0} is 2-sided; the harness takes 1-GNNs only")]
    SideTwoLayer(usize),
    #[error("expected a scalar output, the network has dimension {0}")]
    OutputDimension(usize),
    #[error("input state has dimension {found}, the network expects {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("the polynomial is constant")]
    ConstantPolynomial,
    #[error("cannot combine nice and co-nice polynomials")]
    MixedOrientation,
    #[error(transparent)]
    Gnn(#[from] GnnError),
}
