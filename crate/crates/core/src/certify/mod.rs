//! Exact invariants, bound inequalities in `x = n^{-1/2}`, positivity
//! certificates and full theorem verification.

pub mod forms;
pub mod invariants;
pub mod poly;
pub mod positivity;
pub mod theorem;

pub use forms::{BoundSet, Condition, Expr, IneqId, IneqPoly, Perturbation, Term};
pub use invariants::{invariant_a, invariant_b, invariant_i, laguerre, window};
pub use poly::RingPoly;
pub use positivity::{
    certify_at, certify_ineq, certify_positive, find_crossover, n_of_x, Certificate, CertifyOptions, Crossover,
    IneqCertificate, Status,
};
pub use theorem::{
    exact_holds, exact_verify, literal_check, sharpness_witness, theorem_crossover, verify_theorem, ExactResult,
    Reading, ReadingCheck, TheoremId, TheoremSpec, Verdict, VerificationReport, VerifyOptions,
};

use crate::budget::BudgetError;
use crate::exact_q::QError;
use crate::numerics::NumericsError;

#[derive(Debug, thiserror::Error)]
pub enum CertifyError {
    #[error("unknown identifier '{0}'")]
    UnknownId(String),
    #[error("{0} is not homogeneous in the bound factors")]
    NotHomogeneous(&'static str),
    #[error("{id}: no certificate up to n = {n_hi} (last status {status:?})")]
    NoCrossover {
        id: &'static str,
        n_hi: u64,
        status: Status,
    },
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error(transparent)]
    Table(#[from] QError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
