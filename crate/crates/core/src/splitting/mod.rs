//! Two-step inertial Krasnoselskii-Mann iteration on the Davis-Yin operator,
//! the parameter-condition validator, and the baseline schemes it is compared
//! against.

mod engine;
mod feasibility;
mod params;
mod run;

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::prox::ProxError;

pub use engine::{
    davis_yin_t, extrapolate, step_davis_yin, step_dr, step_fb_two_step, step_fista_like, step_inertial_dr,
    step_moudafi_oliny, step_relaxed_fb, step_two_step_dy, DavisYinEval, DavisYinOperator, EngineState, StepInfo,
};
pub use feasibility::{dr_feasibility_operator, DrFeasibility, FeasibilityRun};
pub use params::{averaging_constant, validate, ConditionReport, Inequality, InertialParams};
pub use run::{
    run, Algorithm, AlgorithmKind, FistaMomentum, LedgerSetup, Observer, RunOptions, RunRecord, Schedule,
    SplittingProblem, StopRule, Termination, ALGORITHM_NAMES, DENSE_LOG_LIMIT, DIVERGENCE_NORM, LOG_STRIDE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplittingError {
    #[error("structural parameter violation: {0}")]
    Structural(String),
    #[error("unknown algorithm {0:?} (valid: twostep, dy, fb2, mo, rfb, fista, idr, dr)")]
    UnknownAlgorithm(String),
    #[error("{algorithm} is not applicable: {reason}")]
    NotApplicable {
        algorithm: &'static str,
        reason: &'static str,
    },
    #[error(transparent)]
    Prox(#[from] ProxError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
