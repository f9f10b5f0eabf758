use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use crate::diagnostics::{snr_db, IterationRecord, LedgerCoefficients};
use crate::linalg::Vector;
use crate::prox::{ProxMap, SmoothMap, ZeroResolvent, ZeroSmooth};

use super::engine::*;
use super::params::InertialParams;
use super::SplittingError;

/// Iterates whose norm exceeds this are treated as divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;
/// Every iteration is logged up to this count, then every [`LOG_STRIDE`]-th.
pub const DENSE_LOG_LIMIT: usize = 10_000;
pub const LOG_STRIDE: usize = 10;

/// Inertia coefficient as a function of the iteration index `n >= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    Constant(f64),
    /// `1 / (n + 1)`
    Harmonic,
    /// `n / (scale (n + 1))`
    Ramp { scale: f64 },
}

impl Schedule {
    pub fn at(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            Schedule::Constant(c) => c,
            Schedule::Harmonic => 1.0 / (n + 1.0),
            Schedule::Ramp { scale } => n / (scale * (n + 1.0)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FistaMomentum {
    /// Use the schedule value directly as the extrapolation weight.
    Schedule(Schedule),
    /// `t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2`, weight `(t_k - 1) / t_{k+1}`.
    Classical,
}

/// The schemes [`run`] can drive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Algorithm {
    /// Two-step inertial Davis-Yin.
    TwoStep(InertialParams),
    /// Plain Davis-Yin with relaxation `lambda`.
    DavisYin { gamma: f64, lambda: f64 },
    /// Two-step inertial forward-backward (`B = 0`).
    ForwardBackwardTwoStep(InertialParams),
    /// Inertial forward-backward with the forward step at `x_n`.
    MoudafiOliny { gamma: f64, inertia: Schedule },
    /// Relaxed forward-backward.
    RelaxedFb { gamma: f64, lambda: f64 },
    /// Inertial forward-backward with the forward step at the extrapolated point.
    Fista { gamma: f64, momentum: FistaMomentum },
    /// Inertial Douglas-Rachford (`C = 0`).
    InertialDr { gamma: f64, theta: f64, lambda: f64 },
    /// Douglas-Rachford (`C = 0`).
    Dr { gamma: f64, lambda: f64 },
}

/// Short names accepted on the command line, in canonical order.
pub const ALGORITHM_NAMES: [&str; 8] = ["twostep", "dy", "fb2", "mo", "rfb", "fista", "idr", "dr"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmKind {
    TwoStep,
    DavisYin,
    Fb2,
    MoudafiOliny,
    RelaxedFb,
    Fista,
    InertialDr,
    Dr,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 8] = [
        AlgorithmKind::TwoStep,
        AlgorithmKind::DavisYin,
        AlgorithmKind::Fb2,
        AlgorithmKind::MoudafiOliny,
        AlgorithmKind::RelaxedFb,
        AlgorithmKind::Fista,
        AlgorithmKind::InertialDr,
        AlgorithmKind::Dr,
    ];

    pub fn name(self) -> &'static str {
        ALGORITHM_NAMES[self as usize]
    }

    /// Schemes built on a forward-backward step cannot use a nonzero `B`.
    pub fn needs_zero_b(self) -> bool {
        matches!(
            self,
            AlgorithmKind::Fb2 | AlgorithmKind::MoudafiOliny | AlgorithmKind::RelaxedFb | AlgorithmKind::Fista
        )
    }

    /// Douglas-Rachford variants have no forward step.
    pub fn needs_zero_c(self) -> bool {
        matches!(self, AlgorithmKind::InertialDr | AlgorithmKind::Dr)
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = SplittingError;
    fn from_str(s: &str) -> Result<Self, SplittingError> {
        ALGORITHM_NAMES
            .iter()
            .position(|n| *n == s)
            .map(|i| AlgorithmKind::ALL[i])
            .ok_or_else(|| SplittingError::UnknownAlgorithm(s.to_string()))
    }
}

impl Algorithm {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Algorithm::TwoStep(_) => AlgorithmKind::TwoStep,
            Algorithm::DavisYin { .. } => AlgorithmKind::DavisYin,
            Algorithm::ForwardBackwardTwoStep(_) => AlgorithmKind::Fb2,
            Algorithm::MoudafiOliny { .. } => AlgorithmKind::MoudafiOliny,
            Algorithm::RelaxedFb { .. } => AlgorithmKind::RelaxedFb,
            Algorithm::Fista { .. } => AlgorithmKind::Fista,
            Algorithm::InertialDr { .. } => AlgorithmKind::InertialDr,
            Algorithm::Dr { .. } => AlgorithmKind::Dr,
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind().name()
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            Algorithm::TwoStep(p) | Algorithm::ForwardBackwardTwoStep(p) => p.gamma,
            Algorithm::DavisYin { gamma, .. }
            | Algorithm::MoudafiOliny { gamma, .. }
            | Algorithm::RelaxedFb { gamma, .. }
            | Algorithm::Fista { gamma, .. }
            | Algorithm::InertialDr { gamma, .. }
            | Algorithm::Dr { gamma, .. } => gamma,
        }
    }

    /// Inertial parameters, for the schemes that carry a full set.
    pub fn inertial_params(&self) -> Option<InertialParams> {
        match *self {
            Algorithm::TwoStep(p) | Algorithm::ForwardBackwardTwoStep(p) => Some(p),
            _ => None,
        }
    }
}

/// `0 in A x + B x + C x`; a missing `B` or `C` is the zero operator.
#[derive(Clone)]
pub struct SplittingProblem {
    pub a: Arc<dyn ProxMap>,
    pub b: Option<Arc<dyn ProxMap>>,
    pub c: Option<Arc<dyn SmoothMap>>,
}

impl SplittingProblem {
    pub fn new(a: Arc<dyn ProxMap>) -> Self {
        Self { a, b: None, c: None }
    }

    pub fn with_b(mut self, b: Arc<dyn ProxMap>) -> Self {
        self.b = Some(b);
        self
    }

    pub fn with_c(mut self, c: Arc<dyn SmoothMap>) -> Self {
        self.c = Some(c);
        self
    }

    pub fn b_or_zero(&self) -> Arc<dyn ProxMap> {
        self.b.clone().unwrap_or_else(|| Arc::new(ZeroResolvent))
    }

    pub fn c_or_zero(&self) -> Arc<dyn SmoothMap> {
        self.c.clone().unwrap_or_else(|| Arc::new(ZeroSmooth))
    }

    pub fn eta(&self) -> f64 {
        self.c.as_ref().map_or(f64::INFINITY, |c| c.eta())
    }

    pub fn davis_yin(&self, gamma: f64) -> Result<DavisYinOperator, SplittingError> {
        DavisYinOperator::new(self.a.clone(), self.b_or_zero(), self.c_or_zero(), gamma)
    }

    pub fn check_applicable(&self, kind: AlgorithmKind) -> Result<(), SplittingError> {
        if kind.needs_zero_b() && self.b.is_some() {
            return Err(SplittingError::NotApplicable {
                algorithm: kind.name(),
                reason: "problem has a nonzero B operator",
            });
        }
        if kind.needs_zero_c() && self.c.is_some() {
            return Err(SplittingError::NotApplicable {
                algorithm: kind.name(),
                reason: "problem has a nonzero smooth operator C",
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopRule {
    /// Stop once `||x_{n+1} - x_n|| <= eps`.
    pub eps: f64,
    pub max_iters: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            max_iters: 10_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Tolerance,
    MaxIters,
    Divergence,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Tolerance => "tolerance",
            Termination::MaxIters => "max_iters",
            Termination::Divergence => "divergence",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reference point for the Lyapunov columns.
#[derive(Clone, Debug)]
pub struct LedgerSetup {
    /// Fixed point of the driving operator (the limit of `x_n`).
    pub x_star: Vector,
    pub params: InertialParams,
    /// `C(J_{gamma B} x_star)`.
    pub c_star: Vector,
}

impl LedgerSetup {
    pub fn new(problem: &SplittingProblem, x_star: Vector, params: InertialParams) -> Result<Self, SplittingError> {
        let solution = problem.b_or_zero().resolve(&x_star, params.gamma)?;
        let c_star = problem.c_or_zero().grad(&solution);
        Ok(Self {
            x_star,
            params,
            c_star,
        })
    }
}

pub type Observer<'a> = Box<dyn FnMut(&EngineState, &StepInfo) + 'a>;

#[derive(Default)]
pub struct RunOptions<'a> {
    pub objective: Option<Box<dyn Fn(&Vector) -> f64 + 'a>>,
    /// Ground truth for the SNR column.
    pub snr_reference: Option<Vector>,
    pub ledger: Option<LedgerSetup>,
    /// Called after every step with the new state.
    pub observer: Option<Observer<'a>>,
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub algorithm: &'static str,
    pub records: Vec<IterationRecord>,
    /// Steps taken.
    pub iterations: usize,
    pub termination: Termination,
    pub elapsed_s: f64,
    pub final_state: EngineState,
}

impl RunRecord {
    pub fn final_point(&self) -> &Vector {
        &self.final_state.x_cur
    }

    pub fn last_record(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

/// Iterate `algorithm` on `problem` from `init` until the stop rule fires.
///
/// Deterministic for fixed inputs. A non-finite or exploding iterate aborts
/// with [`Termination::Divergence`]; the offending step is not logged.
pub fn run(
    algorithm: &Algorithm,
    problem: &SplittingProblem,
    init: EngineState,
    stop: StopRule,
    mut opts: RunOptions<'_>,
) -> Result<RunRecord, SplittingError> {
    let kind = algorithm.kind();
    problem.check_applicable(kind)?;
    if let Some(p) = algorithm.inertial_params() {
        p.check_structure()?;
    }
    let start = Instant::now();
    let dy = match algorithm {
        Algorithm::TwoStep(p) => Some(problem.davis_yin(p.gamma)?),
        Algorithm::DavisYin { gamma, .. } => Some(problem.davis_yin(*gamma)?),
        _ => None,
    };
    let a = problem.a.clone();
    let b = problem.b_or_zero();
    let c = problem.c_or_zero();
    let ledger = opts.ledger.as_ref().map(|l| (LedgerCoefficients::new(&l.params), l));

    let mut state = init;
    let mut records = Vec::new();
    let mut termination = Termination::MaxIters;
    let mut iterations = 0;
    let mut fista_t = 1.0f64;

    for k in 1..=stop.max_iters {
        let n = state.n;
        let prev = state.clone();
        let (next, info) = match *algorithm {
            Algorithm::TwoStep(ref p) => step_two_step_dy(state, dy.as_ref().unwrap(), p)?,
            Algorithm::DavisYin { lambda, .. } => step_davis_yin(state, dy.as_ref().unwrap(), lambda)?,
            Algorithm::ForwardBackwardTwoStep(ref p) => step_fb_two_step(state, a.as_ref(), c.as_ref(), p)?,
            Algorithm::MoudafiOliny { gamma, inertia } => {
                step_moudafi_oliny(state, a.as_ref(), c.as_ref(), gamma, inertia.at(n))?
            }
            Algorithm::RelaxedFb { gamma, lambda } => step_relaxed_fb(state, a.as_ref(), c.as_ref(), gamma, lambda)?,
            Algorithm::Fista { gamma, momentum } => {
                let weight = match momentum {
                    FistaMomentum::Schedule(s) => s.at(n),
                    FistaMomentum::Classical => {
                        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * fista_t * fista_t).sqrt());
                        let w = (fista_t - 1.0) / t_next;
                        fista_t = t_next;
                        w
                    }
                };
                step_fista_like(state, a.as_ref(), c.as_ref(), gamma, weight)?
            }
            Algorithm::InertialDr { gamma, theta, lambda } => {
                step_inertial_dr(state, a.as_ref(), b.as_ref(), gamma, theta, lambda)?
            }
            Algorithm::Dr { gamma, lambda } => step_dr(state, a.as_ref(), b.as_ref(), gamma, lambda)?,
        };

        let x = &next.x_cur;
        let norm = x.norm();
        if !x.is_finite() || !info.fp_residual.is_finite() || norm > DIVERGENCE_NORM {
            log::warn!("{}: divergence at step {k} (||x|| = {norm:e})", algorithm.name());
            termination = Termination::Divergence;
            state = prev;
            break;
        }
        iterations = k;
        let step_diff = x.dist(&next.x_prev1);
        let done = step_diff <= stop.eps;
        let last = done || k == stop.max_iters;

        if k <= DENSE_LOG_LIMIT || k % LOG_STRIDE == 0 || last {
            let (gamma_n, gamma_bar_n, c_map_gap_sq) = match &ledger {
                Some((coef, setup)) => (
                    Some(coef.gamma(x, &next.x_prev1, &next.x_prev2, &setup.x_star)),
                    Some(coef.gamma_bar(x, &next.x_prev1, &next.x_prev2, &setup.x_star)),
                    info.w.as_ref().map(|w| c.grad(w).dist(&setup.c_star).powi(2)),
                ),
                None => (None, None, None),
            };
            let record = IterationRecord {
                n: next.n,
                step_diff,
                fp_residual: info.fp_residual,
                objective: opts.objective.as_ref().map(|f| f(x)),
                snr_db: opts.snr_reference.as_ref().and_then(|r| snr_db(r, x).ok()),
                c_map_gap_sq,
                gamma_n,
                gamma_bar_n,
                elapsed_s: start.elapsed().as_secs_f64(),
            };
            log::debug!("{} n={} step_diff={:e} fp={:e}", algorithm.name(), record.n, step_diff, info.fp_residual);
            records.push(record);
        }
        if let Some(obs) = opts.observer.as_mut() {
            obs(&next, &info);
        }
        state = next;
        if done {
            termination = Termination::Tolerance;
            break;
        }
    }

    Ok(RunRecord {
        algorithm: algorithm.name(),
        records,
        iterations,
        termination,
        elapsed_s: start.elapsed().as_secs_f64(),
        final_state: state,
    })
}
