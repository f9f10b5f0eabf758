use std::sync::Arc;

use crate::linalg::{LinalgError, Vector};
use crate::prox::{ProxMap, SmoothMap};

use super::params::InertialParams;
use super::SplittingError;

type Result<T> = std::result::Result<T, SplittingError>;

/// The last three iterates `x_{n-2}, x_{n-1}, x_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineState {
    pub x_prev2: Vector,
    pub x_prev1: Vector,
    pub x_cur: Vector,
    /// Index of `x_cur`; starts at 1 for the initial triple `x_{-1}, x_0, x_1`.
    pub n: usize,
}

impl EngineState {
    pub fn new(x_prev2: Vector, x_prev1: Vector, x_cur: Vector) -> Result<Self> {
        for other in [&x_prev2, &x_prev1] {
            if other.dim() != x_cur.dim() {
                return Err(LinalgError::DimensionMismatch {
                    expected: x_cur.dim(),
                    found: other.dim(),
                }
                .into());
            }
        }
        Ok(Self {
            x_prev2,
            x_prev1,
            x_cur,
            n: 1,
        })
    }

    /// All three history slots set to `x`.
    pub fn constant(x: Vector) -> Self {
        Self {
            x_prev2: x.clone(),
            x_prev1: x.clone(),
            x_cur: x,
            n: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.x_cur.dim()
    }

    /// Push `next` as the newest iterate.
    pub fn advance(self, next: Vector) -> Self {
        Self {
            x_prev2: self.x_prev1,
            x_prev1: self.x_cur,
            x_cur: next,
            n: self.n + 1,
        }
    }
}

/// `y = x + theta (x - x1) + delta (x1 - x2)`.
pub fn extrapolate(x: &Vector, x1: &Vector, x2: &Vector, theta: f64, delta: f64) -> Result<Vector> {
    for other in [x1, x2] {
        if other.dim() != x.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: x.dim(),
                found: other.dim(),
            }
            .into());
        }
    }
    Ok(extrapolate_raw(x, x1, x2, theta, delta))
}

fn extrapolate_raw(x: &Vector, x1: &Vector, x2: &Vector, theta: f64, delta: f64) -> Vector {
    let (a, b, c) = (x.as_slice(), x1.as_slice(), x2.as_slice());
    Vector::from_vec(
        (0..a.len())
            .map(|i| a[i] + theta * (a[i] - b[i]) + delta * (b[i] - c[i]))
            .collect(),
    )
}

/// `T = J_{gamma A} o (2 J_{gamma B} - I - gamma C o J_{gamma B}) + I - J_{gamma B}`.
#[derive(Clone)]
pub struct DavisYinOperator {
    resolvent_b: Arc<dyn ProxMap>,
    resolvent_a: Arc<dyn ProxMap>,
    smooth_c: Arc<dyn SmoothMap>,
    gamma: f64,
}

/// One evaluation of [`DavisYinOperator`]: `Tz`, `w = J_{gamma B} z` and
/// `zz = J_{gamma A}(2w - z - gamma C w)`.
#[derive(Clone, Debug)]
pub struct DavisYinEval {
    pub tz: Vector,
    pub w: Vector,
    pub zz: Vector,
}

impl DavisYinOperator {
    pub fn new(
        resolvent_a: Arc<dyn ProxMap>,
        resolvent_b: Arc<dyn ProxMap>,
        smooth_c: Arc<dyn SmoothMap>,
        gamma: f64,
    ) -> Result<Self> {
        let eta = smooth_c.eta();
        if !(gamma > 0.0 && gamma < 2.0 * eta) {
            return Err(SplittingError::Structural(format!(
                "gamma = {gamma} outside (0, 2 eta) with eta = {eta}"
            )));
        }
        Ok(Self {
            resolvent_b,
            resolvent_a,
            smooth_c,
            gamma,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eta(&self) -> f64 {
        self.smooth_c.eta()
    }

    pub fn smooth(&self) -> &Arc<dyn SmoothMap> {
        &self.smooth_c
    }

    pub fn resolvent_b(&self) -> &Arc<dyn ProxMap> {
        &self.resolvent_b
    }

    pub fn eval(&self, z: &Vector) -> Result<DavisYinEval> {
        let w = self.resolvent_b.resolve(z, self.gamma)?;
        let cw = self.smooth_c.grad(&w);
        let arg = Vector::from_fn(z.dim(), |i| 2.0 * w[i] - z[i] - self.gamma * cw[i]);
        let zz = self.resolvent_a.resolve(&arg, self.gamma)?;
        let tz = Vector::from_fn(z.dim(), |i| z[i] - w[i] + zz[i]);
        Ok(DavisYinEval { tz, w, zz })
    }
}

pub fn davis_yin_t(op: &DavisYinOperator, z: &Vector) -> Result<DavisYinEval> {
    op.eval(z)
}

/// Quantities produced by one step of any scheme.
#[derive(Clone, Debug)]
pub struct StepInfo {
    /// Anchor point of the step (the extrapolated point, or `x_n`).
    pub y: Vector,
    /// Point at which the smooth operator was evaluated, when there is one.
    pub w: Option<Vector>,
    /// Output of the backward step on `A`.
    pub z: Vector,
    /// `||y - T y||` for the operator `T` driving the scheme.
    pub fp_residual: f64,
}

/// One step of the two-step inertial Davis-Yin scheme:
/// `y = x_n + theta (x_n - x_{n-1}) + delta (x_{n-1} - x_{n-2})`,
/// `x_{n+1} = y - rho w + rho z`.
pub fn step_two_step_dy(
    state: EngineState,
    op: &DavisYinOperator,
    params: &InertialParams,
) -> Result<(EngineState, StepInfo)> {
    let y = extrapolate_raw(&state.x_cur, &state.x_prev1, &state.x_prev2, params.theta, params.delta);
    let DavisYinEval { tz, w, zz } = op.eval(&y)?;
    let rho = params.rho;
    let next = Vector::from_fn(y.dim(), |i| y[i] - rho * w[i] + rho * zz[i]);
    let fp_residual = y.dist(&tz);
    Ok((
        state.advance(next),
        StepInfo {
            y,
            w: Some(w),
            z: zz,
            fp_residual,
        },
    ))
}

/// Plain Davis-Yin: `x_{n+1} = x_n + lambda (J_A(2w - x_n - gamma C w) - w)`, `w = J_B x_n`.
pub fn step_davis_yin(state: EngineState, op: &DavisYinOperator, lambda: f64) -> Result<(EngineState, StepInfo)> {
    let x = &state.x_cur;
    let DavisYinEval { tz, w, zz } = op.eval(x)?;
    let next = Vector::from_fn(x.dim(), |i| x[i] + lambda * (zz[i] - w[i]));
    let fp_residual = x.dist(&tz);
    let y = x.clone();
    Ok((
        state.advance(next),
        StepInfo {
            y,
            w: Some(w),
            z: zz,
            fp_residual,
        },
    ))
}

/// Two-step inertial forward-backward (the scheme with `B = 0`):
/// `x_{n+1} = (1 - rho) w + rho J_{gamma A}(w - gamma C w)`.
pub fn step_fb_two_step(
    state: EngineState,
    a_prox: &dyn ProxMap,
    c: &dyn SmoothMap,
    params: &InertialParams,
) -> Result<(EngineState, StepInfo)> {
    let w = extrapolate_raw(&state.x_cur, &state.x_prev1, &state.x_prev2, params.theta, params.delta);
    let z = forward_backward(a_prox, c, &w, &w, params.gamma)?;
    let rho = params.rho;
    let next = Vector::from_fn(w.dim(), |i| (1.0 - rho) * w[i] + rho * z[i]);
    let fp_residual = w.dist(&z);
    Ok((
        state.advance(next),
        StepInfo {
            y: w.clone(),
            w: Some(w),
            z,
            fp_residual,
        },
    ))
}

/// `J_{gamma A}(base - gamma C(at))`.
fn forward_backward(a_prox: &dyn ProxMap, c: &dyn SmoothMap, base: &Vector, at: &Vector, gamma: f64) -> Result<Vector> {
    let g = c.grad(at);
    let arg = Vector::from_fn(base.dim(), |i| base[i] - gamma * g[i]);
    Ok(a_prox.resolve(&arg, gamma)?)
}

/// Inertial forward-backward with the gradient taken at `x_n`:
/// `y = x_n + theta_n (x_n - x_{n-1})`, `x_{n+1} = J_{gamma_n A}(y - gamma_n C x_n)`.
pub fn step_moudafi_oliny(
    state: EngineState,
    a_prox: &dyn ProxMap,
    c: &dyn SmoothMap,
    gamma_n: f64,
    theta_n: f64,
) -> Result<(EngineState, StepInfo)> {
    let y = extrapolate_raw(&state.x_cur, &state.x_prev1, &state.x_prev2, theta_n, 0.0);
    let next = forward_backward(a_prox, c, &y, &state.x_cur, gamma_n)?;
    let fp_residual = y.dist(&next);
    let w = state.x_cur.clone();
    Ok((
        state.advance(next.clone()),
        StepInfo {
            y,
            w: Some(w),
            z: next,
            fp_residual,
        },
    ))
}

/// Relaxed forward-backward: `x_{n+1} = (1 - lambda_n) x_n + lambda_n J_{gamma A}(x_n - gamma C x_n)`.
pub fn step_relaxed_fb(
    state: EngineState,
    a_prox: &dyn ProxMap,
    c: &dyn SmoothMap,
    gamma: f64,
    lambda_n: f64,
) -> Result<(EngineState, StepInfo)> {
    let x = state.x_cur.clone();
    let z = forward_backward(a_prox, c, &x, &x, gamma)?;
    let next = Vector::from_fn(x.dim(), |i| (1.0 - lambda_n) * x[i] + lambda_n * z[i]);
    let fp_residual = x.dist(&z);
    Ok((
        state.advance(next),
        StepInfo {
            y: x.clone(),
            w: Some(x),
            z,
            fp_residual,
        },
    ))
}

/// Inertial forward-backward evaluated at the extrapolated point:
/// `y = x_n + t_n (x_n - x_{n-1})`, `x_{n+1} = J_{gamma A}(y - gamma C y)`.
pub fn step_fista_like(
    state: EngineState,
    a_prox: &dyn ProxMap,
    c: &dyn SmoothMap,
    gamma: f64,
    t_n: f64,
) -> Result<(EngineState, StepInfo)> {
    let y = extrapolate_raw(&state.x_cur, &state.x_prev1, &state.x_prev2, t_n, 0.0);
    let next = forward_backward(a_prox, c, &y, &y, gamma)?;
    let fp_residual = y.dist(&next);
    Ok((
        state.advance(next.clone()),
        StepInfo {
            y: y.clone(),
            w: Some(y),
            z: next,
            fp_residual,
        },
    ))
}

/// Inertial Douglas-Rachford (no smooth term):
/// `y = J_{gamma B}(x_n + theta_n d)`, `z = J_{gamma A}(2y - x_n - theta_n d)`,
/// `x_{n+1} = x_n + theta_n d + lambda_n (z - y)` with `d = x_n - x_{n-1}`.
pub fn step_inertial_dr(
    state: EngineState,
    a_prox: &dyn ProxMap,
    b_prox: &dyn ProxMap,
    gamma: f64,
    theta_n: f64,
    lambda_n: f64,
) -> Result<(EngineState, StepInfo)> {
    let shifted = extrapolate_raw(&state.x_cur, &state.x_prev1, &state.x_prev2, theta_n, 0.0);
    let y = b_prox.resolve(&shifted, gamma)?;
    let reflected = Vector::from_fn(y.dim(), |i| 2.0 * y[i] - shifted[i]);
    let z = a_prox.resolve(&reflected, gamma)?;
    let next = Vector::from_fn(y.dim(), |i| shifted[i] + lambda_n * (z[i] - y[i]));
    let fp_residual = z.dist(&y);
    Ok((
        state.advance(next),
        StepInfo {
            y: shifted,
            w: None,
            z,
            fp_residual,
        },
    ))
}

/// Classical Douglas-Rachford, the `theta_n = 0` case of [`step_inertial_dr`].
pub fn step_dr(
    state: EngineState,
    a_prox: &dyn ProxMap,
    b_prox: &dyn ProxMap,
    gamma: f64,
    lambda_n: f64,
) -> Result<(EngineState, StepInfo)> {
    step_inertial_dr(state, a_prox, b_prox, gamma, 0.0, lambda_n)
}
