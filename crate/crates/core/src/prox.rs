//! Resolvents of maximal monotone operators and cocoercive smooth maps.

use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{estimate_spectral_norm_sq, LinalgError, LinearMap, Vector, SPECTRAL_SAFETY_FACTOR};

/// Sweep budget and tolerance for the power method behind step-size constants.
pub const POWER_SWEEPS: usize = 500;
pub const POWER_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProxError {
    #[error("threshold must be nonnegative, got {0}")]
    NegativeThreshold(f64),
    #[error("step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("invalid SCAD parameters: xi = {xi}, c = {c} (need xi > 0, c > 2)")]
    ScadParams { xi: f64, c: f64 },
    #[error("box lower bound exceeds upper bound at coordinate {0}")]
    InvertedBox(usize),
    #[error("projection direction must be nonzero")]
    ZeroDirection,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, ProxError>;

/// Resolvent `J_{step A} = (I + step A)^{-1}` of a maximal monotone `A`.
pub trait ProxMap: Send + Sync {
    fn label(&self) -> &str;
    fn resolve(&self, v: &Vector, step: f64) -> Result<Vector>;
}

/// Single-valued `eta`-cocoercive map.
pub trait SmoothMap: Send + Sync {
    fn label(&self) -> &str;
    fn grad(&self, v: &Vector) -> Vector;
    /// Cocoercivity constant; `+inf` for the zero map.
    fn eta(&self) -> f64;
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(ProxError::NonPositiveStep(step))
    }
}

/// Soft thresholding: `sign(v_i) max(|v_i| - tau, 0)`.
pub fn prox_l1(v: &Vector, tau: f64) -> Result<Vector> {
    if !(tau >= 0.0) {
        return Err(ProxError::NegativeThreshold(tau));
    }
    Ok(v.map(|x| soft_threshold(x, tau)))
}

#[inline]
fn soft_threshold(x: f64, tau: f64) -> f64 {
    let m = x.abs() - tau;
    if m > 0.0 {
        m.copysign(x)
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScadParams {
    /// Knot `xi > 0`.
    pub xi: f64,
    /// Shape `c > 2`.
    pub c: f64,
}

impl ScadParams {
    pub fn new(xi: f64, c: f64) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite() && c > 2.0 && c.is_finite()) {
            return Err(ProxError::ScadParams { xi, c });
        }
        Ok(Self { xi, c })
    }
}

impl Default for ScadParams {
    fn default() -> Self {
        Self { xi: 0.1, c: 3.7 }
    }
}

/// The SCAD quadratic-spline penalty `q_xi(omega)` for `omega >= 0`.
pub fn scad_penalty(omega: f64, p: ScadParams) -> f64 {
    let ScadParams { xi, c } = p;
    if omega <= xi {
        xi * omega
    } else if omega <= c * xi {
        (-omega * omega + 2.0 * c * xi * omega - xi * xi) / (2.0 * (c - 1.0))
    } else {
        (c + 1.0) * xi * xi / 2.0
    }
}

/// Coordinatewise minimizer of
/// `q_xi(|u|) + u^2 / (2(c-1)) + (u - v_i)^2 / (2 gamma)`.
///
/// With `a = 1/(c-1)` the map `u -> q_xi(u) + a u^2 / 2` has the continuous
/// nondecreasing derivative `xi + a u` on `[0, xi]`, `a c xi` on `[xi, c xi]`
/// and `a u` beyond, so the optimality condition `|v| = u + gamma * phi'(u)`
/// inverts piecewise-linearly with breakpoints at `gamma xi`,
/// `xi + gamma a c xi` and `c xi (1 + gamma a)`.
pub fn prox_scad_composite(v: &Vector, gamma: f64, p: ScadParams) -> Result<Vector> {
    check_step(gamma)?;
    let p = ScadParams::new(p.xi, p.c)?;
    Ok(v.map(|x| scad_composite_scalar(x, gamma, p)))
}

fn scad_composite_scalar(v: f64, gamma: f64, p: ScadParams) -> f64 {
    let ScadParams { xi, c } = p;
    let a = 1.0 / (c - 1.0);
    let mag = v.abs();
    let u = if mag <= gamma * xi {
        0.0
    } else if mag <= xi + gamma * a * c * xi {
        (mag - gamma * xi) / (1.0 + gamma * a)
    } else if mag <= c * xi * (1.0 + gamma * a) {
        mag - gamma * a * c * xi
    } else {
        mag / (1.0 + gamma * a)
    };
    u.copysign(v)
}

/// Euclidean projection onto `[lo, hi]`.
pub fn project_box(v: &Vector, lo: &Vector, hi: &Vector) -> Result<Vector> {
    check_box(lo, hi)?;
    if v.dim() != lo.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: lo.dim(),
            found: v.dim(),
        }
        .into());
    }
    Ok(Vector::from_fn(v.dim(), |i| v[i].clamp(lo[i], hi[i])))
}

fn check_box(lo: &Vector, hi: &Vector) -> Result<()> {
    if lo.dim() != hi.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: lo.dim(),
            found: hi.dim(),
        }
        .into());
    }
    if let Some(i) = (0..lo.dim()).find(|&i| lo[i] > hi[i]) {
        return Err(ProxError::InvertedBox(i));
    }
    Ok(())
}

/// Orthogonal projection onto `span{direction}`.
pub fn project_line(v: &Vector, direction: &Vector) -> Result<Vector> {
    let dd = direction.norm_sq();
    if dd == 0.0 {
        return Err(ProxError::ZeroDirection);
    }
    let vd = crate::linalg::dot(v, direction)?;
    Ok(direction.scaled(vd / dd))
}

/// Resolvent of the zero operator (the identity).
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroResolvent;

impl ProxMap for ZeroResolvent {
    fn label(&self) -> &str {
        "zero"
    }

    fn resolve(&self, v: &Vector, step: f64) -> Result<Vector> {
        check_step(step)?;
        Ok(v.clone())
    }
}

/// Resolvent of `weight * d||.||_1`.
#[derive(Clone, Copy, Debug)]
pub struct L1Prox {
    pub weight: f64,
}

impl L1Prox {
    pub fn new(weight: f64) -> Result<Self> {
        if !(weight >= 0.0) {
            return Err(ProxError::NegativeThreshold(weight));
        }
        Ok(Self { weight })
    }
}

impl ProxMap for L1Prox {
    fn label(&self) -> &str {
        "l1"
    }

    fn resolve(&self, v: &Vector, step: f64) -> Result<Vector> {
        check_step(step)?;
        prox_l1(v, step * self.weight)
    }
}

/// Resolvent of the convexified SCAD term `sum q_xi(|u_k|) + ||u||^2 / (2(c-1))`.
#[derive(Clone, Copy, Debug)]
pub struct ScadProx {
    pub params: ScadParams,
}

impl ProxMap for ScadProx {
    fn label(&self) -> &str {
        "scad"
    }

    fn resolve(&self, v: &Vector, step: f64) -> Result<Vector> {
        prox_scad_composite(v, step, self.params)
    }
}

/// Normal-cone resolvent of a box. Independent of the step.
#[derive(Clone, Debug)]
pub struct BoxProjection {
    lo: Vector,
    hi: Vector,
}

impl BoxProjection {
    pub fn new(lo: Vector, hi: Vector) -> Result<Self> {
        check_box(&lo, &hi)?;
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> &Vector {
        &self.lo
    }

    pub fn hi(&self) -> &Vector {
        &self.hi
    }
}

impl ProxMap for BoxProjection {
    fn label(&self) -> &str {
        "box"
    }

    fn resolve(&self, v: &Vector, step: f64) -> Result<Vector> {
        check_step(step)?;
        project_box(v, &self.lo, &self.hi)
    }
}

/// Projection onto a line through the origin. Independent of the step.
#[derive(Clone, Debug)]
pub struct LineProjection {
    direction: Vector,
}

impl LineProjection {
    pub fn new(direction: Vector) -> Result<Self> {
        if direction.norm_sq() == 0.0 {
            return Err(ProxError::ZeroDirection);
        }
        Ok(Self { direction })
    }

    pub fn direction(&self) -> &Vector {
        &self.direction
    }
}

impl ProxMap for LineProjection {
    fn label(&self) -> &str {
        "line"
    }

    fn resolve(&self, v: &Vector, step: f64) -> Result<Vector> {
        check_step(step)?;
        project_line(v, &self.direction)
    }
}

/// The zero map, cocoercive for every constant.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroSmooth;

impl SmoothMap for ZeroSmooth {
    fn label(&self) -> &str {
        "zero"
    }

    fn grad(&self, v: &Vector) -> Vector {
        Vector::zeros(v.dim())
    }

    fn eta(&self) -> f64 {
        f64::INFINITY
    }
}

/// `u -> D^*(D u - b)` with `eta = 1 / ||D^* D||`.
#[derive(Clone)]
pub struct LeastSquaresGrad {
    op: Arc<dyn LinearMap>,
    b: Vector,
    norm_sq: f64,
}

pub fn least_squares_grad(op: Arc<dyn LinearMap>, b: Vector) -> Result<LeastSquaresGrad> {
    op.check_output(&b)?;
    let est = estimate_spectral_norm_sq(op.as_ref(), POWER_SWEEPS, POWER_TOL)?;
    Ok(LeastSquaresGrad {
        op,
        b,
        norm_sq: est.value,
    })
}

impl LeastSquaresGrad {
    /// Estimated `||D^* D||`.
    pub fn operator_norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `1 / (1.01 ||D^* D||)`, the constant step sizes are derived from.
    pub fn step_eta(&self) -> f64 {
        1.0 / (SPECTRAL_SAFETY_FACTOR * self.norm_sq)
    }

    pub fn operator(&self) -> &Arc<dyn LinearMap> {
        &self.op
    }

    pub fn rhs(&self) -> &Vector {
        &self.b
    }
}

impl SmoothMap for LeastSquaresGrad {
    fn label(&self) -> &str {
        "least_squares"
    }

    fn grad(&self, v: &Vector) -> Vector {
        let r = &self.op.apply(v) - &self.b;
        self.op.apply_adjoint(&r)
    }

    fn eta(&self) -> f64 {
        if self.norm_sq == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.norm_sq
        }
    }
}

/// `u -> D^*(D u - b) - u / (c - 1)`, the explicit part of the SCAD splitting.
///
/// Lipschitz bound `L = max{||D^* D||, 1/(c-1)}` and `eta = 1 / L` unless overridden.
#[derive(Clone)]
pub struct ScadSmoothGrad {
    op: Arc<dyn LinearMap>,
    b: Vector,
    params: ScadParams,
    norm_sq: f64,
    eta_override: Option<f64>,
}

pub fn scad_smooth_grad(op: Arc<dyn LinearMap>, b: Vector, p: ScadParams) -> Result<ScadSmoothGrad> {
    let p = ScadParams::new(p.xi, p.c)?;
    op.check_output(&b)?;
    let est = estimate_spectral_norm_sq(op.as_ref(), POWER_SWEEPS, POWER_TOL)?;
    Ok(ScadSmoothGrad {
        op,
        b,
        params: p,
        norm_sq: est.value,
        eta_override: None,
    })
}

impl ScadSmoothGrad {
    pub fn lipschitz(&self) -> f64 {
        self.norm_sq.max(1.0 / (self.params.c - 1.0))
    }

    pub fn operator_norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn params(&self) -> ScadParams {
        self.params
    }

    /// Replace the cocoercivity constant reported by [`SmoothMap::eta`].
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta_override = Some(eta);
        self
    }

    pub fn step_eta(&self) -> f64 {
        1.0 / (SPECTRAL_SAFETY_FACTOR * self.lipschitz())
    }
}

impl SmoothMap for ScadSmoothGrad {
    fn label(&self) -> &str {
        "scad_smooth"
    }

    fn grad(&self, v: &Vector) -> Vector {
        let r = &self.op.apply(v) - &self.b;
        let mut g = self.op.apply_adjoint(&r);
        g.axpy(-1.0 / (self.params.c - 1.0), v);
        g
    }

    fn eta(&self) -> f64 {
        self.eta_override.unwrap_or(1.0 / self.lipschitz())
    }
}
