//! Seeded problem generators, the instance file format, and the mapping from
//! an instance to a splitting problem with default algorithm settings.
//!
//! All randomness comes from [`SeededRng`] (SplitMix64). Dense generators draw,
//! in this order: the entries of `D` row-major, the support of `u0` by partial
//! Fisher-Yates, the nonzero values of `u0`, then the noise on `b`.

mod io;

use std::sync::Arc;

use thiserror::Error;

use crate::diagnostics::{objective_lasso, objective_scad};
use crate::image::GrayImage;
use crate::linalg::{BlurMap, DenseMatrix, IdentityMap, LinalgError, LinearMap, Vector};
use crate::prox::{
    least_squares_grad, scad_smooth_grad, BoxProjection, L1Prox, LineProjection, ProxError, ScadParams, ScadProx,
};
use crate::rng::SeededRng;
use crate::splitting::{
    averaging_constant, Algorithm, AlgorithmKind, EngineState, FistaMomentum, InertialParams, Schedule,
    SplittingError, SplittingProblem,
};

pub use io::{load_instance, parse_instance, save_instance, write_instance, FORMAT_MAGIC};

pub const DEFAULT_NOISE_SIGMA: f64 = 1e-3;
pub const DEFAULT_DENSITY: f64 = 0.05;
pub const DEFAULT_LASSO_REG: f64 = 0.1;
pub const DEFAULT_DEBLUR_REG: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid dimensions {m}x{n}")]
    BadDims { m: usize, n: usize },
    #[error("density must lie in [0, 1], got {0}")]
    BadDensity(f64),
    #[error("regularization weight must be finite and nonnegative, got {0}")]
    BadReg(f64),
    #[error("noise level must be finite and nonnegative, got {0}")]
    BadNoise(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Prox(#[from] ProxError),
    #[error(transparent)]
    Splitting(#[from] SplittingError),
}

pub type Result<T> = std::result::Result<T, ProblemError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Lasso,
    Scad,
    Deblur,
    ThreeOp,
    Feas2d,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Lasso => "lasso",
            ProblemKind::Scad => "scad",
            ProblemKind::Deblur => "deblur",
            ProblemKind::ThreeOp => "three_op",
            ProblemKind::Feas2d => "feas2d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ProblemKind::Lasso,
            ProblemKind::Scad,
            ProblemKind::Deblur,
            ProblemKind::ThreeOp,
            ProblemKind::Feas2d,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

/// The linear map `D` of an instance.
#[derive(Clone, Debug)]
pub enum Operator {
    Dense(Arc<DenseMatrix>),
    Blur(Arc<BlurMap>),
    Identity(usize),
}

impl Operator {
    pub fn rows(&self) -> usize {
        match self {
            Operator::Dense(d) => d.rows(),
            Operator::Blur(b) => b.out_dim(),
            Operator::Identity(n) => *n,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Operator::Dense(d) => d.cols(),
            Operator::Blur(b) => b.in_dim(),
            Operator::Identity(n) => *n,
        }
    }

    pub fn linear_map(&self) -> Arc<dyn LinearMap> {
        match self {
            Operator::Dense(d) => d.clone(),
            Operator::Blur(b) => b.clone(),
            Operator::Identity(n) => Arc::new(IdentityMap(*n)),
        }
    }
}

/// Two lines through the origin of the plane and a starting point.
#[derive(Clone, Debug, PartialEq)]
pub struct LinePair {
    pub d1: Vector,
    pub d2: Vector,
    pub start: Vector,
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub seed: u64,
    pub operator: Operator,
    pub b: Vector,
    /// Ground truth, when the generator planted one.
    pub x_true: Option<Vector>,
    /// l1 weight (lasso, deblur, three_op).
    pub reg: Option<f64>,
    pub scad: Option<ScadParams>,
    /// Box bounds (three_op).
    pub bounds: Option<(Vector, Vector)>,
    pub lines: Option<LinePair>,
    /// Standard deviation of the additive noise on `b`.
    pub noise_sigma: f64,
    /// Fraction of nonzeros in the planted signal, when relevant.
    pub density: Option<f64>,
}

impl ProblemInstance {
    pub fn dims(&self) -> (usize, usize) {
        (self.operator.rows(), self.operator.cols())
    }

    /// Unknowns of the inclusion.
    pub fn dim(&self) -> usize {
        self.operator.cols()
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(ProblemError::BadDims { m, n });
    }
    Ok(())
}

fn check_nonneg(x: f64, err: fn(f64) -> ProblemError) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(err(x));
    }
    Ok(())
}

/// Number of planted nonzeros: `ceil(density n)`, at least one.
pub fn support_size(n: usize, density: f64) -> usize {
    ((density * n as f64).ceil() as usize).clamp(1, n)
}

fn gaussian_matrix(rng: &mut SeededRng, m: usize, n: usize) -> DenseMatrix {
    let scale = 1.0 / (m as f64).sqrt();
    DenseMatrix::from_fn(m, n, |_, _| rng.standard_normal() * scale)
}

fn sparse_signal(rng: &mut SeededRng, n: usize, density: f64) -> Vector {
    let support = rng.sample_indices(n, support_size(n, density));
    let mut u = vec![0.0; n];
    for i in support {
        u[i] = rng.standard_normal();
    }
    Vector::new(u).expect("finite normals")
}

fn add_noise(rng: &mut SeededRng, v: &Vector, sigma: f64) -> Vector {
    Vector::from_fn(v.dim(), |i| v[i] + sigma * rng.standard_normal())
}

/// Planted sparse regression data: `b = D u0 + noise`.
fn planted(m: usize, n: usize, seed: u64, density: f64, sigma: f64) -> (DenseMatrix, Vector, Vector) {
    let mut rng = SeededRng::new(seed);
    let d = gaussian_matrix(&mut rng, m, n);
    let u0 = sparse_signal(&mut rng, n, density);
    let b = add_noise(&mut rng, &d.apply(&u0), sigma);
    (d, u0, b)
}

/// LASSO data. `D_ij ~ N(0, 1) / sqrt(m)`, `u0` has `ceil(density n)` (at
/// least one) standard-normal nonzeros, `b = D u0 + 1e-3 N(0, I)`.
pub fn gen_lasso(m: usize, n: usize, seed: u64, density: f64, reg: f64) -> Result<ProblemInstance> {
    check_dims(m, n)?;
    if !(0.0..=1.0).contains(&density) {
        return Err(ProblemError::BadDensity(density));
    }
    check_nonneg(reg, ProblemError::BadReg)?;
    let (d, u0, b) = planted(m, n, seed, density, DEFAULT_NOISE_SIGMA);
    Ok(ProblemInstance {
        kind: ProblemKind::Lasso,
        seed,
        operator: Operator::Dense(Arc::new(d)),
        b,
        x_true: Some(u0),
        reg: Some(reg),
        scad: None,
        bounds: None,
        lines: None,
        noise_sigma: DEFAULT_NOISE_SIGMA,
        density: Some(density),
    })
}

/// SCAD data with `xi = 0.1`, `c = 3.7`, planted as in [`gen_lasso`] with
/// density 0.05.
pub fn gen_scad(m: usize, n: usize, seed: u64) -> Result<ProblemInstance> {
    gen_scad_with(m, n, seed, true)
}

/// As [`gen_scad`]; with `planted = false`, `b` is pure standard-normal noise
/// (drawn after `D`) and no ground truth is stored.
pub fn gen_scad_with(m: usize, n: usize, seed: u64, planted_signal: bool) -> Result<ProblemInstance> {
    check_dims(m, n)?;
    let (d, x_true, b, density) = if planted_signal {
        let (d, u0, b) = planted(m, n, seed, DEFAULT_DENSITY, DEFAULT_NOISE_SIGMA);
        (d, Some(u0), b, Some(DEFAULT_DENSITY))
    } else {
        let mut rng = SeededRng::new(seed);
        let d = gaussian_matrix(&mut rng, m, n);
        let b = Vector::from_fn(m, |_| rng.standard_normal());
        (d, None, b, None)
    };
    Ok(ProblemInstance {
        kind: ProblemKind::Scad,
        seed,
        operator: Operator::Dense(Arc::new(d)),
        b,
        x_true,
        reg: None,
        scad: Some(ScadParams::default()),
        bounds: None,
        lines: None,
        noise_sigma: if planted_signal { DEFAULT_NOISE_SIGMA } else { 1.0 },
        density,
    })
}

/// Blurred, noisy image: `b = K x_true + sigma_noise N(0, I)` with `K` the
/// Gaussian blur. Pixels are read row-major.
pub fn gen_deblur(
    image: &GrayImage,
    ksize: usize,
    sigma: f64,
    seed: u64,
    noise_sigma: f64,
    reg: f64,
) -> Result<ProblemInstance> {
    check_nonneg(noise_sigma, ProblemError::BadNoise)?;
    check_nonneg(reg, ProblemError::BadReg)?;
    let blur = BlurMap::new(image.height, image.width, ksize, sigma)?;
    let x = image.to_vector();
    let mut rng = SeededRng::new(seed);
    let b = add_noise(&mut rng, &blur.apply(&x), noise_sigma);
    Ok(ProblemInstance {
        kind: ProblemKind::Deblur,
        seed,
        operator: Operator::Blur(Arc::new(blur)),
        b,
        x_true: Some(x),
        reg: Some(reg),
        scad: None,
        bounds: None,
        lines: None,
        noise_sigma,
        density: None,
    })
}

/// Box-constrained LASSO: `0 in reg d||u||_1 + N_[-1,1]^n(u) + D^*(D u - b)`.
/// The planted signal is clipped into the box before forming `b`.
pub fn gen_three_op(m: usize, n: usize, seed: u64, density: f64, reg: f64) -> Result<ProblemInstance> {
    check_dims(m, n)?;
    if !(0.0..=1.0).contains(&density) {
        return Err(ProblemError::BadDensity(density));
    }
    check_nonneg(reg, ProblemError::BadReg)?;
    let mut rng = SeededRng::new(seed);
    let d = gaussian_matrix(&mut rng, m, n);
    let u0 = sparse_signal(&mut rng, n, density).map(|x| x.clamp(-1.0, 1.0));
    let b = add_noise(&mut rng, &d.apply(&u0), DEFAULT_NOISE_SIGMA);
    Ok(ProblemInstance {
        kind: ProblemKind::ThreeOp,
        seed,
        operator: Operator::Dense(Arc::new(d)),
        b,
        x_true: Some(u0),
        reg: Some(reg),
        scad: None,
        bounds: Some((Vector::filled(n, -1.0), Vector::filled(n, 1.0))),
        lines: None,
        noise_sigma: DEFAULT_NOISE_SIGMA,
        density: Some(density),
    })
}

/// Lines spanned by `(1, 0)` and `(cos a, sin a)`. With `seed != 0` the
/// angle is drawn uniformly from `(0, pi)` and `angle` is ignored.
/// The iteration starts from `(1, 1)`.
pub fn gen_feas2d(angle: f64, seed: u64) -> Result<ProblemInstance> {
    let a = if seed == 0 {
        angle
    } else {
        SeededRng::new(seed).uniform_in(0.0, std::f64::consts::PI)
    };
    let d1 = Vector::new(vec![1.0, 0.0])?;
    let d2 = Vector::new(vec![a.cos(), a.sin()])?;
    LineProjection::new(d2.clone())?;
    Ok(ProblemInstance {
        kind: ProblemKind::Feas2d,
        seed,
        operator: Operator::Identity(2),
        b: Vector::zeros(2),
        x_true: Some(Vector::zeros(2)),
        reg: None,
        scad: None,
        bounds: None,
        lines: Some(LinePair {
            d1,
            d2,
            start: Vector::filled(2, 1.0),
        }),
        noise_sigma: 0.0,
        density: None,
    })
}

/// A [`SplittingProblem`] together with the step constant used for defaults.
#[derive(Clone)]
pub struct BuiltProblem {
    pub kind: ProblemKind,
    pub problem: SplittingProblem,
    /// `eta` after the spectral safety factor; infinite without a smooth term.
    pub step_eta: f64,
}

/// User-facing knobs; `None` means the default for the problem kind.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlgorithmOverrides {
    pub theta: Option<f64>,
    pub delta: Option<f64>,
    /// Literal relaxation (or `lambda` for the baselines).
    pub rho: Option<f64>,
    /// `gamma = gamma_scale * eta`.
    pub gamma_scale: Option<f64>,
}

impl ProblemInstance {
    /// `0 in A x + B x + C x` for this instance:
    ///
    /// | kind     | A            | B            | C                    |
    /// |----------|--------------|--------------|----------------------|
    /// | lasso    | reg d\|.\|_1 | -            | D^*(D u - b)         |
    /// | scad     | SCAD prox    | -            | D^*(D u - b) - u/(c-1) |
    /// | deblur   | reg d\|.\|_1 | -            | K^*(K u - b)         |
    /// | three_op | reg d\|.\|_1 | box          | D^*(D u - b)         |
    /// | feas2d   | P_line1      | P_line2      | -                    |
    pub fn build(&self) -> Result<BuiltProblem> {
        let d = self.operator.linear_map();
        let reg = || -> Result<Arc<L1Prox>> { Ok(Arc::new(L1Prox::new(self.reg.unwrap_or(0.0))?)) };
        let (problem, step_eta) = match self.kind {
            ProblemKind::Lasso | ProblemKind::Deblur | ProblemKind::ThreeOp => {
                let c = least_squares_grad(d, self.b.clone())?;
                let eta = c.step_eta();
                let mut p = SplittingProblem::new(reg()?).with_c(Arc::new(c));
                if let Some((lo, hi)) = &self.bounds {
                    p = p.with_b(Arc::new(BoxProjection::new(lo.clone(), hi.clone())?));
                }
                (p, eta)
            }
            ProblemKind::Scad => {
                let params = self.scad.unwrap_or_default();
                let c = scad_smooth_grad(d, self.b.clone(), params)?;
                let eta = c.step_eta();
                (SplittingProblem::new(Arc::new(ScadProx { params })).with_c(Arc::new(c)), eta)
            }
            ProblemKind::Feas2d => {
                let lines = self.lines.as_ref().ok_or(ProblemError::Parse {
                    line: 0,
                    msg: "feas2d instance without lines".into(),
                })?;
                let p = SplittingProblem::new(Arc::new(LineProjection::new(lines.d1.clone())?))
                    .with_b(Arc::new(LineProjection::new(lines.d2.clone())?));
                (p, f64::INFINITY)
            }
        };
        Ok(BuiltProblem {
            kind: self.kind,
            problem,
            step_eta,
        })
    }

    /// Starting history `(x_{-1}, x_0, x_1)`. Deblurring uses
    /// `(0.01 * 1, 0, 1)`, SCAD the all-ones vector, the feasibility demo its
    /// stored start, and the remaining kinds zero.
    pub fn initial_state(&self) -> EngineState {
        let n = self.dim();
        match self.kind {
            ProblemKind::Deblur => EngineState::new(Vector::filled(n, 0.01), Vector::zeros(n), Vector::filled(n, 1.0))
                .expect("equal dims"),
            ProblemKind::Scad => EngineState::constant(Vector::filled(n, 1.0)),
            ProblemKind::Feas2d => EngineState::constant(
                self.lines.as_ref().map_or_else(|| Vector::filled(2, 1.0), |l| l.start.clone()),
            ),
            ProblemKind::Lasso | ProblemKind::ThreeOp => EngineState::constant(Vector::zeros(n)),
        }
    }

    /// Product `beta * rho` used by default: 0.24 for SCAD, 0.7 otherwise.
    pub fn default_beta_rho(&self) -> f64 {
        match self.kind {
            ProblemKind::Scad => 0.24,
            _ => 0.7,
        }
    }

    /// Objective of the underlying minimization, where there is one.
    pub fn objective(&self, u: &Vector) -> Option<f64> {
        let d = self.operator.linear_map();
        match self.kind {
            ProblemKind::Lasso | ProblemKind::Deblur | ProblemKind::ThreeOp => {
                objective_lasso(d.as_ref(), &self.b, self.reg.unwrap_or(0.0), u).ok()
            }
            ProblemKind::Scad => objective_scad(d.as_ref(), &self.b, self.scad.unwrap_or_default(), u).ok(),
            ProblemKind::Feas2d => None,
        }
    }

    /// Default configuration of `kind` for this instance, with overrides applied.
    ///
    /// Inertia defaults to `theta = 0.49`, `delta = -0.01`; relaxations default
    /// to `beta_rho / beta`. Step sizes are `gamma_scale * eta` with
    /// `gamma_scale` 3.9 for relaxed FB, 0.48 for Moudafi-Oliny and 1
    /// otherwise (`eta = 1` when there is no smooth term). Relaxed FB uses
    /// `lambda = beta_rho (2 - gamma / (2 eta))`.
    pub fn algorithm(&self, built: &BuiltProblem, kind: AlgorithmKind, o: AlgorithmOverrides) -> Algorithm {
        let eta = built.step_eta;
        let unit = if eta.is_finite() { eta } else { 1.0 };
        let default_scale = match kind {
            AlgorithmKind::RelaxedFb => 3.9,
            AlgorithmKind::MoudafiOliny => 0.48,
            _ => 1.0,
        };
        let gamma = o.gamma_scale.unwrap_or(default_scale) * unit;
        let theta = o.theta.unwrap_or(0.49);
        let delta = o.delta.unwrap_or(-0.01);
        let frac = self.default_beta_rho();
        let beta = averaging_constant(gamma, eta);
        let rho = o.rho.unwrap_or(frac / beta);
        match kind {
            AlgorithmKind::TwoStep => Algorithm::TwoStep(InertialParams::new(theta, delta, rho, gamma, eta)),
            AlgorithmKind::Fb2 => Algorithm::ForwardBackwardTwoStep(InertialParams::new(theta, delta, rho, gamma, eta)),
            AlgorithmKind::DavisYin => Algorithm::DavisYin { gamma, lambda: rho },
            AlgorithmKind::MoudafiOliny => Algorithm::MoudafiOliny {
                gamma,
                inertia: o.theta.map_or(Schedule::Ramp { scale: 1000.0 }, Schedule::Constant),
            },
            AlgorithmKind::RelaxedFb => {
                let lambda = o.rho.unwrap_or(frac * (2.0 - gamma / (2.0 * unit)));
                Algorithm::RelaxedFb { gamma, lambda }
            }
            AlgorithmKind::Fista => Algorithm::Fista {
                gamma,
                momentum: FistaMomentum::Schedule(o.theta.map_or(Schedule::Harmonic, Schedule::Constant)),
            },
            AlgorithmKind::InertialDr => Algorithm::InertialDr { gamma, theta, lambda: rho },
            AlgorithmKind::Dr => Algorithm::Dr { gamma, lambda: rho },
        }
    }
}
