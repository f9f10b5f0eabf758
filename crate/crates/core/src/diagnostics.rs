//! Objective values, SNR, the Lyapunov ledger and CSV iteration logs.

use std::io::{self, Write};

use thiserror::Error;

use crate::linalg::{LinalgError, LinearMap, Vector};
use crate::prox::{scad_penalty, ScadParams};
use crate::splitting::InertialParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("reference signal is zero")]
    ZeroReference,
    #[error("need at least 3 iterates for the ledger, got {0}")]
    ShortSequence(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, DiagnosticsError>;

/// Exact header of the per-iteration CSV.
pub const CSV_HEADER: &str = "n,step_diff,fp_residual,objective,snr_db,c_map_gap_sq,gamma_n,gamma_bar_n,elapsed_s";

/// Largest SNR value written to plot-oriented exports.
pub const SNR_PLOT_CAP_DB: f64 = 310.0;

/// One logged iteration. Row `n` describes the newest iterate `x_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub n: usize,
    /// `||x_n - x_{n-1}||`
    pub step_diff: f64,
    /// `||y - T y||` of the step that produced `x_n`.
    pub fp_residual: f64,
    pub objective: Option<f64>,
    pub snr_db: Option<f64>,
    /// `||C w - C x*||^2`, filled when a solution is known.
    pub c_map_gap_sq: Option<f64>,
    pub gamma_n: Option<f64>,
    pub gamma_bar_n: Option<f64>,
    pub elapsed_s: f64,
}

fn fmt_float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

impl IterationRecord {
    /// CSV row with 17 significant digits; missing optionals are empty.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            fmt_float(self.step_diff),
            fmt_float(self.fp_residual),
            fmt_opt(self.objective),
            fmt_opt(self.snr_db),
            fmt_opt(self.c_map_gap_sq),
            fmt_opt(self.gamma_n),
            fmt_opt(self.gamma_bar_n),
            fmt_float(self.elapsed_s),
        )
    }
}

pub fn write_csv<W: Write>(mut out: W, records: &[IterationRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// `20 log10(||x|| / ||x - x_star||)`; `+inf` when the two agree exactly.
pub fn snr_db(x: &Vector, x_star: &Vector) -> Result<f64> {
    crate::linalg::dot(x, x_star)?;
    let signal = x.norm();
    if signal == 0.0 {
        return Err(DiagnosticsError::ZeroReference);
    }
    let err = x.dist(x_star);
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (signal / err).log10())
}

pub fn snr_for_plot(snr: f64) -> f64 {
    snr.min(SNR_PLOT_CAP_DB)
}

fn residual_sq(op: &dyn LinearMap, b: &Vector, u: &Vector) -> Result<f64> {
    op.check_input(u)?;
    op.check_output(b)?;
    Ok((&op.apply(u) - b).norm_sq())
}

/// `||D u - b||^2 / 2 + reg ||u||_1`
pub fn objective_lasso(op: &dyn LinearMap, b: &Vector, reg: f64, u: &Vector) -> Result<f64> {
    Ok(0.5 * residual_sq(op, b, u)? + reg * u.norm_l1())
}

/// `||D u - b||^2 / 2 + sum_k q_xi(|u_k|)`
pub fn objective_scad(op: &dyn LinearMap, b: &Vector, p: ScadParams, u: &Vector) -> Result<f64> {
    let penalty: f64 = u.iter().map(|x| scad_penalty(x.abs(), p)).sum();
    Ok(0.5 * residual_sq(op, b, u)? + penalty)
}

/// Constants of the Lyapunov sequence for given parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerCoefficients {
    pub theta: f64,
    pub delta: f64,
    pub beta: f64,
    pub rho: f64,
    /// `(1 - beta)/(beta rho) + (1 - rho)/rho`
    pub kappa: f64,
    pub c1: f64,
    pub c2: f64,
}

impl LedgerCoefficients {
    pub fn new(params: &InertialParams) -> Self {
        let (theta, delta, rho) = (params.theta, params.delta, params.rho);
        let beta = params.beta();
        let ad = delta.abs();
        let kappa = (1.0 - beta) / (beta * rho) + (1.0 - rho) / rho;
        let lead = (theta - delta) * (1.0 + theta)
            - kappa * (theta * theta - 2.0 * theta - ad * theta - ad + 1.0);
        let c1 = -lead;
        let c2 = -(lead - delta * (theta - delta) - kappa * (delta * delta - ad - ad * theta));
        Self {
            theta,
            delta,
            beta,
            rho,
            kappa,
            c1,
            c2,
        }
    }

    /// `Gamma_n` from `x_n, x_{n-1}, x_{n-2}`.
    pub fn gamma(&self, x: &Vector, x1: &Vector, x2: &Vector, x_star: &Vector) -> f64 {
        x.dist(x_star).powi(2) - self.theta * x1.dist(x_star).powi(2) - self.delta * x2.dist(x_star).powi(2)
            + self.kappa * (1.0 - self.delta.abs() - self.theta) * x.dist(x1).powi(2)
    }

    /// `Gamma_n + c1 ||x_{n-1} - x_{n-2}||^2`
    pub fn gamma_bar(&self, x: &Vector, x1: &Vector, x2: &Vector, x_star: &Vector) -> f64 {
        self.gamma(x, x1, x2, x_star) + self.c1 * x1.dist(x2).powi(2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovLedger {
    pub theta: f64,
    pub delta: f64,
    pub beta: f64,
    pub rho: f64,
    pub c1: f64,
    pub c2: f64,
    /// `Gamma_n` for each window `(x_{n-2}, x_{n-1}, x_n)` of the input, in order.
    pub gamma: Vec<f64>,
    pub gamma_bar: Vec<f64>,
}

impl LyapunovLedger {
    pub fn min_gamma(&self) -> f64 {
        self.gamma.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest increase `Gamma_bar_{n+1} - Gamma_bar_n` (negative when strictly decreasing).
    pub fn max_gamma_bar_increase(&self) -> f64 {
        self.gamma_bar
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluate `Gamma_n` and `Gamma_bar_n` along `xs = [x_{-1}, x_0, x_1, ...]`.
pub fn gamma_ledger(xs: &[Vector], x_star: &Vector, params: &InertialParams) -> Result<LyapunovLedger> {
    if xs.len() < 3 {
        return Err(DiagnosticsError::ShortSequence(xs.len()));
    }
    for x in xs {
        crate::linalg::dot(x, x_star)?;
    }
    let k = LedgerCoefficients::new(params);
    let (gamma, gamma_bar) = xs
        .windows(3)
        .map(|w| (k.gamma(&w[2], &w[1], &w[0], x_star), k.gamma_bar(&w[2], &w[1], &w[0], x_star)))
        .unzip();
    Ok(LyapunovLedger {
        theta: k.theta,
        delta: k.delta,
        beta: k.beta,
        rho: k.rho,
        c1: k.c1,
        c2: k.c2,
        gamma,
        gamma_bar,
    })
}
