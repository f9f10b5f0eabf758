use std::fmt;

use super::SplittingError;

/// Averaging constant `2 eta / (4 eta - gamma)` of the Davis-Yin operator.
///
/// Tends to `1/2` as `eta -> inf` (no smooth term).
pub fn averaging_constant(gamma: f64, eta: f64) -> f64 {
    if eta.is_infinite() {
        0.5
    } else {
        2.0 * eta / (4.0 * eta - gamma)
    }
}

/// Parameters of the two-step inertial scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InertialParams {
    /// Forward inertia `theta` in `[0, 1)`.
    pub theta: f64,
    /// Backward inertia `delta <= 0`.
    pub delta: f64,
    /// Relaxation `rho > 0`.
    pub rho: f64,
    /// Step size `gamma` in `(0, 2 eta)`.
    pub gamma: f64,
    /// Cocoercivity constant of the smooth operator.
    pub eta: f64,
    /// Slack `epsilon` in `(0, 1)` used by the sharpened averagedness bound.
    pub epsilon: f64,
}

impl InertialParams {
    pub const DEFAULT_EPSILON: f64 = 0.9;

    pub fn new(theta: f64, delta: f64, rho: f64, gamma: f64, eta: f64) -> Self {
        Self {
            theta,
            delta,
            rho,
            gamma,
            eta,
            epsilon: Self::DEFAULT_EPSILON,
        }
    }

    /// Build with `rho = beta_rho / beta`, i.e. fix the product `beta * rho`.
    pub fn with_beta_rho(theta: f64, delta: f64, beta_rho: f64, gamma: f64, eta: f64) -> Self {
        let beta = averaging_constant(gamma, eta);
        Self::new(theta, delta, beta_rho / beta, gamma, eta)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn beta(&self) -> f64 {
        averaging_constant(self.gamma, self.eta)
    }

    /// Hard requirements of the scheme; violating these is not a tuning issue.
    pub fn check_structure(&self) -> Result<(), SplittingError> {
        let all = [self.theta, self.delta, self.rho, self.gamma, self.epsilon];
        if all.iter().any(|x| !x.is_finite()) || self.eta.is_nan() {
            return Err(SplittingError::Structural("non-finite parameter".into()));
        }
        if !(0.0..1.0).contains(&self.theta) {
            return Err(SplittingError::Structural(format!(
                "theta = {} outside [0, 1)",
                self.theta
            )));
        }
        if self.delta > 0.0 {
            return Err(SplittingError::Structural(format!(
                "delta = {} must be <= 0",
                self.delta
            )));
        }
        if !(self.rho > 0.0) {
            return Err(SplittingError::Structural(format!(
                "rho = {} must be > 0",
                self.rho
            )));
        }
        if !(self.eta > 0.0) {
            return Err(SplittingError::Structural(format!(
                "eta = {} must be > 0",
                self.eta
            )));
        }
        if !(self.gamma > 0.0 && self.gamma < 2.0 * self.eta) {
            return Err(SplittingError::Structural(format!(
                "gamma = {} outside (0, 2 eta) = (0, {})",
                self.gamma,
                2.0 * self.eta
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(SplittingError::Structural(format!(
                "epsilon = {} outside (0, 1)",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// One inequality `lhs < rhs` (or `lhs <= rhs` where noted) with its verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inequality {
    pub satisfied: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    fn strict(lhs: f64, rhs: f64) -> Self {
        Self {
            satisfied: lhs < rhs,
            lhs,
            rhs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionReport {
    /// `0 <= theta < min{1/2, (1 - beta rho)/(1 + beta rho)}`; lhs = theta.
    pub cond_i: Inequality,
    /// `0 < rho < 1/beta`; lhs = rho.
    pub cond_ii: Inequality,
    /// `max{-(1 - br - theta - br theta)/(1 - br), (br theta(1+theta) - (1-br)(1-theta)^2)/(1+theta)} < delta`.
    pub cond_iii_lower: Inequality,
    /// `br theta(1+theta) - (1-br)(1-theta)^2 < (2 theta - br + 2) delta + (1 - 2 br) delta^2`.
    pub cond_iii_quadratic: Inequality,
    /// `|delta| < (1 - br - theta - br theta)/(1 - br)`.
    pub derived_delta_bound: Inequality,
    pub overall: bool,
}

impl ConditionReport {
    pub fn rows(&self) -> [(&'static str, Inequality); 5] {
        [
            ("cond_i", self.cond_i),
            ("cond_ii", self.cond_ii),
            ("cond_iii_lower", self.cond_iii_lower),
            ("cond_iii_quadratic", self.cond_iii_quadratic),
            ("derived_delta_bound", self.derived_delta_bound),
        ]
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<22} {:>24} {:>24}  status", "inequality", "lhs", "rhs")?;
        for (name, row) in self.rows() {
            writeln!(
                f,
                "{:<22} {:>24.17e} {:>24.17e}  {}",
                name,
                row.lhs,
                row.rhs,
                if row.satisfied { "ok" } else { "VIOLATED" }
            )?;
        }
        write!(f, "overall: {}", if self.overall { "satisfied" } else { "violated" })
    }
}

/// Evaluate the parameter conditions of the two-step scheme as written.
///
/// Structural violations (`delta > 0`, `gamma >= 2 eta`, ...) are errors;
/// unsatisfied conditions are reported, never corrected.
pub fn validate(params: &InertialParams) -> Result<ConditionReport, SplittingError> {
    params.check_structure()?;
    let theta = params.theta;
    let delta = params.delta;
    let beta = params.beta();
    let br = beta * params.rho;

    let i_rhs = 0.5f64.min((1.0 - br) / (1.0 + br));
    let cond_i = Inequality {
        satisfied: theta >= 0.0 && theta < i_rhs,
        lhs: theta,
        rhs: i_rhs,
    };
    let cond_ii = Inequality {
        satisfied: params.rho > 0.0 && params.rho < 1.0 / beta,
        lhs: params.rho,
        rhs: 1.0 / beta,
    };

    let bound = (1.0 - br - theta - beta * theta * params.rho) / (1.0 - br);
    let quad_lhs = br * theta * (1.0 + theta) - (1.0 - br) * (1.0 - theta).powi(2);
    let lower = (-bound).max(quad_lhs / (1.0 + theta));
    let cond_iii_lower = Inequality {
        satisfied: delta <= 0.0 && lower < delta,
        lhs: lower,
        rhs: delta,
    };
    let quad_rhs = (2.0 * theta - br + 2.0) * delta + (1.0 - 2.0 * br) * delta * delta;
    let cond_iii_quadratic = Inequality::strict(quad_lhs, quad_rhs);
    let derived_delta_bound = Inequality::strict(delta.abs(), bound);

    let overall = cond_i.satisfied
        && cond_ii.satisfied
        && cond_iii_lower.satisfied
        && cond_iii_quadratic.satisfied
        && derived_delta_bound.satisfied;
    Ok(ConditionReport {
        cond_i,
        cond_ii,
        cond_iii_lower,
        cond_iii_quadratic,
        derived_delta_bound,
        overall,
    })
}
