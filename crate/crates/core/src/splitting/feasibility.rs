//! Douglas-Rachford map for two lines through the origin of the plane.

use crate::linalg::Vector;
use crate::prox::{LineProjection, ProxMap};

use super::engine::extrapolate;
use super::SplittingError;

/// `F = (I + R_1 R_2) / 2` with `R_k = 2 P_k - I` the reflection across line `k`.
#[derive(Clone, Debug)]
pub struct DrFeasibility {
    first: LineProjection,
    second: LineProjection,
}

pub fn dr_feasibility_operator(d1: Vector, d2: Vector) -> Result<DrFeasibility, SplittingError> {
    Ok(DrFeasibility {
        first: LineProjection::new(d1)?,
        second: LineProjection::new(d2)?,
    })
}

/// Result of iterating [`DrFeasibility`] until `||x_n|| <= tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityRun {
    pub iterations: usize,
    pub converged: bool,
    pub final_point: Vector,
}

impl DrFeasibility {
    pub fn apply(&self, v: &Vector) -> Result<Vector, SplittingError> {
        let p2 = self.second.resolve(v, 1.0)?;
        let r2 = Vector::from_fn(v.dim(), |i| 2.0 * p2[i] - v[i]);
        let p1 = self.first.resolve(&r2, 1.0)?;
        let r1 = Vector::from_fn(v.dim(), |i| 2.0 * p1[i] - r2[i]);
        Ok(Vector::from_fn(v.dim(), |i| 0.5 * (v[i] + r1[i])))
    }

    /// `x_{n+1} = F(x_n + theta (x_n - x_{n-1}) + delta (x_{n-1} - x_{n-2}))`
    /// from the constant history `x_{-1} = x_0 = x_1 = start`.
    ///
    /// `theta = delta = 0` is the plain iteration and `delta = 0` the one-step
    /// inertial one. Counts steps until the distance to the intersection of two
    /// distinct lines (the origin) is at most `tol`.
    pub fn iterate(
        &self,
        start: &Vector,
        theta: f64,
        delta: f64,
        tol: f64,
        max_iters: usize,
    ) -> Result<FeasibilityRun, SplittingError> {
        let (mut x2, mut x1, mut x) = (start.clone(), start.clone(), start.clone());
        for k in 1..=max_iters {
            let y = extrapolate(&x, &x1, &x2, theta, delta)?;
            let next = self.apply(&y)?;
            x2 = std::mem::replace(&mut x1, std::mem::replace(&mut x, next));
            if x.norm() <= tol {
                return Ok(FeasibilityRun {
                    iterations: k,
                    converged: true,
                    final_point: x,
                });
            }
        }
        Ok(FeasibilityRun {
            iterations: max_iters,
            converged: false,
            final_point: x,
        })
    }
}
