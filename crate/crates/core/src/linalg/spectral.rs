use super::{LinalgError, LinearMap, Result, Vector};
use crate::rng::SeededRng;

/// Multiplier applied to the power-method estimate before it feeds a step size.
pub const SPECTRAL_SAFETY_FACTOR: f64 = 1.01;

const START_SEED: u64 = 0x5EED_0F_D57A;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralEstimate {
    /// Raw Rayleigh-quotient estimate of `||D^* D||`.
    pub value: f64,
    pub sweeps: usize,
    pub converged: bool,
}

impl SpectralEstimate {
    /// Estimate inflated by [`SPECTRAL_SAFETY_FACTOR`]; use this for step sizes.
    pub fn safe_value(&self) -> f64 {
        self.value * SPECTRAL_SAFETY_FACTOR
    }
}

/// Power iteration on `D^* D` from a fixed seeded start vector.
///
/// Stops when the relative change of the Rayleigh quotient drops below `tol`.
/// A zero operator yields `0`; running out of sweeps returns the last estimate
/// with `converged = false`.
pub fn estimate_spectral_norm_sq(
    op: &dyn LinearMap,
    iters: usize,
    tol: f64,
) -> Result<SpectralEstimate> {
    if op.in_dim() == 0 {
        return Err(LinalgError::EmptyDimension);
    }
    if iters == 0 {
        return Err(LinalgError::NoSweeps);
    }
    let mut rng = SeededRng::new(START_SEED);
    let mut v = Vector::from_fn(op.in_dim(), |_| rng.uniform_in(-1.0, 1.0));
    let n0 = v.norm();
    v = v.scaled(1.0 / n0);

    let mut estimate = 0.0;
    for sweep in 1..=iters {
        let w = op.normal_apply(&v);
        // Rayleigh quotient <v, D*D v> with ||v|| = 1.
        let next = v.inner(&w);
        let wn = w.norm();
        if wn == 0.0 || next == 0.0 {
            return Ok(SpectralEstimate {
                value: 0.0,
                sweeps: sweep,
                converged: true,
            });
        }
        let change = (next - estimate).abs();
        estimate = next;
        v = w.scaled(1.0 / wn);
        if change <= tol * estimate.abs() {
            return Ok(SpectralEstimate {
                value: estimate,
                sweeps: sweep,
                converged: true,
            });
        }
    }
    log::debug!("power iteration unconverged after {iters} sweeps, estimate {estimate}");
    Ok(SpectralEstimate {
        value: estimate,
        sweeps: iters,
        converged: false,
    })
}
