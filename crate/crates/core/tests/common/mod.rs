//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, Zero};
use tsplit::linalg::{DenseMatrix, Vector};
use tsplit::rng::SeededRng;

pub fn random_vector(rng: &mut SeededRng, n: usize) -> Vector {
    Vector::new((0..n).map(|_| rng.standard_normal()).collect()).unwrap()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

/// Relative error against the larger of the two magnitudes and a floor.
pub fn rel_err_scaled(got: f64, want: f64, scale: f64) -> f64 {
    (got - want).abs() / scale.max(want.abs()).max(1e-300)
}

pub fn to_nalgebra(d: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(d.rows(), d.cols(), d.data())
}

/// Largest eigenvalue of `D^T D` from a full symmetric eigendecomposition.
pub fn dense_norm_sq(d: &DenseMatrix) -> f64 {
    let m = to_nalgebra(d);
    let gram = m.transpose() * &m;
    gram.symmetric_eigen().eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn rat(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite")
}

/// Exact `sum u_i v_i` rounded once.
pub fn exact_dot(u: &[f64], v: &[f64]) -> f64 {
    let s = u
        .iter()
        .zip(v)
        .fold(BigRational::zero(), |acc, (a, b)| acc + rat(*a) * rat(*b));
    ratio_to_f64(&s)
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("representable")
}

/// Coarse grid followed by golden-section refinement of a convex 1-D function.
///
/// The grid covers `[lo, hi]` with spacing `step`; refinement runs on the two
/// cells around the best grid point until the bracket is below `tol`.
pub fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64, tol: f64) -> f64 {
    let cells = ((hi - lo) / step).ceil() as usize;
    let mut best = (f(lo), 0usize);
    for k in 1..=cells {
        let x = lo + k as f64 * step;
        let fx = f(x);
        if fx < best.0 {
            best = (fx, k);
        }
    }
    let centre = lo + best.1 as f64 * step;
    let (mut a, mut b) = (centre - step, centre + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// `q_xi(w)` written out from its three branches.
pub fn scad_q(w: f64, xi: f64, c: f64) -> f64 {
    if w <= xi {
        xi * w
    } else if w <= c * xi {
        (-w * w + 2.0 * c * xi * w - xi * xi) / (2.0 * (c - 1.0))
    } else {
        (c + 1.0) * xi * xi / 2.0
    }
}

/// Grid-oracle minimizer of `q(|u|) + u^2/(2(c-1)) + (u - v)^2/(2 gamma)`.
pub fn scad_prox_oracle(v: f64, gamma: f64, xi: f64, c: f64, step: f64) -> f64 {
    let lo = v.min(-2.0 * c * xi).min(-2.0 * v.abs());
    let hi = v.max(2.0 * c * xi).max(2.0 * v.abs());
    let f = |u: f64| scad_q(u.abs(), xi, c) + u * u / (2.0 * (c - 1.0)) + (u - v).powi(2) / (2.0 * gamma);
    grid_argmin(f, lo, hi, step, 1e-10)
}

/// Grid-oracle minimizer of `tau |u| + (u - v)^2 / 2`.
pub fn l1_prox_oracle(v: f64, tau: f64, step: f64) -> f64 {
    let r = 2.0 * v.abs() + 1.0;
    let f = |u: f64| tau * u.abs() + 0.5 * (u - v).powi(2);
    grid_argmin(f, -r, r, step, 1e-10)
}

/// Plain proximal-gradient iteration for `||D u - b||^2/2 + reg ||u||_1` with
/// step `1/L`, `L` the largest eigenvalue of `D^T D`.
pub fn fb_lasso_oracle(d: &DenseMatrix, b: &[f64], reg: f64, iters: usize) -> Vec<f64> {
    let m = to_nalgebra(d);
    let mt = m.transpose();
    let bv = nalgebra::DVector::from_column_slice(b);
    let step = 1.0 / dense_norm_sq(d);
    let mut u = nalgebra::DVector::<f64>::zeros(d.cols());
    for _ in 0..iters {
        let g = &mt * (&m * &u - &bv);
        let v = &u - step * g;
        u = v.map(|x| x.signum() * (x.abs() - step * reg).max(0.0));
    }
    u.as_slice().to_vec()
}

pub fn lasso_objective_oracle(d: &DenseMatrix, b: &[f64], reg: f64, u: &[f64]) -> f64 {
    let m = to_nalgebra(d);
    let r = &m * nalgebra::DVector::from_column_slice(u) - nalgebra::DVector::from_column_slice(b);
    0.5 * r.norm_squared() + reg * u.iter().map(|x| x.abs()).sum::<f64>()
}

/// Flags of the parameter conditions evaluated exactly over the rationals.
#[derive(Debug, PartialEq, Eq, Clone, Copy)]
pub struct RationalVerdict {
    pub cond_i: bool,
    pub cond_ii: bool,
    pub cond_iii_lower: bool,
    pub cond_iii_quadratic: bool,
    pub derived_delta_bound: bool,
}

impl RationalVerdict {
    pub fn overall(&self) -> bool {
        self.cond_i && self.cond_ii && self.cond_iii_lower && self.cond_iii_quadratic && self.derived_delta_bound
    }
}

pub fn rational_conditions(theta: f64, delta: f64, rho: f64, gamma: f64, eta: f64) -> RationalVerdict {
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let (t, d, r, g, e) = (rat(theta), rat(delta), rat(rho), rat(gamma), rat(eta));
    let beta = &two * &e / (BigRational::from_integer(BigInt::from(4)) * &e - &g);
    let br = &beta * &r;
    let half = &one / &two;

    let frac = (&one - &br) / (&one + &br);
    let i_bound = if half < frac { half.clone() } else { frac };
    let cond_i = t >= BigRational::zero() && t < i_bound;
    let cond_ii = r > BigRational::zero() && r < &one / &beta;

    let bound = (&one - &br - &t - &beta * &t * &r) / (&one - &br);
    let q = &br * &t * (&one + &t) - (&one - &br) * (&one - &t) * (&one - &t);
    let lower_a = -bound.clone();
    let lower_b = &q / (&one + &t);
    let lower = if lower_a > lower_b { lower_a } else { lower_b };
    let cond_iii_lower = d <= BigRational::zero() && lower < d;
    let rhs = (&two * &t - &br + &two) * &d + (&one - &two * &br) * &d * &d;
    let cond_iii_quadratic = q < rhs;
    let derived_delta_bound = d.abs() < bound;
    RationalVerdict {
        cond_i,
        cond_ii,
        cond_iii_lower,
        cond_iii_quadratic,
        derived_delta_bound,
    }
}

/// Half-sample symmetric index folding: `-1 -> 0`, `n -> n - 1`.
pub fn fold(j: i64, n: i64) -> usize {
    let p = 2 * n;
    let m = j.rem_euclid(p);
    (if m < n { m } else { p - 1 - m }) as usize
}

/// Row-major 2-D correlation with the normalized Gaussian kernel, written
/// out as a quadruple loop.
pub fn direct_blur(x: &[f64], h: usize, w: usize, ksize: usize, sigma: f64) -> Vec<f64> {
    let r = (ksize / 2) as i64;
    let raw = |a: i64, b: i64| (-((a * a + b * b) as f64) / (2.0 * sigma * sigma)).exp();
    let total: f64 = (-r..=r).flat_map(|a| (-r..=r).map(move |b| raw(a, b))).sum();
    let mut out = vec![0.0; h * w];
    for i in 0..h as i64 {
        for j in 0..w as i64 {
            let mut acc = 0.0;
            for a in -r..=r {
                for b in -r..=r {
                    acc += raw(a, b) / total * x[fold(i + a, h as i64) * w + fold(j + b, w as i64)];
                }
            }
            out[i as usize * w + j as usize] = acc;
        }
    }
    out
}
