//! The scalar (l1, l2) K-functional and its calculus.
//!
//! For a finite sequence `a` and `t >= 0`,
//!
//! ```text
//! K_{1,2}(a, t) = inf { ||x1||_1 + t ||x2||_2 : a = x1 + x2 }
//! ```
//!
//! The infimum is attained by soft thresholding: the l2 part is the
//! coordinatewise clipping `x2_n = clamp(a_n, -rho, rho)` and the clipping
//! level solves the stationarity equation `t * rho = ||clip(a, rho)||_2`.
//! `g(rho) = ||clip(a, rho)||_2 - t*rho` crosses zero exactly once on
//! `(0, max|a_n|]` once the two endpoint regimes are excluded, so a plain
//! bisection is unconditionally robust.

use crate::error::{Error, Result};
use crate::space::lp_norm;

/// Bisection iteration cap for the clipping level.
const BISECT_MAX_ITER: u32 = 200;
/// Convergence threshold on the relative bracket width.
const BISECT_REL_WIDTH: f64 = 1e-12;

/// A finite real sequence with its rearrangement helpers.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSeq {
    values: Vec<f64>,
}

impl ScalarSeq {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "sequence contains a non-finite entry".into(),
            ));
        }
        Ok(ScalarSeq { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn l1(&self) -> f64 {
        lp_norm(&self.values, 1.0)
    }

    pub fn l2(&self) -> f64 {
        lp_norm(&self.values, 2.0)
    }

    pub fn linf(&self) -> f64 {
        lp_norm(&self.values, f64::INFINITY)
    }

    /// `|a_n|` sorted descending: the decreasing rearrangement `a*`.
    pub fn decreasing_rearrangement(&self) -> Vec<f64> {
        let mut abs: Vec<f64> = self.values.iter().map(|x| x.abs()).collect();
        abs.sort_unstable_by(|x, y| y.total_cmp(x));
        abs
    }

    /// The weak-lp sequence norm `sup_n n^{1/p} a*_n` (n is 1-based).
    pub fn weak_lp(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(Error::InvalidInput(format!(
                "weak-lp exponent must be positive, got {p}"
            )));
        }
        let star = self.decreasing_rearrangement();
        Ok(star
            .iter()
            .enumerate()
            .map(|(i, &a)| ((i + 1) as f64).powf(1.0 / p) * a)
            .fold(0.0, f64::max))
    }
}

/// The value `K_{1,2}(a, t)` together with the split that realizes it.
#[derive(Clone, Debug)]
pub struct KValue {
    pub t: f64,
    pub value: f64,
    /// Clipping level of the optimal split.
    pub rho: f64,
    /// l1 summand `x1 = a - clip(a, rho)`.
    pub split_l1: Vec<f64>,
    /// l2 summand `x2 = clip(a, rho)`.
    pub split_l2: Vec<f64>,
}

impl KValue {
    /// `||x1||_1` of the realizing split.
    pub fn l1_part(&self) -> f64 {
        lp_norm(&self.split_l1, 1.0)
    }

    /// `||x2||_2` of the realizing split.
    pub fn l2_part(&self) -> f64 {
        lp_norm(&self.split_l2, 2.0)
    }
}

fn clipped_l2(a: &[f64], rho: f64) -> f64 {
    a.iter()
        .map(|x| {
            let c = x.abs().min(rho);
            c * c
        })
        .sum::<f64>()
        .sqrt()
}

fn split_at(a: &[f64], rho: f64, t: f64) -> KValue {
    let split_l2: Vec<f64> = a.iter().map(|&x| x.clamp(-rho, rho)).collect();
    let split_l1: Vec<f64> = a.iter().zip(&split_l2).map(|(x, c)| x - c).collect();
    let value = lp_norm(&split_l1, 1.0) + t * lp_norm(&split_l2, 2.0);
    KValue {
        t,
        value,
        rho,
        split_l1,
        split_l2,
    }
}

/// Optimal clipping level for `(a, t)`, assuming `t >= 0` and `a` finite.
///
/// Endpoint regimes first: `t^2 >= #nonzeros` gives the pure l1 split
/// (`sign(a)` is dual feasible), and `t <= ||a||_2 / ||a||_inf` gives the
/// pure l2 split. In between, bisection on the clipping level.
fn solve_rho(v: &[f64], t: f64) -> f64 {
    let n_nonzero = v.iter().filter(|&&x| x != 0.0).count();
    let amax = lp_norm(v, f64::INFINITY);
    if n_nonzero == 0 {
        return 0.0;
    }
    if t == 0.0 {
        return amax; // convention: x1 = 0, x2 = a
    }
    if t * t >= n_nonzero as f64 {
        return 0.0; // pure l1
    }
    let l2 = lp_norm(v, 2.0);
    if t * amax <= l2 {
        // Pure l2: any level >= max|a_n| clips nothing; report the
        // self-consistent one.
        return l2 / t;
    }
    // g(0+) > 0 because t < sqrt(#nonzeros); g(amax) < 0 because t*amax > l2.
    let mut lo = 0.0;
    let mut hi = amax;
    for _ in 0..BISECT_MAX_ITER {
        if hi - lo <= BISECT_REL_WIDTH * amax {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if clipped_l2(v, mid) - t * mid >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `K_{1,2}` value without materializing the split; the allocation-free
/// path for enumeration loops. Assumes finite entries and `t >= 0`.
pub(crate) fn k12_value(v: &[f64], t: f64) -> (f64, f64) {
    let rho = solve_rho(v, t);
    let soft_l1: f64 = v.iter().map(|x| (x.abs() - rho).max(0.0)).sum();
    let value = soft_l1 + t * clipped_l2(v, rho);
    (value, rho)
}

/// Exact `K_{1,2}(a, t)` with a realizing split.
pub fn k12_exact(a: &ScalarSeq, t: f64) -> Result<KValue> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "K-functional parameter t must be >= 0, got {t}"
        )));
    }
    let v = a.values();
    Ok(split_at(v, solve_rho(v, t), t))
}

/// The two-term closed form `h(t) = sum_{n <= floor(t^2)} a*_n
/// + t (sum_{n > floor(t^2)} a*_n^2)^{1/2}`.
///
/// Taking the top `floor(t^2)` coordinates whole is a feasible split, so
/// `h(t) >= K_{1,2}(a, t)` always; it is also equivalent to K up to a
/// universal factor, which makes it a useful cross-check.
pub fn k12_holmstedt(a: &ScalarSeq, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "K-functional parameter t must be >= 0, got {t}"
        )));
    }
    let star = a.decreasing_rearrangement();
    let cut = ((t * t).floor() as usize).min(star.len());
    let head: f64 = star[..cut].iter().sum();
    let tail: f64 = star[cut..].iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(head + t * tail)
}

/// Witness for the scaling inequality `K(a, s) <= max(1, s/t) K(a, t)`.
#[derive(Clone, Debug)]
pub struct ScalingWitness {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; the inequality asserts this is >= 0 up to roundoff.
    pub margin: f64,
    pub holds: bool,
}

/// Evaluate both sides of the scaling inequality at `(s, t)`.
pub fn k12_scaling_bound(a: &ScalarSeq, s: f64, t: f64) -> Result<ScalingWitness> {
    if !(s > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidInput(format!(
            "scaling bound needs s, t > 0, got s={s}, t={t}"
        )));
    }
    let lhs = k12_exact(a, s)?.value;
    let rhs = (s / t).max(1.0) * k12_exact(a, t)?.value;
    let margin = rhs - lhs;
    Ok(ScalingWitness {
        lhs,
        rhs,
        margin,
        holds: margin >= -1e-9,
    })
}
