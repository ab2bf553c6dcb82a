//! Independent reference routines used to cross-check the main solvers.
//!
//! Nothing in here shares code with the implementations it checks: the
//! K-functional oracle maximizes the dual program directly, the distribution
//! oracle recomputes every sign pattern from scratch, and the weak-norm
//! oracles walk dense nets of the dual ball. They are deliberately simple
//! and only meant for small instances.

use ndarray::Array1;

use crate::rng::SplitMix64;
use crate::space::{lp_norm, CoefficientFamily};

/// Euclidean projection onto `{ c : ||c||_inf <= 1, ||c||_2 <= t }`.
///
/// If clamping alone lands inside the ball we are done; otherwise the
/// KKT system says the projection is `clamp(y / (1 + mu))` of the original
/// point, for the unique `mu > 0` that puts the clamped vector on the
/// sphere, found by bisection.
pub fn project_box_ball(y: &mut [f64], t: f64) {
    if t <= 0.0 {
        y.iter_mut().for_each(|c| *c = 0.0);
        return;
    }
    let clamped_norm = |y: &[f64], mu: f64| -> f64 {
        y.iter()
            .map(|c| {
                let v = (c / (1.0 + mu)).clamp(-1.0, 1.0);
                v * v
            })
            .sum::<f64>()
            .sqrt()
    };
    if clamped_norm(y, 0.0) <= t {
        for c in y.iter_mut() {
            *c = c.clamp(-1.0, 1.0);
        }
        return;
    }
    let norm = lp_norm(y, 2.0);
    let maxabs = lp_norm(y, f64::INFINITY);
    if maxabs * t <= norm {
        // The ball projection is already inside the box, so it is the
        // intersection projection too.
        let scale = t / norm;
        y.iter_mut().for_each(|c| *c *= scale);
        return;
    }
    // At mu = ||y||_2 / t - 1 the rescaled point has norm exactly t before
    // clamping, so the clamped one is inside; mu = 0 is outside by the
    // check above.
    let mut lo = 0.0f64;
    let mut hi = norm / t - 1.0;
    for _ in 0..90 {
        if hi - lo <= 1e-12 * (1.0 + lo) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if clamped_norm(y, mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Take the feasible endpoint so the result stays inside the ball and
    // the reported objective is a valid lower bound for the dual maximum.
    let mu = hi;
    for c in y.iter_mut() {
        *c = (*c / (1.0 + mu)).clamp(-1.0, 1.0);
    }
    let norm = lp_norm(y, 2.0);
    if norm > t {
        let scale = t / norm;
        y.iter_mut().for_each(|c| *c *= scale);
    }
}

/// Dual program for the (l1, l2) K-functional:
/// `max { <a, c> : ||c||_inf <= 1, ||c||_2 <= t }`,
/// by projected gradient ascent with restarts and geometrically growing
/// steps. Every iterate is feasible, so the result is a certified lower
/// bound that converges to the dual maximum (= `K_{1,2}(a, t)`).
pub fn k12_dual_ascent(a: &[f64], t: f64, restarts: u32, seed: u64) -> f64 {
    let n = a.len();
    if n == 0 || t <= 0.0 {
        return 0.0;
    }
    let mut best = 0.0f64;
    let mut c = vec![0.0f64; n];
    let mut prev = vec![0.0f64; n];
    for r in 0..restarts {
        let mut g = SplitMix64::keyed(seed, r as u64);
        for ci in c.iter_mut() {
            *ci = g.next_unit();
        }
        project_box_ball(&mut c, t);
        let mut eta = 0.05;
        for _ in 0..48 {
            prev.copy_from_slice(&c);
            for i in 0..n {
                c[i] += eta * a[i];
            }
            project_box_ball(&mut c, t);
            eta *= 3.0;
            let moved = c
                .iter()
                .zip(&prev)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            if moved < 1e-13 {
                break;
            }
        }
        let value: f64 = a.iter().zip(&c).map(|(x, y)| x * y).sum();
        if value > best {
            best = value;
        }
    }
    best
}

/// Dense primal grid search for `N = 2`: minimize
/// `|a_1|(1-s_1) + |a_2|(1-s_2) + t ||(s_1 a_1, s_2 a_2)||_2`
/// over the fraction grid `s_i in [0, 1]`. An upper bound converging to
/// `K_{1,2}(a, t)` as the grid refines.
pub fn k12_primal_grid_2d(a: [f64; 2], t: f64, steps: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        let s1 = i as f64 / steps as f64;
        for j in 0..=steps {
            let s2 = j as f64 / steps as f64;
            let l1 = a[0].abs() * (1.0 - s1) + a[1].abs() * (1.0 - s2);
            let l2 = ((s1 * a[0]).powi(2) + (s2 * a[1]).powi(2)).sqrt();
            best = best.min(l1 + t * l2);
        }
    }
    best
}

/// All points of a grid net on the boundary of the l1 unit ball in
/// dimension `m <= 3`. The cross-polytope vertices are always included,
/// which is what makes the net max agree exactly with suprema attained
/// at those vertices.
pub fn l1_sphere_net(m: usize, steps: usize) -> Vec<Array1<f64>> {
    let mut pts = Vec::new();
    match m {
        1 => {
            pts.push(Array1::from(vec![1.0]));
            pts.push(Array1::from(vec![-1.0]));
        }
        2 => {
            for i in 0..=steps {
                let u1 = -1.0 + 2.0 * i as f64 / steps as f64;
                let r = 1.0 - u1.abs();
                pts.push(Array1::from(vec![u1, r]));
                if r > 0.0 {
                    pts.push(Array1::from(vec![u1, -r]));
                }
            }
        }
        3 => {
            for i in 0..=steps {
                let u1 = -1.0 + 2.0 * i as f64 / steps as f64;
                let r1 = 1.0 - u1.abs();
                let inner = ((r1 * steps as f64).ceil() as usize).max(1);
                for j in 0..=inner {
                    let u2 = -r1 + 2.0 * r1 * j as f64 / inner as f64;
                    let r2 = r1 - u2.abs();
                    pts.push(Array1::from(vec![u1, u2, r2]));
                    if r2 > 0.0 {
                        pts.push(Array1::from(vec![u1, u2, -r2]));
                    }
                }
            }
        }
        _ => panic!("l1 sphere net only implemented for m <= 3"),
    }
    pts
}

/// Max of `f(A u)` over a dense net of the l1 sphere (`m <= 3`).
pub fn max_over_l1_net<F: Fn(&Array1<f64>) -> f64>(
    fam: &CoefficientFamily,
    steps: usize,
    f: F,
) -> f64 {
    l1_sphere_net(fam.dim(), steps)
        .into_iter()
        .map(|u| f(&fam.coeffs().dot(&u)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Max of the lp sequence norm of `A u` over a dense angular net of the
/// Euclidean unit circle (`m = 2` only).
pub fn weak_lp_circle_net(fam: &CoefficientFamily, p: f64, angles: usize) -> f64 {
    weak_lp_circle_net_with(fam, angles, |z| lp_norm(z, p))
}

/// Max of an arbitrary function of the dual image over the same net.
pub fn weak_lp_circle_net_with<F: Fn(&[f64]) -> f64>(
    fam: &CoefficientFamily,
    angles: usize,
    f: F,
) -> f64 {
    assert_eq!(fam.dim(), 2, "circle net oracle needs m = 2");
    let mut best = f64::NEG_INFINITY;
    for k in 0..angles {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / angles as f64;
        let u = Array1::from(vec![theta.cos(), theta.sin()]);
        let z = fam.coeffs().dot(&u);
        best = best.max(f(z.as_slice().unwrap()));
    }
    best
}

/// The norm of every sign pattern with the first sign fixed to `+1`,
/// recomputed from scratch per pattern, in Gray-code order. Matches the
/// incremental enumeration index by index.
pub fn enumerate_naive(fam: &CoefficientFamily) -> Vec<f64> {
    let n = fam.len();
    assert!(n <= 20, "naive enumeration oracle capped at N = 20");
    let m = fam.dim();
    let p = fam.space().family().exponent();
    let patterns = 1u64 << (n - 1);
    let mut out = Vec::with_capacity(patterns as usize);
    let mut sum = vec![0.0f64; m];
    for i in 0..patterns {
        let code = i ^ (i >> 1);
        sum.iter_mut().for_each(|x| *x = 0.0);
        for (row_idx, row) in fam.coeffs().rows().into_iter().enumerate() {
            let sign = if row_idx == 0 {
                1.0
            } else if code >> (row_idx - 1) & 1 == 1 {
                -1.0
            } else {
                1.0
            };
            for (s, x) in sum.iter_mut().zip(row.iter()) {
                *s += sign * x;
            }
        }
        out.push(lp_norm(&sum, p));
    }
    out
}
