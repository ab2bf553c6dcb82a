//! Weak-lp norms and the vector-valued functional `Kw_{1,2}`.
//!
//! Both quantities are suprema of convex functions of `x*` over the dual
//! unit ball, so they are attained at extreme points. Where the extreme set
//! is finite (the sup-norm and l1 spaces, and every one-dimensional space)
//! the supremum is evaluated exactly; elsewhere a seeded multi-start ascent
//! over the dual sphere produces a certified lower bound, and every result
//! carries an exactness flag so callers can tell the two apart.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kfunc::{k12_value, ScalarSeq};
use crate::rng::SplitMix64;
use crate::signs::max_over_signed_sums;
use crate::space::{lp_norm, CoefficientFamily, DualFunctional, SpaceFamily, L1_VERTEX_CAP};

/// Cap on exact sign-pattern enumeration for the l2-space weak-l1 norm.
pub const SIGN_PATTERN_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Exactness {
    Exact,
    LowerBound,
}

impl std::fmt::Display for Exactness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exactness::Exact => write!(f, "EXACT"),
            Exactness::LowerBound => write!(f, "LOWER_BOUND"),
        }
    }
}

/// A supremum over the dual ball: its value, whether it is exact, and a
/// witness functional that reproduces the value.
#[derive(Clone, Debug)]
pub struct Evaluated {
    pub value: f64,
    pub exactness: Exactness,
    pub witness: Option<DualFunctional>,
}

/// Multi-start projected ascent settings for spaces without a finite dual
/// extreme set. Seeds are derived deterministically from `seed`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AscentConfig {
    pub restarts: u32,
    pub steps: u32,
    pub decay: f64,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            restarts: 64,
            steps: 500,
            decay: 0.95,
            seed: 0,
        }
    }
}

/// Largest singular value of `a` with a maximizing right-singular vector,
/// by power iteration on the Gram matrix.
pub(crate) fn top_singular(a: &Array2<f64>) -> (f64, Array1<f64>) {
    let m = a.ncols();
    let mut v = Array1::from_iter((0..m).map(|j| 1.0 + 1e-3 * (j as f64 + 1.0)));
    let norm = lp_norm(v.as_slice().unwrap(), 2.0);
    v.mapv_inplace(|x| x / norm);
    let mut sigma = 0.0f64;
    for _ in 0..200_000 {
        let av = a.dot(&v);
        let next = a.t().dot(&av);
        let norm = lp_norm(next.as_slice().unwrap(), 2.0);
        if norm == 0.0 {
            return (0.0, v);
        }
        let next = next / norm;
        let new_sigma = lp_norm(a.dot(&next).as_slice().unwrap(), 2.0);
        let done = (new_sigma - sigma).abs() <= 1e-13 * new_sigma.max(1e-300);
        v = next;
        sigma = new_sigma;
        if done {
            break;
        }
    }
    (sigma, v)
}

/// What the ascent maximizes, as a function of the dual image `z = (x*(x_n))`.
#[derive(Clone, Copy)]
enum DualObjective {
    /// The lp norm of the dual image.
    SeqNorm(f64),
    /// `K_{1,2}(z, t)`.
    K12(f64),
}

impl DualObjective {
    fn eval(&self, z: &[f64]) -> f64 {
        match *self {
            DualObjective::SeqNorm(p) => lp_norm(z, p),
            DualObjective::K12(t) => k12_value(z, t).0,
        }
    }

    /// A supergradient with respect to `z` (the maximizing dual vector of
    /// the inner program, by the envelope theorem).
    fn grad(&self, z: &[f64], out: &mut Vec<f64>) {
        out.clear();
        match *self {
            DualObjective::SeqNorm(p) => {
                if p == 1.0 {
                    out.extend(z.iter().map(|x| x.signum()));
                } else {
                    let norm = lp_norm(z, p);
                    if norm == 0.0 {
                        out.extend(std::iter::repeat_n(0.0, z.len()));
                    } else if p == 2.0 {
                        out.extend(z.iter().map(|x| x / norm));
                    } else {
                        out.extend(
                            z.iter()
                                .map(|x| x.signum() * (x.abs() / norm).powf(p - 1.0)),
                        );
                    }
                }
            }
            DualObjective::K12(t) => {
                let (_, rho) = k12_value(z, t);
                let l2_part = clipped_l2(z, rho);
                out.extend(z.iter().map(|&x| {
                    if x.abs() > rho {
                        x.signum()
                    } else if l2_part > 0.0 {
                        t * x / l2_part
                    } else {
                        0.0
                    }
                }));
            }
        }
    }
}

fn clipped_l2(z: &[f64], rho: f64) -> f64 {
    z.iter()
        .map(|x| {
            let c = x.abs().min(rho);
            c * c
        })
        .sum::<f64>()
        .sqrt()
}

/// Multi-start projected ascent over the dual unit sphere. Returns the best
/// value found and the functional achieving it; always a lower bound on the
/// true supremum because every iterate is feasible.
fn dual_sphere_ascent(
    fam: &CoefficientFamily,
    objective: DualObjective,
    cfg: &AscentConfig,
) -> (f64, Array1<f64>) {
    let m = fam.dim();
    let p_dual = fam.space().family().dual_exponent();
    let normalize = |u: &mut Array1<f64>| {
        let norm = lp_norm(u.as_slice().unwrap(), p_dual);
        if norm > 0.0 {
            u.mapv_inplace(|x| x / norm);
        } else {
            u.fill(0.0);
            u[0] = 1.0;
        }
    };

    let (_, seed_vector) = top_singular(fam.coeffs());
    let mut best_val = f64::NEG_INFINITY;
    let mut best_u = seed_vector.clone();
    let mut grad_z = Vec::with_capacity(fam.len());

    for r in 0..cfg.restarts {
        let mut u = if r == 0 {
            seed_vector.clone()
        } else {
            let mut g = SplitMix64::keyed(cfg.seed, r as u64);
            Array1::from_iter((0..m).map(|_| g.next_unit()))
        };
        normalize(&mut u);
        let mut eta = 0.5;
        for _ in 0..cfg.steps {
            let z = fam.coeffs().dot(&u);
            let val = objective.eval(z.as_slice().unwrap());
            if val > best_val {
                best_val = val;
                best_u = u.clone();
            }
            objective.grad(z.as_slice().unwrap(), &mut grad_z);
            let g_u = fam.coeffs().t().dot(&Array1::from(grad_z.clone()));
            let g_norm = lp_norm(g_u.as_slice().unwrap(), 2.0);
            if g_norm == 0.0 {
                break;
            }
            u = &u + &(&g_u * (eta / g_norm));
            normalize(&mut u);
            eta *= cfg.decay;
        }
        let z = fam.coeffs().dot(&u);
        let val = objective.eval(z.as_slice().unwrap());
        if val > best_val {
            best_val = val;
            best_u = u;
        }
    }
    (best_val.max(0.0), best_u)
}

fn witness(fam: &CoefficientFamily, u: Array1<f64>) -> Result<DualFunctional> {
    Ok(DualFunctional::new(&fam.space(), u)?.normalized())
}

fn coordinate_witness(fam: &CoefficientFamily, j: usize) -> Result<DualFunctional> {
    let mut v = Array1::zeros(fam.dim());
    v[j] = 1.0;
    DualFunctional::new(&fam.space(), v)
}

fn vertex_witness(fam: &CoefficientFamily, code: u64) -> Result<DualFunctional> {
    // Bit k of the Gray code means coordinate k+1 carries sign -1; the
    // first coordinate is fixed +1 (the objectives are even).
    let v = Array1::from_iter((0..fam.dim()).map(|k| {
        if k == 0 || code >> (k - 1) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }));
    DualFunctional::new(&fam.space(), v)
}

fn columns(fam: &CoefficientFamily) -> Vec<Vec<f64>> {
    (0..fam.dim()).map(|j| fam.column(j).to_vec()).collect()
}

enum EvalMode<'a> {
    Auto(&'a AscentConfig),
    ExactOnly,
}

fn weak_lp_norm_impl(fam: &CoefficientFamily, p: f64, mode: EvalMode) -> Result<Evaluated> {
    if !(p >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "weak-lp exponent must be >= 1, got {p}"
        )));
    }
    // One-dimensional spaces: the dual ball is [-1, 1] for every family tag.
    if fam.dim() == 1 {
        let value = lp_norm(fam.column(0).as_slice().unwrap(), p);
        return Ok(Evaluated {
            value,
            exactness: Exactness::Exact,
            witness: Some(coordinate_witness(fam, 0)?),
        });
    }
    match fam.space().family() {
        SpaceFamily::LInf => {
            // Coordinatewise identity: the sup over the l1 ball is the max
            // over columns.
            let (j, value) = (0..fam.dim())
                .map(|j| lp_norm(fam.column(j).as_slice().unwrap(), p))
                .enumerate()
                .fold((0usize, f64::NEG_INFINITY), |acc, (j, v)| {
                    if v > acc.1 {
                        (j, v)
                    } else {
                        acc
                    }
                });
            Ok(Evaluated {
                value,
                exactness: Exactness::Exact,
                witness: Some(coordinate_witness(fam, j)?),
            })
        }
        SpaceFamily::L1 => {
            if fam.dim() > L1_VERTEX_CAP {
                return match mode {
                    EvalMode::ExactOnly => Err(Error::Capacity(format!(
                        "exact weak-lp over l1^{} needs 2^{} dual vertices (cap {})",
                        fam.dim(),
                        fam.dim(),
                        L1_VERTEX_CAP
                    ))),
                    EvalMode::Auto(cfg) => {
                        let (value, u) = dual_sphere_ascent(fam, DualObjective::SeqNorm(p), cfg);
                        Ok(Evaluated {
                            value,
                            exactness: Exactness::LowerBound,
                            witness: Some(witness(fam, u)?),
                        })
                    }
                };
            }
            let (value, code) = max_over_signed_sums(&columns(fam), |z| lp_norm(z, p));
            Ok(Evaluated {
                value,
                exactness: Exactness::Exact,
                witness: Some(vertex_witness(fam, code)?),
            })
        }
        SpaceFamily::L2 if p == 2.0 => {
            let (value, u) = top_singular(fam.coeffs());
            Ok(Evaluated {
                value,
                exactness: Exactness::Exact,
                witness: Some(witness(fam, u)?),
            })
        }
        SpaceFamily::L2 if p == 1.0 && fam.len() <= SIGN_PATTERN_CAP => {
            // sup_u sum_n |<u, x_n>| = max over sign patterns of ||sum s_n x_n||_2.
            let rows: Vec<Vec<f64>> = (0..fam.len()).map(|n| fam.row(n).to_vec()).collect();
            let (value, code) = max_over_signed_sums(&rows, |z| lp_norm(z, 2.0));
            // The maximizing functional is the normalized signed sum.
            let mut sum = Array1::zeros(fam.dim());
            for (idx, row) in rows.iter().enumerate() {
                let sign = if idx == 0 || code >> (idx - 1) & 1 == 0 {
                    1.0
                } else {
                    -1.0
                };
                for (s, x) in sum.iter_mut().zip(row) {
                    *s += sign * x;
                }
            }
            let norm = lp_norm(sum.as_slice().unwrap(), 2.0);
            let u = if norm > 0.0 {
                sum / norm
            } else {
                Array1::from_iter((0..fam.dim()).map(|k| if k == 0 { 1.0 } else { 0.0 }))
            };
            Ok(Evaluated {
                value,
                exactness: Exactness::Exact,
                witness: Some(witness(fam, u)?),
            })
        }
        _ => match mode {
            EvalMode::ExactOnly => Err(Error::Unsupported(format!(
                "no exact weak-lp evaluation for {} with p = {p}",
                fam.space()
            ))),
            EvalMode::Auto(cfg) => {
                let (value, u) = dual_sphere_ascent(fam, DualObjective::SeqNorm(p), cfg);
                Ok(Evaluated {
                    value,
                    exactness: Exactness::LowerBound,
                    witness: Some(witness(fam, u)?),
                })
            }
        },
    }
}

/// `l^w_p((x_n)) = sup { ||(x*(x_n))||_p : ||x*|| <= 1 }` with default
/// ascent settings where no exact path exists.
pub fn weak_lp_norm(fam: &CoefficientFamily, p: f64) -> Result<Evaluated> {
    weak_lp_norm_with(fam, p, &AscentConfig::default())
}

pub fn weak_lp_norm_with(
    fam: &CoefficientFamily,
    p: f64,
    cfg: &AscentConfig,
) -> Result<Evaluated> {
    weak_lp_norm_impl(fam, p, EvalMode::Auto(cfg))
}

/// Like [`weak_lp_norm`] but errors where only a lower bound is available.
pub fn weak_lp_norm_exact(fam: &CoefficientFamily, p: f64) -> Result<Evaluated> {
    weak_lp_norm_impl(fam, p, EvalMode::ExactOnly)
}

fn kw12_impl(fam: &CoefficientFamily, t: f64, mode: EvalMode) -> Result<Evaluated> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "Kw parameter t must be >= 0, got {t}"
        )));
    }
    if fam.dim() == 1 {
        let value = k12_value(fam.column(0).as_slice().unwrap(), t).0;
        return Ok(Evaluated {
            value,
            exactness: Exactness::Exact,
            witness: Some(coordinate_witness(fam, 0)?),
        });
    }
    match fam.space().family() {
        SpaceFamily::LInf => {
            let (j, value) = (0..fam.dim())
                .map(|j| k12_value(fam.column(j).as_slice().unwrap(), t).0)
                .enumerate()
                .fold((0usize, f64::NEG_INFINITY), |acc, (j, v)| {
                    if v > acc.1 {
                        (j, v)
                    } else {
                        acc
                    }
                });
            Ok(Evaluated {
                value,
                exactness: Exactness::Exact,
                witness: Some(coordinate_witness(fam, j)?),
            })
        }
        SpaceFamily::L1 => {
            if fam.dim() > L1_VERTEX_CAP {
                return match mode {
                    EvalMode::ExactOnly => Err(Error::Capacity(format!(
                        "exact Kw over l1^{} needs 2^{} dual vertices (cap {})",
                        fam.dim(),
                        fam.dim(),
                        L1_VERTEX_CAP
                    ))),
                    EvalMode::Auto(cfg) => {
                        let (value, u) = dual_sphere_ascent(fam, DualObjective::K12(t), cfg);
                        Ok(Evaluated {
                            value,
                            exactness: Exactness::LowerBound,
                            witness: Some(witness(fam, u)?),
                        })
                    }
                };
            }
            let (value, code) = max_over_signed_sums(&columns(fam), |z| k12_value(z, t).0);
            Ok(Evaluated {
                value,
                exactness: Exactness::Exact,
                witness: Some(vertex_witness(fam, code)?),
            })
        }
        _ => match mode {
            EvalMode::ExactOnly => Err(Error::Unsupported(format!(
                "no exact Kw evaluation for {}; the dual ball has no finite extreme set",
                fam.space()
            ))),
            EvalMode::Auto(cfg) => {
                let (value, u) = dual_sphere_ascent(fam, DualObjective::K12(t), cfg);
                Ok(Evaluated {
                    value,
                    exactness: Exactness::LowerBound,
                    witness: Some(witness(fam, u)?),
                })
            }
        },
    }
}

/// `Kw_{1,2}((x_n), t) = sup { K_{1,2}((x*(x_n)), t) : ||x*|| <= 1 }`.
pub fn kw12(fam: &CoefficientFamily, t: f64) -> Result<Evaluated> {
    kw12_with(fam, t, &AscentConfig::default())
}

pub fn kw12_with(fam: &CoefficientFamily, t: f64, cfg: &AscentConfig) -> Result<Evaluated> {
    kw12_impl(fam, t, EvalMode::Auto(cfg))
}

/// Like [`kw12`] but errors where only a lower bound is available.
pub fn kw12_exact(fam: &CoefficientFamily, t: f64) -> Result<Evaluated> {
    kw12_impl(fam, t, EvalMode::ExactOnly)
}

/// One grid point of a [`KProfile`].
#[derive(Clone, Debug)]
pub struct ProfilePoint {
    pub t: f64,
    pub value: f64,
    pub exactness: Exactness,
    pub witness: Option<DualFunctional>,
}

/// `t -> Kw_{1,2}((x_n), t)` sampled on a grid, with a certified Lipschitz
/// bound (the weak-l2 norm).
#[derive(Clone, Debug)]
pub struct KProfile {
    family: CoefficientFamily,
    points: Vec<ProfilePoint>,
    lipschitz_bound: f64,
    lipschitz_exact: bool,
}

impl KProfile {
    pub fn family(&self) -> &CoefficientFamily {
        &self.family
    }

    pub fn points(&self) -> &[ProfilePoint] {
        &self.points
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    pub fn lipschitz_exact(&self) -> bool {
        self.lipschitz_exact
    }

    pub fn is_exact(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.exactness == Exactness::Exact)
    }
}

/// Evaluate `Kw` on a strictly increasing nonnegative grid and validate the
/// monotonicity and Lipschitz structure after the fact.
///
/// Exact profiles must satisfy both properties up to `1e-9` slack or an
/// error is returned. Lower-bound points are lifted to the running maximum
/// (a lower bound at a smaller `t` is still one at a larger `t`), and the
/// Lipschitz validation is skipped when the bound itself is not exact.
pub fn kw_profile(fam: &CoefficientFamily, grid: &[f64], cfg: &AscentConfig) -> Result<KProfile> {
    validate_grid(grid)?;
    let lips = weak_lp_norm_with(fam, 2.0, cfg)?;
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        let e = kw12_with(fam, t, cfg)?;
        points.push(ProfilePoint {
            t,
            value: e.value,
            exactness: e.exactness,
            witness: e.witness,
        });
    }

    let mut running = 0.0f64;
    for p in points.iter_mut() {
        match p.exactness {
            Exactness::Exact => {
                if p.value < running - 1e-9 * (1.0 + running) {
                    return Err(Error::InvalidInput(format!(
                        "Kw profile is not nondecreasing at t = {} ({} < {})",
                        p.t, p.value, running
                    )));
                }
            }
            Exactness::LowerBound => {
                if p.value < running {
                    p.value = running;
                }
            }
        }
        running = running.max(p.value);
    }
    if lips.exactness == Exactness::Exact {
        for w in points.windows(2) {
            let dv = w[1].value - w[0].value;
            let dt = w[1].t - w[0].t;
            if dv > lips.value * dt + 1e-9 * (1.0 + lips.value) {
                return Err(Error::InvalidInput(format!(
                    "Kw profile violates the Lipschitz bound {} between t = {} and {}",
                    lips.value, w[0].t, w[1].t
                )));
            }
        }
    }
    Ok(KProfile {
        family: fam.clone(),
        points,
        lipschitz_bound: lips.value,
        lipschitz_exact: lips.exactness == Exactness::Exact,
    })
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidInput(
            "grid entries must be finite and nonnegative".into(),
        ));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// The coordinatewise split certificate for sup-norm families.
///
/// Splitting each coordinate sequence by its own optimal `K_{1,2}` split and
/// taking weak norms columnwise costs at most a factor 2 against `Kw`:
/// each column contributes `K_{1,2}(column, t) <= Kw`, once through the
/// weak-l1 part and once through the weak-l2 part.
#[derive(Clone, Debug)]
pub struct SplitCertificate {
    pub part_l1: CoefficientFamily,
    pub part_l2: CoefficientFamily,
    /// `l^w_1` of the first part (exact columnwise max).
    pub weak_l1: f64,
    /// `l^w_2` of the second part (exact columnwise max).
    pub weak_l2: f64,
    /// `weak_l1 + t * weak_l2`.
    pub bound: f64,
    pub kw: f64,
    /// `bound / kw`, defined as 1 for the zero family.
    pub ratio: f64,
    /// Whether `bound <= 2 kw + 1e-8` held.
    pub certified: bool,
}

/// Construct the coordinatewise split of a sup-norm family at parameter `t`.
pub fn coordinate_split(fam: &CoefficientFamily, t: f64) -> Result<SplitCertificate> {
    if fam.space().family() != SpaceFamily::LInf {
        return Err(Error::Unsupported(format!(
            "the coordinatewise split certificate needs a sup-norm space, got {}",
            fam.space()
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("t must be >= 0, got {t}")));
    }
    let n = fam.len();
    let m = fam.dim();
    let mut part1 = Array2::zeros((n, m));
    let mut part2 = Array2::zeros((n, m));
    let mut weak_l1 = 0.0f64;
    let mut weak_l2 = 0.0f64;
    for j in 0..m {
        let col = ScalarSeq::new(fam.column(j).to_vec())?;
        let kv = crate::kfunc::k12_exact(&col, t)?;
        weak_l1 = weak_l1.max(lp_norm(&kv.split_l1, 1.0));
        weak_l2 = weak_l2.max(lp_norm(&kv.split_l2, 2.0));
        for i in 0..n {
            part1[(i, j)] = kv.split_l1[i];
            part2[(i, j)] = kv.split_l2[i];
        }
    }
    let bound = weak_l1 + t * weak_l2;
    let kw = kw12_exact(fam, t)?.value;
    let ratio = if kw == 0.0 {
        if bound.abs() <= 1e-12 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        bound / kw
    };
    Ok(SplitCertificate {
        part_l1: CoefficientFamily::new(fam.space(), part1)?,
        part_l2: CoefficientFamily::new(fam.space(), part2)?,
        weak_l1,
        weak_l2,
        bound,
        kw,
        ratio,
        certified: bound <= 2.0 * kw + 1e-8,
    })
}
