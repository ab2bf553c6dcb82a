//! Exact and sampled distributions of `S = ||sum_n eps_n x_n||`.
//!
//! For `N <= 24` coefficients the full distribution is enumerated: the sign
//! symmetry `||X(-eps)|| = ||X(eps)||` halves the work to `2^(N-1)` patterns,
//! visited in Gray-code order with one `+- 2 x_k` update per step. Larger
//! families fall back to Monte Carlo with counter-based sign generation, so
//! a `(seed, samples)` pair names one exact empirical measure regardless of
//! thread count or chunking.
//!
//! All scalar statistics (tails, decreasing rearrangement, moments, weak-Lp
//! and Orlicz norms, medians) are computed from the atom list, identically
//! for exact and empirical distributions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::signs::{flip_bit, gray, map_chunks};
use crate::space::{lp_norm, CoefficientFamily};

/// Default cap on exact enumeration (`2^23` patterns after symmetry).
pub const EXACT_DEFAULT_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DistKind {
    Exact,
    Empirical,
}

impl std::fmt::Display for DistKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistKind::Exact => write!(f, "EXACT"),
            DistKind::Empirical => write!(f, "EMPIRICAL"),
        }
    }
}

/// One support point with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub count: u64,
}

/// A distribution on `[0, inf)` given by finitely many atoms.
///
/// Counts are kept as integers and divided by the total weight only at the
/// point of use, so exact-mode probabilities are the dyadic rationals
/// `count / 2^(N-1)` with no accumulated rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct DistSummary {
    kind: DistKind,
    atoms: Vec<Atom>,
    /// Cumulative counts; `cum[i]` is the number of outcomes `<= atoms[i].value`.
    cum: Vec<u64>,
    total: u64,
    seed: Option<u64>,
}

impl DistSummary {
    fn from_values(kind: DistKind, mut values: Vec<f64>, seed: Option<u64>) -> Self {
        assert!(!values.is_empty());
        values.par_sort_unstable_by(f64::total_cmp);
        let total = values.len() as u64;
        let mut atoms: Vec<Atom> = Vec::new();
        for &value in &values {
            match atoms.last_mut() {
                Some(a) if a.value == value => a.count += 1,
                _ => atoms.push(Atom { value, count: 1 }),
            }
        }
        let mut cum = Vec::with_capacity(atoms.len());
        let mut acc = 0u64;
        for a in &atoms {
            acc += a.count;
            cum.push(acc);
        }
        DistSummary {
            kind,
            atoms,
            cum,
            total,
            seed,
        }
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Total outcome count (`2^(N-1)` for exact, the sample count otherwise).
    pub fn total_count(&self) -> u64 {
        self.total
    }

    pub fn sample_count(&self) -> Option<u64> {
        (self.kind == DistKind::Empirical).then_some(self.total)
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `(value, probability)` pairs, ascending in value.
    pub fn probabilities(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let t = self.total as f64;
        self.atoms.iter().map(move |a| (a.value, a.count as f64 / t))
    }

    pub fn min_value(&self) -> f64 {
        self.atoms[0].value
    }

    pub fn max_value(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].value
    }

    pub fn is_zero(&self) -> bool {
        self.max_value() == 0.0
    }

    /// Number of outcomes with value strictly above `s`.
    fn tail_count(&self, s: f64) -> u64 {
        let idx = self.atoms.partition_point(|a| a.value <= s);
        if idx == 0 {
            self.total
        } else {
            self.total - self.cum[idx - 1]
        }
    }

    /// `P(S > s)`, strict.
    pub fn tail(&self, s: f64) -> f64 {
        self.tail_count(s) as f64 / self.total as f64
    }

    /// `P(|S - center| > t)`.
    pub fn abs_deviation_tail(&self, center: f64, t: f64) -> f64 {
        let count: u64 = self
            .atoms
            .iter()
            .filter(|a| (a.value - center).abs() > t)
            .map(|a| a.count)
            .sum();
        count as f64 / self.total as f64
    }

    /// The decreasing rearrangement `S*(t) = inf { s > 0 : P(S > s) <= t }`.
    pub fn rearrangement(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidInput(format!(
                "rearrangement argument must lie in (0,1), got {t}"
            )));
        }
        let total = self.total as f64;
        for (i, a) in self.atoms.iter().enumerate() {
            let tail = (self.total - self.cum[i]) as f64 / total;
            if tail <= t {
                return Ok(a.value);
            }
        }
        unreachable!("tail after the last atom is 0")
    }

    /// `E S`.
    pub fn mean(&self) -> f64 {
        let t = self.total as f64;
        self.atoms
            .iter()
            .map(|a| a.value * (a.count as f64 / t))
            .sum()
    }

    /// `E S^2`.
    pub fn second_moment(&self) -> f64 {
        let t = self.total as f64;
        self.atoms
            .iter()
            .map(|a| a.value * a.value * (a.count as f64 / t))
            .sum()
    }

    /// `(E S^p)^(1/p)`. Evaluated with the support scaled by its maximum so
    /// that large `p` cannot overflow `|v|^p`.
    pub fn moment(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "moment exponent must be >= 1, got {p}"
            )));
        }
        let top = self.max_value();
        if top == 0.0 {
            return Ok(0.0);
        }
        let t = self.total as f64;
        let sum: f64 = self
            .atoms
            .iter()
            .map(|a| (a.count as f64 / t) * (a.value / top).powf(p))
            .sum();
        Ok(top * sum.powf(1.0 / p))
    }

    /// Weak-Lp norm `sup_{0<t<1} t^(1/p) S*(t)`.
    ///
    /// `S*` is a right-continuous step function; on each constancy interval
    /// the supremand increases in `t`, so the sup is the max over atoms of
    /// `tail(previous atom)^(1/p) * value`, with the first factor being 1.
    pub fn weak_lp_rv(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(Error::InvalidInput(format!(
                "weak-Lp exponent must be positive, got {p}"
            )));
        }
        let total = self.total as f64;
        let mut best = 0.0f64;
        for (i, a) in self.atoms.iter().enumerate() {
            let level = if i == 0 {
                1.0
            } else {
                (self.total - self.cum[i - 1]) as f64 / total
            };
            best = best.max(level.powf(1.0 / p) * a.value);
        }
        Ok(best)
    }

    /// Luxemburg norm for `Psi_q(x) = exp(x^q) - 1`:
    /// the smallest `c` with `E Psi_q(S / c) <= 1`, by bisection.
    pub fn orlicz_norm(&self, q: f64) -> Result<f64> {
        if !(q > 0.0) {
            return Err(Error::InvalidInput(format!(
                "Orlicz exponent must be positive, got {q}"
            )));
        }
        let top = self.max_value();
        if top == 0.0 {
            return Ok(0.0);
        }
        let t = self.total as f64;
        let expectation = |c: f64| -> f64 {
            self.atoms
                .iter()
                .map(|a| (a.count as f64 / t) * ((a.value / c).powf(q).exp() - 1.0))
                .sum()
        };
        // Bracket: at the upper end even the max atom contributes at most
        // exp(ln 2) - 1 = 1; at the lower end the smallest atom probability
        // alone already pushes the expectation to 1.
        let w_min = self
            .atoms
            .iter()
            .map(|a| a.count)
            .min()
            .expect("nonempty") as f64
            / t;
        let k = 1.0 + (1.0 / w_min).log2().ceil();
        let mut lo = top / (k * std::f64::consts::LN_2).powf(1.0 / q);
        let mut hi = top / std::f64::consts::LN_2.powf(1.0 / q);
        debug_assert!(expectation(hi) <= 1.0 + 1e-12);
        debug_assert!(expectation(lo) >= 1.0 - 1e-12);
        for _ in 0..200 {
            if hi - lo <= 1e-10 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if expectation(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Lower median: `inf { s : P(S <= s) >= 1/2 }`.
    pub fn median(&self) -> f64 {
        for (i, a) in self.atoms.iter().enumerate() {
            if 2 * self.cum[i] >= self.total {
                return a.value;
            }
        }
        unreachable!("cumulative distribution reaches 1")
    }

    /// Kolmogorov-Smirnov distance `sup_s |F(s) - G(s)|`.
    pub fn ks_distance(&self, other: &DistSummary) -> f64 {
        let mut values: Vec<f64> = self
            .atoms
            .iter()
            .chain(other.atoms.iter())
            .map(|a| a.value)
            .collect();
        values.sort_unstable_by(f64::total_cmp);
        values.dedup();
        let cdf = |d: &DistSummary, s: f64| -> f64 {
            let idx = d.atoms.partition_point(|a| a.value <= s);
            if idx == 0 {
                0.0
            } else {
                d.cum[idx - 1] as f64 / d.total as f64
            }
        };
        values
            .iter()
            .map(|&v| (cdf(self, v) - cdf(other, v)).abs())
            .fold(0.0, f64::max)
    }
}

/// How to turn a coefficient family into a distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleMode {
    Exact { cap: usize },
    MonteCarlo { samples: u64, seed: u64 },
}

impl SampleMode {
    pub fn exact() -> Self {
        SampleMode::Exact {
            cap: EXACT_DEFAULT_CAP,
        }
    }
}

/// A Rademacher series `sum_n eps_n x_n` with a sampling mode attached.
#[derive(Clone, Debug)]
pub struct RademacherModel {
    fam: CoefficientFamily,
    mode: SampleMode,
}

impl RademacherModel {
    pub fn new(fam: CoefficientFamily, mode: SampleMode) -> Result<Self> {
        if let SampleMode::Exact { cap } = mode {
            check_exact_cap(fam.len(), cap)?;
        }
        Ok(RademacherModel { fam, mode })
    }

    pub fn family(&self) -> &CoefficientFamily {
        &self.fam
    }

    pub fn mode(&self) -> SampleMode {
        self.mode
    }

    pub fn distribution(&self) -> Result<DistSummary> {
        match self.mode {
            SampleMode::Exact { cap } => enumerate_exact_with_cap(&self.fam, cap),
            SampleMode::MonteCarlo { samples, seed } => sample_mc(&self.fam, samples, seed),
        }
    }
}

fn check_exact_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Capacity(format!(
            "exact enumeration visits 2^(N-1) sign patterns; N = {n} exceeds the cap {cap} \
             (raise it explicitly, or use Monte Carlo sampling)"
        )));
    }
    Ok(())
}

/// The exact law of `||sum eps_n x_n||` for `N <= 24`.
pub fn enumerate_exact(fam: &CoefficientFamily) -> Result<DistSummary> {
    enumerate_exact_with_cap(fam, EXACT_DEFAULT_CAP)
}

/// Exact enumeration with an explicit pattern cap (2^(cap-1) patterns).
pub fn enumerate_exact_with_cap(fam: &CoefficientFamily, cap: usize) -> Result<DistSummary> {
    let n = fam.len();
    check_exact_cap(n, cap)?;
    if n > 50 {
        return Err(Error::Capacity(
            "counts above 2^50 are no longer exactly representable".into(),
        ));
    }
    let rows: Vec<Vec<f64>> = fam
        .coeffs()
        .rows()
        .into_iter()
        .map(|r| r.to_vec())
        .collect();
    let m = fam.dim();
    let p = fam.space().family().exponent();
    let bits = (n - 1) as u32;

    let chunk_values: Vec<Vec<f64>> = map_chunks(bits, |start, end| {
        let mut out = Vec::with_capacity((end - start) as usize);
        let mut sum = vec![0.0f64; m];
        let mut code = gray(start);
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
        out.push(lp_norm(&sum, p));
        for i in start + 1..end {
            let bit = flip_bit(i);
            let was_plus = code >> bit & 1 == 0;
            code ^= 1 << bit;
            let row = &rows[bit as usize + 1];
            if was_plus {
                for (s, x) in sum.iter_mut().zip(row) {
                    *s -= 2.0 * x;
                }
            } else {
                for (s, x) in sum.iter_mut().zip(row) {
                    *s += 2.0 * x;
                }
            }
            out.push(lp_norm(&sum, p));
        }
        out
    });

    let values = chunk_values.concat();
    Ok(DistSummary::from_values(DistKind::Exact, values, None))
}

/// Monte Carlo sampling of the law of `||sum eps_n x_n||`.
///
/// Sample `i` draws its signs from the counter-based stream keyed by
/// `(seed, i)`, one bit per coefficient, so the empirical measure depends
/// only on `(seed, samples)` and not on the parallel partitioning.
pub fn sample_mc(fam: &CoefficientFamily, samples: u64, seed: u64) -> Result<DistSummary> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let rows: Vec<Vec<f64>> = fam
        .coeffs()
        .rows()
        .into_iter()
        .map(|r| r.to_vec())
        .collect();
    let m = fam.dim();
    let p = fam.space().family().exponent();

    const MC_CHUNK: u64 = 1 << 14;
    let n_chunks = samples.div_ceil(MC_CHUNK);
    let chunk_values: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * MC_CHUNK;
            let end = ((c + 1) * MC_CHUNK).min(samples);
            let mut out = Vec::with_capacity((end - start) as usize);
            let mut sum = vec![0.0f64; m];
            for i in start..end {
                let mut g = SplitMix64::keyed(seed, i);
                sum.iter_mut().for_each(|x| *x = 0.0);
                let mut word = 0u64;
                let mut bits_left = 0u32;
                for row in &rows {
                    if bits_left == 0 {
                        word = g.next_u64();
                        bits_left = 64;
                    }
                    let sign = if word & 1 == 1 { -1.0 } else { 1.0 };
                    word >>= 1;
                    bits_left -= 1;
                    for (s, x) in sum.iter_mut().zip(row) {
                        *s += sign * x;
                    }
                }
                out.push(lp_norm(&sum, p));
            }
            out
        })
        .collect();

    let values = chunk_values.concat();
    Ok(DistSummary::from_values(
        DistKind::Empirical,
        values,
        Some(seed),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::rng::SplitMix64;
    use crate::space::SpaceSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scalar(values: &[f64]) -> CoefficientFamily {
        CoefficientFamily::scalar(values).unwrap()
    }

    fn exact(values: &[f64]) -> DistSummary {
        enumerate_exact(&scalar(values)).unwrap()
    }

    #[test]
    fn two_fair_coins() {
        let d = exact(&[1.0, 1.0]);
        let atoms: Vec<(f64, f64)> = d.probabilities().collect();
        assert_eq!(atoms, vec![(0.0, 0.5), (2.0, 0.5)]);
        assert_eq!(d.mean(), 1.0);
    }

    #[test]
    fn independent_unit_coordinates_are_constant() {
        let space = SpaceSpec::linf(2).unwrap();
        let fam = CoefficientFamily::from_rows(space, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let d = enumerate_exact(&fam).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert_eq!(d.atoms()[0].value, 1.0);
        assert_eq!(d.mean(), 1.0);
        assert_eq!(d.second_moment() - d.mean() * d.mean(), 0.0);
    }

    #[test]
    fn three_coins() {
        let d = exact(&[1.0, 1.0, 1.0]);
        let atoms: Vec<(f64, f64)> = d.probabilities().collect();
        assert_eq!(atoms, vec![(1.0, 0.75), (3.0, 0.25)]);
        assert_eq!(d.mean(), 1.5);
        // Orthogonality: E X^2 = sum a_n^2.
        assert_relative_eq!(d.moment(2.0).unwrap(), 3.0f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn capacity_error_above_cap() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        match enumerate_exact(&scalar(&a)) {
            Err(Error::Capacity(msg)) => assert!(msg.contains("Monte Carlo")),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn gray_increments_match_naive_recomputation() {
        let mut g = SplitMix64::keyed(31, 0);
        for &n in &[2usize, 5, 9, 13, 16] {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![2.0 * g.next_unit(), 2.0 * g.next_unit(), 2.0 * g.next_unit()])
                .collect();
            let fam =
                CoefficientFamily::from_rows(SpaceSpec::linf(3).unwrap(), &rows).unwrap();
            let naive = oracle::enumerate_naive(&fam);
            let d = enumerate_exact(&fam).unwrap();
            // Same multiset of values: compare the sorted lists.
            let mut naive_sorted = naive.clone();
            naive_sorted.sort_unstable_by(f64::total_cmp);
            let mut expanded = Vec::new();
            for a in d.atoms() {
                expanded.extend(std::iter::repeat_n(a.value, a.count as usize));
            }
            assert_eq!(naive_sorted.len(), expanded.len());
            for (x, y) in naive_sorted.iter().zip(&expanded) {
                assert_relative_eq!(x, y, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mc_matches_exact_probability_within_binomial_error() {
        let fam = scalar(&[1.0, 1.0]);
        let d = sample_mc(&fam, 1_000_000, 99).unwrap();
        let p2 = d
            .probabilities()
            .find(|(v, _)| *v == 2.0)
            .map(|(_, p)| p)
            .unwrap();
        assert!((p2 - 0.5).abs() < 0.002, "p2 = {p2}");
    }

    #[test]
    fn mc_is_partition_invariant_and_seed_stable() {
        let fam = scalar(&[0.3, -1.0, 2.5, 0.7]);
        let d1 = sample_mc(&fam, 40_000, 7).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let d2 = pool.install(|| sample_mc(&fam, 40_000, 7).unwrap());
        assert_eq!(d1, d2);
        let d3 = sample_mc(&fam, 40_000, 8).unwrap();
        assert_ne!(d1, d3);
    }

    #[test]
    fn ks_distance_between_exact_and_mc() {
        let mut g = SplitMix64::keyed(37, 0);
        let a: Vec<f64> = (0..10).map(|_| 2.0 * g.next_unit()).collect();
        let fam = scalar(&a);
        let ex = enumerate_exact(&fam).unwrap();
        let mc = sample_mc(&fam, 1_000_000, 5).unwrap();
        let ks = ex.ks_distance(&mc);
        assert!(ks <= 4.0 / (1_000_000f64).sqrt(), "ks = {ks}");
    }

    #[test]
    fn rearrangement_examples() {
        let d = exact(&[1.0, 1.0]); // atoms {0: 1/2, 2: 1/2}
        assert_eq!(d.rearrangement(0.25).unwrap(), 2.0);
        assert_eq!(d.rearrangement(0.75).unwrap(), 0.0);
        assert!(d.rearrangement(0.0).is_err());
        assert!(d.rearrangement(1.0).is_err());

        let c = exact(&[2.0]); // constant 2
        assert_eq!(c.rearrangement(0.1).unwrap(), 2.0);
        assert_eq!(c.rearrangement(0.9).unwrap(), 2.0);
    }

    #[test]
    fn tail_examples() {
        let d = exact(&[1.0, 1.0]);
        assert_eq!(d.tail(1.0), 0.5);
        assert_eq!(d.tail(-0.5), 1.0);
        assert_eq!(d.tail(2.0), 0.0);
        assert_eq!(d.tail(5.0), 0.0);
    }

    #[test]
    fn moment_examples() {
        let d = exact(&[1.0, 1.0]);
        assert_eq!(d.moment(1.0).unwrap(), 1.0);
        assert_relative_eq!(d.moment(2.0).unwrap(), 2.0f64.sqrt(), epsilon = 1e-15);
        let c = exact(&[3.0]);
        for p in [1.0, 2.0, 7.5, 100.0] {
            assert_relative_eq!(c.moment(p).unwrap(), 3.0, epsilon = 1e-12);
        }
        assert!(d.moment(0.5).is_err());
    }

    #[test]
    fn huge_moment_exponents_do_not_overflow() {
        let d = exact(&[10.0, 5.0, 1.0]);
        let m = d.moment(400.0).unwrap();
        assert!(m.is_finite());
        assert!(m <= d.max_value() + 1e-9 && m >= 0.9 * d.max_value());
    }

    #[test]
    fn weak_lp_rv_examples() {
        let c = exact(&[2.0]);
        assert_eq!(c.weak_lp_rv(3.0).unwrap(), 2.0);
        let d = exact(&[1.0, 1.0]);
        assert_eq!(d.weak_lp_rv(1.0).unwrap(), 1.0);
    }

    #[test]
    fn orlicz_examples() {
        let one = exact(&[1.0]);
        assert_relative_eq!(
            one.orlicz_norm(2.0).unwrap(),
            1.0 / std::f64::consts::LN_2.sqrt(),
            max_relative = 1e-9
        );
        // Constant c scales: c / (ln 2)^(1/q).
        let c = exact(&[2.5]);
        assert_relative_eq!(
            c.orlicz_norm(3.0).unwrap(),
            2.5 / std::f64::consts::LN_2.powf(1.0 / 3.0),
            max_relative = 1e-9
        );
        // Two atoms {0: 1/2, 2: 1/2}: solve (1/2)(e^(2/c) - 1) = 1.
        let d = exact(&[1.0, 1.0]);
        assert_relative_eq!(
            d.orlicz_norm(1.0).unwrap(),
            2.0 / 3.0f64.ln(),
            max_relative = 1e-9
        );
        assert!(d.orlicz_norm(0.0).is_err());
    }

    #[test]
    fn median_examples() {
        assert_eq!(exact(&[1.0, 1.0]).median(), 0.0);
        assert_eq!(exact(&[4.0]).median(), 4.0);
        // Atoms {1: 1/4, 2: 1/4, 3: 1/2}: the CDF reaches 1/2 at 2.
        let d = DistSummary::from_values(
            DistKind::Exact,
            vec![1.0, 2.0, 3.0, 3.0],
            None,
        );
        assert_eq!(d.median(), 2.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn statistics_are_positively_homogeneous(
            xs in proptest::collection::vec(-2.0f64..2.0, 1..7),
            alpha in 0.1f64..4.0,
            p in 0.5f64..8.0,
        ) {
            let base = exact(&xs);
            let scaled_vals: Vec<f64> = xs.iter().map(|x| alpha * x).collect();
            let scaled = exact(&scaled_vals);
            prop_assert!((scaled.weak_lp_rv(p).unwrap() - alpha * base.weak_lp_rv(p).unwrap()).abs()
                <= 1e-10 * (1.0 + base.weak_lp_rv(p).unwrap()));
            if !base.is_zero() {
                let q = 1.0 + p;
                prop_assert!((scaled.orlicz_norm(q).unwrap() - alpha * base.orlicz_norm(q).unwrap()).abs()
                    <= 1e-8 * (1.0 + base.orlicz_norm(q).unwrap()));
            }
        }

        #[test]
        fn probabilities_sum_to_one(
            xs in proptest::collection::vec(-3.0f64..3.0, 1..10),
        ) {
            let d = exact(&xs);
            let sum: f64 = d.probabilities().map(|(_, w)| w).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            let counts: u64 = d.atoms().iter().map(|a| a.count).sum();
            prop_assert_eq!(counts, d.total_count());
        }
    }
}
