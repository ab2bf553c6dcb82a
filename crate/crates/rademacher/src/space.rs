//! Concrete finite-dimensional coefficient spaces.
//!
//! Everything downstream works with a family of vectors `x_1..x_N` living in
//! one of the spaces `lp^m` for `p in {1, 2, p, inf}`. The space fixes the
//! norm, the dual exponent `p'` with `1/p + 1/p' = 1`, and - where the dual
//! ball is a polytope - the finite set of extreme points over which convex
//! suprema are attained exactly.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Cap on exact enumeration of the `2^m` dual vertices of `l1^m`.
pub const L1_VERTEX_CAP: usize = 20;

/// The lp family tag. `Lp` carries a general exponent in `(1, inf)`;
/// the three classical cases keep their own tags.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpaceFamily {
    L1,
    L2,
    LInf,
    Lp(f64),
}

impl SpaceFamily {
    /// The norm exponent p (`f64::INFINITY` for sup norm).
    pub fn exponent(&self) -> f64 {
        match self {
            SpaceFamily::L1 => 1.0,
            SpaceFamily::L2 => 2.0,
            SpaceFamily::LInf => f64::INFINITY,
            SpaceFamily::Lp(p) => *p,
        }
    }

    /// The conjugate exponent p' with 1/p + 1/p' = 1.
    pub fn dual_exponent(&self) -> f64 {
        match self {
            SpaceFamily::L1 => f64::INFINITY,
            SpaceFamily::L2 => 2.0,
            SpaceFamily::LInf => 1.0,
            SpaceFamily::Lp(p) => p / (p - 1.0),
        }
    }
}

impl fmt::Display for SpaceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceFamily::L1 => write!(f, "l1"),
            SpaceFamily::L2 => write!(f, "l2"),
            SpaceFamily::LInf => write!(f, "linf"),
            SpaceFamily::Lp(p) => write!(f, "lp({p})"),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceSpecRepr {
    family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    dim: usize,
}

/// A concrete normed space `lp^m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceSpecRepr", into = "SpaceSpecRepr")]
pub struct SpaceSpec {
    family: SpaceFamily,
    dim: usize,
}

impl SpaceSpec {
    pub fn new(family: SpaceFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("space dimension must be >= 1".into()));
        }
        if let SpaceFamily::Lp(p) = family {
            if !p.is_finite() || p <= 1.0 {
                return Err(Error::InvalidInput(format!(
                    "LP exponent must lie in (1, inf), got {p}; p <= 1 is not a norm \
                     and the endpoints have their own tags"
                )));
            }
        }
        Ok(SpaceSpec { family, dim })
    }

    pub fn l1(dim: usize) -> Result<Self> {
        SpaceSpec::new(SpaceFamily::L1, dim)
    }

    pub fn l2(dim: usize) -> Result<Self> {
        SpaceSpec::new(SpaceFamily::L2, dim)
    }

    pub fn linf(dim: usize) -> Result<Self> {
        SpaceSpec::new(SpaceFamily::LInf, dim)
    }

    pub fn lp(p: f64, dim: usize) -> Result<Self> {
        SpaceSpec::new(SpaceFamily::Lp(p), dim)
    }

    pub fn family(&self) -> SpaceFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Parse the compact CLI form `linf:4`, `l1:3`, `l2:8`, `lp:2.5:6`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let err = || Error::InvalidInput(format!("bad space spec `{s}`, expected e.g. linf:4 or lp:2.5:6"));
        match parts.as_slice() {
            [fam, dim] => {
                let dim: usize = dim.parse().map_err(|_| err())?;
                match fam.to_ascii_lowercase().as_str() {
                    "l1" => SpaceSpec::l1(dim),
                    "l2" => SpaceSpec::l2(dim),
                    "linf" => SpaceSpec::linf(dim),
                    _ => Err(err()),
                }
            }
            [fam, p, dim] if fam.eq_ignore_ascii_case("lp") => {
                let p: f64 = p.parse().map_err(|_| err())?;
                let dim: usize = dim.parse().map_err(|_| err())?;
                SpaceSpec::lp(p, dim)
            }
            _ => Err(err()),
        }
    }

    /// The norm of `v` in this space.
    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v.len())?;
        Ok(lp_norm(v, self.family.exponent()))
    }

    /// The norm of `v` in the dual space `lp'^m`.
    pub fn dual_norm(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v.len())?;
        Ok(lp_norm(v, self.family.dual_exponent()))
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: len,
            });
        }
        Ok(())
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.family, self.dim)
    }
}

impl TryFrom<SpaceSpecRepr> for SpaceSpec {
    type Error = Error;

    fn try_from(r: SpaceSpecRepr) -> Result<Self> {
        let family = match r.family.to_ascii_uppercase().as_str() {
            "L1" => SpaceFamily::L1,
            "L2" => SpaceFamily::L2,
            "LINF" => SpaceFamily::LInf,
            "LP" => {
                let p = r.p.ok_or_else(|| {
                    Error::InvalidInput("family LP requires an exponent field `p`".into())
                })?;
                SpaceFamily::Lp(p)
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown space family `{other}`, expected L1, L2, LINF or LP"
                )))
            }
        };
        if !matches!(family, SpaceFamily::Lp(_)) && r.p.is_some() {
            return Err(Error::InvalidInput(format!(
                "field `p` is only meaningful for family LP, not {}",
                r.family
            )));
        }
        SpaceSpec::new(family, r.dim)
    }
}

impl From<SpaceSpec> for SpaceSpecRepr {
    fn from(s: SpaceSpec) -> Self {
        let (family, p) = match s.family {
            SpaceFamily::L1 => ("L1", None),
            SpaceFamily::L2 => ("L2", None),
            SpaceFamily::LInf => ("LINF", None),
            SpaceFamily::Lp(p) => ("LP", Some(p)),
        };
        SpaceSpecRepr {
            family: family.into(),
            p,
            dim: s.dim,
        }
    }
}

/// `(sum |v_j|^p)^(1/p)`, `max |v_j|` for the sup norm. Scaled by the largest
/// entry for general `p` so that `|v_j|^p` cannot overflow.
pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().fold(0.0, |acc, x| acc.max(x.abs()));
    }
    if p == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    if p == 2.0 {
        return v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    let m = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = v.iter().map(|x| (x.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// A family of `N` coefficient vectors stored as the rows of an `N x m` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientFamily {
    space: SpaceSpec,
    coeffs: Array2<f64>,
}

impl CoefficientFamily {
    pub fn new(space: SpaceSpec, coeffs: Array2<f64>) -> Result<Self> {
        if coeffs.nrows() == 0 {
            return Err(Error::InvalidInput(
                "coefficient family needs at least one vector".into(),
            ));
        }
        space.check_dim(coeffs.ncols())?;
        if coeffs.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "coefficient matrix contains a non-finite entry".into(),
            ));
        }
        Ok(CoefficientFamily { space, coeffs })
    }

    pub fn from_rows(space: SpaceSpec, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput(
                "coefficient family needs at least one vector".into(),
            ));
        }
        let m = rows[0].len();
        let mut flat = Vec::with_capacity(rows.len() * m);
        for r in rows {
            if r.len() != m {
                return Err(Error::InvalidInput(
                    "coefficient rows have inconsistent lengths".into(),
                ));
            }
            flat.extend_from_slice(r);
        }
        let coeffs = Array2::from_shape_vec((rows.len(), m), flat)
            .expect("shape checked above");
        CoefficientFamily::new(space, coeffs)
    }

    /// A scalar family (`m = 1`) from a plain sequence.
    pub fn scalar(values: &[f64]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = values.iter().map(|&a| vec![a]).collect();
        CoefficientFamily::from_rows(SpaceSpec::linf(1)?, &rows)
    }

    /// Load from CSV with header `j1..jm`, one row per coefficient vector.
    pub fn from_csv_path(space: SpaceSpec, path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_reader(space, file)
    }

    pub fn from_csv_reader<R: std::io::Read>(space: SpaceSpec, reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let m = headers.len();
        for (j, h) in headers.iter().enumerate() {
            let expected = format!("j{}", j + 1);
            if h.trim() != expected {
                return Err(Error::InvalidInput(format!(
                    "csv header column {} is `{}`, expected `{}`",
                    j + 1,
                    h,
                    expected
                )));
            }
        }
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let mut row = Vec::with_capacity(m);
            for field in record.iter() {
                let x: f64 = field.trim().parse().map_err(|_| {
                    Error::InvalidInput(format!("csv field `{field}` is not a number"))
                })?;
                row.push(x);
            }
            rows.push(row);
        }
        CoefficientFamily::from_rows(space, &rows)
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    /// Number of coefficient vectors N.
    pub fn len(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires N >= 1
    }

    pub fn dim(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn coeffs(&self) -> &Array2<f64> {
        &self.coeffs
    }

    pub fn row(&self, n: usize) -> ArrayView1<'_, f64> {
        self.coeffs.row(n)
    }

    pub fn column(&self, j: usize) -> Array1<f64> {
        self.coeffs.column(j).to_owned()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&x| x == 0.0)
    }

    /// The same family with every coefficient multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        CoefficientFamily::new(self.space, &self.coeffs * alpha)
    }

    /// For scalar families (`m = 1`), the underlying sequence.
    pub fn as_scalar(&self) -> Option<Array1<f64>> {
        (self.dim() == 1).then(|| self.column(0))
    }
}

/// A dual functional `x*` together with its certified dual norm.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFunctional {
    vector: Array1<f64>,
    dual_exponent: f64,
    certified_norm: f64,
}

impl DualFunctional {
    /// Wrap a dual vector, computing its norm in `lp'^m`.
    pub fn new(space: &SpaceSpec, vector: Array1<f64>) -> Result<Self> {
        space.check_dim(vector.len())?;
        let dual_exponent = space.family().dual_exponent();
        let certified_norm = lp_norm(vector.as_slice().expect("contiguous"), dual_exponent);
        Ok(DualFunctional {
            vector,
            dual_exponent,
            certified_norm,
        })
    }

    /// Rescale onto the dual unit sphere (no-op for the zero functional).
    /// The certified norm is recomputed after the division, not assumed to
    /// be exactly 1.
    pub fn normalized(&self) -> Self {
        if self.certified_norm == 0.0 {
            return self.clone();
        }
        let vector = &self.vector / self.certified_norm;
        let certified_norm = lp_norm(vector.as_slice().expect("contiguous"), self.dual_exponent);
        DualFunctional {
            vector,
            dual_exponent: self.dual_exponent,
            certified_norm,
        }
    }

    pub fn vector(&self) -> &Array1<f64> {
        &self.vector
    }

    pub fn certified_norm(&self) -> f64 {
        self.certified_norm
    }
}

/// Apply `x*` to every vector of the family: the scalar sequence `(x*(x_n))_n`.
pub fn apply_dual(xstar: &DualFunctional, fam: &CoefficientFamily) -> Result<Array1<f64>> {
    fam.space().check_dim(xstar.vector.len())?;
    Ok(fam.coeffs().dot(&xstar.vector))
}

/// The extreme points of the dual unit ball, exact where the ball is a polytope.
#[derive(Clone, Debug)]
pub enum DualExtremePoints {
    /// A finite extreme-point set (cross-polytope or cube vertices).
    Finite(Vec<Array1<f64>>),
    /// No finite extreme set; the ball is the unit ball of `lp'^m`.
    Sphere { exponent: f64 },
}

/// Extreme points of the dual unit ball of the space.
///
/// * `linf^m`: the dual ball is the `l1` ball, extreme points `{+-e_j}` (2m).
/// * `l1^m`: the dual ball is the `linf` cube, extreme points the `2^m` sign
///   vectors; capped at `m <= 20`.
/// * `l2^m`, `lp^m`: strictly convex dual ball, returns a sphere descriptor.
pub fn dual_extreme_points(space: &SpaceSpec) -> Result<DualExtremePoints> {
    let m = space.dim();
    match space.family() {
        SpaceFamily::LInf => {
            let mut pts = Vec::with_capacity(2 * m);
            for j in 0..m {
                for sign in [1.0, -1.0] {
                    let mut v = Array1::zeros(m);
                    v[j] = sign;
                    pts.push(v);
                }
            }
            Ok(DualExtremePoints::Finite(pts))
        }
        SpaceFamily::L1 => {
            if m > L1_VERTEX_CAP {
                return Err(Error::Capacity(format!(
                    "l1^{m} has 2^{m} dual vertices; exact enumeration is capped at m <= {L1_VERTEX_CAP}"
                )));
            }
            let mut pts = Vec::with_capacity(1 << m);
            for mask in 0u64..(1u64 << m) {
                let v = Array1::from_iter(
                    (0..m).map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 }),
                );
                pts.push(v);
            }
            Ok(DualExtremePoints::Finite(pts))
        }
        f => Ok(DualExtremePoints::Sphere {
            exponent: f.dual_exponent(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use approx::assert_relative_eq;

    fn spaces_under_test() -> Vec<SpaceSpec> {
        vec![
            SpaceSpec::l1(4).unwrap(),
            SpaceSpec::l2(4).unwrap(),
            SpaceSpec::linf(4).unwrap(),
            SpaceSpec::lp(2.5, 4).unwrap(),
        ]
    }

    fn random_vec(g: &mut SplitMix64, m: usize) -> Vec<f64> {
        (0..m).map(|_| 3.0 * g.next_unit()).collect()
    }

    #[test]
    fn norm_examples() {
        let linf = SpaceSpec::linf(2).unwrap();
        assert_eq!(linf.norm(&[3.0, -4.0]).unwrap(), 4.0);
        let l2 = SpaceSpec::l2(3).unwrap();
        assert_relative_eq!(l2.norm(&[1.0, 2.0, 2.0]).unwrap(), 3.0, max_relative = 1e-15);
        let l1 = SpaceSpec::l1(2).unwrap();
        assert_eq!(l1.norm(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn norm_rejects_dimension_mismatch() {
        let l2 = SpaceSpec::l2(3).unwrap();
        assert!(matches!(
            l2.norm(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn lp_below_one_is_rejected() {
        assert!(SpaceSpec::lp(0.5, 3).is_err());
        assert!(SpaceSpec::lp(1.0, 3).is_err());
        assert!(SpaceSpec::lp(f64::INFINITY, 3).is_err());
        assert!(SpaceSpec::lp(2.0, 3).is_ok());
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(SpaceSpec::l2(0).is_err());
    }

    #[test]
    fn norm_axioms_hold_on_random_triples() {
        for space in spaces_under_test() {
            let mut g = SplitMix64::keyed(11, space.dim() as u64);
            for _ in 0..10_000 {
                let u = random_vec(&mut g, 4);
                let v = random_vec(&mut g, 4);
                let alpha = 2.0 * g.next_unit();

                let nu = space.norm(&u).unwrap();
                let nv = space.norm(&v).unwrap();
                assert!(nu >= 0.0);

                let scaled: Vec<f64> = u.iter().map(|x| alpha * x).collect();
                assert_relative_eq!(
                    space.norm(&scaled).unwrap(),
                    alpha.abs() * nu,
                    max_relative = 1e-12,
                    epsilon = 1e-12
                );

                let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
                assert!(space.norm(&sum).unwrap() <= nu + nv + 1e-10);
            }
            assert_eq!(space.norm(&[0.0; 4]).unwrap(), 0.0);
        }
    }

    #[test]
    fn holder_inequality_on_random_pairs() {
        for space in spaces_under_test() {
            let mut g = SplitMix64::keyed(13, space.dim() as u64);
            for _ in 0..10_000 {
                let v = random_vec(&mut g, 4);
                let w = random_vec(&mut g, 4);
                let pairing: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
                let bound = space.dual_norm(&w).unwrap() * space.norm(&v).unwrap();
                assert!(
                    pairing.abs() <= bound + 1e-10,
                    "Holder violated in {space}: |{pairing}| > {bound}"
                );
            }
        }
    }

    #[test]
    fn apply_dual_examples() {
        let space = SpaceSpec::linf(2).unwrap();
        let fam =
            CoefficientFamily::from_rows(space, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let e1 = DualFunctional::new(&space, Array1::from(vec![1.0, 0.0])).unwrap();
        assert_eq!(apply_dual(&e1, &fam).unwrap().to_vec(), vec![1.0, 0.0]);

        let zero = DualFunctional::new(&space, Array1::from(vec![0.0, 0.0])).unwrap();
        assert_eq!(apply_dual(&zero, &fam).unwrap().to_vec(), vec![0.0, 0.0]);

        let fam2 =
            CoefficientFamily::from_rows(space, &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let ones = DualFunctional::new(&space, Array1::from(vec![1.0, 1.0])).unwrap();
        assert_eq!(apply_dual(&ones, &fam2).unwrap().to_vec(), vec![3.0, 7.0]);
    }

    #[test]
    fn dual_extreme_point_sets() {
        match dual_extreme_points(&SpaceSpec::linf(3).unwrap()).unwrap() {
            DualExtremePoints::Finite(pts) => {
                assert_eq!(pts.len(), 6);
                for p in &pts {
                    assert_eq!(p.iter().map(|x| x.abs()).sum::<f64>(), 1.0);
                }
            }
            _ => panic!("linf dual ball has finite extreme set"),
        }
        match dual_extreme_points(&SpaceSpec::l1(2).unwrap()).unwrap() {
            DualExtremePoints::Finite(pts) => {
                assert_eq!(pts.len(), 4);
                for p in &pts {
                    assert!(p.iter().all(|x| x.abs() == 1.0));
                }
            }
            _ => panic!("l1 dual ball has finite extreme set"),
        }
        match dual_extreme_points(&SpaceSpec::l2(5).unwrap()).unwrap() {
            DualExtremePoints::Sphere { exponent } => assert_eq!(exponent, 2.0),
            _ => panic!("l2 dual ball is a sphere"),
        }
        assert!(matches!(
            dual_extreme_points(&SpaceSpec::l1(21).unwrap()),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn linf_extreme_points_recover_the_norm() {
        let space = SpaceSpec::linf(4).unwrap();
        let pts = match dual_extreme_points(&space).unwrap() {
            DualExtremePoints::Finite(p) => p,
            _ => unreachable!(),
        };
        let mut g = SplitMix64::keyed(17, 0);
        for _ in 0..1000 {
            let v = random_vec(&mut g, 4);
            let best = pts
                .iter()
                .map(|p| p.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(best, space.norm(&v).unwrap());
        }
    }

    #[test]
    fn csv_round_trip_and_header_validation() {
        let space = SpaceSpec::l2(3).unwrap();
        let csv = "j1,j2,j3\n1.0,2.0,3.0\n-0.5,0.0,4.5\n";
        let fam = CoefficientFamily::from_csv_reader(space, csv.as_bytes()).unwrap();
        assert_eq!(fam.len(), 2);
        assert_eq!(fam.row(1).to_vec(), vec![-0.5, 0.0, 4.5]);

        let bad = "a,b,c\n1,2,3\n";
        assert!(CoefficientFamily::from_csv_reader(space, bad.as_bytes()).is_err());

        let wrong_dim = "j1,j2\n1,2\n";
        assert!(matches!(
            CoefficientFamily::from_csv_reader(space, wrong_dim.as_bytes()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn family_rejects_non_finite_entries() {
        let space = SpaceSpec::l2(2).unwrap();
        assert!(CoefficientFamily::from_rows(space, &[vec![1.0, f64::NAN]]).is_err());
    }

    #[test]
    fn space_spec_serde_round_trip() {
        for (text, expect) in [
            (r#"{"family":"LINF","dim":2}"#, SpaceSpec::linf(2).unwrap()),
            (r#"{"family":"LP","p":2.5,"dim":3}"#, SpaceSpec::lp(2.5, 3).unwrap()),
        ] {
            let s: SpaceSpec = serde_json::from_str(text).unwrap();
            assert_eq!(s, expect);
            let back: SpaceSpec =
                serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
            assert_eq!(back, expect);
        }
        assert!(serde_json::from_str::<SpaceSpec>(r#"{"family":"LP","dim":3}"#).is_err());
        assert!(serde_json::from_str::<SpaceSpec>(r#"{"family":"L3","dim":3}"#).is_err());
    }
}
