//! Safe regions over pointer-affecting variable values.
//!
//! A region answers one question: given the variable values observed at a
//! scope entry, is every array access in that scope already proven
//! in-bounds by some past fully-checked execution? Two region shapes are
//! supported:
//!
//! * [`UnionRegion`] — a Pareto frontier of verified points; a query is
//!   safe when some frontier point dominates it componentwise.
//! * [`HullRegion`] — the convex hull of the verified points together with
//!   their dominated box corners, which makes the hull downward-closed and
//!   lets it extrapolate along linear boundaries between observations.
//!
//! Queries return `Safe` or `Unknown`, never "unsafe": absence from a
//! region is merely absence of proof, and the caller falls back to full
//! checking.
//!
//! All variables are oriented "larger is safer" before they enter a region:
//! a negatively correlated variable `v` is stored as `c_max - v`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{build_hull, dominates, GeometryError, Hull, Point, COORD_MAX, MAX_HULL_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Correlation {
    Positive,
    Negative,
}

impl Correlation {
    pub fn symbol(self) -> char {
        match self {
            Correlation::Positive => '+',
            Correlation::Negative => '-',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(Correlation::Positive),
            '-' => Some(Correlation::Negative),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegionError {
    EmptySignature,
    DuplicateVariable(String),
    /// Raw input is missing a signature variable.
    MissingVariable(String),
    /// Raw value outside `[0, c_max]`; the caller must fall back to full
    /// checking for this execution.
    ValueOutOfRange {
        name: String,
        value: i64,
    },
    CMaxRange(u64),
    NoSamples,
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    DimensionCap {
        dim: usize,
    },
    Geometry(GeometryError),
}

impl fmt::Display for RegionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionError::EmptySignature => write!(f, "signature needs at least one variable"),
            RegionError::DuplicateVariable(n) => write!(f, "duplicate signature variable `{n}`"),
            RegionError::MissingVariable(n) => write!(f, "missing value for variable `{n}`"),
            RegionError::ValueOutOfRange { name, value } => {
                write!(f, "value {value} for `{name}` is outside [0, c_max]")
            }
            RegionError::CMaxRange(v) => write!(f, "c_max {v} outside [1, {COORD_MAX}]"),
            RegionError::NoSamples => write!(f, "a region needs at least one sample point"),
            RegionError::DimensionMismatch { expected, found } => {
                write!(
                    f,
                    "point dimension {found} does not match signature dimension {expected}"
                )
            }
            RegionError::DimensionCap { dim } => {
                write!(
                    f,
                    "signature dimension {dim} exceeds the maximum of {MAX_HULL_DIM}"
                )
            }
            RegionError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl From<GeometryError> for RegionError {
    fn from(e: GeometryError) -> Self {
        RegionError::Geometry(e)
    }
}

/// Ordered variable list with per-variable correlation signs. The order is
/// fixed for the lifetime of a region and defines the coordinate order of
/// every point in it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableSignature {
    names: Vec<String>,
    correlations: Vec<Correlation>,
    c_max: u64,
}

impl VariableSignature {
    pub fn new(vars: Vec<(String, Correlation)>, c_max: u64) -> Result<Self, RegionError> {
        if vars.is_empty() {
            return Err(RegionError::EmptySignature);
        }
        if vars.len() > MAX_HULL_DIM {
            return Err(RegionError::DimensionCap { dim: vars.len() });
        }
        if c_max == 0 || c_max > COORD_MAX {
            return Err(RegionError::CMaxRange(c_max));
        }
        let mut names = Vec::with_capacity(vars.len());
        let mut correlations = Vec::with_capacity(vars.len());
        for (name, corr) in vars {
            if names.contains(&name) {
                return Err(RegionError::DuplicateVariable(name));
            }
            names.push(name);
            correlations.push(corr);
        }
        Ok(Self {
            names,
            correlations,
            c_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn correlations(&self) -> &[Correlation] {
        &self.correlations
    }

    pub fn c_max(&self) -> u64 {
        self.c_max
    }

    pub fn vars(&self) -> impl Iterator<Item = (&str, Correlation)> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.correlations.iter().copied())
    }

    /// Map raw variable values to a region point: positively correlated
    /// variables pass through, negatively correlated ones become
    /// `c_max - value`, so that every coordinate reads "larger is safer".
    pub fn transform(&self, raw: &BTreeMap<String, i64>) -> Result<Point, RegionError> {
        let mut coords = Vec::with_capacity(self.names.len());
        for (name, corr) in self.names.iter().zip(&self.correlations) {
            let &value = raw
                .get(name)
                .ok_or_else(|| RegionError::MissingVariable(name.clone()))?;
            if value < 0 || value as u64 > self.c_max {
                return Err(RegionError::ValueOutOfRange {
                    name: name.clone(),
                    value,
                });
            }
            coords.push(match corr {
                Correlation::Positive => value as u64,
                Correlation::Negative => self.c_max - value as u64,
            });
        }
        Ok(Point::new(coords)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Safe,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RegionKind {
    Union,
    Hull,
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionKind::Union => write!(f, "union"),
            RegionKind::Hull => write!(f, "hull"),
        }
    }
}

/// Outcome of a region query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegionDecision {
    pub verdict: Verdict,
    pub region_kind: RegionKind,
}

impl RegionDecision {
    pub fn is_safe(&self) -> bool {
        self.verdict == Verdict::Safe
    }
}

/// Pareto-frontier region: the set of verified points that are maximal
/// under componentwise dominance. Regions are immutable snapshot values;
/// insertion returns a new region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnionRegion {
    signature: VariableSignature,
    frontier: Vec<Point>,
}

impl UnionRegion {
    pub fn empty(signature: VariableSignature) -> Self {
        Self {
            signature,
            frontier: Vec::new(),
        }
    }

    pub fn from_points(
        signature: VariableSignature,
        points: impl IntoIterator<Item = Point>,
    ) -> Result<Self, RegionError> {
        let mut region = Self::empty(signature);
        for p in points {
            region = region.insert(&p)?;
        }
        Ok(region)
    }

    pub fn signature(&self) -> &VariableSignature {
        &self.signature
    }

    /// Frontier points in lexicographic order (an antichain under dominance).
    pub fn frontier(&self) -> &[Point] {
        &self.frontier
    }

    pub fn insert(&self, p: &Point) -> Result<Self, RegionError> {
        self.check_dim(p)?;
        for q in &self.frontier {
            if dominates(q, p)? {
                return Ok(self.clone());
            }
        }
        let mut frontier: Vec<Point> = Vec::with_capacity(self.frontier.len() + 1);
        for q in &self.frontier {
            if !dominates(p, q)? {
                frontier.push(q.clone());
            }
        }
        frontier.push(p.clone());
        frontier.sort();
        Ok(Self {
            signature: self.signature.clone(),
            frontier,
        })
    }

    pub fn query(&self, p: &Point) -> Result<RegionDecision, RegionError> {
        self.check_dim(p)?;
        let safe = self
            .frontier
            .iter()
            .any(|q| dominates(q, p).unwrap_or(false));
        Ok(RegionDecision {
            verdict: if safe {
                Verdict::Safe
            } else {
                Verdict::Unknown
            },
            region_kind: RegionKind::Union,
        })
    }

    fn check_dim(&self, p: &Point) -> Result<(), RegionError> {
        if p.dim() != self.signature.dim() {
            return Err(RegionError::DimensionMismatch {
                expected: self.signature.dim(),
                found: p.dim(),
            });
        }
        Ok(())
    }
}

/// Evaluated integer-overflow guard for one candidate point: the raw
/// summand values of every access-index expression that is a plain sum of
/// signature variables and constants. A candidate is rejected when any
/// prefix sum would wrap the 32-bit unsigned range, because such a point
/// only looked safe due to wraparound.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OverflowSpec {
    pub term_lists: Vec<Vec<u64>>,
}

impl OverflowSpec {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn rejects(&self, c_max: u64) -> bool {
        self.term_lists
            .iter()
            .any(|terms| overflow_reject(terms, c_max))
    }
}

/// True (reject) iff some prefix sum of the raw index summands exceeds
/// `c_max`, i.e. the concrete index computation would wrap in 32-bit
/// unsigned arithmetic.
pub fn overflow_reject(terms: &[u64], c_max: u64) -> bool {
    let mut acc: u128 = 0;
    for &t in terms {
        acc += t as u128;
        if acc > c_max as u128 {
            return true;
        }
    }
    false
}

/// Convex-hull region: verified sample points plus the hull built over
/// them and their augmentation points.
#[derive(Clone, Debug)]
pub struct HullRegion {
    signature: VariableSignature,
    samples: Vec<Point>,
    hull: Hull,
}

impl HullRegion {
    /// Build a hull region from oracle-verified samples. The hull is
    /// constructed over the samples together with their augmentation
    /// points (see [`augmentation_points`]), which makes the region
    /// downward-closed: whenever a point is safe, so is every
    /// componentwise-smaller point.
    pub fn build(samples: Vec<Point>, signature: VariableSignature) -> Result<Self, RegionError> {
        if samples.is_empty() {
            return Err(RegionError::NoSamples);
        }
        for p in &samples {
            if p.dim() != signature.dim() {
                return Err(RegionError::DimensionMismatch {
                    expected: signature.dim(),
                    found: p.dim(),
                });
            }
        }
        let mut input = samples.clone();
        input.extend(augmentation_points(&samples));
        let hull = build_hull(&input)?;
        Ok(Self {
            signature,
            samples,
            hull,
        })
    }

    /// Reconstruct a region from stored parts (deserialization path).
    pub fn from_parts(signature: VariableSignature, samples: Vec<Point>, hull: Hull) -> Self {
        Self {
            signature,
            samples,
            hull,
        }
    }

    pub fn signature(&self) -> &VariableSignature {
        &self.signature
    }

    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    pub fn hull(&self) -> &Hull {
        &self.hull
    }

    pub fn query(&self, p: &Point) -> Result<RegionDecision, RegionError> {
        if p.dim() != self.signature.dim() {
            return Err(RegionError::DimensionMismatch {
                expected: self.signature.dim(),
                found: p.dim(),
            });
        }
        let safe = self.hull.contains(p)?;
        Ok(RegionDecision {
            verdict: if safe {
                Verdict::Safe
            } else {
                Verdict::Unknown
            },
            region_kind: RegionKind::Hull,
        })
    }

    /// Grow the region with a new verified point. The overflow guard is
    /// consulted first; a rejected point leaves the region unchanged, as
    /// does a point already inside the hull. Otherwise the hull is rebuilt
    /// over the enlarged sample set with fresh augmentation.
    pub fn update(&self, p: &Point, guard: &OverflowSpec) -> Result<Self, RegionError> {
        if guard.rejects(self.signature.c_max) {
            return Ok(self.clone());
        }
        if self.query(p)?.is_safe() {
            return Ok(self.clone());
        }
        let mut samples = self.samples.clone();
        samples.push(p.clone());
        Self::build(samples, self.signature.clone())
    }
}

/// Augmentation points for a sample set: every corner of every sample's
/// axis-aligned box `[0, s]` (the sample with any subset of coordinates
/// zeroed). This set contains the per-axis boundary points — for each axis
/// the point carrying the axis maximum with all other coordinates zero —
/// and the origin.
///
/// The full corner closure, not just the axis points, is what makes the
/// hull region downward-closed: in three and more dimensions a dominated
/// point such as (1,1,0) lies outside the hull of (1,1,1) and its axis
/// projections, but inside the hull of all box corners. Samples dominated
/// by another sample contribute nothing (their box is a subset) and are
/// skipped before corner expansion; no other pruning is sound here.
pub fn augmentation_points(samples: &[Point]) -> Vec<Point> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let dim = first.dim();
    let maximal: Vec<&Point> = samples
        .iter()
        .enumerate()
        .filter(|(i, s)| {
            !samples.iter().enumerate().any(|(j, t)| {
                j != *i && dominates(t, s).unwrap_or(false) && (t.coords() != s.coords() || j < *i)
            })
        })
        .map(|(_, s)| s)
        .collect();
    let mut corners: alloc::collections::BTreeSet<Vec<u64>> = alloc::collections::BTreeSet::new();
    for s in &maximal {
        for mask in 1u32..(1 << dim) {
            let corner: Vec<u64> = s
                .coords()
                .iter()
                .enumerate()
                .map(|(j, &c)| if mask & (1 << j) != 0 { 0 } else { c })
                .collect();
            corners.insert(corner);
        }
    }
    for s in samples {
        corners.remove(s.coords());
    }
    corners
        .into_iter()
        .map(|c| Point::new(c).expect("corner coordinates are valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn pt(coords: &[u64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    fn sig2() -> VariableSignature {
        VariableSignature::new(
            vec![
                ("s".to_string(), Correlation::Positive),
                ("n".to_string(), Correlation::Positive),
            ],
            COORD_MAX,
        )
        .unwrap()
    }

    #[test]
    fn transform_applies_negation() {
        let sig = VariableSignature::new(
            vec![
                ("ssize".to_string(), Correlation::Positive),
                ("snum".to_string(), Correlation::Positive),
                ("dsize".to_string(), Correlation::Negative),
            ],
            COORD_MAX,
        )
        .unwrap();
        let mut raw = BTreeMap::new();
        raw.insert("ssize".to_string(), 200);
        raw.insert("snum".to_string(), 60);
        raw.insert("dsize".to_string(), 256);
        let p = sig.transform(&raw).unwrap();
        assert_eq!(p.coords(), &[200, 60, 4294967039]);

        // All-positive signatures are the identity on values.
        let pos = sig2();
        let mut raw2 = BTreeMap::new();
        raw2.insert("s".to_string(), 3);
        raw2.insert("n".to_string(), 17);
        assert_eq!(pos.transform(&raw2).unwrap().coords(), &[3, 17]);

        // Negative variable at c_max maps to zero.
        raw.insert("dsize".to_string(), COORD_MAX as i64);
        assert_eq!(sig.transform(&raw).unwrap().coords(), &[200, 60, 0]);
    }

    #[test]
    fn transform_errors_route_to_full_checking() {
        let sig = sig2();
        let mut raw = BTreeMap::new();
        raw.insert("s".to_string(), 1);
        assert!(matches!(
            sig.transform(&raw),
            Err(RegionError::MissingVariable(_))
        ));
        raw.insert("n".to_string(), -3);
        assert!(matches!(
            sig.transform(&raw),
            Err(RegionError::ValueOutOfRange { .. })
        ));
    }

    #[test]
    fn union_insert_examples() {
        let r = UnionRegion::empty(sig2());
        let r = r.insert(&pt(&[1, 855])).unwrap();
        let r2 = r.insert(&pt(&[16, 60])).unwrap();
        assert_eq!(r2.frontier().len(), 2);

        // Dominated insert leaves the region unchanged.
        let r3 = r2.insert(&pt(&[10, 10])).unwrap();
        assert_eq!(r3.frontier(), r2.frontier());

        // A superseding point replaces what it dominates.
        let r4 = UnionRegion::empty(sig2())
            .insert(&pt(&[10, 10]))
            .unwrap()
            .insert(&pt(&[16, 60]))
            .unwrap();
        assert_eq!(r4.frontier(), &[pt(&[16, 60])]);
    }

    #[test]
    fn union_query_examples() {
        let r = UnionRegion::from_points(sig2(), [pt(&[1, 855]), pt(&[16, 60])]).unwrap();
        assert_eq!(r.query(&pt(&[8, 100])).unwrap().verdict, Verdict::Unknown);
        assert_eq!(r.query(&pt(&[1, 500])).unwrap().verdict, Verdict::Safe);
        let empty = UnionRegion::empty(sig2());
        assert_eq!(empty.query(&pt(&[0, 0])).unwrap().verdict, Verdict::Unknown);
    }

    #[test]
    fn augmentation_includes_axis_maxima_and_origin() {
        let samples = vec![
            pt(&[200, 60, 4294967039]),
            pt(&[180, 20, 4294967039]),
            pt(&[150, 40, 4294966783]),
        ];
        let aug = augmentation_points(&samples);
        for want in [
            vec![200u64, 0, 0],
            vec![0, 60, 0],
            vec![0, 0, 4294967039],
            vec![0, 0, 0],
        ] {
            assert!(
                aug.iter().any(|p| p.coords() == want.as_slice()),
                "missing augmentation point {want:?}"
            );
        }
    }

    #[test]
    fn hull_build_defang_binding_facet() {
        let region = HullRegion::build(vec![pt(&[1, 855]), pt(&[16, 60])], sig2()).unwrap();
        let hull = region.hull();
        let found = hull
            .facets()
            .iter()
            .map(|f| hull.facet_in_ambient(f))
            .any(|(n, c)| {
                n == vec![num_bigint::BigInt::from(-53), num_bigint::BigInt::from(-1)]
                    && c == num_bigint::BigInt::from(908)
            });
        assert!(found, "binding facet 53*s + n <= 908 not found");
    }

    #[test]
    fn hull_single_sample_contains_exactly_the_dominated_lattice() {
        let region = HullRegion::build(vec![pt(&[5, 5])], sig2()).unwrap();
        for i in 0..=5u64 {
            for j in 0..=5u64 {
                assert!(
                    region.query(&pt(&[i, j])).unwrap().is_safe(),
                    "({i},{j}) should be safe"
                );
            }
        }
        for q in [pt(&[6, 0]), pt(&[0, 6]), pt(&[6, 6]), pt(&[3, 6])] {
            assert!(
                !region.query(&q).unwrap().is_safe(),
                "{q:?} should be unknown"
            );
        }
    }

    #[test]
    fn hull_query_examples() {
        let region = HullRegion::build(vec![pt(&[1, 855]), pt(&[16, 60])], sig2()).unwrap();
        // 53*2 + 700 = 806 <= 908 and within axis bounds.
        assert!(region.query(&pt(&[2, 700])).unwrap().is_safe());
        // 53*10 + 400 = 930 > 908.
        assert!(!region.query(&pt(&[10, 400])).unwrap().is_safe());
        assert!(region.query(&pt(&[0, 0])).unwrap().is_safe());
    }

    #[test]
    fn hull_update_examples() {
        let region = HullRegion::build(vec![pt(&[1, 855]), pt(&[16, 60])], sig2()).unwrap();

        // Updating with an existing vertex changes nothing.
        let same = region
            .update(&pt(&[16, 60]), &OverflowSpec::empty())
            .unwrap();
        assert_eq!(same.samples(), region.samples());

        // (0,900) extends the region; (0,870) flips from unknown to safe.
        assert!(!region.query(&pt(&[0, 870])).unwrap().is_safe());
        let grown = region
            .update(&pt(&[0, 900]), &OverflowSpec::empty())
            .unwrap();
        assert!(grown.query(&pt(&[0, 870])).unwrap().is_safe());

        // A wraparound point is discarded by the guard.
        let guard = OverflowSpec {
            term_lists: vec![vec![COORD_MAX, 1]],
        };
        let rejected = region.update(&pt(&[0, 900]), &guard).unwrap();
        assert_eq!(rejected.samples(), region.samples());
    }

    #[test]
    fn overflow_reject_examples() {
        assert!(overflow_reject(&[COORD_MAX, 1], COORD_MAX));
        assert!(!overflow_reject(&[100, 23], COORD_MAX));
        assert!(overflow_reject(&[1 << 31, 1 << 31], COORD_MAX));
        assert!(!overflow_reject(&[COORD_MAX], COORD_MAX));
    }

    #[test]
    fn signature_validation() {
        assert!(matches!(
            VariableSignature::new(vec![], COORD_MAX),
            Err(RegionError::EmptySignature)
        ));
        let dup = vec![
            ("x".to_string(), Correlation::Positive),
            ("x".to_string(), Correlation::Negative),
        ];
        assert!(matches!(
            VariableSignature::new(dup, COORD_MAX),
            Err(RegionError::DuplicateVariable(_))
        ));
        let nine: Vec<_> = (0..9)
            .map(|i| (alloc::format!("v{i}"), Correlation::Positive))
            .collect();
        assert!(matches!(
            VariableSignature::new(nine, COORD_MAX),
            Err(RegionError::DimensionCap { dim: 9 })
        ));
    }
}
