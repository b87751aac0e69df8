//! Exact computational geometry for safe regions: Pareto dominance,
//! incremental convex hull construction in up to eight dimensions, and
//! the inward-facet-normal membership test.
//!
//! All predicates are evaluated in arbitrary-precision integer/rational
//! arithmetic. A rounding error that flipped a membership test from
//! "outside" to "inside" would silently drop a bounds check, so there is
//! no floating-point fast path anywhere in this module.
//!
//! Degenerate point sets (affine rank below the ambient dimension) are
//! handled by exact rank reduction: one input point is fixed as an anchor,
//! the difference vectors are row-reduced over the rationals, and the hull
//! is built in the coordinates of the resulting pivot columns. Query points
//! outside the affine span are classified as outside the hull.

mod linalg;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub use linalg::RowBasis;

/// Largest admissible coordinate value: the maximum 32-bit unsigned integer.
pub const COORD_MAX: u64 = u32::MAX as u64;

/// Largest hull dimension supported. Facet counts grow combinatorially with
/// the dimension and realistic signatures stay at four or below.
pub const MAX_HULL_DIM: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeometryError {
    /// Two points (or a hull and a point) of different dimensions were mixed.
    DimensionMismatch { expected: usize, found: usize },
    /// Points must have at least one coordinate.
    ZeroDimension,
    /// A coordinate exceeded [`COORD_MAX`].
    CoordinateRange { value: u64 },
    /// Hull construction needs at least one point.
    NoPoints,
    /// The requested dimension exceeds [`MAX_HULL_DIM`].
    DimensionCap { dim: usize },
    /// Stored hull data failed validation on reload.
    InvalidHullData(&'static str),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            GeometryError::ZeroDimension => write!(f, "points must be at least 1-dimensional"),
            GeometryError::CoordinateRange { value } => {
                write!(f, "coordinate {value} exceeds the maximum of {COORD_MAX}")
            }
            GeometryError::NoPoints => write!(f, "hull construction requires at least one point"),
            GeometryError::DimensionCap { dim } => {
                write!(
                    f,
                    "dimension {dim} exceeds the supported maximum of {MAX_HULL_DIM}"
                )
            }
            GeometryError::InvalidHullData(what) => write!(f, "invalid hull data: {what}"),
        }
    }
}

/// A data point: a vector of nonnegative integer coordinates, one per
/// pointer-affecting variable (negatively correlated variables are assumed
/// to be pre-transformed so that "larger is safer" holds on every axis).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    coords: Vec<u64>,
}

impl Point {
    pub fn new(coords: Vec<u64>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        if let Some(&value) = coords.iter().find(|&&c| c > COORD_MAX) {
            return Err(GeometryError::CoordinateRange { value });
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

/// True when `p` dominates `q`: every coordinate of `q` is at most the
/// corresponding coordinate of `p`. This is reflexive by design; a point
/// always dominates itself.
pub fn dominates(p: &Point, q: &Point) -> Result<bool, GeometryError> {
    if p.dim() != q.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(p.coords.iter().zip(&q.coords).all(|(a, b)| b <= a))
}

/// One facet of a hull, stored in the reduced (rank-`r`) coordinate system:
/// `r` affinely independent vertices, a primitive integer normal pointing
/// inward, and the integer offset such that `normal · x + offset >= 0` holds
/// exactly for the points on the inner side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub vertex_ids: Vec<usize>,
    pub normal: Vec<BigInt>,
    pub offset: BigInt,
}

/// Convex hull of a point set, possibly of lower affine rank than the
/// ambient dimension. Immutable after construction; queries never mutate.
#[derive(Clone, Debug)]
pub struct Hull {
    dim: usize,
    rank: usize,
    anchor: Vec<i64>,
    basis: RowBasis,
    /// Vertex id → original full-dimensional point. Ids are indices into
    /// the deduplicated input sequence and stay stable for serialization.
    vertices: BTreeMap<usize, Point>,
    facets: Vec<Facet>,
}

impl Hull {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Affine rank of the construction points (0 for a single point).
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vertices(&self) -> &BTreeMap<usize, Point> {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn anchor(&self) -> &[i64] {
        &self.anchor
    }

    pub fn basis(&self) -> &RowBasis {
        &self.basis
    }

    /// Reduced coordinates of a point: the difference from the anchor,
    /// restricted to the pivot columns of the affine basis. Only valid for
    /// points inside the affine span.
    pub fn reduce(&self, p: &Point) -> Vec<i64> {
        self.basis
            .pivots()
            .iter()
            .map(|&j| p.coords[j] as i64 - self.anchor[j])
            .collect()
    }

    fn in_affine_span(&self, p: &Point) -> bool {
        let diff: Vec<BigRational> = p
            .coords
            .iter()
            .zip(&self.anchor)
            .map(|(&c, &a)| BigRational::from(BigInt::from(c as i64 - a)))
            .collect();
        self.basis.spans(&diff)
    }

    /// Membership test: the point must lie in the hull's affine span
    /// exactly, and on the inner side (or the boundary) of every facet.
    /// A single negative facet value classifies the point as outside.
    pub fn contains(&self, p: &Point) -> Result<bool, GeometryError> {
        if p.dim() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        if !self.in_affine_span(p) {
            return Ok(false);
        }
        if self.rank == 0 {
            // Affine-span membership already pinned the point to the anchor.
            return Ok(true);
        }
        let red = self.reduce(p);
        Ok(self
            .facets
            .iter()
            .all(|f| !facet_value(f, &red).is_negative()))
    }

    /// Rebuild a hull from stored parts, validating the invariants that
    /// matter for sound membership tests: the basis is in reduced
    /// row-echelon form, facet vertex ids resolve, normals are nonzero,
    /// every vertex lies in the affine span, and every vertex is on the
    /// inner side of every facet.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        dim: usize,
        anchor: Vec<i64>,
        basis_rows: Vec<Vec<BigRational>>,
        pivots: Vec<usize>,
        vertices: BTreeMap<usize, Point>,
        facets: Vec<Facet>,
    ) -> Result<Self, GeometryError> {
        if dim == 0 || dim > MAX_HULL_DIM {
            return Err(GeometryError::DimensionCap { dim });
        }
        let rank = basis_rows.len();
        let basis = RowBasis::from_rref(basis_rows, pivots).ok_or(
            GeometryError::InvalidHullData("basis is not in reduced row-echelon form"),
        )?;
        let hull = Hull {
            dim,
            rank,
            anchor,
            basis,
            vertices,
            facets,
        };
        if hull.anchor.len() != dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: hull.anchor.len(),
            });
        }
        for f in &hull.facets {
            if f.normal.len() != rank || f.normal.iter().all(Zero::is_zero) {
                return Err(GeometryError::InvalidHullData("facet normal is malformed"));
            }
            for id in &f.vertex_ids {
                if !hull.vertices.contains_key(id) {
                    return Err(GeometryError::InvalidHullData(
                        "facet vertex id does not resolve",
                    ));
                }
            }
        }
        for v in hull.vertices.values() {
            if v.dim() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
            if !hull.contains(v)? {
                return Err(GeometryError::InvalidHullData(
                    "a stored vertex falls outside its own hull",
                ));
            }
        }
        Ok(hull)
    }

    /// Render a facet's halfspace in ambient coordinates: returns `(n, c)`
    /// such that contained points satisfy `n · p + c >= 0`. For reduced-rank
    /// hulls the inequality is expressed over the pivot columns and is valid
    /// within the affine span.
    pub fn facet_in_ambient(&self, facet: &Facet) -> (Vec<BigInt>, BigInt) {
        let mut normal = alloc::vec![BigInt::zero(); self.dim];
        let mut offset = facet.offset.clone();
        for (k, &j) in self.basis.pivots().iter().enumerate() {
            normal[j] = facet.normal[k].clone();
            offset -= &facet.normal[k] * self.anchor[j];
        }
        (normal, offset)
    }

    /// True when every hull vertex `v` satisfies `Σ betaⱼ·vⱼ <= c`.
    /// Together with `contains` this realizes the soundness property: any
    /// linear bound that holds on all vertices holds on every contained
    /// point.
    pub fn linear_functional_bound_check(&self, beta: &[BigRational], c: &BigRational) -> bool {
        assert_eq!(beta.len(), self.dim, "beta must match the hull dimension");
        self.vertices.values().all(|v| {
            let mut acc = BigRational::zero();
            for (b, &x) in beta.iter().zip(v.coords()) {
                acc += b * BigRational::from(BigInt::from(x));
            }
            acc <= *c
        })
    }
}

/// Signed facet value `normal · x + offset` for reduced coordinates `x`.
fn facet_value(f: &Facet, red: &[i64]) -> BigInt {
    let mut acc = f.offset.clone();
    for (n, &x) in f.normal.iter().zip(red) {
        acc += n * x;
    }
    acc
}

/// Build the convex hull of `points` by incremental insertion with exact
/// predicates. Duplicate points are ignored. If the points span an affine
/// subspace of rank `r < D`, the hull is built in that subspace and a
/// single point yields a degenerate rank-0 hull.
pub fn build_hull(points: &[Point]) -> Result<Hull, GeometryError> {
    let Some(first) = points.first() else {
        return Err(GeometryError::NoPoints);
    };
    let dim = first.dim();
    if dim > MAX_HULL_DIM {
        return Err(GeometryError::DimensionCap { dim });
    }
    for p in points {
        if p.dim() != dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
    }

    let mut seen = BTreeSet::new();
    let pts: Vec<&Point> = points.iter().filter(|p| seen.insert(p.coords())).collect();

    let anchor: Vec<i64> = pts[0].coords().iter().map(|&c| c as i64).collect();
    let mut basis = RowBasis::new();
    let mut simplex_ids = Vec::with_capacity(MAX_HULL_DIM + 1);
    simplex_ids.push(0usize);
    for (id, p) in pts.iter().enumerate().skip(1) {
        let diff: Vec<BigRational> = p
            .coords()
            .iter()
            .zip(&anchor)
            .map(|(&c, &a)| BigRational::from(BigInt::from(c as i64 - a)))
            .collect();
        if basis.try_add(diff) {
            simplex_ids.push(id);
        }
    }
    let rank = basis.rank();

    let mut hull = Hull {
        dim,
        rank,
        anchor,
        basis,
        vertices: BTreeMap::new(),
        facets: Vec::new(),
    };
    if rank == 0 {
        hull.vertices.insert(0, pts[0].clone());
        return Ok(hull);
    }

    let reduced: Vec<Vec<i64>> = pts.iter().map(|p| hull.reduce(p)).collect();

    // Interior reference for orienting facet normals: the centroid of the
    // initial simplex. It stays strictly interior as the hull only grows.
    let mut interior = alloc::vec![BigRational::zero(); rank];
    for &id in &simplex_ids {
        for (acc, &x) in interior.iter_mut().zip(&reduced[id]) {
            *acc += BigRational::from(BigInt::from(x));
        }
    }
    let count = BigRational::from(BigInt::from(simplex_ids.len() as i64));
    for acc in interior.iter_mut() {
        *acc /= &count;
    }

    // Facets of the initial simplex: leave one vertex out at a time.
    let mut facets: Vec<Facet> = Vec::new();
    for skip in 0..simplex_ids.len() {
        let ids: Vec<usize> = simplex_ids
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, &id)| id)
            .collect();
        facets.push(make_facet(ids, &reduced, &interior));
    }

    for id in 0..pts.len() {
        if simplex_ids.contains(&id) {
            continue;
        }
        insert_point(&mut facets, id, &reduced, &interior);
    }

    let used: BTreeSet<usize> = facets
        .iter()
        .flat_map(|f| f.vertex_ids.iter().copied())
        .collect();
    for id in used {
        hull.vertices.insert(id, pts[id].clone());
    }
    hull.facets = facets;
    Ok(hull)
}

/// Build a simplicial facet through the given vertices, oriented so that the
/// interior reference point lies strictly on the positive side.
fn make_facet(mut ids: Vec<usize>, reduced: &[Vec<i64>], interior: &[BigRational]) -> Facet {
    ids.sort_unstable();
    let rank = interior.len();
    let v0 = &reduced[ids[0]];
    let edges: Vec<Vec<i64>> = ids[1..]
        .iter()
        .map(|&id| reduced[id].iter().zip(v0).map(|(&a, &b)| a - b).collect())
        .collect();
    let mut normal =
        linalg::hyperplane_normal(&edges, rank).expect("facet vertices are affinely independent");
    match linalg::side_of(&normal, interior, v0) {
        1 => {}
        -1 => {
            for n in normal.iter_mut() {
                *n = -n.clone();
            }
        }
        _ => unreachable!("interior reference cannot lie on a facet hyperplane"),
    }
    let mut offset = BigInt::zero();
    for (n, &x) in normal.iter().zip(v0) {
        offset -= n * x;
    }
    Facet {
        vertex_ids: ids,
        normal,
        offset,
    }
}

/// Beneath-beyond insertion: delete the facets visible from the new point
/// and rebuild the cone from the horizon ridges to the point. A point that
/// sees no facet is inside (or on the boundary of) the current hull and
/// leaves it unchanged.
fn insert_point(
    facets: &mut Vec<Facet>,
    id: usize,
    reduced: &[Vec<i64>],
    interior: &[BigRational],
) {
    let red = &reduced[id];
    let visible: BTreeSet<usize> = facets
        .iter()
        .enumerate()
        .filter(|(_, f)| facet_value(f, red).is_negative())
        .map(|(i, _)| i)
        .collect();
    if visible.is_empty() {
        return;
    }

    // Every ridge of a closed polytope is shared by exactly two facets;
    // horizon ridges are those with one visible and one hidden side.
    let mut ridge_owners: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (i, f) in facets.iter().enumerate() {
        for skip in 0..f.vertex_ids.len() {
            let mut ridge = f.vertex_ids.clone();
            ridge.remove(skip);
            ridge_owners.entry(ridge).or_default().push(i);
        }
    }

    let mut new_facets: Vec<Facet> = Vec::new();
    for (ridge, owners) in &ridge_owners {
        let vis = owners.iter().filter(|i| visible.contains(i)).count();
        if vis == 1 && owners.len() == 2 {
            let mut ids = ridge.clone();
            ids.push(id);
            new_facets.push(make_facet(ids, reduced, interior));
        }
    }

    let mut kept: Vec<Facet> = facets
        .drain(..)
        .enumerate()
        .filter(|(i, _)| !visible.contains(i))
        .map(|(_, f)| f)
        .collect();
    kept.append(&mut new_facets);
    *facets = kept;
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pt(coords: &[u64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    #[test]
    fn dominates_basic_cases() {
        // Reflexivity, plus the two boundary observations from the
        // url-escape benchmark.
        assert!(dominates(&pt(&[16, 60]), &pt(&[16, 60])).unwrap());
        assert!(dominates(&pt(&[16, 60]), &pt(&[0, 60])).unwrap());
        assert!(!dominates(&pt(&[16, 60]), &pt(&[1, 855])).unwrap());
        assert!(!dominates(&pt(&[5, 5, 5]), &pt(&[5, 5, 6])).unwrap());
    }

    #[test]
    fn dominates_dimension_mismatch_is_an_error() {
        assert!(matches!(
            dominates(&pt(&[1, 2]), &pt(&[1, 2, 3])),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn point_validation() {
        assert!(matches!(
            Point::new(vec![]),
            Err(GeometryError::ZeroDimension)
        ));
        assert!(matches!(
            Point::new(vec![COORD_MAX + 1]),
            Err(GeometryError::CoordinateRange { .. })
        ));
        assert!(Point::new(vec![COORD_MAX]).is_ok());
    }

    #[test]
    fn square_hull_drops_interior_point() {
        let points = [
            pt(&[0, 0]),
            pt(&[2, 0]),
            pt(&[0, 2]),
            pt(&[2, 2]),
            pt(&[1, 1]),
        ];
        let hull = build_hull(&points).unwrap();
        assert_eq!(hull.rank(), 2);
        assert_eq!(hull.vertices().len(), 4);
        assert!(!hull.vertices().values().any(|v| v.coords() == [1, 1]));
        assert_eq!(hull.facets().len(), 4);
        assert!(hull.contains(&pt(&[1, 1])).unwrap());
        assert!(hull.contains(&pt(&[2, 2])).unwrap());
        assert!(!hull.contains(&pt(&[3, 1])).unwrap());
    }

    #[test]
    fn defang_hull_has_expected_binding_facet() {
        // Sample points plus axis/origin augmentation; the non-axis facet is
        // the line 53*s + n = 908.
        let points = [
            pt(&[1, 855]),
            pt(&[16, 60]),
            pt(&[16, 0]),
            pt(&[0, 855]),
            pt(&[0, 0]),
        ];
        let hull = build_hull(&points).unwrap();
        assert_eq!(hull.vertices().len(), 5);
        let binding = hull
            .facets()
            .iter()
            .map(|f| hull.facet_in_ambient(f))
            .find(|(n, _)| *n == vec![BigInt::from(-53), BigInt::from(-1)])
            .expect("binding facet present");
        assert_eq!(binding.1, BigInt::from(908));
        // On-facet vertex is inside; a point past the line is outside.
        assert!(hull.contains(&pt(&[16, 60])).unwrap());
        assert!(!hull.contains(&pt(&[10, 400])).unwrap());
        assert!(hull.contains(&pt(&[2, 700])).unwrap());
    }

    #[test]
    fn collinear_points_give_rank_one_segment() {
        let points = [pt(&[0, 0]), pt(&[1, 1]), pt(&[2, 2])];
        let hull = build_hull(&points).unwrap();
        assert_eq!(hull.rank(), 1);
        let coords: BTreeSet<&[u64]> = hull.vertices().values().map(|p| p.coords()).collect();
        assert!(coords.contains(&[0u64, 0][..]));
        assert!(coords.contains(&[2u64, 2][..]));
        assert!(hull.contains(&pt(&[1, 1])).unwrap());
        // Off the affine line: outside regardless of facet values.
        assert!(!hull.contains(&pt(&[1, 2])).unwrap());
        assert!(!hull.contains(&pt(&[3, 3])).unwrap());
    }

    #[test]
    fn singleton_hull_is_the_point_itself() {
        let hull = build_hull(&[pt(&[4, 7, 9])]).unwrap();
        assert_eq!(hull.rank(), 0);
        assert!(hull.contains(&pt(&[4, 7, 9])).unwrap());
        assert!(!hull.contains(&pt(&[4, 7, 8])).unwrap());
        assert!(hull.facets().is_empty());
    }

    #[test]
    fn every_input_point_is_contained() {
        let points = [
            pt(&[200, 60, 4294967039]),
            pt(&[180, 20, 4294967039]),
            pt(&[150, 40, 4294966783]),
            pt(&[200, 0, 0]),
            pt(&[0, 60, 0]),
            pt(&[0, 0, 4294967039]),
            pt(&[0, 0, 0]),
        ];
        let hull = build_hull(&points).unwrap();
        for p in &points {
            assert!(
                hull.contains(p).unwrap(),
                "input point must be in hull: {p:?}"
            );
        }
    }

    #[test]
    fn linear_functional_bound_examples() {
        let points = [
            pt(&[1, 855]),
            pt(&[16, 60]),
            pt(&[16, 0]),
            pt(&[0, 855]),
            pt(&[0, 0]),
        ];
        let hull = build_hull(&points).unwrap();
        assert!(hull.linear_functional_bound_check(&[rat(53), rat(1)], &rat(908)));
        // Vertex (1,855) evaluates to 908 > 900.
        assert!(!hull.linear_functional_bound_check(&[rat(53), rat(1)], &rat(900)));
        assert!(hull.linear_functional_bound_check(&[rat(0), rat(0)], &rat(0)));
    }

    #[test]
    fn dimension_cap_enforced() {
        let p = pt(&[0; 9]);
        assert!(matches!(
            build_hull(&[p]),
            Err(GeometryError::DimensionCap { dim: 9 })
        ));
    }

    #[test]
    fn containment_independent_of_insertion_order() {
        let base = [
            pt(&[0, 0]),
            pt(&[5, 0]),
            pt(&[0, 5]),
            pt(&[5, 5]),
            pt(&[3, 3]),
            pt(&[1, 4]),
        ];
        let mut orders = vec![base.to_vec()];
        let mut rev = base.to_vec();
        rev.reverse();
        orders.push(rev);
        let mut rot = base.to_vec();
        rot.rotate_left(3);
        orders.push(rot);
        let hulls: Vec<Hull> = orders.iter().map(|o| build_hull(o).unwrap()).collect();
        for x in 0..=6u64 {
            for y in 0..=6u64 {
                let q = pt(&[x, y]);
                let results: Vec<bool> = hulls.iter().map(|h| h.contains(&q).unwrap()).collect();
                assert!(
                    results.windows(2).all(|w| w[0] == w[1]),
                    "disagreement at {q:?}"
                );
            }
        }
    }
}
