//! Small exact linear-algebra helpers over arbitrary-precision rationals
//! and integers. Everything here is sized for hull dimensions of at most
//! eight, so the quadratic/cubic costs are irrelevant; exactness is the
//! only requirement.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Incrementally maintained reduced row-echelon basis of a set of rational
/// vectors. Used to compute the affine rank of a point set and to test
/// membership in its affine span.
#[derive(Clone, Debug, Default)]
pub struct RowBasis {
    rows: Vec<Vec<BigRational>>,
    pivots: Vec<usize>,
}

impl RowBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reconstruct a basis from stored rows (e.g. a deserialized hull).
    /// Rows must already be in reduced row-echelon form with the given
    /// pivot columns; this is checked.
    pub fn from_rref(rows: Vec<Vec<BigRational>>, pivots: Vec<usize>) -> Option<Self> {
        if rows.len() != pivots.len() {
            return None;
        }
        for (i, row) in rows.iter().enumerate() {
            for (k, &p) in pivots.iter().enumerate() {
                if p >= row.len() {
                    return None;
                }
                let expect = if k == i {
                    BigRational::one()
                } else {
                    BigRational::zero()
                };
                if row[p] != expect {
                    return None;
                }
            }
        }
        Some(Self { rows, pivots })
    }

    /// Eliminate `v` against the current rows, in place.
    fn eliminate(&self, v: &mut [BigRational]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let factor = v[p].clone();
                for (vj, rj) in v.iter_mut().zip(row) {
                    *vj -= &factor * rj;
                }
            }
        }
    }

    /// Try to extend the basis with `v`. Returns true when `v` was linearly
    /// independent of the current rows and has been added.
    pub fn try_add(&mut self, mut v: Vec<BigRational>) -> bool {
        self.eliminate(&mut v);
        let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let lead = v[pivot].clone();
        for x in v.iter_mut() {
            *x /= &lead;
        }
        // Keep the existing rows reduced against the new pivot column.
        for row in self.rows.iter_mut() {
            if !row[pivot].is_zero() {
                let factor = row[pivot].clone();
                for (rj, vj) in row.iter_mut().zip(&v) {
                    *rj -= &factor * vj;
                }
            }
        }
        // Insert keeping pivot columns sorted, so the row order is canonical.
        let at = self.pivots.partition_point(|&p| p < pivot);
        self.pivots.insert(at, pivot);
        self.rows.insert(at, v);
        true
    }

    /// Whether `v` lies in the span of the basis rows.
    pub fn spans(&self, v: &[BigRational]) -> bool {
        let mut w = v.to_vec();
        self.eliminate(&mut w);
        w.iter().all(Zero::is_zero)
    }
}

/// Determinant of a square integer matrix via fraction-free (Bareiss)
/// elimination. The 0×0 determinant is 1.
pub fn det_bigint(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Primitive integer normal of the hyperplane through `dim` affinely
/// independent points, given as the `dim - 1` edge vectors from one of
/// them. Computed by cofactor expansion: component `j` is the signed
/// minor obtained by deleting column `j`.
///
/// Returns `None` when the edges are linearly dependent (all minors zero),
/// which cannot happen for a valid simplicial facet.
pub fn hyperplane_normal(edges: &[Vec<i64>], dim: usize) -> Option<Vec<BigInt>> {
    debug_assert_eq!(edges.len() + 1, dim);
    let mut normal = Vec::with_capacity(dim);
    for j in 0..dim {
        let minor: Vec<Vec<BigInt>> = edges
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, &x)| BigInt::from(x))
                    .collect()
            })
            .collect();
        let d = det_bigint(minor);
        normal.push(if j % 2 == 0 { d } else { -d });
    }
    if normal.iter().all(Zero::is_zero) {
        return None;
    }
    Some(make_primitive(normal))
}

/// Divide an integer vector by the gcd of its entries.
pub fn make_primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let mut g = BigInt::zero();
    for x in &v {
        g = g.gcd(x);
    }
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
    v
}

/// Sign of Σ nⱼ·(aⱼ − bⱼ) with rational `a` and integer `b`: −1, 0, or 1.
pub fn side_of(normal: &[BigInt], a: &[BigRational], b: &[i64]) -> i32 {
    let mut acc = BigRational::zero();
    for ((n, av), &bv) in normal.iter().zip(a).zip(b) {
        acc += BigRational::from(n.clone()) * (av - BigRational::from(BigInt::from(bv)));
    }
    match acc.cmp(&BigRational::zero()) {
        core::cmp::Ordering::Less => -1,
        core::cmp::Ordering::Equal => 0,
        core::cmp::Ordering::Greater => 1,
    }
}
