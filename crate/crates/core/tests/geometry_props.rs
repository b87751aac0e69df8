#![allow(clippy::needless_range_loop)]

//! Property tests for the exact geometry kernel.
//!
//! The membership oracle used here is deliberately independent of the hull
//! implementation: it decides `q ∈ conv(V)` by enumerating affinely
//! independent subsets and solving for barycentric coordinates with a
//! self-contained rational Gauss-Jordan elimination.

use checklang_core::geometry::{build_hull, dominates, Point};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn rat(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// Solve `A·x = b` exactly for a unique solution, if one exists.
/// Returns None when the system is inconsistent or underdetermined.
fn solve_unique(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let cols = a[0].len();
    let mut pivot_of_col = vec![None; cols];
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pr);
        b.swap(r, pr);
        let lead = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x /= &lead;
        }
        b[r] /= &lead;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
                let t = &f * &b[r];
                b[i] -= t;
            }
        }
        pivot_of_col[c] = Some(r);
        r += 1;
        if r == rows {
            break;
        }
    }
    // Inconsistent rows: 0 = nonzero.
    for i in r..rows {
        if !b[i].is_zero() {
            return None;
        }
    }
    // Underdetermined: some column has no pivot.
    if pivot_of_col.iter().any(Option::is_none) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (c, p) in pivot_of_col.iter().enumerate() {
        x[c] = b[p.unwrap()].clone();
    }
    Some(x)
}

/// Brute-force membership in conv(points) by Caratheodory: try every subset
/// of at most dim+1 points, solve for barycentric coordinates, and accept
/// when a nonnegative solution reproduces `q`. Subsets are enumerated via
/// bitmasks; the point counts here are tiny.
fn conv_contains_bruteforce(points: &[Point], q: &Point) -> bool {
    let dim = q.dim();
    let n = points.len();
    let max_k = (dim + 1).min(n);
    for mask in 1u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if k > max_k {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if barycentric_solves(points, &idx, q) {
            return true;
        }
    }
    false
}

fn barycentric_solves(points: &[Point], idx: &[usize], q: &Point) -> bool {
    let dim = q.dim();
    // Rows: one per coordinate plus the Σλ = 1 constraint.
    let mut a = vec![vec![BigRational::zero(); idx.len()]; dim + 1];
    let mut b = Vec::with_capacity(dim + 1);
    for (col, &pi) in idx.iter().enumerate() {
        for (row, &c) in points[pi].coords().iter().enumerate() {
            a[row][col] = rat(c as i64);
        }
        a[dim][col] = BigRational::one();
    }
    for &c in q.coords() {
        b.push(rat(c as i64));
    }
    b.push(BigRational::one());
    match solve_unique(a, b) {
        Some(lambda) => lambda.iter().all(|l| *l >= BigRational::zero()),
        None => false,
    }
}

fn points_strategy(dim: usize, max_coord: u64) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(
        prop::collection::vec(0..=max_coord, dim).prop_map(|c| Point::new(c).unwrap()),
        1..=7,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hull_contains_matches_bruteforce(
        (dim, max) in (1usize..=4).prop_flat_map(|d| {
            prop_oneof![Just((d, 4u64)), Just((d, 1_000_000u64))]
        }),
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=7);
        let points: Vec<Point> = (0..n)
            .map(|_| {
                Point::new((0..dim).map(|_| rng.random_range(0..=max)).collect()).unwrap()
            })
            .collect();
        let hull = build_hull(&points).unwrap();
        for _ in 0..12 {
            let q = Point::new((0..dim).map(|_| rng.random_range(0..=max)).collect()).unwrap();
            let got = hull.contains(&q).unwrap();
            let want = conv_contains_bruteforce(&points, &q);
            prop_assert_eq!(got, want, "query {:?} against {:?}", q, points);
        }
        // Vertex closure: every construction point is contained.
        for p in &points {
            prop_assert!(hull.contains(p).unwrap());
        }
    }

    #[test]
    fn linear_bounds_on_vertices_extend_to_contained_points(
        points in points_strategy(3, 1000),
        beta_raw in prop::collection::vec(-50i64..=50, 3),
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let hull = build_hull(&points).unwrap();
        let beta: Vec<BigRational> = beta_raw.iter().map(|&b| rat(b)).collect();
        // Choose c as the exact maximum over vertices, so the premise holds.
        let c = hull
            .vertices()
            .values()
            .map(|v| {
                beta.iter()
                    .zip(v.coords())
                    .fold(BigRational::zero(), |acc, (b, &x)| acc + b * rat(x as i64))
            })
            .max()
            .unwrap();
        prop_assert!(hull.linear_functional_bound_check(&beta, &c));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..16 {
            let q = Point::new((0..3).map(|_| rng.random_range(0..=1200u64)).collect()).unwrap();
            if hull.contains(&q).unwrap() {
                let val = beta
                    .iter()
                    .zip(q.coords())
                    .fold(BigRational::zero(), |acc, (b, &x)| acc + b * rat(x as i64));
                prop_assert!(val <= c, "contained point violates linear bound");
            }
        }
    }

    #[test]
    fn dominates_is_a_partial_order(
        a in prop::collection::vec(0u64..100, 3),
        b in prop::collection::vec(0u64..100, 3),
        c in prop::collection::vec(0u64..100, 3),
    ) {
        let pa = Point::new(a).unwrap();
        let pb = Point::new(b).unwrap();
        let pc = Point::new(c).unwrap();
        // Reflexive.
        prop_assert!(dominates(&pa, &pa).unwrap());
        // Antisymmetric.
        if dominates(&pa, &pb).unwrap() && dominates(&pb, &pa).unwrap() {
            prop_assert_eq!(&pa, &pb);
        }
        // Transitive.
        if dominates(&pa, &pb).unwrap() && dominates(&pb, &pc).unwrap() {
            prop_assert!(dominates(&pa, &pc).unwrap());
        }
    }
}
