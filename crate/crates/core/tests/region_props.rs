//! Property tests for safe regions: the hull region extends the union
//! region, both are downward-closed, and updates only ever grow a region.

use checklang_core::geometry::{dominates, Point};
use checklang_core::region::{
    Correlation, HullRegion, OverflowSpec, UnionRegion, VariableSignature,
};
use proptest::prelude::*;

fn sig(dim: usize) -> VariableSignature {
    VariableSignature::new(
        (0..dim)
            .map(|i| (format!("v{i}"), Correlation::Positive))
            .collect(),
        u32::MAX as u64,
    )
    .unwrap()
}

fn pts(
    dim: usize,
    max: u64,
    len: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(
        prop::collection::vec(0..=max, dim).prop_map(|c| Point::new(c).unwrap()),
        len,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn hull_region_extends_union_region(
        dim in 1usize..=4,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=10);
        let max = if rng.random_bool(0.5) { 8 } else { 100_000 };
        let samples: Vec<Point> = (0..n)
            .map(|_| Point::new((0..dim).map(|_| rng.random_range(0..=max)).collect()).unwrap())
            .collect();
        let union = UnionRegion::from_points(sig(dim), samples.iter().cloned()).unwrap();
        let hull = HullRegion::build(samples.clone(), sig(dim)).unwrap();
        for _ in 0..20 {
            let q = Point::new((0..dim).map(|_| rng.random_range(0..=max)).collect()).unwrap();
            if union.query(&q).unwrap().is_safe() {
                prop_assert!(
                    hull.query(&q).unwrap().is_safe(),
                    "union-safe point {:?} not hull-safe (samples {:?})",
                    q,
                    samples
                );
            }
        }
    }

    #[test]
    fn hull_region_is_downward_closed(
        samples in pts(3, 50, 1..=6),
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let hull = HullRegion::build(samples, sig(3)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let p = Point::new((0..3).map(|_| rng.random_range(0..=60u64)).collect()).unwrap();
            if hull.query(&p).unwrap().is_safe() {
                let q = Point::new(
                    p.coords().iter().map(|&c| rng.random_range(0..=c)).collect(),
                ).unwrap();
                prop_assert!(dominates(&p, &q).unwrap());
                prop_assert!(
                    hull.query(&q).unwrap().is_safe(),
                    "dominated point {:?} of safe {:?} not safe",
                    q,
                    p
                );
            }
        }
    }

    #[test]
    fn updates_are_monotone_and_idempotent(
        samples in pts(2, 1000, 1..=5),
        extra in prop::collection::vec(0u64..=1500, 2),
        probes in prop::collection::vec(prop::collection::vec(0u64..=1500, 2), 12),
    ) {
        let base = HullRegion::build(samples, sig(2)).unwrap();
        let p = Point::new(extra).unwrap();
        let grown = base.update(&p, &OverflowSpec::empty()).unwrap();
        // Monotone: everything safe before stays safe after.
        for probe in &probes {
            let q = Point::new(probe.clone()).unwrap();
            if base.query(&q).unwrap().is_safe() {
                prop_assert!(grown.query(&q).unwrap().is_safe());
            }
        }
        // The inserted point itself is now safe.
        prop_assert!(grown.query(&p).unwrap().is_safe());
        // Idempotent: re-updating with a contained point changes no answers.
        let again = grown.update(&p, &OverflowSpec::empty()).unwrap();
        for probe in &probes {
            let q = Point::new(probe.clone()).unwrap();
            prop_assert_eq!(
                grown.query(&q).unwrap().is_safe(),
                again.query(&q).unwrap().is_safe()
            );
        }
    }

    #[test]
    fn union_frontier_is_an_antichain(
        samples in pts(3, 30, 0..=15),
    ) {
        let union = UnionRegion::from_points(sig(3), samples).unwrap();
        let frontier = union.frontier();
        for (i, p) in frontier.iter().enumerate() {
            for (j, q) in frontier.iter().enumerate() {
                if i != j {
                    prop_assert!(
                        !dominates(p, q).unwrap(),
                        "frontier not an antichain: {:?} dominates {:?}",
                        p,
                        q
                    );
                }
            }
        }
        // Union queries agree with direct dominance against the frontier.
        for p in frontier {
            prop_assert!(union.query(p).unwrap().is_safe());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Optimality bound: when every sample satisfies a ground-truth linear
    /// safety condition with nonnegative coefficients, every point the
    /// hull region declares safe satisfies it too — the region never
    /// extrapolates past a linear boundary its samples respect.
    #[test]
    fn hull_region_never_exceeds_a_linear_ground_truth(
        samples in pts(3, 400, 1..=6),
        beta_raw in prop::collection::vec(0i64..=20, 3),
        seed in any::<u64>(),
    ) {
        use num_bigint::BigInt;
        use num_rational::BigRational;
        use num_traits::Zero;
        use rand::{Rng, SeedableRng};

        let value = |p: &Point| -> BigRational {
            beta_raw
                .iter()
                .zip(p.coords())
                .fold(BigRational::zero(), |acc, (&b, &x)| {
                    acc + BigRational::from(BigInt::from(b)) * BigRational::from(BigInt::from(x))
                })
        };
        // Ground truth: the tightest bound the samples satisfy.
        let c = samples.iter().map(&value).max().unwrap();
        let region = HullRegion::build(samples, sig(3)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..24 {
            let q = Point::new((0..3).map(|_| rng.random_range(0..=500u64)).collect()).unwrap();
            if region.query(&q).unwrap().is_safe() {
                prop_assert!(value(&q) <= c, "safe point {:?} exceeds the ground truth", q);
            }
        }
    }
}
