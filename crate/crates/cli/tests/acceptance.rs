//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured numbers. Tolerances are pinned in the assertions.
//!
//! Run with `cargo test -p checklang-cli --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use std::collections::BTreeMap;

use checklang_cli::corpus::{self, TestProgram, UrlStyle};
use checklang_core::ast::Program;
use checklang_core::depgraph::{analyze_program, instrument_trip_counts, ProgramAnalysis};
use checklang_core::geometry::{build_hull, Point, COORD_MAX};
use checklang_core::interp::{run_bypass, run_full_check, CheckLedger, RuntimeError};
use checklang_core::kb::{facet_inequality, render_inequality, KbSnapshot, RegionData};
use checklang_core::parser::parse;
use checklang_core::profiler::{format_percent, overhead_breakdown, parse_rational, FunctionCost};
use checklang_core::region::{
    Correlation, HullRegion, OverflowSpec, RegionKind, UnionRegion, VariableSignature,
};
use checklang_core::trace::{InputBindings, Scope, TraceRecord};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn prepare(source: &str) -> (Program, ProgramAnalysis) {
    let program = parse(source).expect("corpus programs parse");
    let analysis = analyze_program(&program);
    let instrumented = instrument_trip_counts(&program, &analysis);
    (instrumented, analysis)
}

/// Profile the warm-up inputs and build both knowledge-base kinds.
fn warm_up(
    program: &Program,
    analysis: &ProgramAnalysis,
    warmups: &[InputBindings],
) -> (KbSnapshot, KbSnapshot) {
    let mut records: Vec<TraceRecord> = Vec::new();
    for inputs in warmups {
        let (result, artifacts) = run_full_check(program, analysis, inputs);
        result.expect("warm-up inputs are safe by construction");
        records.extend(artifacts.trace);
    }
    let (hull, _) = KbSnapshot::new(RegionKind::Hull, COORD_MAX).merge(&records);
    let (union, _) = KbSnapshot::new(RegionKind::Union, COORD_MAX).merge(&records);
    (hull, union)
}

// ---------------------------------------------------------------------------

/// Criteria 1 and 2: across a randomized corpus of 50 programs with 100
/// evaluation inputs each, every bypassed check passes re-verification
/// (exactly zero false positives), and bypass-mode outputs and final
/// memory are byte-identical to the oracle whenever the oracle completes.
#[test]
fn acceptance_01_02_zero_false_positives_and_semantic_equivalence() {
    let started = std::time::Instant::now();
    let programs: Vec<TestProgram> = corpus::generate_suite(0xC0FFEE, 50, 4, 100);
    assert_eq!(programs.len(), 50);

    let mut total_runs = 0u64;
    let mut total_bypassed = 0u64;
    let mut total_false_positives = 0u64;
    let mut completed_compared = 0u64;
    let mut aborted_in_both = 0u64;

    for prog in &programs {
        let (program, analysis) = prepare(&prog.source);
        let (hull_kb, union_kb) = warm_up(&program, &analysis, &prog.warmup);
        assert_eq!(prog.eval.len(), 100, "{}", prog.name);
        for inputs in &prog.eval {
            let (oracle_result, oracle) = run_full_check(&program, &analysis, inputs);
            for kb in [&hull_kb, &union_kb] {
                total_runs += 1;
                let (result, artifacts) = run_bypass(&program, &analysis, inputs, kb);
                total_bypassed += artifacts.ledger.checks_bypassed;
                total_false_positives += artifacts.ledger.false_positives;
                assert!(
                    !matches!(result, Err(RuntimeError::FalsePositive { .. })),
                    "{}: bypassed check would have failed",
                    prog.name
                );
                match &oracle_result {
                    Ok(()) => {
                        result
                            .as_ref()
                            .expect("bypass completes when the oracle does");
                        assert_eq!(artifacts.output, oracle.output, "{}", prog.name);
                        assert_eq!(artifacts.final_memory, oracle.final_memory, "{}", prog.name);
                        // Check conservation against the oracle count.
                        assert_eq!(
                            artifacts.ledger.total_accesses(),
                            oracle.ledger.checks_performed,
                            "{}: conservation",
                            prog.name
                        );
                        completed_compared += 1;
                    }
                    Err(_) => {
                        assert!(
                            result.is_err(),
                            "{}: oracle aborted, bypass did not",
                            prog.name
                        );
                        aborted_in_both += 1;
                    }
                }
            }
        }
    }
    assert_eq!(total_false_positives, 0);
    assert!(total_bypassed > 100_000, "corpus should exercise bypassing");
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 300,
        "criterion must finish inside 5 minutes"
    );
    println!(
        "[acceptance 01] PASS - zero false positives across {total_bypassed} bypassed checks in {total_runs} runs ({elapsed:.1?})"
    );
    println!(
        "[acceptance 02] PASS - byte-identical output and memory on {completed_compared} completed runs; {aborted_in_both} runs aborted identically in both modes"
    );
}

// ---------------------------------------------------------------------------

/// Criterion 3: 10^4 randomized (hull, beta, c) trials in dimensions up to
/// five. Whenever every hull vertex satisfies the linear bound, every
/// contains()-accepted sample satisfies it too. Exact arithmetic, zero
/// violations.
#[test]
fn acceptance_03_linear_bounds_extend_from_vertices_to_members() {
    let mut rng = StdRng::seed_from_u64(31);
    let mut accepted_samples = 0u64;
    for trial in 0..10_000 {
        let dim = rng.random_range(1..=5usize);
        let coord_max: u64 = if trial % 3 == 0 { 8 } else { 1_000_000 };
        let n = rng.random_range(1..=7);
        let points: Vec<Point> = (0..n)
            .map(|_| {
                Point::new((0..dim).map(|_| rng.random_range(0..=coord_max)).collect()).unwrap()
            })
            .collect();
        let hull = build_hull(&points).unwrap();
        let beta: Vec<BigRational> = (0..dim)
            .map(|_| {
                BigRational::new(
                    BigInt::from(rng.random_range(-60i64..=60)),
                    BigInt::from(rng.random_range(1i64..=7)),
                )
            })
            .collect();
        // c = exact maximum over the vertices, so the premise holds.
        let c = hull
            .vertices()
            .values()
            .map(|v| {
                beta.iter()
                    .zip(v.coords())
                    .fold(BigRational::zero(), |acc, (b, &x)| {
                        acc + b * BigRational::from(BigInt::from(x))
                    })
            })
            .max()
            .unwrap();
        assert!(hull.linear_functional_bound_check(&beta, &c));

        for _ in 0..4 {
            let q =
                Point::new((0..dim).map(|_| rng.random_range(0..=coord_max)).collect()).unwrap();
            if hull.contains(&q).unwrap() {
                accepted_samples += 1;
                let val = beta
                    .iter()
                    .zip(q.coords())
                    .fold(BigRational::zero(), |acc, (b, &x)| {
                        acc + b * BigRational::from(BigInt::from(x))
                    });
                assert!(
                    val <= c,
                    "trial {trial}: contained point violates the bound"
                );
            }
        }
        // A bound strictly below the vertex maximum is rejected: the
        // maximizing vertex violates it.
        let below = &c - BigRational::new(BigInt::from(1), BigInt::from(2));
        assert!(!hull.linear_functional_bound_check(&beta, &below));
    }
    println!(
        "[acceptance 03] PASS - 10000 trials, {accepted_samples} contained samples, zero violations"
    );
}

// ---------------------------------------------------------------------------

/// Criterion 4: on 10^3 random (sample set, query) pairs, a union-safe
/// query point is always hull-safe. Zero violations.
#[test]
fn acceptance_04_hull_region_extends_union_region() {
    let mut rng = StdRng::seed_from_u64(47);
    let mut union_safe = 0u64;
    for _ in 0..1_000 {
        let dim = rng.random_range(1..=4usize);
        let coord_max: u64 = if rng.random_bool(0.5) { 10 } else { 100_000 };
        let n = rng.random_range(1..=10);
        let sig = VariableSignature::new(
            (0..dim)
                .map(|i| (format!("v{i}"), Correlation::Positive))
                .collect(),
            COORD_MAX,
        )
        .unwrap();
        let samples: Vec<Point> = (0..n)
            .map(|_| {
                Point::new((0..dim).map(|_| rng.random_range(0..=coord_max)).collect()).unwrap()
            })
            .collect();
        let union = UnionRegion::from_points(sig.clone(), samples.iter().cloned()).unwrap();
        let hull = HullRegion::build(samples, sig).unwrap();
        let q = Point::new((0..dim).map(|_| rng.random_range(0..=coord_max)).collect()).unwrap();
        if union.query(&q).unwrap().is_safe() {
            union_safe += 1;
            assert!(
                hull.query(&q).unwrap().is_safe(),
                "union-safe point {q:?} is not hull-safe"
            );
        }
    }
    println!("[acceptance 04] PASS - 1000 pairs, {union_safe} union-safe queries all hull-safe");
}

// ---------------------------------------------------------------------------

/// Criterion 5: seeded with the two boundary observations (1,855) and
/// (16,60), the hull's binding facet is exactly 53*s + n <= 908. On a
/// seeded 1000-request corpus with a 10-run warm-up knowledge base, the
/// hull bypass ratio beats the union ratio by at least ten percentage
/// points.
#[test]
fn acceptance_05_url_escape_facet_and_hull_vs_union_gap() {
    let started = std::time::Instant::now();
    let (program, analysis) = prepare(corpus::URLESCAPE);

    // Part 1: exact binding facet from the two seeds alone.
    let mut rng = StdRng::seed_from_u64(0xDEFA);
    let seeds = corpus::url_seed_requests(&mut rng);
    let (hull_kb, _) = warm_up(&program, &analysis, &seeds);
    let entry = hull_kb
        .entry("defang_url", Scope::Function)
        .expect("seeded entry exists");
    let RegionData::Hull(region) = &entry.region else {
        panic!("hull kind expected");
    };
    let hull = region.hull();
    let binding = hull
        .facets()
        .iter()
        .map(|f| {
            let (coeffs, bound) = facet_inequality(region.signature(), hull, f);
            render_inequality(&coeffs, &bound)
        })
        .find(|s| s == "53*s + n <= 908");
    assert_eq!(
        binding.as_deref(),
        Some("53*s + n <= 908"),
        "binding facet must match exactly"
    );

    // Part 2: 10 warm-up runs (the seeds plus eight realistic requests),
    // 1000 evaluation requests.
    let mut warmups = seeds;
    for i in 0..8 {
        let style = if i % 2 == 0 {
            UrlStyle::PlainLong
        } else {
            UrlStyle::ShortBusy
        };
        warmups.push(corpus::url_request_styled(style, &mut rng));
    }
    let (hull_kb, union_kb) = warm_up(&program, &analysis, &warmups);

    let evals: Vec<InputBindings> = (0..1000)
        .map(|i| {
            let style = match i % 4 {
                0 => UrlStyle::PlainLong,
                1 => UrlStyle::ShortBusy,
                _ => UrlStyle::Wedge,
            };
            corpus::url_request_styled(style, &mut rng)
        })
        .collect();

    let mut hull_ledger = CheckLedger::default();
    let mut union_ledger = CheckLedger::default();
    for inputs in &evals {
        let (r1, a1) = run_bypass(&program, &analysis, inputs, &hull_kb);
        r1.expect("requests are safe");
        hull_ledger.absorb(&a1.ledger);
        let (r2, a2) = run_bypass(&program, &analysis, inputs, &union_kb);
        r2.expect("requests are safe");
        union_ledger.absorb(&a2.ledger);
    }
    assert_eq!(hull_ledger.false_positives, 0);
    assert_eq!(union_ledger.false_positives, 0);
    let hull_ratio = hull_ledger.bypass_ratio();
    let union_ratio = union_ledger.bypass_ratio();
    assert!(
        hull_ratio >= union_ratio,
        "hull {hull_ratio:.4} < union {union_ratio:.4}"
    );
    assert!(
        hull_ratio - union_ratio >= 0.10,
        "gap {:.2}pp below 10pp (hull {:.2}%, union {:.2}%)",
        (hull_ratio - union_ratio) * 100.0,
        hull_ratio * 100.0,
        union_ratio * 100.0
    );
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "criterion must finish inside 1 minute"
    );
    println!(
        "[acceptance 05] PASS - binding facet 53*s + n <= 908; hull {:.2}% vs union {:.2}% (gap {:.2}pp) in {elapsed:.1?}",
        hull_ratio * 100.0,
        union_ratio * 100.0,
        (hull_ratio - union_ratio) * 100.0
    );
}

// ---------------------------------------------------------------------------

/// Criterion 6: the block-compare analogue derives the affecting set
/// (i1:+, i2:+, nblock:-), and after warming up on inputs satisfying
/// `nblock > i + 20` the steady-state bypass ratio is at least 99%.
#[test]
fn acceptance_06_block_compare_steady_state() {
    let (program, analysis) = prepare(corpus::BLOCK_CMP);
    let set = analysis
        .affecting_set("block_cmp", "block")
        .expect("block is a target")
        .as_ref()
        .expect("block is eligible");
    let rendered: Vec<(&str, char)> = set
        .vars
        .iter()
        .map(|(n, c)| (n.as_str(), c.symbol()))
        .collect();
    assert_eq!(rendered, [("i1", '+'), ("i2", '+'), ("nblock", '-')]);

    let mut rng = StdRng::seed_from_u64(66);
    // Warm-up at the envelope corner plus random safe points.
    let mut warmups = vec![corpus::block_cmp_input(&mut rng, 0, 1421)];
    warmups[0].insert("i1".into(), checklang_core::trace::InputValue::Int(1000));
    warmups[0].insert("i2".into(), checklang_core::trace::InputValue::Int(1000));
    warmups[0].insert(
        "nblock".into(),
        checklang_core::trace::InputValue::Int(1021),
    );
    for _ in 0..9 {
        warmups.push(corpus::block_cmp_input(&mut rng, 1000, 1021));
    }
    let (hull_kb, _) = warm_up(&program, &analysis, &warmups);

    let mut ledger = CheckLedger::default();
    for _ in 0..200 {
        let inputs = corpus::block_cmp_input(&mut rng, 1000, 1021);
        let (result, artifacts) = run_bypass(&program, &analysis, &inputs, &hull_kb);
        result.expect("inputs satisfy nblock > i + 20");
        ledger.absorb(&artifacts.ledger);
    }
    let fl = &ledger.per_function["block_cmp"];
    assert_eq!(fl.false_positives, 0);
    let ratio = fl.bypass_ratio();
    assert!(ratio >= 0.99, "steady-state ratio {:.4} below 99%", ratio);
    println!(
        "[acceptance 06] PASS - affecting set (i1:+, i2:+, nblock:-); steady-state bypass {:.2}% over {} checks",
        ratio * 100.0,
        fl.total_accesses()
    );
}

// ---------------------------------------------------------------------------

/// Criterion 7: the fixed-offset stencil bypasses 100% of its checks
/// after a single warm-up run.
#[test]
fn acceptance_07_stencil_full_bypass_after_one_warmup() {
    let (program, analysis) = prepare(corpus::STENCIL);
    let mut rng = StdRng::seed_from_u64(77);
    let warmups = vec![corpus::stencil_input(&mut rng)];
    let (hull_kb, union_kb) = warm_up(&program, &analysis, &warmups);

    for kb in [&hull_kb, &union_kb] {
        let mut ledger = CheckLedger::default();
        for _ in 0..50 {
            let inputs = corpus::stencil_input(&mut rng);
            let (result, artifacts) = run_bypass(&program, &analysis, &inputs, kb);
            result.unwrap();
            ledger.absorb(&artifacts.ledger);
        }
        let fl = &ledger.per_function["smooth"];
        assert_eq!(fl.checks_performed, 0, "no checked accesses remain");
        assert!(fl.checks_bypassed > 0);
        assert_eq!(fl.bypass_ratio(), 1.0);
        assert_eq!(fl.false_positives, 0);
    }
    println!(
        "[acceptance 07] PASS - 100% bypass in `smooth` after one warm-up run (both region kinds)"
    );
}

// ---------------------------------------------------------------------------

/// Criterion 8: a crafted trace whose index terms wrap the 32-bit range
/// never enlarges a region; queries over a test grid are identical before
/// and after the merge.
#[test]
fn acceptance_08_overflow_guard_blocks_wraparound_points() {
    let base_record = |x: i64, y: i64, len: i64, terms: Vec<Vec<i64>>| TraceRecord {
        func: "f".into(),
        scope: Scope::Function,
        vars: BTreeMap::from([
            ("x".to_string(), x),
            ("y".to_string(), y),
            ("a.len".to_string(), len),
        ]),
        trip_counts: BTreeMap::new(),
        all_checks_passed: true,
        correlations: BTreeMap::from([
            ("x".to_string(), "+".to_string()),
            ("y".to_string(), "+".to_string()),
            ("a.len".to_string(), "-".to_string()),
        ]),
        index_terms: terms,
        linear: true,
    };

    for kind in [RegionKind::Hull, RegionKind::Union] {
        let kb = KbSnapshot::new(kind, COORD_MAX);
        let (kb, warnings) = kb.merge(&[base_record(100, 1, 4000, vec![vec![100, 1]])]);
        assert!(warnings.is_empty());

        // The wraparound observation: x + y overflows the 32-bit range, so
        // the access only looked safe.
        let crafted = base_record(
            COORD_MAX as i64,
            1,
            COORD_MAX as i64,
            vec![vec![COORD_MAX as i64, 1]],
        );
        let (merged, warnings) = kb.merge(&[crafted]);
        assert!(
            warnings.iter().any(|w| w.contains("wraparound")),
            "guard must report the discarded point: {warnings:?}"
        );

        let before = &kb.entry("f", Scope::Function).unwrap().region;
        let after = &merged.entry("f", Scope::Function).unwrap().region;
        let mut grid_points = 0;
        for x in (0..=400u64).step_by(40) {
            for y in (0..=400u64).step_by(40) {
                for len in [0u64, 2000, 4000, 8000] {
                    let p = Point::new(vec![COORD_MAX - len, x, y]).unwrap();
                    assert_eq!(
                        before.query_point(&p),
                        after.query_point(&p),
                        "query changed after the guarded merge at ({x},{y},{len})"
                    );
                    grid_points += 1;
                }
            }
        }
        assert!(grid_points >= 400);
    }
    println!("[acceptance 08] PASS - wraparound data points never enlarge a region (grid-identical before/after)");
}

// ---------------------------------------------------------------------------

/// Criterion 9: the four-function fixture reproduces the overhead
/// breakdown 32.08%, 25.39%, 14.76%, 5.11% within 0.05 percentage points.
#[test]
fn acceptance_09_hotspot_breakdown_fixture() {
    let rat = |s: &str| parse_rational(s).unwrap();
    let cost = |func: &str, plain: &str, checked: &str| FunctionCost {
        func: func.into(),
        t_plain: rat(plain),
        t_checked: rat(checked),
        checks: 0,
    };
    // The four hot functions and six background functions chosen so the
    // total overhead completes to 2385.2 units.
    let mut costs = vec![
        cost("F1", "814.87", "1580.03"),
        cost("F2", "977.08", "1582.68"),
        cost("F3", "1.67", "353.76"),
        cost("F4", "148.85", "270.84"),
    ];
    for i in 0..6 {
        costs.push(cost(&format!("bg{i}"), "10", "100.06"));
    }
    let report = overhead_breakdown(&costs, &rat("0.05"));

    let expected = [
        ("F1", "3208"),
        ("F2", "2539"),
        ("F3", "1476"),
        ("F4", "511"),
    ];
    // 0.05 percentage points exactly.
    let tolerance = BigRational::new(BigInt::from(5), BigInt::from(10_000));
    for (func, expect_bp) in expected {
        let row = report.rows.iter().find(|r| r.func == func).unwrap();
        let expect = BigRational::new(
            BigInt::from(expect_bp.parse::<i64>().unwrap()),
            BigInt::from(10_000),
        );
        let diff = (&row.overhead_fraction - &expect).abs();
        assert!(
            diff <= tolerance,
            "{func}: {} vs expected {}",
            format_percent(&row.overhead_fraction),
            format_percent(&expect)
        );
        assert!(row.selected, "{func} must be selected at the 5% threshold");
    }
    println!(
        "[acceptance 09] PASS - breakdown {} / {} / {} / {} within 0.05pp",
        format_percent(
            &report
                .rows
                .iter()
                .find(|r| r.func == "F1")
                .unwrap()
                .overhead_fraction
        ),
        format_percent(
            &report
                .rows
                .iter()
                .find(|r| r.func == "F2")
                .unwrap()
                .overhead_fraction
        ),
        format_percent(
            &report
                .rows
                .iter()
                .find(|r| r.func == "F3")
                .unwrap()
                .overhead_fraction
        ),
        format_percent(
            &report
                .rows
                .iter()
                .find(|r| r.func == "F4")
                .unwrap()
                .overhead_fraction
        ),
    );
}

// ---------------------------------------------------------------------------

/// Criterion 10: check conservation, monotone region updates, and the
/// Pareto-frontier antichain invariant, each over at least 10^3 cases.
#[test]
fn acceptance_10_property_suites() {
    // Check conservation over 1000 runs of the stencil benchmark.
    let (program, analysis) = prepare(corpus::STENCIL);
    let mut rng = StdRng::seed_from_u64(1010);
    let warmups = vec![corpus::stencil_input(&mut rng)];
    let (hull_kb, _) = warm_up(&program, &analysis, &warmups);
    let mut conservation_cases = 0;
    for _ in 0..1000 {
        let inputs = corpus::stencil_input(&mut rng);
        let (or, oracle) = run_full_check(&program, &analysis, &inputs);
        or.unwrap();
        let (br, bypass) = run_bypass(&program, &analysis, &inputs, &hull_kb);
        br.unwrap();
        assert_eq!(
            bypass.ledger.checks_performed + bypass.ledger.checks_bypassed,
            oracle.ledger.checks_performed,
            "conservation"
        );
        conservation_cases += 1;
    }

    // Monotone updates over 1000 random hull regions.
    let sig = |d: usize| {
        VariableSignature::new(
            (0..d)
                .map(|i| (format!("v{i}"), Correlation::Positive))
                .collect(),
            COORD_MAX,
        )
        .unwrap()
    };
    let mut update_cases = 0;
    for _ in 0..1000 {
        let dim = rng.random_range(1..=3usize);
        let n = rng.random_range(1..=5);
        let samples: Vec<Point> = (0..n)
            .map(|_| Point::new((0..dim).map(|_| rng.random_range(0..=200u64)).collect()).unwrap())
            .collect();
        let region = HullRegion::build(samples, sig(dim)).unwrap();
        let p = Point::new((0..dim).map(|_| rng.random_range(0..=300u64)).collect()).unwrap();
        let grown = region.update(&p, &OverflowSpec::empty()).unwrap();
        for _ in 0..5 {
            let q = Point::new((0..dim).map(|_| rng.random_range(0..=300u64)).collect()).unwrap();
            if region.query(&q).unwrap().is_safe() {
                assert!(grown.query(&q).unwrap().is_safe(), "region shrank at {q:?}");
            }
        }
        assert!(grown.query(&p).unwrap().is_safe());
        update_cases += 1;
    }

    // Pareto-frontier antichain over 1000 random unions.
    let mut antichain_cases = 0;
    for _ in 0..1000 {
        let dim = rng.random_range(1..=4usize);
        let n = rng.random_range(0..=14);
        let points: Vec<Point> = (0..n)
            .map(|_| Point::new((0..dim).map(|_| rng.random_range(0..=30u64)).collect()).unwrap())
            .collect();
        let union = UnionRegion::from_points(sig(dim), points).unwrap();
        let frontier = union.frontier();
        for (i, p) in frontier.iter().enumerate() {
            for (j, q) in frontier.iter().enumerate() {
                if i != j {
                    assert!(
                        !checklang_core::geometry::dominates(p, q).unwrap(),
                        "frontier is not an antichain"
                    );
                }
            }
        }
        antichain_cases += 1;
    }

    println!(
        "[acceptance 10] PASS - conservation {conservation_cases} cases, monotone updates {update_cases} cases, antichain {antichain_cases} cases"
    );
}
