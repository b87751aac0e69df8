//! End-to-end interpreter tests on the escape program: oracle execution,
//! trace capture, trip-count arithmetic, bypass-mode equivalence, and
//! check conservation.

use checklang_core::ast::Program;
use checklang_core::depgraph::{analyze_program, instrument_trip_counts, ProgramAnalysis};
use checklang_core::geometry::COORD_MAX;
use checklang_core::interp::{run_bypass, run_full_check, RuntimeError};
use checklang_core::kb::KbSnapshot;
use checklang_core::parser::parse;
use checklang_core::region::RegionKind;
use checklang_core::trace::{InputBindings, InputValue, Scope};

const ESCAPE: &str = r#"
func escape(array<int> src, array<int> dst, int ssize, int dsize, int snum) {
    if (ssize + 3 * snum + 1 > dsize) {
        dsize = ssize + 3 * snum + 1;
        resize(dst, dsize);
    }
    int cp2 = 0;
    for (int cp1 = 0; cp1 < ssize && cp2 < ssize + 3 * snum; cp1 = cp1 + 1) {
        switch (src[cp1]) {
            case '<':
                dst[cp2] = '&'; cp2 = cp2 + 1;
                dst[cp2] = 'l'; cp2 = cp2 + 1;
                dst[cp2] = 't'; cp2 = cp2 + 1;
                dst[cp2] = ';';
            case '>':
                dst[cp2] = '&'; cp2 = cp2 + 1;
                dst[cp2] = 'g'; cp2 = cp2 + 1;
                dst[cp2] = 't'; cp2 = cp2 + 1;
                dst[cp2] = ';';
            default:
                dst[cp2] = src[cp1];
        }
        cp2 = cp2 + 1;
    }
    dst[cp2] = '\0';
}

func main() {
    input int ssize;
    input int dsize;
    input int snum;
    input array<int> src;
    array<int> dst = alloc(dsize);
    call escape(src, dst, ssize, dsize, snum);
    printa(dst);
}
"#;

fn prepared() -> (Program, ProgramAnalysis) {
    let program = parse(ESCAPE).unwrap();
    let analysis = analyze_program(&program);
    let instrumented = instrument_trip_counts(&program, &analysis);
    (instrumented, analysis)
}

fn escape_inputs(src: &str, dsize: i64, snum: i64) -> InputBindings {
    let codes: Vec<i64> = src.chars().map(|c| c as i64).collect();
    let mut inputs = InputBindings::new();
    inputs.insert("ssize".into(), InputValue::Int(codes.len() as i64));
    inputs.insert("dsize".into(), InputValue::Int(dsize));
    inputs.insert("snum".into(), InputValue::Int(snum));
    inputs.insert("src".into(), InputValue::Array(codes));
    inputs
}

#[test]
fn escape_produces_the_escaped_string() {
    let (program, analysis) = prepared();
    let inputs = escape_inputs("a<b>", 12, 2);
    let (result, artifacts) = run_full_check(&program, &analysis, &inputs);
    result.unwrap();

    // "a&lt;b&gt;" plus terminator, zero-padded to dsize = 12.
    let expected: Vec<i64> = "a&lt;b&gt;"
        .chars()
        .map(|c| c as i64)
        .chain([0, 0])
        .collect();
    let dst = artifacts.final_memory.get(&1).expect("dst is allocation 1");
    assert_eq!(dst, &expected);
    assert_eq!(artifacts.output, "97 38 108 116 59 98 38 103 116 59 0 0\n");
    assert_eq!(artifacts.ledger.false_positives, 0);
    assert_eq!(artifacts.ledger.checks_bypassed, 0);

    // The function-scope trace point carries the entry values.
    let rec = artifacts
        .trace
        .iter()
        .find(|r| r.func == "escape" && r.scope == Scope::Function)
        .expect("escape activation records a trace point");
    assert!(rec.all_checks_passed);
    assert_eq!(rec.vars.get("ssize"), Some(&4));
    assert_eq!(rec.vars.get("snum"), Some(&2));
    assert_eq!(rec.vars.get("dsize"), Some(&12));
    assert_eq!(rec.correlations.get("dsize").map(String::as_str), Some("-"));

    // Trip counts: one '<', one '>', two plain characters; the final
    // length including the terminator is 4*(tc1+tc2)+tc3+1 = 3*snum+ssize+1.
    assert_eq!(rec.trip_counts.get("tc1"), Some(&1));
    assert_eq!(rec.trip_counts.get("tc2"), Some(&1));
    assert_eq!(rec.trip_counts.get("tc3"), Some(&2));
    let (tc1, tc2, tc3) = (1i64, 1, 2);
    assert_eq!(4 * (tc1 + tc2) + tc3 + 1, 3 * 2 + 4 + 1);
}

#[test]
fn trip_count_identity_holds_across_random_inputs() {
    let (program, analysis) = prepared();
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for _ in 0..40 {
        let ssize = (next() % 60) as i64;
        let mut src = String::new();
        let mut snum = 0;
        for _ in 0..ssize {
            match next() % 5 {
                0 => {
                    src.push('<');
                    snum += 1;
                }
                1 => {
                    src.push('>');
                    snum += 1;
                }
                d => src.push((b'a' + d as u8) as char),
            }
        }
        let dsize = 3 * snum + ssize + 1 + (next() % 10) as i64;
        let inputs = escape_inputs(&src, dsize, snum);
        let (result, artifacts) = run_full_check(&program, &analysis, &inputs);
        result.unwrap();
        let rec = artifacts
            .trace
            .iter()
            .find(|r| r.func == "escape" && r.scope == Scope::Function)
            .unwrap();
        let tc1 = rec.trip_counts["tc1"] as i64;
        let tc2 = rec.trip_counts["tc2"] as i64;
        let tc3 = rec.trip_counts["tc3"] as i64;
        assert_eq!(
            4 * (tc1 + tc2) + tc3 + 1,
            3 * snum + ssize + 1,
            "identity failed for src {src:?}"
        );
    }
}

#[test]
fn undersized_destination_without_realloc_violates_in_the_last_iteration() {
    // Same function with the realloc branch removed: the guard lets the
    // cursor approach the bound and a special-character arm writes past it.
    let src = ESCAPE.replace(
        "    if (ssize + 3 * snum + 1 > dsize) {
        dsize = ssize + 3 * snum + 1;
        resize(dst, dsize);
    }
",
        "",
    );
    let program = parse(&src).unwrap();
    let analysis = analyze_program(&program);
    let program = instrument_trip_counts(&program, &analysis);
    let inputs = escape_inputs("<<<<", 6, 4);
    let (result, artifacts) = run_full_check(&program, &analysis, &inputs);
    match result {
        Err(RuntimeError::BoundsViolation {
            func,
            index,
            length,
            ..
        }) => {
            assert_eq!(func, "escape");
            assert_eq!(length, 6);
            assert!(index >= 6);
        }
        other => panic!("expected a bounds violation, got {other:?}"),
    }
    // The aborted activation must not produce a verified trace point.
    for rec in &artifacts.trace {
        assert!(!rec.all_checks_passed);
    }
}

#[test]
fn reading_an_empty_array_is_a_violation() {
    let src = "func main() { array<int> a = alloc(0); int x = a[0]; print(x); }";
    let program = parse(src).unwrap();
    let analysis = analyze_program(&program);
    let (result, _) = run_full_check(&program, &analysis, &InputBindings::new());
    assert!(matches!(
        result,
        Err(RuntimeError::BoundsViolation {
            index: 0,
            length: 0,
            ..
        })
    ));
}

#[test]
fn division_by_zero_and_unbound_inputs_are_reported() {
    let src = "func main() { int a = 4; int b = 0; int c = a / b; print(c); }";
    let program = parse(src).unwrap();
    let analysis = analyze_program(&program);
    let (result, _) = run_full_check(&program, &analysis, &InputBindings::new());
    assert!(matches!(result, Err(RuntimeError::DivisionByZero { .. })));

    let src2 = "func main() { input int x; print(x); }";
    let program2 = parse(src2).unwrap();
    let analysis2 = analyze_program(&program2);
    let (result2, _) = run_full_check(&program2, &analysis2, &InputBindings::new());
    assert!(matches!(result2, Err(RuntimeError::UnboundInput { .. })));
}

#[test]
fn warmed_up_kb_bypasses_every_check_with_identical_results() {
    let (program, analysis) = prepared();

    // Warm-up run dominating the evaluation input in every coordinate.
    let warm = escape_inputs("x<y>zz<w>", 40, 3);
    let (ok, warm_artifacts) = run_full_check(&program, &analysis, &warm);
    ok.unwrap();
    let kb = KbSnapshot::new(RegionKind::Hull, COORD_MAX);
    let (kb, warnings) = kb.merge(&warm_artifacts.trace);
    assert!(warnings.is_empty(), "unexpected warnings: {warnings:?}");

    // Evaluation input: fewer characters, fewer specials, same capacity.
    // The source array is padded past `ssize` so its length (a
    // negatively-correlated coordinate) also dominates.
    let mut eval = escape_inputs("a<b>", 40, 2);
    eval.insert("ssize".into(), InputValue::Int(4));
    eval.insert(
        "src".into(),
        InputValue::Array("a<b>".chars().map(|c| c as i64).chain([0; 5]).collect()),
    );
    let (full_ok, full) = run_full_check(&program, &analysis, &eval);
    full_ok.unwrap();
    let (byp_ok, byp) = run_bypass(&program, &analysis, &eval, &kb);
    byp_ok.unwrap();

    // Semantic equivalence: outputs and final memory byte-identical.
    assert_eq!(full.output, byp.output);
    assert_eq!(full.final_memory, byp.final_memory);

    // All of the escape activation's checks were bypassed.
    let escape_ledger = &byp.ledger.per_function["escape"];
    assert_eq!(escape_ledger.checks_performed, 0);
    assert!(escape_ledger.checks_bypassed > 0);
    assert_eq!(escape_ledger.bypassed_activations, 1);
    assert_eq!(byp.ledger.false_positives, 0);

    // Check conservation: performed + bypassed equals the oracle count.
    assert_eq!(
        byp.ledger.checks_performed + byp.ledger.checks_bypassed,
        full.ledger.checks_performed
    );
}

#[test]
fn empty_kb_changes_nothing() {
    let (program, analysis) = prepared();
    let inputs = escape_inputs("a<b>", 12, 2);
    let (full_ok, full) = run_full_check(&program, &analysis, &inputs);
    full_ok.unwrap();
    let kb = KbSnapshot::new(RegionKind::Hull, COORD_MAX);
    let (byp_ok, byp) = run_bypass(&program, &analysis, &inputs, &kb);
    byp_ok.unwrap();
    assert_eq!(byp.ledger.checks_bypassed, 0);
    assert_eq!(byp.ledger.checks_performed, full.ledger.checks_performed);
    assert_eq!(full.output, byp.output);
}

#[test]
fn non_dominated_inputs_fall_back_to_full_checking() {
    let (program, analysis) = prepared();
    let warm = escape_inputs("ab", 20, 0);
    let (ok, warm_artifacts) = run_full_check(&program, &analysis, &warm);
    ok.unwrap();
    let (kb, _) = KbSnapshot::new(RegionKind::Union, COORD_MAX).merge(&warm_artifacts.trace);

    // More characters than any verified run: unknown, full checks.
    let eval = escape_inputs("abcdef", 20, 0);
    let (byp_ok, byp) = run_bypass(&program, &analysis, &eval, &kb);
    byp_ok.unwrap();
    assert_eq!(byp.ledger.per_function["escape"].checks_bypassed, 0);
}
