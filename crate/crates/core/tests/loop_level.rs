//! Loop-level bypassing: when a content-driven store keeps a function on
//! full checks, an inner loop whose accesses only depend on
//! entry-available values still gets its own region, queried once per
//! loop entry (the hoisted check).

use checklang_core::depgraph::{analyze_program, instrument_trip_counts};
use checklang_core::geometry::COORD_MAX;
use checklang_core::interp::{run_bypass, run_full_check};
use checklang_core::kb::KbSnapshot;
use checklang_core::parser::parse;
use checklang_core::region::RegionKind;
use checklang_core::trace::{InputBindings, InputValue, Scope};

const MIXED: &str = r#"
func mix(array<int> data, array<int> lut, int n, int off) {
    int j = lut[0];
    data[j] = j;
    for (int k = 0; k < n; k = k + 1) {
        data[off] = data[off] + k;
        data[off + 1] = data[off] - k;
    }
}
func main() {
    input int n;
    input int off;
    input int j0;
    array<int> data = alloc(64);
    array<int> lut = alloc(4);
    lut[0] = j0;
    call mix(data, lut, n, off);
    printa(data);
}
"#;

fn inputs(n: i64, off: i64, j0: i64) -> InputBindings {
    let mut b = InputBindings::new();
    b.insert("n".into(), InputValue::Int(n));
    b.insert("off".into(), InputValue::Int(off));
    b.insert("j0".into(), InputValue::Int(j0));
    b
}

#[test]
fn loop_scope_bypasses_while_the_function_stays_checked() {
    let program = parse(MIXED).unwrap();
    let analysis = analyze_program(&program);
    let program = instrument_trip_counts(&program, &analysis);
    let fa = analysis.function("mix").unwrap();
    assert!(fa.function_region.is_none());
    assert_eq!(fa.loop_regions.len(), 1);

    // Warm up at the envelope corner.
    let (ok, artifacts) = run_full_check(&program, &analysis, &inputs(40, 50, 3));
    ok.unwrap();
    assert!(artifacts
        .trace
        .iter()
        .any(|r| matches!(r.scope, Scope::Loop(_)) && r.all_checks_passed));
    let (kb, warnings) = KbSnapshot::new(RegionKind::Hull, COORD_MAX).merge(&artifacts.trace);
    assert!(warnings.is_empty(), "{warnings:?}");

    // A dominated run: the loop is granted the bypass at entry, while the
    // content-driven store before it stays checked.
    let eval = inputs(12, 7, 60);
    let (full_ok, full) = run_full_check(&program, &analysis, &eval);
    full_ok.unwrap();
    let (byp_ok, byp) = run_bypass(&program, &analysis, &eval, &kb);
    byp_ok.unwrap();

    let fl = &byp.ledger.per_function["mix"];
    assert_eq!(
        fl.bypassed_activations, 0,
        "no function-level verdict exists"
    );
    assert_eq!(
        fl.bypassed_loop_entries, 1,
        "the hoisted loop query fires once"
    );
    assert!(fl.checks_bypassed > 0, "in-loop checks are suppressed");
    // The lut read and the content-indexed store remain checked.
    assert!(fl.checks_performed >= 2);
    assert_eq!(fl.false_positives, 0);

    // Equivalence and conservation against the oracle.
    assert_eq!(full.output, byp.output);
    assert_eq!(full.final_memory, byp.final_memory);
    assert_eq!(byp.ledger.total_accesses(), full.ledger.checks_performed);

    // Outside the loop region (bigger offset than any verified run): the
    // loop falls back to full checking.
    let outside = inputs(12, 55, 3);
    let (ok2, byp2) = run_bypass(&program, &analysis, &outside, &kb);
    ok2.unwrap();
    assert_eq!(byp2.ledger.per_function["mix"].bypassed_loop_entries, 0);
}
