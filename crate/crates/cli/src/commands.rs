//! Subcommand implementations. Each returns a process exit code through
//! [`Failure`]: 0 success, 1 bounds violation (or a bypassed check that
//! failed re-verification), 2 usage, 3 file-format or knowledge-base
//! trouble.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use checklang_core::ast::Program;
use checklang_core::depgraph::{analyze_program, instrument_trip_counts, ProgramAnalysis};
use checklang_core::interp::{run_program, Clock, RunArtifacts, RunConfig, RuntimeError};
use checklang_core::kb::{facet_inequality, render_inequality, KbSnapshot, RegionData};
use checklang_core::parser::parse;
use checklang_core::profiler::BigRational;
use checklang_core::profiler::{
    format_percent, overhead_breakdown, parse_rational, rational_to_f64, synthetic_cost_model,
    FunctionCost,
};
use checklang_core::region::RegionKind;
use checklang_core::trace::{parse_inputs, InputBindings};

use crate::io;
use crate::report::RunReport;

#[derive(Debug)]
pub enum Failure {
    Violation(String),
    Usage(String),
    Format(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Format(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Violation(m) | Failure::Usage(m) | Failure::Format(m) => m,
        }
    }
}

pub type CmdResult = Result<(), Failure>;

fn format_err(e: impl std::fmt::Display) -> Failure {
    Failure::Format(e.to_string())
}

/// Parse, analyze, and instrument a program file.
pub fn load_program(path: &Path) -> Result<(Program, ProgramAnalysis), Failure> {
    let source =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let program = parse(&source).map_err(|e| Failure::Format(format!("{}:{e}", path.display())))?;
    let analysis = analyze_program(&program);
    let instrumented = instrument_trip_counts(&program, &analysis);
    Ok((instrumented, analysis))
}

fn load_input_file(path: &Path) -> Result<InputBindings, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_inputs(&text).map_err(|e| Failure::Format(format!("{}: {e}", path.display())))
}

struct WallClock {
    start: Instant,
}

impl Clock for WallClock {
    fn now_nanos(&self) -> u64 {
        self.start.elapsed().as_nanos() as u64
    }
}

// ---------------------------------------------------------------------------

pub struct ProfileArgs {
    pub program: PathBuf,
    pub inputs: Vec<PathBuf>,
    pub trace_out: Option<PathBuf>,
    pub ledger_out: Option<PathBuf>,
    pub wall_clock: bool,
    pub step_limit: u64,
}

pub fn cmd_profile(args: ProfileArgs) -> CmdResult {
    if args.inputs.is_empty() {
        return Err(Failure::Usage(
            "profile needs at least one input file".to_string(),
        ));
    }
    let (program, analysis) = load_program(&args.program)?;
    let clock = WallClock {
        start: Instant::now(),
    };
    let config = RunConfig {
        step_limit: args.step_limit,
        ..RunConfig::full_check()
    };

    let mut trace_text = String::new();
    let mut ledger_text = String::new();
    let mut violations = 0usize;
    for input_path in &args.inputs {
        let inputs = load_input_file(input_path)?;
        let clock_ref: Option<&dyn Clock> = args.wall_clock.then_some(&clock as &dyn Clock);
        let (result, artifacts) =
            run_program(&program, &analysis, &inputs, None, &config, clock_ref);
        trace_text.push_str(&io::traces_to_lines(&artifacts.trace));
        ledger_text.push_str(&io::ledger_lines(
            &input_path.display().to_string(),
            &artifacts.ledger,
        ));
        match result {
            Ok(()) => {
                println!(
                    "{}: ok, {} checks, {} trace records",
                    input_path.display(),
                    artifacts.ledger.checks_performed,
                    artifacts.trace.len()
                );
            }
            Err(e) => {
                violations += 1;
                eprintln!("{}: {e}", input_path.display());
            }
        }
    }
    if let Some(path) = &args.trace_out {
        io::atomic_write(path, &trace_text).map_err(format_err)?;
    }
    if let Some(path) = &args.ledger_out {
        io::atomic_write(path, &ledger_text).map_err(format_err)?;
    }
    if violations > 0 {
        return Err(Failure::Violation(format!(
            "{violations} of {} inputs aborted",
            args.inputs.len()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------

pub struct HotspotsArgs {
    pub ledger: PathBuf,
    pub threshold: String,
    pub per_check_cost: String,
    pub per_stmt_cost: String,
    pub json: Option<PathBuf>,
    pub from_wall_clock: bool,
}

pub fn cmd_hotspots(args: HotspotsArgs) -> CmdResult {
    let text = fs::read_to_string(&args.ledger)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.ledger.display())))?;
    let ledger = io::parse_ledger_lines(&text).map_err(format_err)?;
    let threshold = parse_arg_rational(&args.threshold, "--threshold")?;
    let per_check = parse_arg_rational(&args.per_check_cost, "--per-check-cost")?;
    let per_stmt = parse_arg_rational(&args.per_stmt_cost, "--per-stmt-cost")?;

    let costs: Vec<FunctionCost> = if args.from_wall_clock {
        // Non-deterministic auxiliary mode: rank by measured self time of
        // the checked run.
        println!("# wall-clock mode: shares reflect measured time, non-deterministic");
        ledger
            .per_function
            .iter()
            .map(|(func, fl)| FunctionCost {
                func: func.clone(),
                t_plain: BigRational::from_integer(0.into()),
                t_checked: BigRational::from_integer(fl.wall_nanos.into()),
                checks: fl.total_accesses(),
            })
            .collect()
    } else {
        synthetic_cost_model(&ledger, &per_check, &per_stmt).map_err(format_err)?
    };
    let report = overhead_breakdown(&costs, &threshold);
    if let Some(note) = &report.note {
        println!("{note}");
    }
    println!(
        "{:<24} {:>14} {:>14} {:>9} {:>9}",
        "function", "t_plain", "t_checked", "share", "selected"
    );
    for row in &report.rows {
        println!(
            "{:<24} {:>14.4} {:>14.4} {:>9} {:>9}",
            row.func,
            rational_to_f64(&row.t_plain),
            rational_to_f64(&row.t_checked),
            format_percent(&row.overhead_fraction),
            if row.selected { "yes" } else { "" }
        );
    }
    if let Some(path) = &args.json {
        let rows: Vec<serde_json::Value> = report
            .rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "func": r.func,
                    "t_plain": rational_to_f64(&r.t_plain),
                    "t_checked": rational_to_f64(&r.t_checked),
                    "share": rational_to_f64(&r.overhead_fraction),
                    "selected": r.selected,
                })
            })
            .collect();
        let doc = serde_json::json!({
            "threshold": rational_to_f64(&report.threshold),
            "rows": rows,
        });
        io::atomic_write(path, &serde_json::to_string_pretty(&doc).unwrap()).map_err(format_err)?;
    }
    Ok(())
}

fn parse_arg_rational(s: &str, what: &str) -> Result<BigRational, Failure> {
    parse_rational(s).ok_or_else(|| Failure::Usage(format!("{what}: `{s}` is not a number")))
}

// ---------------------------------------------------------------------------

pub struct BuildArgs {
    pub traces: Vec<PathBuf>,
    pub kind: RegionKind,
    pub kb: PathBuf,
    pub base: Option<PathBuf>,
    pub c_max: u64,
    /// Restrict to these functions (the hotspot selection); empty = all.
    pub functions: Vec<String>,
}

pub fn cmd_build(args: BuildArgs) -> CmdResult {
    if args.traces.is_empty() {
        return Err(Failure::Usage(
            "build needs at least one trace file".to_string(),
        ));
    }
    let base = match &args.base {
        Some(path) => io::load_kb(path).map_err(format_err)?,
        None => KbSnapshot::new(args.kind, args.c_max),
    };
    if base.kind != Some(args.kind) {
        return Err(Failure::Format(format!(
            "base knowledge base is kind `{}`, requested `{}`",
            base.kind.map(|k| k.to_string()).unwrap_or_default(),
            args.kind
        )));
    }
    let mut records = Vec::new();
    for path in &args.traces {
        records.extend(io::load_traces(path).map_err(format_err)?);
    }
    if !args.functions.is_empty() {
        records.retain(|r| args.functions.iter().any(|f| f == &r.func));
    }
    let (kb, warnings) = base.merge(&records);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    io::store_kb(&args.kb, &kb).map_err(format_err)?;
    println!(
        "wrote {} with {} entries from {} records",
        args.kb.display(),
        kb.entries.len(),
        records.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------

pub struct RunArgs {
    pub program: PathBuf,
    pub inputs: Vec<PathBuf>,
    pub kb: PathBuf,
    pub compare_kb: Option<PathBuf>,
    pub report_out: Option<PathBuf>,
    pub no_reverify: bool,
    pub verify_oracle: bool,
    pub step_limit: u64,
}

pub fn cmd_run(args: RunArgs) -> CmdResult {
    if args.inputs.is_empty() {
        return Err(Failure::Usage(
            "run needs at least one input file".to_string(),
        ));
    }
    let (program, analysis) = load_program(&args.program)?;
    let kb = io::load_kb(&args.kb).map_err(format_err)?;
    let compare = match &args.compare_kb {
        Some(path) => Some(io::load_kb(path).map_err(format_err)?),
        None => None,
    };

    let config = RunConfig {
        reverify: !args.no_reverify,
        step_limit: args.step_limit,
        ..RunConfig::bypass()
    };

    let mut primary = AggregateRun::new(kb.dual_functions().len());
    let mut secondary = compare
        .as_ref()
        .map(|c| AggregateRun::new(c.dual_functions().len()));

    for input_path in &args.inputs {
        let inputs = load_input_file(input_path)?;
        let (result, artifacts) =
            run_program(&program, &analysis, &inputs, Some(&kb), &config, None);
        if args.verify_oracle {
            verify_against_oracle(
                &program, &analysis, &inputs, &result, &artifacts, input_path,
            )?;
        }
        primary.add(input_path, result, artifacts);
        if let (Some(sec), Some(ckb)) = (secondary.as_mut(), compare.as_ref()) {
            let (result, artifacts) =
                run_program(&program, &analysis, &inputs, Some(ckb), &config, None);
            sec.add(input_path, result, artifacts);
        }
    }

    let report = primary.report();
    let comparison = secondary.as_ref().map(|s| s.report());
    let text = match &comparison {
        Some(other) => report.render_text(Some(("bypassed (other)", other))),
        None => report.render_text(None),
    };
    print!("{text}");

    if let Some(path) = &args.report_out {
        let mut doc = report.to_json();
        if let Some(other) = &comparison {
            doc["comparison"] = other.to_json();
        }
        io::atomic_write(path, &serde_json::to_string_pretty(&doc).unwrap()).map_err(format_err)?;
    }

    if report.false_positives > 0 {
        return Err(Failure::Violation(format!(
            "{} bypassed checks failed re-verification",
            report.false_positives
        )));
    }
    if report.inputs_failed > 0 {
        return Err(Failure::Violation(format!(
            "{} of {} inputs aborted",
            report.inputs_failed, report.inputs_run
        )));
    }
    Ok(())
}

struct AggregateRun {
    ledger: checklang_core::interp::CheckLedger,
    dual_functions: usize,
    inputs_run: usize,
    inputs_failed: usize,
}

impl AggregateRun {
    fn new(dual_functions: usize) -> Self {
        AggregateRun {
            ledger: Default::default(),
            dual_functions,
            inputs_run: 0,
            inputs_failed: 0,
        }
    }

    fn add(&mut self, path: &Path, result: Result<(), RuntimeError>, artifacts: RunArtifacts) {
        self.inputs_run += 1;
        self.ledger.absorb(&artifacts.ledger);
        if let Err(e) = result {
            self.inputs_failed += 1;
            eprintln!("{}: {e}", path.display());
        }
    }

    fn report(&self) -> RunReport {
        let mut report = RunReport::from_ledger(&self.ledger, self.dual_functions);
        report.inputs_run = self.inputs_run;
        report.inputs_failed = self.inputs_failed;
        report
    }
}

fn verify_against_oracle(
    program: &Program,
    analysis: &ProgramAnalysis,
    inputs: &InputBindings,
    bypass_result: &Result<(), RuntimeError>,
    bypass_artifacts: &RunArtifacts,
    path: &Path,
) -> CmdResult {
    let mut config = RunConfig::full_check();
    config.collect_trace = false;
    let (oracle_result, oracle) = run_program(program, analysis, inputs, None, &config, None);
    match oracle_result {
        Ok(()) => {
            if bypass_result.is_err()
                || bypass_artifacts.output != oracle.output
                || bypass_artifacts.final_memory != oracle.final_memory
            {
                return Err(Failure::Violation(format!(
                    "{}: bypass run diverged from the oracle",
                    path.display()
                )));
            }
            let total = bypass_artifacts.ledger.total_accesses();
            if total != oracle.ledger.checks_performed {
                return Err(Failure::Violation(format!(
                    "{}: conservation mismatch: {} + {} != {}",
                    path.display(),
                    bypass_artifacts.ledger.checks_performed,
                    bypass_artifacts.ledger.checks_bypassed,
                    oracle.ledger.checks_performed
                )));
            }
        }
        Err(_) => {
            if bypass_result.is_ok() {
                return Err(Failure::Violation(format!(
                    "{}: oracle aborted but the bypass run completed",
                    path.display()
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------

pub fn cmd_kb_inspect(kb_path: &Path) -> CmdResult {
    let kb = io::load_kb(kb_path).map_err(format_err)?;
    println!(
        "knowledge base: kind={} c_max={} merges={} entries={}",
        kb.kind
            .map(|k| k.to_string())
            .unwrap_or_else(|| "none".into()),
        kb.c_max,
        kb.merges,
        kb.entries.len()
    );
    for entry in kb.entries.values() {
        let sig = entry.region.signature();
        let vars: Vec<String> = sig
            .vars()
            .map(|(n, c)| format!("{n}:{}", c.symbol()))
            .collect();
        println!(
            "\n{} [{}]  vars=({})  samples={} created={} updated={}",
            entry.func,
            entry.scope,
            vars.join(", "),
            entry.sample_count,
            entry.created,
            entry.updated
        );
        match &entry.region {
            RegionData::Union(r) => {
                println!("  union frontier ({} points):", r.frontier().len());
                for p in r.frontier() {
                    println!("    {:?}", p.coords());
                }
            }
            RegionData::Hull(r) => {
                let hull = r.hull();
                println!(
                    "  hull: {} vertices, {} facets, rank {}",
                    hull.vertices().len(),
                    hull.facets().len(),
                    hull.rank()
                );
                if hull.rank() <= 1 {
                    // One-dimensional regions read as a plain threshold.
                    let max = hull
                        .vertices()
                        .values()
                        .flat_map(|p| p.coords().iter().copied())
                        .max()
                        .unwrap_or(0);
                    println!("  threshold: {} <= {max}", sig.names().join(","));
                }
                for f in hull.facets() {
                    let (coeffs, bound) = facet_inequality(sig, hull, f);
                    println!("    {}", render_inequality(&coeffs, &bound));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------

pub fn cmd_dump_dg(program_path: &Path) -> CmdResult {
    let source = fs::read_to_string(program_path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", program_path.display())))?;
    let program =
        parse(&source).map_err(|e| Failure::Format(format!("{}:{e}", program_path.display())))?;
    let analysis = analyze_program(&program);

    let mut out = String::new();
    for f in &program.functions {
        let fa = analysis.function(&f.name).expect("analyzed");
        let dg = &fa.graph;
        let _ = writeln!(out, "function {}:", f.name);
        for e in &dg.edges {
            let _ = writeln!(
                out,
                "  {} -{}-> {} ({}, line {})",
                dg.nodes[e.from].name,
                e.sign.symbol(),
                dg.nodes[e.to].name,
                e.rule,
                e.line
            );
        }
        for binding in analysis.bindings.iter().filter(|b| b.callee == f.name) {
            for (pos, arg) in binding.args.iter().enumerate() {
                if let (Some(arg), Some(&pslot)) = (arg, f.params.get(pos)) {
                    let _ = writeln!(
                        out,
                        "  {} <-> {}.{} (E2, line {})",
                        f.locals[pslot].name, binding.caller, arg, binding.line
                    );
                }
            }
        }
        for counter in &dg.counters {
            let _ = writeln!(
                out,
                "  counter {} for loop site {} (arm at line {})",
                counter.name, counter.loop_site, counter.arm_line
            );
        }
        for (name, info) in &fa.targets {
            match &info.function_scope {
                Ok(set) => {
                    let _ = writeln!(out, "  affecting {}", set.render());
                }
                Err(reason) => {
                    let _ = writeln!(out, "  target {name}: ineligible ({reason})");
                }
            }
        }
        match &fa.function_region {
            Some(plan) => {
                let vars: Vec<String> = plan
                    .vars
                    .iter()
                    .map(|(n, c)| format!("{n}:{}", c.symbol()))
                    .collect();
                let _ = writeln!(
                    out,
                    "  function region: ({}){}",
                    vars.join(","),
                    if plan.linear { "" } else { " [non-linear]" }
                );
            }
            None => {
                let _ = writeln!(out, "  function region: none");
            }
        }
        for (site, plan) in &fa.loop_regions {
            let vars: Vec<String> = plan
                .vars
                .iter()
                .map(|(n, c)| format!("{n}:{}", c.symbol()))
                .collect();
            let _ = writeln!(out, "  loop:{site} region: ({})", vars.join(","));
        }
        for note in &dg.notes {
            let _ = writeln!(out, "  note: {note}");
        }
    }
    let _ = writeln!(
        out,
        "assignments: {} linear, {} non-linear ({:.1}% linear)",
        analysis.linear_assignments,
        analysis.nonlinear_assignments,
        100.0 * analysis.linear_assignments as f64
            / (analysis.linear_assignments + analysis.nonlinear_assignments).max(1) as f64
    );
    print!("{out}");
    Ok(())
}

// ---------------------------------------------------------------------------

pub struct GenArgs {
    pub out: PathBuf,
    pub seed: u64,
    pub programs: usize,
    pub warmups: usize,
    pub evals: usize,
    pub template: Option<String>,
}

pub fn cmd_gen(args: GenArgs) -> CmdResult {
    use rand::SeedableRng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(args.seed);
    let programs = match args.template.as_deref() {
        None => crate::corpus::generate_suite(args.seed, args.programs, args.warmups, args.evals),
        Some("escape") => vec![crate::corpus::TestProgram {
            name: "escape".into(),
            source: crate::corpus::ESCAPE.into(),
            // Every third warm-up undersizes the destination so the
            // resize branch contributes verified points too.
            warmup: (0..args.warmups)
                .map(|i| crate::corpus::escape_input(&mut rng, i % 3 == 2))
                .collect(),
            eval: (0..args.evals)
                .map(|i| crate::corpus::escape_input(&mut rng, i % 5 == 4))
                .collect(),
        }],
        Some("urlescape") => {
            let mut warmup = crate::corpus::url_seed_requests(&mut rng);
            while warmup.len() < args.warmups.max(2) {
                let style = if warmup.len().is_multiple_of(2) {
                    crate::corpus::UrlStyle::PlainLong
                } else {
                    crate::corpus::UrlStyle::ShortBusy
                };
                warmup.push(crate::corpus::url_request_styled(style, &mut rng));
            }
            let eval = (0..args.evals)
                .map(|i| {
                    let style = match i % 4 {
                        0 => crate::corpus::UrlStyle::PlainLong,
                        1 => crate::corpus::UrlStyle::ShortBusy,
                        _ => crate::corpus::UrlStyle::Wedge,
                    };
                    crate::corpus::url_request_styled(style, &mut rng)
                })
                .collect();
            vec![crate::corpus::TestProgram {
                name: "urlescape".into(),
                source: crate::corpus::URLESCAPE.into(),
                warmup,
                eval,
            }]
        }
        Some("blockcmp") => vec![crate::corpus::TestProgram {
            name: "blockcmp".into(),
            source: crate::corpus::BLOCK_CMP.into(),
            warmup: (0..args.warmups)
                .map(|_| crate::corpus::block_cmp_input(&mut rng, 1000, 1021))
                .collect(),
            eval: (0..args.evals)
                .map(|_| crate::corpus::block_cmp_input(&mut rng, 1000, 1021))
                .collect(),
        }],
        Some("stencil") => vec![crate::corpus::TestProgram {
            name: "stencil".into(),
            source: crate::corpus::STENCIL.into(),
            warmup: vec![crate::corpus::stencil_input(&mut rng)],
            eval: (0..args.evals)
                .map(|_| crate::corpus::stencil_input(&mut rng))
                .collect(),
        }],
        Some("mixed") => vec![crate::corpus::TestProgram {
            name: "mixed".into(),
            source: crate::corpus::MIXED.into(),
            warmup: (0..args.warmups)
                .map(|_| crate::corpus::mixed_input(&mut rng, 62))
                .collect(),
            eval: (0..args.evals)
                .map(|_| crate::corpus::mixed_input(&mut rng, 62))
                .collect(),
        }],
        Some(other) => {
            return Err(Failure::Usage(format!(
                "unknown template `{other}` (escape, urlescape, blockcmp, stencil, mixed)"
            )))
        }
    };

    for prog in &programs {
        let dir = args.out.join(&prog.name);
        fs::create_dir_all(dir.join("warmup")).map_err(format_err)?;
        fs::create_dir_all(dir.join("eval")).map_err(format_err)?;
        io::atomic_write(&dir.join("program.cl"), &prog.source).map_err(format_err)?;
        for (i, inputs) in prog.warmup.iter().enumerate() {
            io::atomic_write(
                &dir.join("warmup").join(format!("{i:03}.json")),
                &checklang_core::trace::inputs_to_json(inputs),
            )
            .map_err(format_err)?;
        }
        for (i, inputs) in prog.eval.iter().enumerate() {
            io::atomic_write(
                &dir.join("eval").join(format!("{i:03}.json")),
                &checklang_core::trace::inputs_to_json(inputs),
            )
            .map_err(format_err)?;
        }
        println!(
            "{}: {} warm-up, {} eval inputs",
            dir.display(),
            prog.warmup.len(),
            prog.eval.len()
        );
    }
    Ok(())
}
