//! Tree-walking interpreter for CheckLang with two execution modes.
//!
//! Full-check mode is the oracle: every array access is bounds-checked,
//! and trace records of the variable values at region-scope entries are
//! collected for later region construction. Bypass mode consults a
//! knowledge base at function entries (and, when the function-level answer
//! is unknown, at instrumented loop entries): a safe verdict suppresses
//! the checks in that scope, and every suppressed check is still
//! re-verified against the oracle predicate `0 <= i < len` so the ledger
//! can prove the absence of false positives.
//!
//! Both modes execute the same instrumented program and produce identical
//! outputs and final memory whenever the full-check run completes; the
//! only difference is check accounting.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{BinOp, Expr, FunctionDef, Program, SiteId, Stmt, Type};
use crate::depgraph::{GuardTerm, ProgramAnalysis, RegionPlan, PSEUDO_LEN_SUFFIX};
use crate::trace::{InputBindings, InputValue, Scope, TraceRecord};

/// Execution mode: the full-check oracle or knowledge-base bypassing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExecMode {
    #[default]
    FullCheck,
    Bypass,
}

/// Region queries the interpreter can ask in bypass mode. Implemented by
/// the knowledge-base snapshot; answers must be side-effect free, so one
/// snapshot can serve concurrent interpreters.
pub trait RegionQuerier {
    /// `Some(true)` = proven safe, `Some(false)` = unknown. `None` = no
    /// entry or the values cannot enter the region; both fall back to
    /// full checking.
    fn query(&self, func: &str, scope: Scope, raw: &BTreeMap<String, i64>) -> Option<bool>;

    /// Which region shape the store holds. Hull stores are only consulted
    /// for scopes whose index dependences are linear.
    fn region_kind(&self) -> Option<crate::region::RegionKind>;
}

/// Monotonic time source for the optional wall-clock profile mode.
pub trait Clock {
    fn now_nanos(&self) -> u64;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuntimeError {
    BoundsViolation {
        func: String,
        site: SiteId,
        index: i64,
        length: usize,
        line: u32,
    },
    DivisionByZero {
        func: String,
        line: u32,
    },
    NegativeSize {
        func: String,
        size: i64,
        line: u32,
    },
    UnboundInput {
        name: String,
    },
    InputTypeMismatch {
        name: String,
    },
    MissingMain,
    CallDepthExceeded,
    StepLimitExceeded,
    /// A bypassed check would have failed. Execution aborts rather than
    /// emulating an out-of-bounds access.
    FalsePositive {
        func: String,
        site: SiteId,
        index: i64,
        length: usize,
    },
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuntimeError::BoundsViolation {
                func,
                site,
                index,
                length,
                line,
            } => write!(
                f,
                "bounds violation in `{func}` at site {site} (line {line}): index {index}, length {length}"
            ),
            RuntimeError::DivisionByZero { func, line } => {
                write!(f, "division by zero in `{func}` (line {line})")
            }
            RuntimeError::NegativeSize { func, size, line } => {
                write!(f, "negative array size {size} in `{func}` (line {line})")
            }
            RuntimeError::UnboundInput { name } => write!(f, "unbound input `{name}`"),
            RuntimeError::InputTypeMismatch { name } => {
                write!(f, "input `{name}` has the wrong type")
            }
            RuntimeError::MissingMain => write!(f, "program has no parameterless `main` function"),
            RuntimeError::CallDepthExceeded => write!(f, "call depth limit exceeded"),
            RuntimeError::StepLimitExceeded => write!(f, "step limit exceeded"),
            RuntimeError::FalsePositive {
                func,
                site,
                index,
                length,
            } => write!(
                f,
                "false positive: bypassed check in `{func}` at site {site} would have failed (index {index}, length {length})"
            ),
        }
    }
}

/// Per-function execution accounting.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FunctionLedger {
    pub calls: u64,
    pub statements: u64,
    pub checks_performed: u64,
    pub checks_bypassed: u64,
    pub false_positives: u64,
    /// Activations whose function-level query answered safe.
    pub bypassed_activations: u64,
    /// Loop entries whose loop-level query answered safe.
    pub bypassed_loop_entries: u64,
    /// Self wall time, when a clock is supplied (non-deterministic).
    pub wall_nanos: u64,
}

impl FunctionLedger {
    pub fn total_accesses(&self) -> u64 {
        self.checks_performed + self.checks_bypassed
    }

    pub fn bypass_ratio(&self) -> f64 {
        let total = self.total_accesses();
        if total == 0 {
            0.0
        } else {
            self.checks_bypassed as f64 / total as f64
        }
    }

    fn absorb(&mut self, other: &FunctionLedger) {
        self.calls += other.calls;
        self.statements += other.statements;
        self.checks_performed += other.checks_performed;
        self.checks_bypassed += other.checks_bypassed;
        self.false_positives += other.false_positives;
        self.bypassed_activations += other.bypassed_activations;
        self.bypassed_loop_entries += other.bypassed_loop_entries;
        self.wall_nanos += other.wall_nanos;
    }
}

/// Per-run accounting of checks performed, bypassed, and re-verification
/// verdicts, plus the statement counts feeding the synthetic cost model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckLedger {
    pub checks_performed: u64,
    pub checks_bypassed: u64,
    pub false_positives: u64,
    pub statements_executed: u64,
    pub per_function: BTreeMap<String, FunctionLedger>,
}

impl CheckLedger {
    pub fn total_accesses(&self) -> u64 {
        self.checks_performed + self.checks_bypassed
    }

    pub fn bypass_ratio(&self) -> f64 {
        let total = self.total_accesses();
        if total == 0 {
            0.0
        } else {
            self.checks_bypassed as f64 / total as f64
        }
    }

    /// Merge another ledger; associative, so parallel runs can be merged
    /// in any grouping.
    pub fn absorb(&mut self, other: &CheckLedger) {
        self.checks_performed += other.checks_performed;
        self.checks_bypassed += other.checks_bypassed;
        self.false_positives += other.false_positives;
        self.statements_executed += other.statements_executed;
        for (name, fl) in &other.per_function {
            self.per_function
                .entry(name.clone())
                .or_default()
                .absorb(fl);
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: ExecMode,
    /// Re-verify bypassed checks in the ledger (on by default; turning it
    /// off only skips the bookkeeping, never memory safety).
    pub reverify: bool,
    /// Abort runaway executions; `u64::MAX` means no limit.
    pub step_limit: u64,
    /// Collect trace records (full-check mode only).
    pub collect_trace: bool,
}

impl RunConfig {
    pub fn full_check() -> Self {
        RunConfig {
            mode: ExecMode::FullCheck,
            reverify: true,
            step_limit: u64::MAX,
            collect_trace: true,
        }
    }

    pub fn bypass() -> Self {
        RunConfig {
            mode: ExecMode::Bypass,
            reverify: true,
            step_limit: u64::MAX,
            collect_trace: false,
        }
    }
}

/// Everything a run produces besides its success/error status.
#[derive(Clone, Debug, Default)]
pub struct RunArtifacts {
    pub output: String,
    /// Contents of every array ever allocated, keyed by allocation id.
    pub final_memory: BTreeMap<u32, Vec<i64>>,
    pub ledger: CheckLedger,
    pub trace: Vec<TraceRecord>,
}

/// Run a program in full-check (oracle) mode, collecting traces.
pub fn run_full_check(
    program: &Program,
    analysis: &ProgramAnalysis,
    inputs: &InputBindings,
) -> (Result<(), RuntimeError>, RunArtifacts) {
    run_program(
        program,
        analysis,
        inputs,
        None,
        &RunConfig::full_check(),
        None,
    )
}

/// Run a program in bypass mode against a knowledge base.
pub fn run_bypass(
    program: &Program,
    analysis: &ProgramAnalysis,
    inputs: &InputBindings,
    kb: &dyn RegionQuerier,
) -> (Result<(), RuntimeError>, RunArtifacts) {
    run_program(
        program,
        analysis,
        inputs,
        Some(kb),
        &RunConfig::bypass(),
        None,
    )
}

pub fn run_program(
    program: &Program,
    analysis: &ProgramAnalysis,
    inputs: &InputBindings,
    kb: Option<&dyn RegionQuerier>,
    config: &RunConfig,
    clock: Option<&dyn Clock>,
) -> (Result<(), RuntimeError>, RunArtifacts) {
    let mut interp = Interp {
        program,
        analysis,
        inputs,
        kb,
        config,
        clock,
        heap: Vec::new(),
        next_base: 0,
        output: String::new(),
        trace: Vec::new(),
        open_scopes: Vec::new(),
        fn_ledgers: program
            .functions
            .iter()
            .map(|_| FunctionLedger::default())
            .collect(),
        depth: 0,
        steps: 0,
    };
    let result = interp.run_main();
    // Scopes still open when an error unwound the run are recorded as
    // not-fully-checked; the knowledge base must never learn from them.
    if result.is_err() {
        while let Some(open) = interp.open_scopes.pop() {
            let record = open.into_record(false, &BTreeMap::new());
            if interp.config.collect_trace {
                interp.trace.push(record);
            }
        }
    }

    let mut artifacts = RunArtifacts {
        output: interp.output,
        trace: interp.trace,
        ..Default::default()
    };
    for arr in &interp.heap {
        artifacts
            .final_memory
            .insert(arr.base_id, arr.elems.clone());
    }
    for (f, fl) in program.functions.iter().zip(&interp.fn_ledgers) {
        if fl != &FunctionLedger::default() {
            artifacts
                .ledger
                .per_function
                .insert(f.name.clone(), fl.clone());
        }
        artifacts.ledger.checks_performed += fl.checks_performed;
        artifacts.ledger.checks_bypassed += fl.checks_bypassed;
        artifacts.ledger.statements_executed += fl.statements;
        artifacts.ledger.false_positives += fl.false_positives;
    }
    (result, artifacts)
}

const MAX_CALL_DEPTH: usize = 256;

/// Runtime array: allocation identity plus element storage. The length is
/// always `elems.len()`; an index `i` is legal iff `0 <= i < len`.
#[derive(Clone, Debug)]
struct HeapArray {
    base_id: u32,
    elems: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Unset,
    Int(i64),
    Arr(usize),
}

enum Flow {
    Normal,
    Return(i64),
}

/// One region scope currently executing, accumulating its trace record.
struct OpenScope {
    func: String,
    scope: Scope,
    vars: BTreeMap<String, i64>,
    correlations: BTreeMap<String, String>,
    index_terms: Vec<Vec<i64>>,
    linear: bool,
    counters_at_entry: Vec<u64>,
}

impl OpenScope {
    fn into_record(
        self,
        all_checks_passed: bool,
        trip_counts: &BTreeMap<String, u64>,
    ) -> TraceRecord {
        TraceRecord {
            func: self.func,
            scope: self.scope,
            vars: self.vars,
            trip_counts: trip_counts.clone(),
            all_checks_passed,
            correlations: self.correlations,
            index_terms: self.index_terms,
            linear: self.linear,
        }
    }
}

struct Frame {
    func_idx: usize,
    slots: Vec<Slot>,
    counters: Vec<u64>,
    /// Function-level bypass verdict for this activation. Nested calls
    /// re-query their own entries; suppression never crosses frames.
    suppress: bool,
    /// Nesting depth of bypassed loop extents in this frame.
    loop_suppress: usize,
}

struct Interp<'a> {
    program: &'a Program,
    analysis: &'a ProgramAnalysis,
    inputs: &'a InputBindings,
    kb: Option<&'a dyn RegionQuerier>,
    config: &'a RunConfig,
    clock: Option<&'a dyn Clock>,
    heap: Vec<HeapArray>,
    next_base: u32,
    output: String,
    trace: Vec<TraceRecord>,
    open_scopes: Vec<OpenScope>,
    fn_ledgers: Vec<FunctionLedger>,
    depth: usize,
    steps: u64,
}

impl<'a> Interp<'a> {
    fn run_main(&mut self) -> Result<(), RuntimeError> {
        let main_idx = self
            .program
            .functions
            .iter()
            .position(|f| f.name == "main" && f.params.is_empty())
            .ok_or(RuntimeError::MissingMain)?;
        self.call_function(main_idx, Vec::new()).map(|_| ())
    }

    fn func(&self, idx: usize) -> &'a FunctionDef {
        &self.program.functions[idx]
    }

    fn alloc_array(&mut self, len: usize) -> usize {
        let idx = self.heap.len();
        self.heap.push(HeapArray {
            base_id: self.next_base,
            elems: alloc::vec![0; len],
        });
        self.next_base += 1;
        idx
    }

    #[inline]
    fn tick(&mut self, func_idx: usize) -> Result<(), RuntimeError> {
        self.steps += 1;
        if self.steps > self.config.step_limit {
            return Err(RuntimeError::StepLimitExceeded);
        }
        self.fn_ledgers[func_idx].statements += 1;
        Ok(())
    }

    /// Capture raw values for a region plan from the current frame. Pseudo
    /// `arr.len` variables read the array's current length. `None` when a
    /// variable has no usable value yet (falls back to full checking).
    fn capture_raw(
        &self,
        frame: &Frame,
        f: &FunctionDef,
        plan: &RegionPlan,
    ) -> Option<BTreeMap<String, i64>> {
        let mut raw = BTreeMap::new();
        for (name, _) in &plan.vars {
            let value = if let Some(array) = name.strip_suffix(PSEUDO_LEN_SUFFIX) {
                let slot = f.slot_of(array)?;
                match frame.slots[slot] {
                    Slot::Arr(h) => self.heap[h].elems.len() as i64,
                    _ => return None,
                }
            } else {
                let slot = f.slot_of(name)?;
                match frame.slots[slot] {
                    Slot::Int(v) => v,
                    _ => return None,
                }
            };
            raw.insert(name.clone(), value);
        }
        Some(raw)
    }

    fn open_region_scope(
        &mut self,
        frame: &Frame,
        f: &FunctionDef,
        scope: Scope,
        plan: &RegionPlan,
        raw: BTreeMap<String, i64>,
    ) {
        let correlations = plan
            .vars
            .iter()
            .map(|(n, c)| (n.clone(), c.symbol().to_string()))
            .collect();
        let index_terms = plan
            .guard_templates
            .iter()
            .filter_map(|template| {
                let mut terms = Vec::new();
                for term in template {
                    match term {
                        GuardTerm::Var(name) => terms.push(*raw.get(name)?),
                        GuardTerm::Const(c) => terms.push(*c as i64),
                    }
                }
                Some(terms)
            })
            .collect();
        self.open_scopes.push(OpenScope {
            func: f.name.clone(),
            scope,
            vars: raw,
            correlations,
            index_terms,
            linear: plan.linear,
            counters_at_entry: frame.counters.clone(),
        });
    }

    /// Pop the innermost open scope and emit its record with the trip
    /// counts accumulated since entry.
    fn finish_scope(&mut self, frame: &Frame) {
        let Some(open) = self.open_scopes.pop() else {
            return;
        };
        let f = self.func(frame.func_idx);
        let mut trip_counts = BTreeMap::new();
        for (i, tc) in f.trip_counters.iter().enumerate() {
            let before = open.counters_at_entry.get(i).copied().unwrap_or(0);
            let now = frame.counters.get(i).copied().unwrap_or(0);
            trip_counts.insert(tc.name.clone(), now - before);
        }
        let record = open.into_record(true, &trip_counts);
        if self.config.collect_trace {
            self.trace.push(record);
        }
    }

    /// Execute one activation; returns the return value and the wall time
    /// spent including callees (zero without a clock).
    fn call_function(
        &mut self,
        func_idx: usize,
        args: Vec<Slot>,
    ) -> Result<(i64, u64), RuntimeError> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err(RuntimeError::CallDepthExceeded);
        }
        self.depth += 1;
        let f = self.func(func_idx);
        let mut frame = Frame {
            func_idx,
            slots: alloc::vec![Slot::Unset; f.locals.len()],
            counters: alloc::vec![0; f.trip_counters.len()],
            suppress: false,
            loop_suppress: 0,
        };
        for (i, &pslot) in f.params.iter().enumerate() {
            frame.slots[pslot] = args[i];
        }
        self.fn_ledgers[func_idx].calls += 1;
        let start = self.clock.map(|c| c.now_nanos()).unwrap_or(0);
        let mut child_nanos = 0u64;

        // Function-level region scope: trace capture in full-check mode,
        // knowledge-base query in bypass mode.
        let plan = self
            .analysis
            .function(&f.name)
            .and_then(|fa| fa.function_region.as_ref());
        let mut opened = false;
        if let Some(plan) = plan {
            if let Some(raw) = self.capture_raw(&frame, f, plan) {
                match self.config.mode {
                    ExecMode::FullCheck => {
                        if self.config.collect_trace {
                            self.open_region_scope(&frame, f, Scope::Function, plan, raw);
                            opened = true;
                        }
                    }
                    ExecMode::Bypass => {
                        if let Some(kb) = self.kb {
                            if plan_admits(plan, kb)
                                && kb.query(&f.name, Scope::Function, &raw) == Some(true)
                            {
                                frame.suppress = true;
                                self.fn_ledgers[func_idx].bypassed_activations += 1;
                            }
                        }
                    }
                }
            }
        }

        let result = self.exec_block(&f.body, &mut frame, &mut child_nanos);

        if opened && result.is_ok() {
            self.finish_scope(&frame);
        }
        // On error the scope stays open; the top-level unwinder marks it
        // as not fully checked.

        let total = if let Some(clock) = self.clock {
            let total = clock.now_nanos().saturating_sub(start);
            self.fn_ledgers[func_idx].wall_nanos += total.saturating_sub(child_nanos);
            total
        } else {
            0
        };

        self.depth -= 1;
        match result? {
            Flow::Return(v) => Ok((v, total)),
            Flow::Normal => Ok((0, total)),
        }
    }

    fn exec_block(
        &mut self,
        stmts: &[Stmt],
        frame: &mut Frame,
        child_nanos: &mut u64,
    ) -> Result<Flow, RuntimeError> {
        for stmt in stmts {
            match self.exec_stmt(stmt, frame, child_nanos)? {
                Flow::Normal => {}
                ret => return Ok(ret),
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(
        &mut self,
        stmt: &Stmt,
        frame: &mut Frame,
        child_nanos: &mut u64,
    ) -> Result<Flow, RuntimeError> {
        self.tick(frame.func_idx)?;
        match stmt {
            Stmt::DeclInt { var, init, .. } => {
                let v = match init {
                    Some(e) => self.eval(e, frame)?,
                    None => 0,
                };
                frame.slots[var.slot] = Slot::Int(v);
                Ok(Flow::Normal)
            }
            Stmt::DeclArray { var, size, line } => {
                let n = self.eval(size, frame)?;
                if n < 0 {
                    return Err(self.negative_size(frame, n, *line));
                }
                let h = self.alloc_array(n as usize);
                frame.slots[var.slot] = Slot::Arr(h);
                Ok(Flow::Normal)
            }
            Stmt::InputInt { var, .. } => match self.inputs.get(&var.name) {
                Some(InputValue::Int(v)) => {
                    frame.slots[var.slot] = Slot::Int(*v);
                    Ok(Flow::Normal)
                }
                Some(InputValue::Array(_)) => Err(RuntimeError::InputTypeMismatch {
                    name: var.name.clone(),
                }),
                None => Err(RuntimeError::UnboundInput {
                    name: var.name.clone(),
                }),
            },
            Stmt::InputArray { var, .. } => match self.inputs.get(&var.name) {
                Some(InputValue::Array(elems)) => {
                    let h = self.alloc_array(elems.len());
                    self.heap[h].elems.copy_from_slice(elems);
                    frame.slots[var.slot] = Slot::Arr(h);
                    Ok(Flow::Normal)
                }
                Some(InputValue::Int(_)) => Err(RuntimeError::InputTypeMismatch {
                    name: var.name.clone(),
                }),
                None => Err(RuntimeError::UnboundInput {
                    name: var.name.clone(),
                }),
            },
            Stmt::Assign { var, value, .. } => {
                let v = self.eval(value, frame)?;
                frame.slots[var.slot] = Slot::Int(v);
                Ok(Flow::Normal)
            }
            Stmt::ArrayWrite {
                array,
                index,
                value,
                site,
                line,
            } => {
                let i = self.eval(index, frame)?;
                let v = self.eval(value, frame)?;
                let h = self.array_handle(array.slot, frame);
                self.check_access(frame, h, *site, i, *line)?;
                self.heap[h].elems[i as usize] = v;
                Ok(Flow::Normal)
            }
            Stmt::Resize { array, size, line } => {
                let n = self.eval(size, frame)?;
                if n < 0 {
                    return Err(self.negative_size(frame, n, *line));
                }
                let h = self.array_handle(array.slot, frame);
                self.heap[h].elems.resize(n as usize, 0);
                Ok(Flow::Normal)
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                ..
            } => {
                if self.eval(cond, frame)? != 0 {
                    self.exec_block(then_branch, frame, child_nanos)
                } else {
                    self.exec_block(else_branch, frame, child_nanos)
                }
            }
            Stmt::While {
                cond, body, site, ..
            } => self.exec_loop(frame, *site, cond, None, body, child_nanos),
            Stmt::For {
                init,
                cond,
                step,
                body,
                site,
                ..
            } => {
                if let Some(i) = init {
                    self.exec_stmt(i, frame, child_nanos)?;
                }
                self.exec_loop(frame, *site, cond, step.as_deref(), body, child_nanos)
            }
            Stmt::Switch {
                scrutinee,
                cases,
                default,
                ..
            } => {
                let v = self.eval(scrutinee, frame)?;
                for (value, arm) in cases {
                    if *value == v {
                        return self.exec_block(arm, frame, child_nanos);
                    }
                }
                self.exec_block(default, frame, child_nanos)
            }
            Stmt::Call {
                target, func, args, ..
            } => {
                let f = self.func(frame.func_idx);
                let callee_idx = self
                    .program
                    .functions
                    .iter()
                    .position(|fd| &fd.name == func)
                    .expect("calls were validated at parse time");
                let mut arg_slots = Vec::with_capacity(args.len());
                for a in args {
                    let slot = match a {
                        Expr::Var(v) if f.locals[v.slot].ty == Type::Array => frame.slots[v.slot],
                        e => Slot::Int(self.eval(e, frame)?),
                    };
                    arg_slots.push(slot);
                }
                let (ret, callee_nanos) = self.call_function(callee_idx, arg_slots)?;
                *child_nanos += callee_nanos;
                if let Some(t) = target {
                    frame.slots[t.slot] = Slot::Int(ret);
                }
                Ok(Flow::Normal)
            }
            Stmt::Return { value, .. } => {
                let v = match value {
                    Some(e) => self.eval(e, frame)?,
                    None => 0,
                };
                Ok(Flow::Return(v))
            }
            Stmt::Print { value, .. } => {
                let v = self.eval(value, frame)?;
                self.output.push_str(&format!("{v}\n"));
                Ok(Flow::Normal)
            }
            Stmt::PrintArray { array, .. } => {
                let h = self.array_handle(array.slot, frame);
                let parts: Vec<String> = self.heap[h].elems.iter().map(|v| v.to_string()).collect();
                self.output.push_str(&parts.join(" "));
                self.output.push('\n');
                Ok(Flow::Normal)
            }
            Stmt::TripIncrement { counter } => {
                frame.counters[*counter] += 1;
                Ok(Flow::Normal)
            }
        }
    }

    fn exec_loop(
        &mut self,
        frame: &mut Frame,
        site: SiteId,
        cond: &Expr,
        step: Option<&Stmt>,
        body: &[Stmt],
        child_nanos: &mut u64,
    ) -> Result<Flow, RuntimeError> {
        let f = self.func(frame.func_idx);
        // Loop-level region scope. In bypass mode this is the "hoisted"
        // check: consulted once per loop entry, and only when the
        // activation is not already running check-free.
        let plan = self
            .analysis
            .function(&f.name)
            .and_then(|fa| fa.loop_regions.get(&site));
        let mut opened = false;
        let mut suppressed_here = false;
        if let Some(plan) = plan {
            match self.config.mode {
                ExecMode::FullCheck => {
                    if self.config.collect_trace {
                        if let Some(raw) = self.capture_raw(frame, f, plan) {
                            self.open_region_scope(frame, f, Scope::Loop(site), plan, raw);
                            opened = true;
                        }
                    }
                }
                ExecMode::Bypass => {
                    if !frame.suppress && frame.loop_suppress == 0 {
                        if let Some(raw) = self.capture_raw(frame, f, plan) {
                            if let Some(kb) = self.kb.filter(|kb| plan_admits(plan, *kb)) {
                                if kb.query(&f.name, Scope::Loop(site), &raw) == Some(true) {
                                    frame.loop_suppress += 1;
                                    suppressed_here = true;
                                    self.fn_ledgers[frame.func_idx].bypassed_loop_entries += 1;
                                }
                            }
                        }
                    }
                }
            }
        }

        let result = loop {
            // Each condition evaluation counts as one executed statement.
            if let Err(e) = self.tick(frame.func_idx) {
                break Err(e);
            }
            match self.eval(cond, frame) {
                Ok(0) => break Ok(Flow::Normal),
                Ok(_) => {}
                Err(e) => break Err(e),
            }
            match self.exec_block(body, frame, child_nanos) {
                Ok(Flow::Normal) => {}
                other => break other,
            }
            if let Some(s) = step {
                if let Err(e) = self.exec_stmt(s, frame, child_nanos) {
                    break Err(e);
                }
            }
        };

        if suppressed_here {
            frame.loop_suppress -= 1;
        }
        if opened && result.is_ok() {
            self.finish_scope(frame);
        }
        result
    }

    fn negative_size(&self, frame: &Frame, size: i64, line: u32) -> RuntimeError {
        RuntimeError::NegativeSize {
            func: self.func(frame.func_idx).name.clone(),
            size,
            line,
        }
    }

    fn array_handle(&self, slot: usize, frame: &Frame) -> usize {
        match frame.slots[slot] {
            Slot::Arr(h) => h,
            _ => unreachable!("array slots are typed at parse time"),
        }
    }

    /// Bounds accounting for one access. Checked accesses abort on
    /// violation; suppressed accesses are recorded as bypassed and
    /// re-verified against the oracle predicate.
    fn check_access(
        &mut self,
        frame: &Frame,
        handle: usize,
        site: SiteId,
        index: i64,
        line: u32,
    ) -> Result<(), RuntimeError> {
        let length = self.heap[handle].elems.len();
        let suppressed = frame.suppress || frame.loop_suppress > 0;
        let in_bounds = index >= 0 && (index as usize) < length;
        let fl = &mut self.fn_ledgers[frame.func_idx];
        if suppressed {
            fl.checks_bypassed += 1;
            if !in_bounds {
                // A bypassed check that would have failed. The re-verifier
                // ledgers it as a false positive; with re-verification off
                // the run still aborts rather than reading out of bounds.
                if self.config.reverify {
                    fl.false_positives += 1;
                }
                return Err(RuntimeError::FalsePositive {
                    func: self.func(frame.func_idx).name.clone(),
                    site,
                    index,
                    length,
                });
            }
            Ok(())
        } else {
            fl.checks_performed += 1;
            if !in_bounds {
                return Err(RuntimeError::BoundsViolation {
                    func: self.func(frame.func_idx).name.clone(),
                    site,
                    index,
                    length,
                    line,
                });
            }
            Ok(())
        }
    }

    fn eval(&mut self, expr: &Expr, frame: &mut Frame) -> Result<i64, RuntimeError> {
        match expr {
            Expr::Int(v) => Ok(*v),
            Expr::Var(var) => match frame.slots[var.slot] {
                Slot::Int(v) => Ok(v),
                _ => unreachable!("int slots are typed at parse time"),
            },
            Expr::Neg(inner) => Ok(self.eval(inner, frame)?.wrapping_neg()),
            Expr::ArrayRead { array, index, site } => {
                let i = self.eval(index, frame)?;
                let h = self.array_handle(array.slot, frame);
                self.check_access(frame, h, *site, i, 0)?;
                Ok(self.heap[h].elems[i as usize])
            }
            Expr::Binary { op, lhs, rhs } => {
                match op {
                    BinOp::And => {
                        if self.eval(lhs, frame)? == 0 {
                            return Ok(0);
                        }
                        return Ok((self.eval(rhs, frame)? != 0) as i64);
                    }
                    BinOp::Or => {
                        if self.eval(lhs, frame)? != 0 {
                            return Ok(1);
                        }
                        return Ok((self.eval(rhs, frame)? != 0) as i64);
                    }
                    _ => {}
                }
                let l = self.eval(lhs, frame)?;
                let r = self.eval(rhs, frame)?;
                Ok(match op {
                    BinOp::Add => l.wrapping_add(r),
                    BinOp::Sub => l.wrapping_sub(r),
                    BinOp::Mul => l.wrapping_mul(r),
                    BinOp::Div => {
                        if r == 0 {
                            return Err(RuntimeError::DivisionByZero {
                                func: self.func(frame.func_idx).name.clone(),
                                line: 0,
                            });
                        }
                        l.wrapping_div(r)
                    }
                    BinOp::Eq => (l == r) as i64,
                    BinOp::Ne => (l != r) as i64,
                    BinOp::Lt => (l < r) as i64,
                    BinOp::Le => (l <= r) as i64,
                    BinOp::Gt => (l > r) as i64,
                    BinOp::Ge => (l >= r) as i64,
                    BinOp::And | BinOp::Or => unreachable!(),
                })
            }
        }
    }
}

/// Hull stores only answer for scopes whose index dependences are linear;
/// union stores answer for any scope.
fn plan_admits(plan: &RegionPlan, kb: &dyn RegionQuerier) -> bool {
    plan.linear || kb.region_kind() != Some(crate::region::RegionKind::Hull)
}
