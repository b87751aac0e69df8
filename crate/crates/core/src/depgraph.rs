//! Per-function dependency graphs and the taint walk that derives each
//! target array's pointer-affecting variable set.
//!
//! Nodes are the function's variables, arrays, and loop trip counters.
//! Edges follow four rules, each recorded with the statement line that
//! justifies it:
//!
//! * E1 — linear assignments `A := Σ αᵢ·Bᵢ + c` give `Bᵢ → A` with the
//!   sign of `αᵢ`; an allocation/resize whose size is a lone variable
//!   gives a negative edge from that variable to the array (the bound
//!   side: growing it is safer).
//! * E2 — call sites bind callee parameters to caller arguments; the
//!   bindings are traversed only from callee parameter to caller argument,
//!   when resolving a parameter array's length variable.
//! * E3 — loops get trip counters on the branch arms that advance
//!   index-feeding variables; counter nodes receive edges from the
//!   enclosing loops' bound variables and emit `TC → A` edges to the
//!   variables updated under them.
//! * E4 — array indexing `A[i]` gives `i → A` with the sign of `i`'s
//!   coefficient in the index expression.
//!
//! Non-affine assignments (variable products, division, call results,
//! array-content reads) taint the assigned variable. A target whose index
//! depends on a tainted variable, whose loop bounds cannot be expressed in
//! entry-available variables, or whose terminals are reachable with
//! conflicting signs is ineligible for region inference and keeps full
//! checking.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{BinOp, Expr, FunctionDef, Program, SiteId, Stmt, TripCounter, Type, VarRef};
use crate::region::Correlation;

/// Suffix of pseudo length variables: `arr.len` is the runtime length of
/// array `arr` at scope entry.
pub const PSEUDO_LEN_SUFFIX: &str = ".len";

pub fn pseudo_len_name(array: &str) -> String {
    format!("{array}{PSEUDO_LEN_SUFFIX}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Variable,
    Array,
    TripCount,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DgNode {
    pub kind: NodeKind,
    pub name: String,
    /// Set when an assignment made this value non-affine in the inputs.
    pub tainted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeSign {
    Positive,
    Negative,
    /// Shape-unknown influence; traversal treats it as both signs.
    Unknown,
}

impl EdgeSign {
    fn of(coeff: i64) -> Self {
        if coeff >= 0 {
            EdgeSign::Positive
        } else {
            EdgeSign::Negative
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            EdgeSign::Positive => "+",
            EdgeSign::Negative => "-",
            EdgeSign::Unknown => "?",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeRule {
    E1,
    E2,
    E3,
    E4,
}

impl fmt::Display for EdgeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EdgeRule::E1 => "E1",
            EdgeRule::E2 => "E2",
            EdgeRule::E3 => "E3",
            EdgeRule::E4 => "E4",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DgEdge {
    pub from: usize,
    pub to: usize,
    pub sign: EdgeSign,
    pub rule: EdgeRule,
    pub line: u32,
    /// Loop sites whose extent contains the justifying statement,
    /// outermost first. Loop-scope taint only follows in-extent edges.
    pub loops: Vec<SiteId>,
    /// A trip-count edge into a variable that accumulates across entries
    /// of a nested loop: the variable's dependence on the entry values is
    /// a product of loop bounds, not a linear form. Hull regions must not
    /// extrapolate through such edges.
    pub multiplicative: bool,
}

/// One step on the path from a function body to a nested block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathStep {
    /// Index into the current statement list.
    Child(usize),
    Then,
    Else,
    Case(usize),
    Default,
    LoopBody,
}

/// Path from the function body to the block a trip counter increments.
pub type ArmPath = Vec<PathStep>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlannedCounter {
    pub name: String,
    pub loop_site: SiteId,
    /// Block that receives the increment, as a path from the body root.
    pub arm: ArmPath,
    pub arm_line: u32,
}

/// Per-function dependency graph.
#[derive(Clone, Debug, Default)]
pub struct DependencyGraph {
    pub func: String,
    pub nodes: Vec<DgNode>,
    pub edges: Vec<DgEdge>,
    /// Constructs that contributed no edges, for diagnostics.
    pub notes: Vec<String>,
    pub linear_assignments: u64,
    pub nonlinear_assignments: u64,
    /// Planned trip counters (materialized by [`instrument_trip_counts`]).
    pub counters: Vec<PlannedCounter>,
    /// Loops whose iteration count could not be bounded by entry-available
    /// variables; targets depending on their counters are ineligible.
    pub unresolved_loops: BTreeSet<SiteId>,
}

impl DependencyGraph {
    pub fn node_id(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    fn intern(&mut self, name: &str, kind: NodeKind) -> usize {
        if let Some(i) = self.node_id(name) {
            return i;
        }
        self.nodes.push(DgNode {
            kind,
            name: name.to_string(),
            tainted: false,
        });
        self.nodes.len() - 1
    }

    fn add_edge(
        &mut self,
        from: usize,
        to: usize,
        sign: EdgeSign,
        rule: EdgeRule,
        line: u32,
        loops: &[SiteId],
    ) {
        self.add_edge_full(from, to, sign, rule, line, loops, false);
    }

    #[allow(clippy::too_many_arguments)]
    fn add_edge_full(
        &mut self,
        from: usize,
        to: usize,
        sign: EdgeSign,
        rule: EdgeRule,
        line: u32,
        loops: &[SiteId],
        multiplicative: bool,
    ) {
        let edge = DgEdge {
            from,
            to,
            sign,
            rule,
            line,
            loops: loops.to_vec(),
            multiplicative,
        };
        if !self.edges.contains(&edge) {
            self.edges.push(edge);
        }
    }

    pub fn counter_names(&self) -> Vec<&str> {
        self.counters.iter().map(|c| c.name.as_str()).collect()
    }
}

// ---------------------------------------------------------------------------
// Linear expression analysis

/// A linear view of an expression: integer coefficients per variable slot
/// plus a constant, with taint flags for anything non-affine.
#[derive(Clone, Debug, Default)]
struct LinearForm {
    coeffs: BTreeMap<usize, i64>,
    constant: i64,
    nonlinear: bool,
    content: bool,
}

impl LinearForm {
    fn tainted(&self) -> bool {
        self.nonlinear || self.content
    }

    fn constant_only(&self) -> Option<i64> {
        (!self.tainted() && self.coeffs.is_empty()).then_some(self.constant)
    }

    fn lone_var(&self) -> Option<usize> {
        if self.tainted() || self.constant != 0 || self.coeffs.len() != 1 {
            return None;
        }
        let (&slot, &coeff) = self.coeffs.iter().next().unwrap();
        (coeff == 1).then_some(slot)
    }

    fn scale(&mut self, k: i64) {
        for c in self.coeffs.values_mut() {
            *c = c.wrapping_mul(k);
        }
        self.constant = self.constant.wrapping_mul(k);
        self.coeffs.retain(|_, c| *c != 0);
    }

    fn add(&mut self, other: LinearForm, factor: i64) {
        for (slot, c) in other.coeffs {
            let e = self.coeffs.entry(slot).or_insert(0);
            *e = e.wrapping_add(c.wrapping_mul(factor));
        }
        self.constant = self
            .constant
            .wrapping_add(other.constant.wrapping_mul(factor));
        self.nonlinear |= other.nonlinear;
        self.content |= other.content;
        self.coeffs.retain(|_, c| *c != 0);
    }
}

fn linear_form(expr: &Expr) -> LinearForm {
    match expr {
        Expr::Int(v) => LinearForm {
            constant: *v,
            ..Default::default()
        },
        Expr::Var(var) => {
            let mut f = LinearForm::default();
            f.coeffs.insert(var.slot, 1);
            f
        }
        Expr::Neg(inner) => {
            let mut f = linear_form(inner);
            f.scale(-1);
            f
        }
        Expr::ArrayRead { .. } => LinearForm {
            content: true,
            ..Default::default()
        },
        Expr::Binary { op, lhs, rhs } => {
            let l = linear_form(lhs);
            let r = linear_form(rhs);
            match op {
                BinOp::Add => {
                    let mut f = l;
                    f.add(r, 1);
                    f
                }
                BinOp::Sub => {
                    let mut f = l;
                    f.add(r, -1);
                    f
                }
                BinOp::Mul => {
                    if let Some(k) = l.constant_only() {
                        let mut f = r;
                        f.scale(k);
                        f
                    } else if let Some(k) = r.constant_only() {
                        let mut f = l;
                        f.scale(k);
                        f
                    } else {
                        LinearForm {
                            nonlinear: true,
                            content: l.content || r.content,
                            ..Default::default()
                        }
                    }
                }
                _ => LinearForm {
                    nonlinear: true,
                    content: l.content || r.content,
                    ..Default::default()
                },
            }
        }
    }
}

/// Split a condition into `&&` conjuncts.
fn conjuncts(cond: &Expr) -> Vec<&Expr> {
    match cond {
        Expr::Binary {
            op: BinOp::And,
            lhs,
            rhs,
        } => {
            let mut v = conjuncts(lhs);
            v.extend(conjuncts(rhs));
            v
        }
        other => alloc::vec![other],
    }
}

/// For a loop-continuation comparison, the linear form whose coefficient
/// signs say how each variable extends the iteration space: positive
/// coefficient means more iterations as the variable grows.
fn slack_form(cond: &Expr) -> Option<LinearForm> {
    let Expr::Binary { op, lhs, rhs } = cond else {
        return None;
    };
    let l = linear_form(lhs);
    let r = linear_form(rhs);
    if l.tainted() || r.tainted() {
        return None;
    }
    let mut slack = match op {
        // `i < n`, `i <= n`, `i != n`: the right side extends the loop.
        BinOp::Lt | BinOp::Le | BinOp::Ne => {
            let mut f = r;
            f.add(l, -1);
            f
        }
        BinOp::Gt | BinOp::Ge => {
            let mut f = l;
            f.add(r, -1);
            f
        }
        _ => return None,
    };
    slack.constant = 0;
    Some(slack)
}

// ---------------------------------------------------------------------------
// Graph construction

/// Build the dependency graph of one function: nodes for every variable,
/// array, and planned trip counter; edges per the module rules.
pub fn build_dg(f: &FunctionDef) -> DependencyGraph {
    let mut dg = DependencyGraph {
        func: f.name.clone(),
        ..Default::default()
    };
    for local in &f.locals {
        let kind = match local.ty {
            Type::Int => NodeKind::Variable,
            Type::Array => NodeKind::Array,
        };
        dg.intern(&local.name, kind);
    }

    let mut builder = DgBuilder {
        dg: &mut dg,
        f,
        loop_stack: Vec::new(),
    };
    builder.stmts(&f.body);

    plan_counters(&mut dg, f);
    dg
}

struct DgBuilder<'a> {
    dg: &'a mut DependencyGraph,
    f: &'a FunctionDef,
    loop_stack: Vec<SiteId>,
}

impl DgBuilder<'_> {
    fn node_of_slot(&mut self, slot: usize) -> usize {
        let local = &self.f.locals[slot];
        let kind = match local.ty {
            Type::Int => NodeKind::Variable,
            Type::Array => NodeKind::Array,
        };
        let name = local.name.clone();
        self.dg.intern(&name, kind)
    }

    fn index_edges(&mut self, array: &VarRef, index: &Expr, line: u32) {
        let form = linear_form(index);
        let to = self.node_of_slot(array.slot);
        if form.tainted() {
            self.dg.nodes[to].tainted = true;
            self.dg.notes.push(format!(
                "line {line}: non-affine index into `{}`",
                array.name
            ));
        }
        let loops = self.loop_stack.clone();
        for (&slot, &coeff) in &form.coeffs {
            let from = self.node_of_slot(slot);
            self.dg
                .add_edge(from, to, EdgeSign::of(coeff), EdgeRule::E4, line, &loops);
        }
    }

    /// E4 edges for every array access in an expression tree.
    fn expr_edges(&mut self, expr: &Expr, line: u32) {
        match expr {
            Expr::ArrayRead { array, index, .. } => {
                self.index_edges(array, index, line);
                self.expr_edges(index, line);
            }
            Expr::Binary { lhs, rhs, .. } => {
                self.expr_edges(lhs, line);
                self.expr_edges(rhs, line);
            }
            Expr::Neg(inner) => self.expr_edges(inner, line),
            _ => {}
        }
    }

    fn assignment(&mut self, slot: usize, value: &Expr, line: u32) {
        self.expr_edges(value, line);
        let form = linear_form(value);
        if form.tainted() {
            self.dg.nonlinear_assignments += 1;
        } else {
            self.dg.linear_assignments += 1;
        }
        let to = self.node_of_slot(slot);
        if form.tainted() {
            self.dg.nodes[to].tainted = true;
        }
        let loops = self.loop_stack.clone();
        for (&src, &coeff) in &form.coeffs {
            let from = self.node_of_slot(src);
            self.dg
                .add_edge(from, to, EdgeSign::of(coeff), EdgeRule::E1, line, &loops);
        }
    }

    fn alloc_edges(&mut self, array: &VarRef, size: &Expr, line: u32) {
        self.expr_edges(size, line);
        let form = linear_form(size);
        if let Some(src_slot) = form.lone_var() {
            let to = self.node_of_slot(array.slot);
            let from = self.node_of_slot(src_slot);
            let loops = self.loop_stack.clone();
            self.dg
                .add_edge(from, to, EdgeSign::Negative, EdgeRule::E1, line, &loops);
        }
    }

    fn stmts(&mut self, stmts: &[Stmt]) {
        for stmt in stmts {
            self.stmt(stmt);
        }
    }

    fn stmt(&mut self, stmt: &Stmt) {
        match stmt {
            Stmt::DeclInt {
                var,
                init: Some(e),
                line,
            } => self.assignment(var.slot, e, *line),
            Stmt::DeclInt { .. } | Stmt::InputInt { .. } | Stmt::InputArray { .. } => {}
            Stmt::DeclArray { var, size, line } => self.alloc_edges(var, size, *line),
            Stmt::Resize { array, size, line } => self.alloc_edges(array, size, *line),
            Stmt::Assign { var, value, line } => self.assignment(var.slot, value, *line),
            Stmt::ArrayWrite {
                array,
                index,
                value,
                line,
                ..
            } => {
                self.index_edges(array, index, *line);
                self.expr_edges(index, *line);
                self.expr_edges(value, *line);
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                line,
            } => {
                self.expr_edges(cond, *line);
                self.stmts(then_branch);
                self.stmts(else_branch);
            }
            Stmt::While {
                cond,
                body,
                site,
                line,
            } => {
                self.expr_edges(cond, *line);
                self.loop_stack.push(*site);
                self.stmts(body);
                self.loop_stack.pop();
            }
            Stmt::For {
                init,
                cond,
                step,
                body,
                site,
                line,
            } => {
                if let Some(i) = init {
                    self.stmt(i);
                }
                self.expr_edges(cond, *line);
                self.loop_stack.push(*site);
                self.stmts(body);
                if let Some(s) = step {
                    self.stmt(s);
                }
                self.loop_stack.pop();
            }
            Stmt::Switch {
                scrutinee,
                cases,
                default,
                line,
            } => {
                self.expr_edges(scrutinee, *line);
                for (_, arm) in cases {
                    self.stmts(arm);
                }
                self.stmts(default);
            }
            Stmt::Call {
                target, args, line, ..
            } => {
                for a in args {
                    self.expr_edges(a, *line);
                }
                if let Some(t) = target {
                    // A call result is opaque to the linear analysis.
                    self.dg.nonlinear_assignments += 1;
                    let to = self.node_of_slot(t.slot);
                    self.dg.nodes[to].tainted = true;
                }
            }
            Stmt::Return {
                value: Some(e),
                line,
            } => self.expr_edges(e, *line),
            Stmt::Return { .. } => {}
            Stmt::Print { value, line } => self.expr_edges(value, *line),
            Stmt::PrintArray { .. } => {}
            Stmt::TripIncrement { .. } => {}
        }
    }
}

// ---------------------------------------------------------------------------
// Trip-counter planning

/// One loop of a function with its location and nesting context.
struct LoopCtx<'a> {
    site: SiteId,
    line: u32,
    cond: &'a Expr,
    init: Option<&'a Stmt>,
    body: &'a [Stmt],
    step: Option<&'a Stmt>,
    /// Enclosing loop sites, outermost first.
    enclosing: Vec<SiteId>,
    /// Path from the function body to this loop's body block.
    body_path: ArmPath,
}

fn gather_loops<'a>(
    stmts: &'a [Stmt],
    chain: &mut Vec<SiteId>,
    path: &mut ArmPath,
    out: &mut Vec<LoopCtx<'a>>,
) {
    for (i, stmt) in stmts.iter().enumerate() {
        path.push(PathStep::Child(i));
        match stmt {
            Stmt::While {
                cond,
                body,
                site,
                line,
            } => {
                let mut body_path = path.clone();
                body_path.push(PathStep::LoopBody);
                out.push(LoopCtx {
                    site: *site,
                    line: *line,
                    cond,
                    init: None,
                    body,
                    step: None,
                    enclosing: chain.clone(),
                    body_path: body_path.clone(),
                });
                chain.push(*site);
                let mut p = body_path;
                gather_loops(body, chain, &mut p, out);
                chain.pop();
            }
            Stmt::For {
                init,
                cond,
                step,
                body,
                site,
                line,
            } => {
                let mut body_path = path.clone();
                body_path.push(PathStep::LoopBody);
                out.push(LoopCtx {
                    site: *site,
                    line: *line,
                    cond,
                    init: init.as_deref(),
                    body,
                    step: step.as_deref(),
                    enclosing: chain.clone(),
                    body_path: body_path.clone(),
                });
                chain.push(*site);
                let mut p = body_path;
                gather_loops(body, chain, &mut p, out);
                chain.pop();
            }
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => {
                let mut p = path.clone();
                p.push(PathStep::Then);
                gather_loops(then_branch, chain, &mut p, out);
                let mut p = path.clone();
                p.push(PathStep::Else);
                gather_loops(else_branch, chain, &mut p, out);
            }
            Stmt::Switch { cases, default, .. } => {
                for (ci, (_, arm)) in cases.iter().enumerate() {
                    let mut p = path.clone();
                    p.push(PathStep::Case(ci));
                    gather_loops(arm, chain, &mut p, out);
                }
                let mut p = path.clone();
                p.push(PathStep::Default);
                gather_loops(default, chain, &mut p, out);
            }
            _ => {}
        }
        path.pop();
    }
}

/// Variables with a forward E1/E4 path into some array's index.
fn index_reaching_slots(dg: &DependencyGraph, f: &FunctionDef) -> BTreeSet<usize> {
    let mut reaching: BTreeSet<usize> = BTreeSet::new();
    let mut work: Vec<usize> = dg
        .edges
        .iter()
        .filter(|e| e.rule == EdgeRule::E4)
        .map(|e| e.from)
        .collect();
    while let Some(node) = work.pop() {
        let Some(slot) = f.slot_of(&dg.nodes[node].name) else {
            continue;
        };
        if !reaching.insert(slot) {
            continue;
        }
        for e in &dg.edges {
            if e.to == node && e.rule == EdgeRule::E1 && dg.nodes[e.from].kind == NodeKind::Variable
            {
                work.push(e.from);
            }
        }
    }
    reaching
}

/// Statements of a block, descending into branches but not nested loops.
fn scan_direct<'a>(stmts: &'a [Stmt], visit: &mut dyn FnMut(&'a Stmt)) {
    for stmt in stmts {
        match stmt {
            Stmt::While { .. } | Stmt::For { .. } => visit(stmt),
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => {
                visit(stmt);
                scan_direct(then_branch, visit);
                scan_direct(else_branch, visit);
            }
            Stmt::Switch { cases, default, .. } => {
                visit(stmt);
                for (_, arm) in cases {
                    scan_direct(arm, visit);
                }
                scan_direct(default, visit);
            }
            other => visit(other),
        }
    }
}

fn assigns_reaching(stmts: &[Stmt], reaching: &BTreeSet<usize>) -> bool {
    let mut found = false;
    scan_direct(stmts, &mut |s| match s {
        Stmt::Assign { var, .. }
        | Stmt::DeclInt {
            var, init: Some(_), ..
        } if reaching.contains(&var.slot) => {
            found = true;
        }
        _ => {}
    });
    found
}

/// Sign with which a trip count drives an assigned variable: positive for
/// accumulating updates like `v = v + 1`, negative for `v = v - 1`,
/// unknown for reassignments whose per-iteration effect has no fixed sign.
fn tc_sign(slot: usize, value: &Expr) -> EdgeSign {
    let form = linear_form(value);
    if form.tainted() {
        return EdgeSign::Unknown;
    }
    if form.coeffs.get(&slot) == Some(&1) {
        let others_nonneg = form.coeffs.iter().all(|(&s, &c)| s == slot || c >= 0);
        let others_nonpos = form.coeffs.iter().all(|(&s, &c)| s == slot || c <= 0);
        if others_nonneg && form.constant >= 0 {
            return EdgeSign::Positive;
        }
        if others_nonpos && form.constant <= 0 {
            return EdgeSign::Negative;
        }
    }
    EdgeSign::Unknown
}

/// The last assignment to `slot` before `before_line`, outside any loop.
fn reaching_init(f: &FunctionDef, slot: usize, before_line: u32) -> Option<&Expr> {
    let mut best: Option<(u32, &Expr)> = None;
    fn scan<'a>(
        stmts: &'a [Stmt],
        slot: usize,
        before_line: u32,
        best: &mut Option<(u32, &'a Expr)>,
    ) {
        for stmt in stmts {
            match stmt {
                Stmt::Assign { var, value, line } if var.slot == slot && *line < before_line => {
                    if best.map(|(l, _)| *line >= l).unwrap_or(true) {
                        *best = Some((*line, value));
                    }
                }
                Stmt::DeclInt {
                    var,
                    init: Some(value),
                    line,
                } if var.slot == slot && *line < before_line => {
                    if best.map(|(l, _)| *line >= l).unwrap_or(true) {
                        *best = Some((*line, value));
                    }
                }
                Stmt::If {
                    then_branch,
                    else_branch,
                    ..
                } => {
                    scan(then_branch, slot, before_line, best);
                    scan(else_branch, slot, before_line, best);
                }
                Stmt::Switch { cases, default, .. } => {
                    for (_, arm) in cases {
                        scan(arm, slot, before_line, best);
                    }
                    scan(default, slot, before_line, best);
                }
                // Assignments inside loops are not initializers.
                Stmt::While { .. } | Stmt::For { .. } => {}
                _ => {}
            }
        }
    }
    scan(&f.body, slot, before_line, &mut best);
    best.map(|(_, e)| e)
}

/// Slots assigned anywhere in a statement list (including nested blocks,
/// loops, and for init/step clauses).
fn assigned_slots(stmts: &[Stmt], out: &mut BTreeSet<usize>) {
    crate::ast::walk_stmts(stmts, &mut |s| match s {
        Stmt::Assign { var, .. }
        | Stmt::DeclInt {
            var, init: Some(_), ..
        } => {
            out.insert(var.slot);
        }
        Stmt::Call {
            target: Some(var), ..
        } => {
            out.insert(var.slot);
        }
        _ => {}
    });
}

/// Variables bounding one loop's iteration count, with the sign of their
/// effect on it. Loop-mutated condition variables contribute through their
/// pre-loop initializer; `None` means the bound could not be resolved.
fn loop_bound_vars(f: &FunctionDef, lp: &LoopCtx) -> Option<Vec<(usize, EdgeSign)>> {
    let mut mutated = BTreeSet::new();
    assigned_slots(lp.body, &mut mutated);
    if let Some(step) = lp.step {
        assigned_slots(core::slice::from_ref(step), &mut mutated);
    }

    let mut result: Vec<(usize, EdgeSign)> = Vec::new();
    for conj in conjuncts(lp.cond) {
        let slack = slack_form(conj)?;
        for (&slot, &coeff) in &slack.coeffs {
            if !mutated.contains(&slot) {
                push_sign(&mut result, slot, EdgeSign::of(coeff));
                continue;
            }
            // Substitute the mutated variable's initializer.
            let init_expr = match lp.init {
                Some(Stmt::DeclInt {
                    var, init: Some(e), ..
                })
                | Some(Stmt::Assign { var, value: e, .. })
                    if var.slot == slot =>
                {
                    Some(e)
                }
                _ => reaching_init(f, slot, lp.line),
            };
            let init_expr = init_expr?;
            let form = linear_form(init_expr);
            if form.tainted() {
                return None;
            }
            for (&islot, &icoeff) in &form.coeffs {
                push_sign(&mut result, islot, EdgeSign::of(coeff.wrapping_mul(icoeff)));
            }
        }
    }
    Some(result)
}

/// Whether `slot` is reinitialized (assigned without reference to itself)
/// somewhere inside the parent loop's body outside the nested loop, e.g.
/// an inner `for` initializer. Such variables start fresh on each entry
/// of the nested loop and stay linear in the loop bounds.
fn refreshed_per_iteration(
    loops: &[LoopCtx],
    parent_site: SiteId,
    inner_site: SiteId,
    slot: usize,
) -> bool {
    let Some(parent) = loops.iter().find(|l| l.site == parent_site) else {
        return false;
    };
    let inner = loops.iter().find(|l| l.site == inner_site);
    // The inner for-initializer runs per parent iteration.
    if let Some(Stmt::DeclInt {
        var,
        init: Some(init),
        ..
    })
    | Some(Stmt::Assign {
        var, value: init, ..
    }) = inner.and_then(|l| l.init)
    {
        if var.slot == slot && !linear_form(init).coeffs.contains_key(&slot) {
            return true;
        }
    }
    let mut refreshed = false;
    scan_direct(parent.body, &mut |stmt| match stmt {
        Stmt::Assign { var, value, .. }
        | Stmt::DeclInt {
            var,
            init: Some(value),
            ..
        } if var.slot == slot && !linear_form(value).coeffs.contains_key(&slot) => {
            refreshed = true;
        }
        _ => {}
    });
    refreshed
}

fn push_sign(acc: &mut Vec<(usize, EdgeSign)>, slot: usize, sign: EdgeSign) {
    match acc.iter_mut().find(|(s, _)| *s == slot) {
        Some((_, existing)) => {
            if *existing != sign {
                *existing = EdgeSign::Unknown;
            }
        }
        None => acc.push((slot, sign)),
    }
}

fn plan_counters(dg: &mut DependencyGraph, f: &FunctionDef) {
    let reaching = index_reaching_slots(dg, f);
    let mut loops: Vec<LoopCtx> = Vec::new();
    gather_loops(&f.body, &mut Vec::new(), &mut Vec::new(), &mut loops);

    struct ArmCand {
        path: ArmPath,
        line: u32,
        qualifies: bool,
    }

    let mut counter_idx = 0usize;
    for li in 0..loops.len() {
        let lp = &loops[li];

        // Does the body/step level (outside arms, outside nested loops)
        // advance an index-feeding variable?
        let mut body_level_mutates = lp
            .step
            .map(|s| matches!(s, Stmt::Assign { var, .. } if reaching.contains(&var.slot)))
            .unwrap_or(false);
        for stmt in lp.body {
            match stmt {
                Stmt::Assign { var, .. }
                | Stmt::DeclInt {
                    var, init: Some(_), ..
                } if reaching.contains(&var.slot) => body_level_mutates = true,
                _ => {}
            }
        }

        // Candidate arms: top-level branch statements of the loop body.
        let mut arms: Vec<ArmCand> = Vec::new();
        let mut exhaustive: Option<(usize, usize)> = None;
        for (si, stmt) in lp.body.iter().enumerate() {
            let mut base = lp.body_path.clone();
            base.push(PathStep::Child(si));
            match stmt {
                Stmt::Switch {
                    cases,
                    default,
                    line,
                    ..
                } => {
                    let start = arms.len();
                    for (ci, (_, arm)) in cases.iter().enumerate() {
                        let mut p = base.clone();
                        p.push(PathStep::Case(ci));
                        arms.push(ArmCand {
                            path: p,
                            line: *line,
                            qualifies: assigns_reaching(arm, &reaching),
                        });
                    }
                    if !default.is_empty() {
                        let mut p = base.clone();
                        p.push(PathStep::Default);
                        arms.push(ArmCand {
                            path: p,
                            line: *line,
                            qualifies: assigns_reaching(default, &reaching),
                        });
                        if exhaustive.is_none() {
                            exhaustive = Some((start, arms.len()));
                        }
                    }
                }
                Stmt::If {
                    then_branch,
                    else_branch,
                    line,
                    ..
                } => {
                    let start = arms.len();
                    let mut p = base.clone();
                    p.push(PathStep::Then);
                    arms.push(ArmCand {
                        path: p,
                        line: *line,
                        qualifies: assigns_reaching(then_branch, &reaching),
                    });
                    if !else_branch.is_empty() {
                        let mut p = base.clone();
                        p.push(PathStep::Else);
                        arms.push(ArmCand {
                            path: p,
                            line: *line,
                            qualifies: assigns_reaching(else_branch, &reaching),
                        });
                        if exhaustive.is_none() {
                            exhaustive = Some((start, arms.len()));
                        }
                    }
                }
                _ => {}
            }
        }

        let mut counted: BTreeSet<usize> = arms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.qualifies)
            .map(|(i, _)| i)
            .collect();
        let mut body_counter = false;
        if body_level_mutates {
            // Attribute body/step advances to an exhaustive branch when one
            // exists: its arm counts sum to the iteration count. Otherwise
            // the body itself is the counted arm.
            match exhaustive {
                Some((start, end)) => counted.extend(start..end),
                None => body_counter = true,
            }
        }

        if counted.is_empty() && !body_counter {
            continue;
        }

        let mut counter_ids: Vec<(usize, Option<usize>)> = Vec::new(); // (node, arm index)
        for &ai in &counted {
            counter_idx += 1;
            let name = format!("tc{counter_idx}");
            dg.counters.push(PlannedCounter {
                name: name.clone(),
                loop_site: lp.site,
                arm: arms[ai].path.clone(),
                arm_line: arms[ai].line,
            });
            let id = dg.intern(&name, NodeKind::TripCount);
            counter_ids.push((id, Some(ai)));
        }
        if body_counter {
            counter_idx += 1;
            let name = format!("tc{counter_idx}");
            dg.counters.push(PlannedCounter {
                name: name.clone(),
                loop_site: lp.site,
                arm: lp.body_path.clone(),
                arm_line: lp.line,
            });
            let id = dg.intern(&name, NodeKind::TripCount);
            counter_ids.push((id, None));
        }

        // Bound edges: variables extending the iteration space of this loop
        // and of every enclosing loop feed all of its counters.
        let mut chain: Vec<&LoopCtx> = lp
            .enclosing
            .iter()
            .map(|s| loops.iter().find(|l| l.site == *s).unwrap())
            .collect();
        chain.push(lp);
        let mut resolved = true;
        for ctx in chain {
            match loop_bound_vars(f, ctx) {
                Some(bounds) => {
                    for (slot, sign) in bounds {
                        let name = f.locals[slot].name.clone();
                        let from = dg.intern(&name, NodeKind::Variable);
                        for &(cid, _) in &counter_ids {
                            dg.add_edge(from, cid, sign, EdgeRule::E3, ctx.line, &[]);
                        }
                    }
                }
                None => resolved = false,
            }
        }
        if !resolved {
            dg.unresolved_loops.insert(lp.site);
            dg.notes
                .push(format!("line {}: loop bound not entry-resolvable", lp.line));
        }

        // TC -> A edges for updates of index-feeding variables in this
        // loop's direct extent: arm updates from the arm's own counter,
        // body/step updates from every counter of the loop. An update
        // under a nested loop whose variable is not refreshed for each
        // entry accumulates across entries; mark the edge multiplicative
        // so hull regions keep away from it.
        let lp_site = lp.site;
        let parent = lp.enclosing.last().copied();
        // The justifying assignment sits inside every loop of the chain,
        // so loop-scope taint at any enclosing level must see this edge.
        let mut edge_chain = lp.enclosing.clone();
        edge_chain.push(lp_site);
        let emit = |dg: &mut DependencyGraph,
                    slot: usize,
                    value: &Expr,
                    line: u32,
                    arm_idx: Option<usize>| {
            if !reaching.contains(&slot) {
                return;
            }
            let sign = tc_sign(slot, value);
            let multiplicative = match parent {
                Some(parent_site) => !refreshed_per_iteration(&loops, parent_site, lp_site, slot),
                None => false,
            };
            let to_name = f.locals[slot].name.clone();
            let to = dg.intern(&to_name, NodeKind::Variable);
            for &(cid, ai) in &counter_ids {
                let applies = match arm_idx {
                    Some(a) => ai == Some(a),
                    None => true,
                };
                if applies {
                    dg.add_edge_full(
                        cid,
                        to,
                        sign,
                        EdgeRule::E3,
                        line,
                        &edge_chain,
                        multiplicative,
                    );
                }
            }
        };

        // Body/step level assignments.
        for stmt in lp.body {
            match stmt {
                Stmt::Assign { var, value, line }
                | Stmt::DeclInt {
                    var,
                    init: Some(value),
                    line,
                } => emit(dg, var.slot, value, *line, None),
                _ => {}
            }
        }
        if let Some(Stmt::Assign { var, value, line }) = lp.step {
            emit(dg, var.slot, value, *line, None);
        }
        // Arm-level assignments (searched through nested branches of the
        // arm, not nested loops).
        for (ai, arm) in arms.iter().enumerate() {
            if !counted.contains(&ai) {
                continue;
            }
            let arm_stmts = resolve_block(&f.body, &arm.path).unwrap_or(&[]);
            scan_direct(arm_stmts, &mut |s| match s {
                Stmt::Assign { var, value, line }
                | Stmt::DeclInt {
                    var,
                    init: Some(value),
                    line,
                } => emit(dg, var.slot, value, *line, Some(ai)),
                _ => {}
            });
        }
    }
}

/// Resolve an [`ArmPath`] to the statement block it denotes.
pub fn resolve_block<'a>(body: &'a [Stmt], path: &ArmPath) -> Option<&'a [Stmt]> {
    let mut current: &'a [Stmt] = body;
    let mut held: Option<&'a Stmt> = None;
    for step in path {
        match step {
            PathStep::Child(i) => {
                held = current.get(*i);
            }
            PathStep::Then => match held? {
                Stmt::If { then_branch, .. } => current = then_branch,
                _ => return None,
            },
            PathStep::Else => match held? {
                Stmt::If { else_branch, .. } => current = else_branch,
                _ => return None,
            },
            PathStep::Case(ci) => match held? {
                Stmt::Switch { cases, .. } => current = &cases.get(*ci)?.1,
                _ => return None,
            },
            PathStep::Default => match held? {
                Stmt::Switch { default, .. } => current = default,
                _ => return None,
            },
            PathStep::LoopBody => match held? {
                Stmt::While { body, .. } | Stmt::For { body, .. } => current = body,
                _ => return None,
            },
        }
    }
    Some(current)
}

// ---------------------------------------------------------------------------
// Instrumentation

/// Insert trip-counter increments at the planned arm entries and register
/// the counters on each function. Returns a new, instrumented program.
pub fn instrument_trip_counts(program: &Program, analysis: &ProgramAnalysis) -> Program {
    let mut out = program.clone();
    for f in &mut out.functions {
        let Some(fa) = analysis.functions.get(&f.name) else {
            continue;
        };
        for (idx, counter) in fa.graph.counters.iter().enumerate() {
            insert_increment(&mut f.body, &counter.arm, idx);
            f.trip_counters.push(TripCounter {
                name: counter.name.clone(),
                loop_site: counter.loop_site,
                arm_line: counter.arm_line,
            });
        }
    }
    out
}

fn insert_increment(body: &mut Vec<Stmt>, path: &ArmPath, counter: usize) {
    fn descend<'a>(current: &'a mut Vec<Stmt>, path: &[PathStep]) -> Option<&'a mut Vec<Stmt>> {
        let Some(step) = path.first() else {
            return Some(current);
        };
        match step {
            PathStep::Child(i) => {
                let stmt = current.get_mut(*i)?;
                descend_stmt(stmt, &path[1..])
            }
            _ => None,
        }
    }
    fn descend_stmt<'a>(stmt: &'a mut Stmt, path: &[PathStep]) -> Option<&'a mut Vec<Stmt>> {
        let step = path.first()?;
        let block = match (step, stmt) {
            (PathStep::Then, Stmt::If { then_branch, .. }) => then_branch,
            (PathStep::Else, Stmt::If { else_branch, .. }) => else_branch,
            (PathStep::Case(ci), Stmt::Switch { cases, .. }) => &mut cases.get_mut(*ci)?.1,
            (PathStep::Default, Stmt::Switch { default, .. }) => default,
            (PathStep::LoopBody, Stmt::While { body, .. })
            | (PathStep::LoopBody, Stmt::For { body, .. }) => body,
            _ => return None,
        };
        if path.len() == 1 {
            Some(block)
        } else {
            descend(block, &path[1..])
        }
    }
    if let Some(block) = descend(body, path) {
        block.insert(0, Stmt::TripIncrement { counter });
    }
}

// ---------------------------------------------------------------------------
// Affecting sets and region plans

/// The ordered pointer-affecting variable set of one target array: taint
/// terminals in declaration order, then the length variable with negative
/// correlation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffectingSet {
    pub func: String,
    pub array: String,
    pub vars: Vec<(String, Correlation)>,
    /// False when the index depends on a multiplicative trip-count path;
    /// hull regions must not extrapolate for this target.
    pub linear: bool,
}

impl AffectingSet {
    pub fn render(&self) -> String {
        let vars: Vec<String> = self
            .vars
            .iter()
            .map(|(n, c)| format!("{n}:{}", c.symbol()))
            .collect();
        format!("({},{}):({})", self.func, self.array, vars.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetInfo {
    pub array: String,
    pub function_scope: Result<AffectingSet, String>,
}

/// Instructions for tracing and querying one region scope.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegionPlan {
    /// Signature variables in canonical order. Names ending in `.len` are
    /// pseudo-variables valued from the named array's length at scope entry.
    pub vars: Vec<(String, Correlation)>,
    /// Index expressions that are plain sums of signature variables and
    /// nonnegative constants, as overflow-guard templates.
    pub guard_templates: Vec<Vec<GuardTerm>>,
    /// False when any covered index has a multiplicative trip-count
    /// dependence: the union region still applies, hull regions do not.
    pub linear: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GuardTerm {
    Var(String),
    Const(u64),
}

#[derive(Clone, Debug, Default)]
pub struct FunctionAnalysis {
    pub graph: DependencyGraph,
    pub targets: BTreeMap<String, TargetInfo>,
    pub function_region: Option<RegionPlan>,
    pub loop_regions: BTreeMap<SiteId, RegionPlan>,
    /// Human-readable reasons for scopes that are ineligible.
    pub ineligible: Vec<String>,
}

/// One call site: which caller variables feed which callee parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallBinding {
    pub caller: String,
    pub callee: String,
    pub line: u32,
    pub args: Vec<Option<String>>,
}

#[derive(Clone, Debug, Default)]
pub struct ProgramAnalysis {
    pub functions: BTreeMap<String, FunctionAnalysis>,
    pub bindings: Vec<CallBinding>,
    pub linear_assignments: u64,
    pub nonlinear_assignments: u64,
}

impl ProgramAnalysis {
    pub fn function(&self, name: &str) -> Option<&FunctionAnalysis> {
        self.functions.get(name)
    }

    /// The affecting set of one (function, target array) pair at function
    /// scope, or the reason it cannot be derived.
    pub fn affecting_set(&self, func: &str, array: &str) -> Option<&Result<AffectingSet, String>> {
        self.functions
            .get(func)
            .and_then(|fa| fa.targets.get(array))
            .map(|t| &t.function_scope)
    }
}

/// Analyze a whole program: graphs, counters, affecting sets, region plans.
pub fn analyze_program(program: &Program) -> ProgramAnalysis {
    let mut analysis = ProgramAnalysis::default();
    for f in &program.functions {
        let graph = build_dg(f);
        analysis.linear_assignments += graph.linear_assignments;
        analysis.nonlinear_assignments += graph.nonlinear_assignments;
        collect_bindings(f, &mut analysis.bindings);
        analysis.functions.insert(
            f.name.clone(),
            FunctionAnalysis {
                graph,
                ..Default::default()
            },
        );
    }
    for f in &program.functions {
        let derived = derive_regions(program, &analysis, f);
        let fa = analysis.functions.get_mut(&f.name).unwrap();
        fa.targets = derived.targets;
        fa.function_region = derived.function_region;
        fa.loop_regions = derived.loop_regions;
        fa.ineligible = derived.ineligible;
    }
    analysis
}

fn collect_bindings(f: &FunctionDef, bindings: &mut Vec<CallBinding>) {
    crate::ast::walk_stmts(&f.body, &mut |stmt| {
        if let Stmt::Call {
            func, args, line, ..
        } = stmt
        {
            bindings.push(CallBinding {
                caller: f.name.clone(),
                callee: func.clone(),
                line: *line,
                args: args
                    .iter()
                    .map(|a| match a {
                        Expr::Var(v) => Some(v.name.clone()),
                        _ => None,
                    })
                    .collect(),
            });
        }
    });
}

/// One array access site: target array slot, index expression, and the
/// loop chain containing it (outermost first).
struct AccessSite<'a> {
    array_slot: usize,
    index: &'a Expr,
    loops: Vec<SiteId>,
}

fn collect_sites<'a>(stmts: &'a [Stmt], chain: &mut Vec<SiteId>, out: &mut Vec<AccessSite<'a>>) {
    fn expr_sites<'a>(e: &'a Expr, chain: &[SiteId], out: &mut Vec<AccessSite<'a>>) {
        match e {
            Expr::ArrayRead { array, index, .. } => {
                out.push(AccessSite {
                    array_slot: array.slot,
                    index,
                    loops: chain.to_vec(),
                });
                expr_sites(index, chain, out);
            }
            Expr::Binary { lhs, rhs, .. } => {
                expr_sites(lhs, chain, out);
                expr_sites(rhs, chain, out);
            }
            Expr::Neg(inner) => expr_sites(inner, chain, out),
            _ => {}
        }
    }
    for stmt in stmts {
        match stmt {
            Stmt::ArrayWrite {
                array,
                index,
                value,
                ..
            } => {
                out.push(AccessSite {
                    array_slot: array.slot,
                    index,
                    loops: chain.clone(),
                });
                expr_sites(index, chain, out);
                expr_sites(value, chain, out);
            }
            Stmt::DeclInt { init: Some(e), .. }
            | Stmt::Assign { value: e, .. }
            | Stmt::Print { value: e, .. }
            | Stmt::Return { value: Some(e), .. } => expr_sites(e, chain, out),
            Stmt::DeclArray { size, .. } | Stmt::Resize { size, .. } => {
                expr_sites(size, chain, out)
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                ..
            } => {
                expr_sites(cond, chain, out);
                collect_sites(then_branch, chain, out);
                collect_sites(else_branch, chain, out);
            }
            Stmt::While {
                cond, body, site, ..
            } => {
                expr_sites(cond, chain, out);
                chain.push(*site);
                collect_sites(body, chain, out);
                chain.pop();
            }
            Stmt::For {
                init,
                cond,
                step,
                body,
                site,
                ..
            } => {
                if let Some(i) = init {
                    collect_sites(core::slice::from_ref(i), chain, out);
                }
                expr_sites(cond, chain, out);
                chain.push(*site);
                collect_sites(body, chain, out);
                if let Some(s) = step {
                    collect_sites(core::slice::from_ref(s), chain, out);
                }
                chain.pop();
            }
            Stmt::Switch {
                scrutinee,
                cases,
                default,
                ..
            } => {
                expr_sites(scrutinee, chain, out);
                for (_, arm) in cases {
                    collect_sites(arm, chain, out);
                }
                collect_sites(default, chain, out);
            }
            Stmt::Call { args, .. } => {
                for a in args {
                    expr_sites(a, chain, out);
                }
            }
            _ => {}
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ScopeKind {
    Function,
    Loop(SiteId),
}

struct DerivedRegions {
    targets: BTreeMap<String, TargetInfo>,
    function_region: Option<RegionPlan>,
    loop_regions: BTreeMap<SiteId, RegionPlan>,
    ineligible: Vec<String>,
}

fn derive_regions(
    program: &Program,
    analysis: &ProgramAnalysis,
    f: &FunctionDef,
) -> DerivedRegions {
    let dg = &analysis.functions[&f.name].graph;
    let mut sites = Vec::new();
    collect_sites(&f.body, &mut Vec::new(), &mut sites);

    let mut out = DerivedRegions {
        targets: BTreeMap::new(),
        function_region: None,
        loop_regions: BTreeMap::new(),
        ineligible: Vec::new(),
    };

    // Target arrays in slot order.
    let mut target_slots: Vec<usize> = sites.iter().map(|s| s.array_slot).collect();
    target_slots.sort_unstable();
    target_slots.dedup();

    // Per-target function-scope affecting sets, reported for every target.
    for &slot in &target_slots {
        let name = f.locals[slot].name.clone();
        let result = target_affecting(program, analysis, f, dg, slot, ScopeKind::Function);
        out.targets.insert(
            name.clone(),
            TargetInfo {
                array: name,
                function_scope: result,
            },
        );
    }

    // Function-level plan: every target must be derivable.
    out.function_region =
        build_plan(
            f,
            &sites,
            &target_slots,
            ScopeKind::Function,
            |slot| match &out.targets[&f.locals[slot].name].function_scope {
                Ok(set) => Ok((set.vars.clone(), set.linear)),
                Err(reason) => Err(reason.clone()),
            },
        )
        .map_err(|reason| {
            out.ineligible.push(format!("function scope: {reason}"));
            reason
        })
        .ok();

    // Loop-level plans.
    let mut loop_sites: Vec<SiteId> = sites.iter().flat_map(|s| s.loops.iter().copied()).collect();
    loop_sites.sort_unstable();
    loop_sites.dedup();
    for site in loop_sites {
        let scope = ScopeKind::Loop(site);
        let in_scope: Vec<usize> = {
            let mut v: Vec<usize> = sites
                .iter()
                .filter(|s| s.loops.contains(&site))
                .map(|s| s.array_slot)
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let plan = build_plan(f, &sites, &in_scope, scope, |slot| {
            target_affecting(program, analysis, f, dg, slot, scope)
                .map(|set| (set.vars, set.linear))
        });
        match plan {
            Ok(p) => {
                out.loop_regions.insert(site, p);
            }
            Err(reason) => {
                out.ineligible.push(format!("loop:{site}: {reason}"));
            }
        }
    }

    out
}

/// Merge per-target affecting sets into one scope plan and derive the
/// overflow-guard templates.
fn build_plan(
    f: &FunctionDef,
    sites: &[AccessSite],
    target_slots: &[usize],
    scope: ScopeKind,
    mut affecting_of: impl FnMut(usize) -> Result<(Vec<(String, Correlation)>, bool), String>,
) -> Result<RegionPlan, String> {
    if target_slots.is_empty() {
        return Err("no array accesses".to_string());
    }
    let mut vars: Vec<(String, Correlation)> = Vec::new();
    let mut linear = true;
    for &slot in target_slots {
        let (target_vars, target_linear) = affecting_of(slot)?;
        linear &= target_linear;
        for (name, corr) in target_vars {
            match vars.iter().find(|(n, _)| *n == name) {
                Some((_, existing)) if *existing != corr => {
                    return Err(format!("conflicting correlation for `{name}`"));
                }
                Some(_) => {}
                None => vars.push((name, corr)),
            }
        }
    }
    if vars.is_empty() {
        return Err("no entry-available coordinates".to_string());
    }
    if vars.len() > crate::geometry::MAX_HULL_DIM {
        return Err(format!(
            "{} coordinates exceed the dimension cap",
            vars.len()
        ));
    }

    // Guard templates: index expressions that are plain sums of signature
    // variables and a nonnegative constant.
    let mut guard_templates = Vec::new();
    for site in sites {
        let in_scope = match scope {
            ScopeKind::Function => true,
            ScopeKind::Loop(s) => site.loops.contains(&s),
        };
        if !in_scope || !target_slots.contains(&site.array_slot) {
            continue;
        }
        let form = linear_form(site.index);
        if form.tainted() || form.constant < 0 {
            continue;
        }
        let mut terms = Vec::new();
        let mut ok = true;
        for (&slot, &coeff) in &form.coeffs {
            let name = &f.locals[slot].name;
            if coeff != 1 || !vars.iter().any(|(n, _)| n == name) {
                ok = false;
                break;
            }
            terms.push(GuardTerm::Var(name.clone()));
        }
        if ok && !terms.is_empty() {
            if form.constant > 0 {
                terms.push(GuardTerm::Const(form.constant as u64));
            }
            if !guard_templates.contains(&terms) {
                guard_templates.push(terms);
            }
        }
    }

    Ok(RegionPlan {
        vars,
        guard_templates,
        linear,
    })
}

/// Backward taint from one target array's index edges to entry-available
/// terminals, then the length coordinate.
fn target_affecting(
    program: &Program,
    analysis: &ProgramAnalysis,
    f: &FunctionDef,
    dg: &DependencyGraph,
    array_slot: usize,
    scope: ScopeKind,
) -> Result<AffectingSet, String> {
    let array_name = &f.locals[array_slot].name;
    let array_node = dg
        .node_id(array_name)
        .ok_or_else(|| format!("no node for `{array_name}`"))?;
    if dg.nodes[array_node].tainted {
        return Err(format!("non-affine index into `{array_name}`"));
    }

    let edge_in_scope = |e: &DgEdge| match scope {
        ScopeKind::Function => true,
        ScopeKind::Loop(site) => e.loops.contains(&site),
    };

    // Slots assigned within the loop extent, for loop-scope terminals.
    let mut loop_assigned: BTreeSet<usize> = BTreeSet::new();
    if let ScopeKind::Loop(site) = scope {
        collect_loop_assigned(&f.body, site, &mut loop_assigned);
    }

    // sign masks: bit 0 = positive, bit 1 = negative
    let mut reached: BTreeMap<usize, u8> = BTreeMap::new();
    let mut work: Vec<(usize, u8)> = Vec::new();
    let mut linear = true;
    for e in &dg.edges {
        if e.rule == EdgeRule::E4 && e.to == array_node && edge_in_scope(e) {
            work.push((e.from, sign_mask(e.sign)));
        }
    }

    let mut terminals: BTreeMap<usize, u8> = BTreeMap::new(); // node -> signs
    while let Some((node, mask)) = work.pop() {
        let seen = reached.entry(node).or_insert(0);
        if *seen & mask == mask {
            continue;
        }
        *seen |= mask;

        let n = &dg.nodes[node];
        if n.tainted {
            return Err(format!(
                "index of `{array_name}` depends on non-affine `{}`",
                n.name
            ));
        }
        match n.kind {
            NodeKind::Array => {
                return Err(format!(
                    "index of `{array_name}` depends on array `{}`",
                    n.name
                ))
            }
            NodeKind::TripCount => {
                let counter = dg
                    .counters
                    .iter()
                    .find(|c| c.name == n.name)
                    .expect("counter node has a plan");
                if dg.unresolved_loops.contains(&counter.loop_site) {
                    return Err(format!(
                        "loop at site {} has no entry-resolvable bound",
                        counter.loop_site
                    ));
                }
                // Expand through the counter's bound edges.
                for e in &dg.edges {
                    if e.to == node && e.rule == EdgeRule::E3 {
                        work.push((e.from, combine(mask, e.sign)));
                    }
                }
            }
            NodeKind::Variable => {
                let slot = f
                    .slot_of(&n.name)
                    .ok_or_else(|| format!("unknown variable `{}`", n.name))?;
                let is_terminal = match scope {
                    ScopeKind::Function => f.locals[slot].is_param,
                    ScopeKind::Loop(_) => true,
                };
                if is_terminal {
                    *terminals.entry(node).or_insert(0) |= mask;
                }
                let expand = match scope {
                    ScopeKind::Function => !f.locals[slot].is_param,
                    ScopeKind::Loop(_) => loop_assigned.contains(&slot),
                };
                if expand {
                    for e in &dg.edges {
                        if e.to == node
                            && matches!(e.rule, EdgeRule::E1 | EdgeRule::E3)
                            && edge_in_scope(e)
                        {
                            if e.multiplicative {
                                linear = false;
                            }
                            work.push((e.from, combine(mask, e.sign)));
                        }
                    }
                }
            }
        }
    }

    // Sign conflicts at terminals make the target ineligible.
    let mut vars: Vec<(usize, Correlation)> = Vec::new();
    for (node, mask) in &terminals {
        let name = &dg.nodes[*node].name;
        if *mask == 0b11 {
            return Err(format!(
                "`{name}` reaches the index of `{array_name}` with both signs"
            ));
        }
        let corr = if *mask & 0b10 != 0 {
            Correlation::Negative
        } else {
            Correlation::Positive
        };
        let slot = f.slot_of(name).unwrap();
        vars.push((slot, corr));
    }
    vars.sort_by_key(|(slot, _)| *slot);

    let mut named: Vec<(String, Correlation)> = vars
        .into_iter()
        .map(|(slot, c)| (f.locals[slot].name.clone(), c))
        .collect();

    // Length coordinate, appended last.
    let length = length_coordinate(program, analysis, f, array_slot, scope)?;
    if let Some((name, corr)) = length {
        match named.iter().find(|(n, _)| *n == name) {
            Some((_, existing)) if *existing != corr => {
                return Err(format!(
                    "`{name}` is both the bound of `{array_name}` and an index driver"
                ));
            }
            Some(_) => {}
            None => named.push((name, corr)),
        }
    }

    if named.is_empty() {
        return Err(format!("no entry-available coordinates for `{array_name}`"));
    }

    Ok(AffectingSet {
        func: f.name.clone(),
        array: array_name.clone(),
        vars: named,
        linear,
    })
}

fn sign_mask(sign: EdgeSign) -> u8 {
    match sign {
        EdgeSign::Positive => 0b01,
        EdgeSign::Negative => 0b10,
        EdgeSign::Unknown => 0b11,
    }
}

/// Compose an accumulated sign mask with an edge sign.
fn combine(mask: u8, sign: EdgeSign) -> u8 {
    match sign {
        EdgeSign::Positive => mask,
        EdgeSign::Negative => ((mask & 0b01) << 1) | ((mask & 0b10) >> 1),
        EdgeSign::Unknown => 0b11,
    }
}

fn collect_loop_assigned(stmts: &[Stmt], site: SiteId, out: &mut BTreeSet<usize>) {
    for stmt in stmts {
        match stmt {
            Stmt::While { body, site: s, .. } => {
                if *s == site {
                    assigned_slots(body, out);
                } else {
                    collect_loop_assigned(body, site, out);
                }
            }
            Stmt::For {
                body,
                step,
                site: s,
                ..
            } => {
                if *s == site {
                    assigned_slots(body, out);
                    if let Some(st) = step {
                        assigned_slots(core::slice::from_ref(st), out);
                    }
                } else {
                    collect_loop_assigned(body, site, out);
                    if let Some(st) = step {
                        collect_loop_assigned(core::slice::from_ref(st), site, out);
                    }
                }
            }
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => {
                collect_loop_assigned(then_branch, site, out);
                collect_loop_assigned(else_branch, site, out);
            }
            Stmt::Switch { cases, default, .. } => {
                for (_, arm) in cases {
                    collect_loop_assigned(arm, site, out);
                }
                collect_loop_assigned(default, site, out);
            }
            _ => {}
        }
    }
}

/// The length coordinate of a target array.
///
/// Function scope: a lone parameter variable sizing every in-function
/// alloc/resize of the array; or, for parameter arrays never sized
/// in-function, the callee parameter that provably carries the caller's
/// allocation size across every call site (the E2 traversal); or the
/// `arr.len` pseudo-variable. Arrays allocated in-function with constant
/// sizes need no length coordinate. Loop scope: always the pseudo
/// length, provided the array is not resized inside the loop.
fn length_coordinate(
    program: &Program,
    analysis: &ProgramAnalysis,
    f: &FunctionDef,
    array_slot: usize,
    scope: ScopeKind,
) -> Result<Option<(String, Correlation)>, String> {
    let array_name = &f.locals[array_slot].name;
    let sizes = alloc_sizes(f, array_slot);

    if let ScopeKind::Loop(site) = scope {
        for (size_loops, _) in &sizes {
            if size_loops.contains(&site) {
                return Err(format!("`{array_name}` is resized inside the loop"));
            }
        }
        return Ok(Some((pseudo_len_name(array_name), Correlation::Negative)));
    }

    if !sizes.is_empty() {
        let forms: Vec<LinearForm> = sizes.iter().map(|(_, e)| linear_form(e)).collect();
        if forms.iter().all(|fm| fm.constant_only().is_some()) {
            // Constant bound: identical in every execution.
            return Ok(None);
        }
        let lone: Vec<Option<usize>> = forms.iter().map(LinearForm::lone_var).collect();
        if let Some(slot) = lone[0] {
            if lone.iter().all(|&l| l == Some(slot)) && f.locals[slot].is_param {
                return Ok(Some((f.locals[slot].name.clone(), Correlation::Negative)));
            }
        }
        return Err(format!("`{array_name}` has no entry-available bound"));
    }

    // Parameter array never sized in-function: resolve through call sites.
    if f.locals[array_slot].is_param {
        let param_pos = f.params.iter().position(|&p| p == array_slot).unwrap();
        let mut visited = BTreeSet::new();
        if let Some(name) =
            resolve_param_length(program, analysis, &f.name, param_pos, &mut visited)
        {
            return Ok(Some((name, Correlation::Negative)));
        }
        return Ok(Some((pseudo_len_name(array_name), Correlation::Negative)));
    }

    Err(format!("`{array_name}` is never allocated"))
}

/// Alloc/resize size expressions of one array, with their loop chains.
fn alloc_sizes(f: &FunctionDef, array_slot: usize) -> Vec<(Vec<SiteId>, &Expr)> {
    let mut out = Vec::new();
    fn scan<'a>(
        stmts: &'a [Stmt],
        array_slot: usize,
        chain: &mut Vec<SiteId>,
        out: &mut Vec<(Vec<SiteId>, &'a Expr)>,
    ) {
        for stmt in stmts {
            match stmt {
                Stmt::DeclArray { var, size, .. } if var.slot == array_slot => {
                    out.push((chain.clone(), size));
                }
                Stmt::Resize { array, size, .. } if array.slot == array_slot => {
                    out.push((chain.clone(), size));
                }
                Stmt::If {
                    then_branch,
                    else_branch,
                    ..
                } => {
                    scan(then_branch, array_slot, chain, out);
                    scan(else_branch, array_slot, chain, out);
                }
                Stmt::While { body, site, .. } => {
                    chain.push(*site);
                    scan(body, array_slot, chain, out);
                    chain.pop();
                }
                Stmt::For {
                    init,
                    step,
                    body,
                    site,
                    ..
                } => {
                    if let Some(i) = init {
                        scan(core::slice::from_ref(i), array_slot, chain, out);
                    }
                    chain.push(*site);
                    scan(body, array_slot, chain, out);
                    if let Some(s) = step {
                        scan(core::slice::from_ref(s), array_slot, chain, out);
                    }
                    chain.pop();
                }
                Stmt::Switch { cases, default, .. } => {
                    for (_, arm) in cases {
                        scan(arm, array_slot, chain, out);
                    }
                    scan(default, array_slot, chain, out);
                }
                _ => {}
            }
        }
    }
    scan(&f.body, array_slot, &mut Vec::new(), &mut out);
    out
}

/// Resolve, across all call sites of `callee`, the callee-side integer
/// parameter that carries the length of the array parameter at
/// `param_pos`. Every call site must agree.
fn resolve_param_length(
    program: &Program,
    analysis: &ProgramAnalysis,
    callee: &str,
    param_pos: usize,
    visited: &mut BTreeSet<(String, usize)>,
) -> Option<String> {
    if !visited.insert((callee.to_string(), param_pos)) {
        return None;
    }
    let callee_def = program.function(callee)?;
    let bindings: Vec<&CallBinding> = analysis
        .bindings
        .iter()
        .filter(|b| b.callee == callee)
        .collect();
    if bindings.is_empty() {
        return None;
    }
    let mut resolved: Option<String> = None;
    for b in &bindings {
        let caller = program.function(&b.caller)?;
        let arg_name = b.args.get(param_pos)?.as_ref()?;
        let arg_slot = caller.slot_of(arg_name)?;
        // The caller-side variable that sizes the argument array.
        let caller_len_var: String = {
            let sizes = alloc_sizes(caller, arg_slot);
            if !sizes.is_empty() {
                let lone: Vec<Option<usize>> = sizes
                    .iter()
                    .map(|(_, e)| linear_form(e).lone_var())
                    .collect();
                let slot = lone[0]?;
                if !lone.iter().all(|&l| l == Some(slot)) {
                    return None;
                }
                caller.locals[slot].name.clone()
            } else if caller.locals[arg_slot].is_param {
                let caller_pos = caller.params.iter().position(|&p| p == arg_slot)?;
                resolve_param_length(program, analysis, &b.caller, caller_pos, visited)?
            } else {
                return None;
            }
        };
        // That variable must flow into the same call as an int argument.
        let int_pos = b
            .args
            .iter()
            .position(|a| a.as_deref() == Some(caller_len_var.as_str()))?;
        let callee_param_slot = *callee_def.params.get(int_pos)?;
        if callee_def.locals[callee_param_slot].ty != Type::Int {
            return None;
        }
        let name = callee_def.locals[callee_param_slot].name.clone();
        match &resolved {
            Some(prev) if *prev != name => return None,
            _ => resolved = Some(name),
        }
    }
    resolved
}
