//! Abstract syntax tree for CheckLang.
//!
//! Every array read/write site and every loop header carries a unique,
//! stable site id assigned in source order by the parser; the ids key
//! bounds-check accounting, loop-scope regions, and trip-counter
//! placement. Variable references are resolved to per-function slots at
//! parse time, which doubles as the declare-before-use check.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

/// Stable identifier for an array access site or a loop header,
/// assigned in source order across the whole program.
pub type SiteId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Type {
    Int,
    Array,
}

/// A resolved variable reference: source name plus the per-function slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarRef {
    pub name: String,
    pub slot: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Var(VarRef),
    ArrayRead {
        array: VarRef,
        index: Box<Expr>,
        site: SiteId,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Neg(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    DeclInt {
        var: VarRef,
        init: Option<Expr>,
        line: u32,
    },
    /// `array<int> a = alloc(size);`
    DeclArray {
        var: VarRef,
        size: Expr,
        line: u32,
    },
    InputInt {
        var: VarRef,
        line: u32,
    },
    InputArray {
        var: VarRef,
        line: u32,
    },
    Assign {
        var: VarRef,
        value: Expr,
        line: u32,
    },
    ArrayWrite {
        array: VarRef,
        index: Expr,
        value: Expr,
        site: SiteId,
        line: u32,
    },
    Resize {
        array: VarRef,
        size: Expr,
        line: u32,
    },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
        line: u32,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
        site: SiteId,
        line: u32,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Expr,
        step: Option<Box<Stmt>>,
        body: Vec<Stmt>,
        site: SiteId,
        line: u32,
    },
    Switch {
        scrutinee: Expr,
        cases: Vec<(i64, Vec<Stmt>)>,
        default: Vec<Stmt>,
        line: u32,
    },
    /// `call f(args);` or `x = call f(args);` — calls are statements only.
    Call {
        target: Option<VarRef>,
        func: String,
        args: Vec<Expr>,
        line: u32,
    },
    Return {
        value: Option<Expr>,
        line: u32,
    },
    Print {
        value: Expr,
        line: u32,
    },
    PrintArray {
        array: VarRef,
        line: u32,
    },
    /// Inserted by trip-count instrumentation; never produced by the parser.
    TripIncrement {
        counter: usize,
    },
}

/// One instrumented trip counter: its name (`tc1`, `tc2`, ...), the loop it
/// belongs to, and the source line of the branch arm it counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripCounter {
    pub name: String,
    pub loop_site: SiteId,
    pub arm_line: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalInfo {
    pub name: String,
    pub ty: Type,
    pub is_param: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    /// Parameter slots come first in `locals`, in declaration order.
    pub params: Vec<usize>,
    /// All variables of the function (parameters and locals), indexed by slot.
    pub locals: Vec<LocalInfo>,
    pub body: Vec<Stmt>,
    /// Filled by trip-count instrumentation; empty on a freshly parsed tree.
    pub trip_counters: Vec<TripCounter>,
    pub line: u32,
}

impl FunctionDef {
    pub fn param_info(&self) -> impl Iterator<Item = (usize, &LocalInfo)> {
        self.params
            .iter()
            .map(move |&slot| (slot, &self.locals[slot]))
    }

    pub fn slot_of(&self, name: &str) -> Option<usize> {
        self.locals.iter().position(|l| l.name == name)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub functions: Vec<FunctionDef>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// Walk all statements of a function body depth-first, including nested
/// blocks and `for` init/step clauses.
pub fn walk_stmts<'a>(stmts: &'a [Stmt], visit: &mut dyn FnMut(&'a Stmt)) {
    for stmt in stmts {
        visit(stmt);
        match stmt {
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => {
                walk_stmts(then_branch, visit);
                walk_stmts(else_branch, visit);
            }
            Stmt::While { body, .. } => walk_stmts(body, visit),
            Stmt::For {
                init, step, body, ..
            } => {
                if let Some(i) = init {
                    visit(i);
                }
                walk_stmts(body, visit);
                if let Some(s) = step {
                    visit(s);
                }
            }
            Stmt::Switch { cases, default, .. } => {
                for (_, arm) in cases {
                    walk_stmts(arm, visit);
                }
                walk_stmts(default, visit);
            }
            _ => {}
        }
    }
}
