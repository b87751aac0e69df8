//! Recursive-descent parser for CheckLang.
//!
//! Grammar summary (see the repository README for the full reference):
//!
//! ```text
//! program  := func*
//! func     := "func" IDENT "(" params? ")" block
//! param    := "int" IDENT | "array" "<" "int" ">" IDENT
//! block    := "{" stmt* "}"
//! stmt     := "int" IDENT ("=" expr)? ";"
//!           | "array" "<" "int" ">" IDENT "=" "alloc" "(" expr ")" ";"
//!           | "input" "int" IDENT ";"
//!           | "input" "array" "<" "int" ">" IDENT ";"
//!           | IDENT "=" expr ";" | IDENT "=" "call" IDENT "(" args? ")" ";"
//!           | IDENT "[" expr "]" "=" expr ";"
//!           | "resize" "(" IDENT "," expr ")" ";"
//!           | "call" IDENT "(" args? ")" ";"
//!           | "return" expr? ";" | "print" "(" expr ")" ";"
//!           | "printa" "(" IDENT ")" ";"
//!           | "if" "(" expr ")" block ("else" (block | if))?
//!           | "while" "(" expr ")" block
//!           | "for" "(" simple? ";" expr ";" simple? ")" block
//!           | "switch" "(" expr ")" "{" ("case" INT ":" stmt*)* ("default" ":" stmt*)? "}"
//! ```
//!
//! Variables are declared before use and resolved to function slots during
//! parsing; array access sites and loop headers receive site ids in source
//! order. Calls appear only as statements, never inside expressions.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::ast::*;
use crate::lexer::{tokenize, Pos, Token};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

pub fn parse(source: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(source).map_err(|e| ParseError {
        line: e.pos.line,
        col: e.pos.col,
        message: e.message,
    })?;
    let mut parser = Parser {
        tokens,
        idx: 0,
        next_site: 0,
        locals: Vec::new(),
    };
    let mut program = Program::default();
    while parser.peek() != &Token::Eof {
        let func = parser.function()?;
        if program.function(&func.name).is_some() {
            return Err(parser.error_at(func.line, format!("duplicate function `{}`", func.name)));
        }
        program.functions.push(func);
    }
    validate_calls(&program)?;
    Ok(program)
}

struct Parser {
    tokens: Vec<(Token, Pos)>,
    idx: usize,
    next_site: SiteId,
    /// Variables of the function currently being parsed.
    locals: Vec<LocalInfo>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.idx].0
    }

    fn peek2(&self) -> &Token {
        &self.tokens[(self.idx + 1).min(self.tokens.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.tokens[self.idx].1
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.idx].0.clone();
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        t
    }

    fn error(&self, message: String) -> ParseError {
        let pos = self.pos();
        ParseError {
            line: pos.line,
            col: pos.col,
            message,
        }
    }

    fn error_at(&self, line: u32, message: String) -> ParseError {
        ParseError {
            line,
            col: 1,
            message,
        }
    }

    fn expect(&mut self, tok: Token) -> Result<(), ParseError> {
        if self.peek() == &tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {tok}, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Token::Ident(name) => {
                self.bump();
                Ok(name)
            }
            other => Err(self.error(format!("expected identifier, found {other}"))),
        }
    }

    fn fresh_site(&mut self) -> SiteId {
        let s = self.next_site;
        self.next_site += 1;
        s
    }

    fn declare(&mut self, name: String, ty: Type, is_param: bool) -> Result<VarRef, ParseError> {
        if self.locals.iter().any(|l| l.name == name) {
            return Err(self.error(format!("variable `{name}` is already declared")));
        }
        let slot = self.locals.len();
        self.locals.push(LocalInfo {
            name: name.clone(),
            ty,
            is_param,
        });
        Ok(VarRef { name, slot })
    }

    fn resolve(&self, name: &str) -> Result<(VarRef, Type), ParseError> {
        match self.locals.iter().position(|l| l.name == name) {
            Some(slot) => Ok((
                VarRef {
                    name: name.to_string(),
                    slot,
                },
                self.locals[slot].ty,
            )),
            None => Err(self.error(format!("use of undeclared variable `{name}`"))),
        }
    }

    fn resolve_typed(&self, name: &str, want: Type) -> Result<VarRef, ParseError> {
        let (var, ty) = self.resolve(name)?;
        if ty != want {
            let what = match want {
                Type::Int => "an int",
                Type::Array => "an array",
            };
            return Err(self.error(format!("variable `{name}` is not {what}")));
        }
        Ok(var)
    }

    fn function(&mut self) -> Result<FunctionDef, ParseError> {
        let line = self.pos().line;
        self.expect(Token::Func)?;
        let name = self.ident()?;
        self.expect(Token::LParen)?;
        self.locals = Vec::new();
        let mut params = Vec::new();
        if self.peek() != &Token::RParen {
            loop {
                let ty = self.param_type()?;
                let pname = self.ident()?;
                let var = self.declare(pname, ty, true)?;
                params.push(var.slot);
                if self.peek() == &Token::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Token::RParen)?;
        let body = self.block()?;
        Ok(FunctionDef {
            name,
            params,
            locals: core::mem::take(&mut self.locals),
            body,
            trip_counters: Vec::new(),
            line,
        })
    }

    fn param_type(&mut self) -> Result<Type, ParseError> {
        match self.peek() {
            Token::Int_ => {
                self.bump();
                Ok(Type::Int)
            }
            Token::Array => {
                self.array_type()?;
                Ok(Type::Array)
            }
            other => Err(self.error(format!("expected parameter type, found {other}"))),
        }
    }

    /// Consume `array < int >`.
    fn array_type(&mut self) -> Result<(), ParseError> {
        self.expect(Token::Array)?;
        self.expect(Token::Lt)?;
        self.expect(Token::Int_)?;
        self.expect(Token::Gt)
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Token::LBrace)?;
        let mut stmts = Vec::new();
        while self.peek() != &Token::RBrace {
            if self.peek() == &Token::Eof {
                return Err(self.error("unexpected end of input inside block".to_string()));
            }
            stmts.push(self.stmt()?);
        }
        self.expect(Token::RBrace)?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let line = self.pos().line;
        match self.peek().clone() {
            Token::Int_ => {
                self.bump();
                let name = self.ident()?;
                let init = if self.peek() == &Token::Assign {
                    self.bump();
                    Some(self.expr()?)
                } else {
                    None
                };
                self.expect(Token::Semi)?;
                let var = self.declare(name, Type::Int, false)?;
                Ok(Stmt::DeclInt { var, init, line })
            }
            Token::Array => {
                self.array_type()?;
                let name = self.ident()?;
                self.expect(Token::Assign)?;
                self.expect(Token::Alloc)?;
                self.expect(Token::LParen)?;
                let size = self.expr()?;
                self.expect(Token::RParen)?;
                self.expect(Token::Semi)?;
                let var = self.declare(name, Type::Array, false)?;
                Ok(Stmt::DeclArray { var, size, line })
            }
            Token::Input => {
                self.bump();
                match self.peek() {
                    Token::Int_ => {
                        self.bump();
                        let name = self.ident()?;
                        self.expect(Token::Semi)?;
                        let var = self.declare(name, Type::Int, false)?;
                        Ok(Stmt::InputInt { var, line })
                    }
                    Token::Array => {
                        self.array_type()?;
                        let name = self.ident()?;
                        self.expect(Token::Semi)?;
                        let var = self.declare(name, Type::Array, false)?;
                        Ok(Stmt::InputArray { var, line })
                    }
                    other => Err(self.error(format!(
                        "expected `int` or `array` after `input`, found {other}"
                    ))),
                }
            }
            Token::Resize => {
                self.bump();
                self.expect(Token::LParen)?;
                let name = self.ident()?;
                let array = self.resolve_typed(&name, Type::Array)?;
                self.expect(Token::Comma)?;
                let size = self.expr()?;
                self.expect(Token::RParen)?;
                self.expect(Token::Semi)?;
                Ok(Stmt::Resize { array, size, line })
            }
            Token::Call => {
                let (func, args) = self.call_tail()?;
                self.expect(Token::Semi)?;
                Ok(Stmt::Call {
                    target: None,
                    func,
                    args,
                    line,
                })
            }
            Token::Return => {
                self.bump();
                let value = if self.peek() == &Token::Semi {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Token::Semi)?;
                Ok(Stmt::Return { value, line })
            }
            Token::Print => {
                self.bump();
                self.expect(Token::LParen)?;
                let value = self.expr()?;
                self.expect(Token::RParen)?;
                self.expect(Token::Semi)?;
                Ok(Stmt::Print { value, line })
            }
            Token::PrintArray => {
                self.bump();
                self.expect(Token::LParen)?;
                let name = self.ident()?;
                let array = self.resolve_typed(&name, Type::Array)?;
                self.expect(Token::RParen)?;
                self.expect(Token::Semi)?;
                Ok(Stmt::PrintArray { array, line })
            }
            Token::If => self.if_stmt(),
            Token::While => {
                self.bump();
                self.expect(Token::LParen)?;
                let cond = self.expr()?;
                self.expect(Token::RParen)?;
                let site = self.fresh_site();
                let body = self.block()?;
                Ok(Stmt::While {
                    cond,
                    body,
                    site,
                    line,
                })
            }
            Token::For => {
                self.bump();
                self.expect(Token::LParen)?;
                let init = if self.peek() == &Token::Semi {
                    None
                } else {
                    Some(Box::new(self.simple_stmt()?))
                };
                self.expect(Token::Semi)?;
                let cond = self.expr()?;
                self.expect(Token::Semi)?;
                let step = if self.peek() == &Token::RParen {
                    None
                } else {
                    Some(Box::new(self.simple_stmt()?))
                };
                self.expect(Token::RParen)?;
                let site = self.fresh_site();
                let body = self.block()?;
                Ok(Stmt::For {
                    init,
                    cond,
                    step,
                    body,
                    site,
                    line,
                })
            }
            Token::Switch => {
                self.bump();
                self.expect(Token::LParen)?;
                let scrutinee = self.expr()?;
                self.expect(Token::RParen)?;
                self.expect(Token::LBrace)?;
                let mut cases: Vec<(i64, Vec<Stmt>)> = Vec::new();
                let mut default = Vec::new();
                let mut saw_default = false;
                loop {
                    match self.peek() {
                        Token::Case => {
                            if saw_default {
                                return Err(self.error("`case` after `default`".to_string()));
                            }
                            self.bump();
                            let value = self.case_literal()?;
                            if cases.iter().any(|(v, _)| *v == value) {
                                return Err(self.error(format!("duplicate case `{value}`")));
                            }
                            self.expect(Token::Colon)?;
                            cases.push((value, self.arm_stmts()?));
                        }
                        Token::Default => {
                            if saw_default {
                                return Err(self.error("duplicate `default`".to_string()));
                            }
                            saw_default = true;
                            self.bump();
                            self.expect(Token::Colon)?;
                            default = self.arm_stmts()?;
                        }
                        Token::RBrace => {
                            self.bump();
                            break;
                        }
                        other => {
                            return Err(self.error(format!(
                                "expected `case`, `default`, or `}}`, found {other}"
                            )))
                        }
                    }
                }
                Ok(Stmt::Switch {
                    scrutinee,
                    cases,
                    default,
                    line,
                })
            }
            Token::Ident(name) => {
                self.bump();
                match self.peek() {
                    Token::Assign => {
                        self.bump();
                        if self.peek() == &Token::Call {
                            let var = self.resolve_typed(&name, Type::Int)?;
                            let (func, args) = self.call_tail()?;
                            self.expect(Token::Semi)?;
                            Ok(Stmt::Call {
                                target: Some(var),
                                func,
                                args,
                                line,
                            })
                        } else {
                            let var = self.resolve_typed(&name, Type::Int)?;
                            let value = self.expr()?;
                            self.expect(Token::Semi)?;
                            Ok(Stmt::Assign { var, value, line })
                        }
                    }
                    Token::LBracket => {
                        let array = self.resolve_typed(&name, Type::Array)?;
                        self.bump();
                        let index = self.expr()?;
                        self.expect(Token::RBracket)?;
                        let site = self.fresh_site();
                        self.expect(Token::Assign)?;
                        let value = self.expr()?;
                        self.expect(Token::Semi)?;
                        Ok(Stmt::ArrayWrite {
                            array,
                            index,
                            value,
                            site,
                            line,
                        })
                    }
                    other => Err(self.error(format!("expected `=` or `[`, found {other}"))),
                }
            }
            other => Err(self.error(format!("expected statement, found {other}"))),
        }
    }

    fn case_literal(&mut self) -> Result<i64, ParseError> {
        let neg = if self.peek() == &Token::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Token::Int(v) => Ok(if neg { -v } else { v }),
            other => Err(self.error(format!("expected integer case label, found {other}"))),
        }
    }

    /// Statements of one switch arm: up to the next `case`/`default`/`}`.
    /// Arms do not fall through.
    fn arm_stmts(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let mut stmts = Vec::new();
        loop {
            match self.peek() {
                Token::Case | Token::Default | Token::RBrace => return Ok(stmts),
                Token::Eof => {
                    return Err(self.error("unexpected end of input in switch".to_string()))
                }
                _ => stmts.push(self.stmt()?),
            }
        }
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        let line = self.pos().line;
        self.expect(Token::If)?;
        self.expect(Token::LParen)?;
        let cond = self.expr()?;
        self.expect(Token::RParen)?;
        let then_branch = self.block()?;
        let else_branch = if self.peek() == &Token::Else {
            self.bump();
            if self.peek() == &Token::If {
                alloc::vec![self.if_stmt()?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt::If {
            cond,
            then_branch,
            else_branch,
            line,
        })
    }

    /// `for` init/step clause: an int declaration with initializer or a
    /// plain assignment, without the trailing semicolon.
    fn simple_stmt(&mut self) -> Result<Stmt, ParseError> {
        let line = self.pos().line;
        match self.peek().clone() {
            Token::Int_ => {
                self.bump();
                let name = self.ident()?;
                self.expect(Token::Assign)?;
                let init = self.expr()?;
                let var = self.declare(name, Type::Int, false)?;
                Ok(Stmt::DeclInt {
                    var,
                    init: Some(init),
                    line,
                })
            }
            Token::Ident(name) => {
                self.bump();
                let var = self.resolve_typed(&name, Type::Int)?;
                self.expect(Token::Assign)?;
                let value = self.expr()?;
                Ok(Stmt::Assign { var, value, line })
            }
            other => Err(self.error(format!("expected assignment or declaration, found {other}"))),
        }
    }

    /// `call f(args...)` — the `call` keyword has not been consumed yet.
    fn call_tail(&mut self) -> Result<(String, Vec<Expr>), ParseError> {
        self.expect(Token::Call)?;
        let func = self.ident()?;
        self.expect(Token::LParen)?;
        let mut args = Vec::new();
        if self.peek() != &Token::RParen {
            loop {
                args.push(self.call_arg()?);
                if self.peek() == &Token::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Token::RParen)?;
        Ok((func, args))
    }

    /// A call argument is either a bare variable (arrays pass by
    /// reference this way) or an integer expression. Type agreement with
    /// the callee is validated after parsing.
    fn call_arg(&mut self) -> Result<Expr, ParseError> {
        if let Token::Ident(name) = self.peek().clone() {
            if matches!(self.peek2(), Token::Comma | Token::RParen) {
                let (var, _) = self.resolve(&name)?;
                self.bump();
                return Ok(Expr::Var(var));
            }
        }
        self.expr()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == &Token::OrOr {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Expr::Binary {
                op: BinOp::Or,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.cmp_expr()?;
        while self.peek() == &Token::AndAnd {
            self.bump();
            let rhs = self.cmp_expr()?;
            lhs = Expr::Binary {
                op: BinOp::And,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Token::Eq => BinOp::Eq,
            Token::Ne => BinOp::Ne,
            Token::Lt => BinOp::Lt,
            Token::Le => BinOp::Le,
            Token::Gt => BinOp::Gt,
            Token::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.add_expr()?;
        Ok(Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        })
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary_expr()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == &Token::Minus {
            self.bump();
            let inner = self.unary_expr()?;
            return Ok(match inner {
                Expr::Int(v) => Expr::Int(v.wrapping_neg()),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Token::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Token::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Token::Ident(name) => {
                self.bump();
                if self.peek() == &Token::LBracket {
                    let array = self.resolve_typed(&name, Type::Array)?;
                    self.bump();
                    let index = self.expr()?;
                    self.expect(Token::RBracket)?;
                    let site = self.fresh_site();
                    Ok(Expr::ArrayRead {
                        array,
                        index: Box::new(index),
                        site,
                    })
                } else {
                    let var = self.resolve_typed(&name, Type::Int)?;
                    Ok(Expr::Var(var))
                }
            }
            other => Err(self.error(format!("expected expression, found {other}"))),
        }
    }
}

/// Post-parse validation: every call names an existing function with
/// matching arity and argument types.
fn validate_calls(program: &Program) -> Result<(), ParseError> {
    for f in &program.functions {
        let mut err = None;
        walk_stmts(&f.body, &mut |stmt| {
            if err.is_some() {
                return;
            }
            if let Stmt::Call {
                func, args, line, ..
            } = stmt
            {
                let Some(callee) = program.function(func) else {
                    err = Some(ParseError {
                        line: *line,
                        col: 1,
                        message: format!("call to unknown function `{func}`"),
                    });
                    return;
                };
                if callee.params.len() != args.len() {
                    err = Some(ParseError {
                        line: *line,
                        col: 1,
                        message: format!(
                            "`{func}` expects {} argument(s), got {}",
                            callee.params.len(),
                            args.len()
                        ),
                    });
                    return;
                }
                for (arg, &pslot) in args.iter().zip(&callee.params) {
                    let want = callee.locals[pslot].ty;
                    let got = match arg {
                        Expr::Var(v) if f.locals[v.slot].ty == Type::Array => Type::Array,
                        _ => Type::Int,
                    };
                    if want != got {
                        err = Some(ParseError {
                            line: *line,
                            col: 1,
                            message: format!(
                                "argument type mismatch in call to `{func}`: parameter `{}`",
                                callee.locals[pslot].name
                            ),
                        });
                        return;
                    }
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(())
}
