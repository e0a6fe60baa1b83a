//! Abstract syntax for the array language and its loop-free, array-free image.
//!
//! Both grammars share one set of types. Constructs that only the transformer
//! produces (ternaries, `nd()`, witness writes, chained witness-index
//! initialization, witness declarations) are rejected by the transformer when
//! they show up in an input program and are checked for by
//! [`crate::validate::validate_output_grammar`] on output programs.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Program-wide unique statement location, assigned in pre-order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loc(pub u32);

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

pub type Ident = String;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: Ident,
    pub kind: DeclKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Scalar,
    Array {
        size: u64,
    },
    /// `x_a`: stands for the element of `array` selected by its witness index.
    WitnessVar {
        array: Ident,
    },
    /// `i_a`: the nondeterministically chosen index into `array`.
    WitnessIndex {
        array: Ident,
        size: u64,
    },
}

impl Decl {
    pub fn scalar(name: impl Into<Ident>) -> Self {
        Decl { name: name.into(), kind: DeclKind::Scalar }
    }

    pub fn array(name: impl Into<Ident>, size: u64) -> Self {
        Decl { name: name.into(), kind: DeclKind::Array { size } }
    }

    pub fn is_array(&self) -> bool {
        matches!(self.kind, DeclKind::Array { .. })
    }

    pub fn array_size(&self) -> Option<u64> {
        match self.kind {
            DeclKind::Array { size } => Some(size),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub loc: Loc,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    /// A nested `{ ... }` block.
    Seq(Vec<Stmt>),
    If {
        cond: Expr,
        then: Vec<Stmt>,
        els: Option<Vec<Stmt>>,
    },
    /// `for (iterator = init; test; iterator = step)`. `step` is the new value
    /// of the iterator, so `i++` is stored as `i + 1`.
    For {
        iterator: Ident,
        init: Expr,
        test: Expr,
        step: Expr,
        body: Vec<Stmt>,
    },
    Assign {
        target: LValue,
        value: Expr,
    },
    Assert(Expr),
    Break,
    Continue,
    /// `(guard) ? target = value : value;`
    WitnessWrite {
        guard: Expr,
        target: Ident,
        value: Expr,
    },
    /// `t0 = t1 = ... = value;` with at least two targets.
    MultiAssign {
        targets: Vec<Ident>,
        value: Expr,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LValue {
    Var(Ident),
    ArrayAccess { array: Ident, index: Box<Expr> },
}

impl LValue {
    pub fn var(name: impl Into<Ident>) -> Self {
        LValue::Var(name.into())
    }

    pub fn index(array: impl Into<Ident>, index: Expr) -> Self {
        LValue::ArrayAccess { array: array.into(), index: Box::new(index) }
    }

    /// The variable or array named by this lvalue.
    pub fn base(&self) -> &str {
        match self {
            LValue::Var(n) => n,
            LValue::ArrayAccess { array, .. } => array,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
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
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// C binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub const ALL: [BinOp; 13] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Rem,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::And,
        BinOp::Or,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    BinOp {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Read(LValue),
    Const(i64),
    Ternary {
        cond: Box<Expr>,
        then: Box<Expr>,
        els: Box<Expr>,
    },
    Nd,
    NdRange {
        lo: Box<Expr>,
        hi: Box<Expr>,
    },
    /// A value supplied by the environment, e.g. `input()` or `user_input()`.
    Input(Ident),
}

impl Expr {
    pub fn var(name: impl Into<Ident>) -> Self {
        Expr::Read(LValue::Var(name.into()))
    }

    pub fn index(array: impl Into<Ident>, index: Expr) -> Self {
        Expr::Read(LValue::index(array, index))
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::BinOp { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn ternary(cond: Expr, then: Expr, els: Expr) -> Self {
        Expr::Ternary { cond: Box::new(cond), then: Box::new(then), els: Box::new(els) }
    }

    pub fn nd_range(lo: i64, hi: i64) -> Self {
        Expr::NdRange { lo: Box::new(Expr::Const(lo)), hi: Box::new(Expr::Const(hi)) }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Expr::Read(LValue::Var(n)) => Some(n),
            _ => None,
        }
    }

    pub fn as_const(&self) -> Option<i64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_var(&self, name: &str) -> bool {
        self.as_var() == Some(name)
    }

    /// Pre-order walk over this expression and all subexpressions.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::BinOp { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Read(LValue::ArrayAccess { index, .. }) => index.walk(f),
            Expr::Ternary { cond, then, els } => {
                cond.walk(f);
                then.walk(f);
                els.walk(f);
            }
            Expr::NdRange { lo, hi } => {
                lo.walk(f);
                hi.walk(f);
            }
            Expr::Read(LValue::Var(_)) | Expr::Const(_) | Expr::Nd | Expr::Input(_) => {}
        }
    }

    /// Scalars read anywhere in the expression, in first-occurrence order.
    pub fn scalar_reads(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Read(LValue::Var(n)) = e {
                if !out.contains(&n.as_str()) {
                    out.push(n);
                }
            }
        });
        out
    }

    /// Every `a[e]` read in the expression as `(array, index)`.
    pub fn array_reads(&self) -> Vec<(&str, &Expr)> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Read(LValue::ArrayAccess { array, index }) = e {
                out.push((array.as_str(), &**index));
            }
        });
        out
    }

    pub fn contains(&self, pred: &impl Fn(&Expr) -> bool) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= pred(e));
        found
    }
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Stmt { loc: Loc(0), kind }
    }

    pub fn assign(target: LValue, value: Expr) -> Self {
        Stmt::new(StmtKind::Assign { target, value })
    }

    pub fn assign_var(name: impl Into<Ident>, value: Expr) -> Self {
        Stmt::assign(LValue::Var(name.into()), value)
    }

    /// Direct child statement lists (branches, loop bodies, nested blocks).
    pub fn children(&self) -> Vec<&Vec<Stmt>> {
        match &self.kind {
            StmtKind::Seq(b) => alloc::vec![b],
            StmtKind::If { then, els, .. } => {
                let mut v = alloc::vec![then];
                if let Some(e) = els {
                    v.push(e);
                }
                v
            }
            StmtKind::For { body, .. } => alloc::vec![body],
            _ => Vec::new(),
        }
    }

    /// Expressions evaluated directly by this statement (not by children).
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Seq(_) | StmtKind::Break | StmtKind::Continue => Vec::new(),
            StmtKind::If { cond, .. } => alloc::vec![cond],
            StmtKind::For { init, test, step, .. } => alloc::vec![init, test, step],
            StmtKind::Assign { target, value } => match target {
                LValue::Var(_) => alloc::vec![value],
                LValue::ArrayAccess { index, .. } => alloc::vec![&**index, value],
            },
            StmtKind::Assert(e) => alloc::vec![e],
            StmtKind::WitnessWrite { guard, value, .. } => alloc::vec![guard, value],
            StmtKind::MultiAssign { value, .. } => alloc::vec![value],
        }
    }

    /// Pre-order walk over this statement and all nested statements.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        for block in self.children() {
            for s in block {
                s.walk(f);
            }
        }
    }

    pub fn is_loop(&self) -> bool {
        matches!(self.kind, StmtKind::For { .. })
    }

    /// A loop of the form `for (t = 0; t < 1; t++)` whose body never assigns
    /// `t`. It runs its body at most once, so it is loop-free for a model checker.
    pub fn is_single_trip(&self) -> bool {
        let StmtKind::For { iterator, init, test, step, body } = &self.kind else {
            return false;
        };
        let test_ok = matches!(test, Expr::BinOp { op: BinOp::Lt, lhs, rhs }
            if lhs.is_var(iterator) && rhs.as_const() == Some(1));
        let step_ok = matches!(step, Expr::BinOp { op: BinOp::Add, lhs, rhs }
            if lhs.is_var(iterator) && rhs.as_const() == Some(1));
        init.as_const() == Some(0) && test_ok && step_ok && !block_assigns(body, iterator)
    }
}

/// Does any statement in `block` (recursively) assign scalar `name`?
pub fn block_assigns(block: &[Stmt], name: &str) -> bool {
    let mut found = false;
    for s in block {
        s.walk(&mut |s| {
            found |= match &s.kind {
                StmtKind::Assign { target: LValue::Var(n), .. } => n == name,
                StmtKind::For { iterator, .. } => iterator == name,
                StmtKind::WitnessWrite { target, .. } => target == name,
                StmtKind::MultiAssign { targets, .. } => targets.iter().any(|t| t == name),
                _ => false,
            }
        });
    }
    found
}

/// Does `block` contain a `break` or `continue` that targets the enclosing loop
/// (i.e. one not nested inside an inner loop)?
pub fn block_has_jump(block: &[Stmt]) -> bool {
    block.iter().any(|s| match &s.kind {
        StmtKind::Break | StmtKind::Continue => true,
        StmtKind::For { .. } => false,
        _ => s.children().into_iter().any(|b| block_has_jump(b)),
    })
}

/// Every array access (reads and writes) in `block`, recursively, including
/// loop headers, as `(array, index)`.
pub fn block_array_accesses(block: &[Stmt]) -> Vec<(&str, &Expr)> {
    let mut out = Vec::new();
    for s in block {
        s.walk(&mut |s| {
            if let StmtKind::Assign { target: LValue::ArrayAccess { array, index }, .. } = &s.kind {
                out.push((array.as_str(), &**index));
            }
            for e in s.own_exprs() {
                out.extend(e.array_reads());
            }
        });
    }
    out
}

impl Program {
    pub fn new(decls: Vec<Decl>, body: Vec<Stmt>) -> Self {
        let mut p = Program { decls, body };
        p.renumber();
        p
    }

    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name == name)
    }

    /// Reassign statement locations in pre-order starting from 1.
    pub fn renumber(&mut self) {
        fn go(block: &mut [Stmt], next: &mut u32) {
            for s in block {
                s.loc = Loc(*next);
                *next += 1;
                match &mut s.kind {
                    StmtKind::Seq(b) => go(b, next),
                    StmtKind::If { then, els, .. } => {
                        go(then, next);
                        if let Some(e) = els {
                            go(e, next);
                        }
                    }
                    StmtKind::For { body, .. } => go(body, next),
                    _ => {}
                }
            }
        }
        let mut next = 1;
        go(&mut self.body, &mut next);
    }

    /// Pre-order walk over every statement in the program.
    pub fn walk<'a>(&'a self, mut f: impl FnMut(&'a Stmt)) {
        for s in &self.body {
            s.walk(&mut f);
        }
    }

    pub fn find(&self, loc: Loc) -> Option<&Stmt> {
        let mut hit = None;
        self.walk(|s| {
            if s.loc == loc {
                hit = Some(s);
            }
        });
        hit
    }

    /// Chain of statements from the outermost enclosing statement down to the
    /// statement at `loc` (inclusive).
    pub fn path_to(&self, loc: Loc) -> Option<Vec<&Stmt>> {
        fn go<'a>(block: &'a [Stmt], loc: Loc, path: &mut Vec<&'a Stmt>) -> bool {
            for s in block {
                path.push(s);
                if s.loc == loc {
                    return true;
                }
                for b in s.children() {
                    if go(b, loc, path) {
                        return true;
                    }
                }
                path.pop();
            }
            false
        }
        let mut path = Vec::new();
        go(&self.body, loc, &mut path).then_some(path)
    }

    /// Locations of every loop, in pre-order.
    pub fn loops(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        self.walk(|s| {
            if s.is_loop() {
                out.push(s);
            }
        });
        out
    }

    /// Locations of every assertion, in pre-order.
    pub fn assertions(&self) -> Vec<Loc> {
        let mut out = Vec::new();
        self.walk(|s| {
            if matches!(s.kind, StmtKind::Assert(_)) {
                out.push(s.loc);
            }
        });
        out
    }
}
