//! Recursive-descent parser for the C-like input subset.
//!
//! Concrete syntax: global `int` declarations (scalars and 1-D arrays with a
//! constant size) followed by a single `main() { ... }`. Loop and `if` bodies
//! must be braced. Besides the input grammar the parser also accepts every
//! construct the transformer emits, so transformed programs round-trip.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::*;
use crate::error::ParseError;
use crate::lexer::{tokenize, Tok, Token};

/// Functions that read a value from the environment.
pub const INPUT_FUNCTIONS: &[&str] = &["input", "user_input"];

pub fn parse(source: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0, decls: Vec::new(), loop_depth: 0 };
    let program = p.program()?;
    Ok(program)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    decls: Vec<Decl>,
    loop_depth: u32,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.tokens[self.pos];
        (t.line, t.col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (l, c) = self.here();
        Err(ParseError::new(l, c, msg))
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(q) if q == w)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.err(format!("expected `{p}`, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {}", describe(&other))),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        let neg = self.eat_punct("-");
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            other => self.err(format!("expected integer, found {}", describe(&other))),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        while self.is_word("int") || self.is_word("unsigned") {
            // `int main(` starts the function, not a declaration.
            if self.is_word("int") && matches!(self.peek_at(1), Tok::Ident(n) if n == "main") {
                break;
            }
            self.declaration()?;
        }
        if !(self.eat_word("int") || self.eat_word("void")) && !self.is_word("main") {
            return self.err(format!("expected declaration or `main`, found {}", describe(self.peek())));
        }
        if !self.eat_word("main") {
            return self.err("expected `main`");
        }
        self.expect_punct("(")?;
        self.eat_word("void");
        self.expect_punct(")")?;
        let body = self.block()?;
        if *self.peek() != Tok::Eof {
            return self.err(format!("unexpected {} after `main`", describe(self.peek())));
        }
        let mut program = Program { decls: core::mem::take(&mut self.decls), body };
        program.renumber();
        Ok(program)
    }

    fn declaration(&mut self) -> PResult<()> {
        if self.eat_word("unsigned") {
            self.eat_word("int");
        } else {
            self.bump(); // int
        }
        let mut declared = 0;
        loop {
            let (l, c) = self.here();
            let name = self.ident()?;
            if self.decls.iter().any(|d| d.name == name) {
                return Err(ParseError::new(l, c, format!("`{name}` declared twice")));
            }
            let kind = if self.eat_punct("[") {
                let size = self.int()?;
                if size < 1 {
                    return Err(ParseError::new(l, c, format!("array `{name}` must have size >= 1")));
                }
                self.expect_punct("]")?;
                DeclKind::Array { size: size as u64 }
            } else {
                DeclKind::Scalar
            };
            self.decls.push(Decl { name, kind });
            declared += 1;
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")?;
        if let Tok::Annot(text) = self.peek().clone() {
            if declared != 1 {
                return self.err("annotations attach to single declarations");
            }
            let kind = self.witness_annotation(&text)?;
            self.bump();
            let last = self.decls.last_mut().expect("declared above");
            if last.kind != DeclKind::Scalar {
                return self.err("witness annotation on an array declaration");
            }
            last.kind = kind;
        }
        Ok(())
    }

    fn witness_annotation(&self, text: &str) -> PResult<DeclKind> {
        let parsed = (|| {
            let (head, rest) = text.split_once('(')?;
            let args: Vec<&str> = rest.strip_suffix(')')?.split(',').map(str::trim).collect();
            match (head.trim(), args.as_slice()) {
                ("witness_var", [a]) => Some(DeclKind::WitnessVar { array: a.to_string() }),
                ("witness_index", [a, n]) => {
                    Some(DeclKind::WitnessIndex { array: a.to_string(), size: n.parse().ok()? })
                }
                _ => None,
            }
        })();
        match parsed {
            Some(k) => Ok(k),
            None => self.err(format!("unrecognised annotation `{text}`")),
        }
    }

    fn lookup(&self, name: &str, at: (u32, u32)) -> PResult<&Decl> {
        self.decls
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| ParseError::new(at.0, at.1, format!("use of undeclared identifier `{name}`")))
    }

    fn scalar(&self, name: &str, at: (u32, u32)) -> PResult<()> {
        if self.lookup(name, at)?.is_array() {
            return Err(ParseError::new(at.0, at.1, format!("array `{name}` used without an index")));
        }
        Ok(())
    }

    fn array(&self, name: &str, at: (u32, u32)) -> PResult<()> {
        if !self.lookup(name, at)?.is_array() {
            return Err(ParseError::new(at.0, at.1, format!("cannot index scalar `{name}`")));
        }
        Ok(())
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_punct("{")?;
        let mut out = Vec::new();
        while !self.is_punct("}") {
            if *self.peek() == Tok::Eof {
                return self.err("unexpected end of input, expected `}`");
            }
            out.push(self.stmt()?);
        }
        self.bump();
        Ok(out)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let kind = match self.peek().clone() {
            Tok::Punct("{") => StmtKind::Seq(self.block()?),
            Tok::Punct("(") => self.witness_write()?,
            Tok::Ident(w) if w == "if" => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let then = self.block()?;
                let els = if self.eat_word("else") {
                    if self.is_word("if") {
                        Some(alloc::vec![self.stmt()?])
                    } else {
                        Some(self.block()?)
                    }
                } else {
                    None
                };
                StmtKind::If { cond, then, els }
            }
            Tok::Ident(w) if w == "for" => self.for_loop()?,
            Tok::Ident(w) if w == "assert" => {
                self.bump();
                self.expect_punct("(")?;
                let e = self.expr()?;
                self.expect_punct(")")?;
                self.expect_punct(";")?;
                StmtKind::Assert(e)
            }
            Tok::Ident(w) if w == "break" || w == "continue" => {
                if self.loop_depth == 0 {
                    return self.err(format!("`{w}` outside of a loop"));
                }
                self.bump();
                self.expect_punct(";")?;
                if w == "break" {
                    StmtKind::Break
                } else {
                    StmtKind::Continue
                }
            }
            Tok::Ident(_) => {
                let kind = self.assignment()?;
                self.expect_punct(";")?;
                kind
            }
            other => return self.err(format!("expected statement, found {}", describe(&other))),
        };
        Ok(Stmt::new(kind))
    }

    /// `(guard) ? x = value : value;`
    fn witness_write(&mut self) -> PResult<StmtKind> {
        self.expect_punct("(")?;
        let guard = self.expr()?;
        self.expect_punct(")")?;
        self.expect_punct("?")?;
        let at = self.here();
        let target = self.ident()?;
        self.scalar(&target, at)?;
        self.expect_punct("=")?;
        let value = self.expr()?;
        self.expect_punct(":")?;
        let other = self.expr()?;
        if other != value {
            return Err(ParseError::new(at.0, at.1, "both arms of a guarded write must carry the same value"));
        }
        self.expect_punct(";")?;
        Ok(StmtKind::WitnessWrite { guard, target, value })
    }

    fn for_loop(&mut self) -> PResult<StmtKind> {
        self.bump();
        self.expect_punct("(")?;
        let at = self.here();
        let iterator = self.ident()?;
        self.scalar(&iterator, at)?;
        self.expect_punct("=")?;
        let init = self.expr()?;
        self.expect_punct(";")?;
        let test = self.expr()?;
        self.expect_punct(";")?;
        let step = self.step(&iterator)?;
        self.expect_punct(")")?;
        self.loop_depth += 1;
        let body = self.block();
        self.loop_depth -= 1;
        Ok(StmtKind::For { iterator, init, test, step, body: body? })
    }

    fn step(&mut self, iterator: &str) -> PResult<Expr> {
        let it = || Expr::var(iterator);
        if self.eat_punct("++") {
            self.expect_iterator(iterator)?;
            return Ok(Expr::bin(BinOp::Add, it(), Expr::Const(1)));
        }
        if self.eat_punct("--") {
            self.expect_iterator(iterator)?;
            return Ok(Expr::bin(BinOp::Sub, it(), Expr::Const(1)));
        }
        self.expect_iterator(iterator)?;
        match self.bump() {
            Tok::Punct("++") => Ok(Expr::bin(BinOp::Add, it(), Expr::Const(1))),
            Tok::Punct("--") => Ok(Expr::bin(BinOp::Sub, it(), Expr::Const(1))),
            Tok::Punct("+=") => Ok(Expr::bin(BinOp::Add, it(), self.expr()?)),
            Tok::Punct("-=") => Ok(Expr::bin(BinOp::Sub, it(), self.expr()?)),
            Tok::Punct("*=") => Ok(Expr::bin(BinOp::Mul, it(), self.expr()?)),
            Tok::Punct("=") => self.expr(),
            other => self.err(format!("expected loop increment, found {}", describe(&other))),
        }
    }

    fn expect_iterator(&mut self, iterator: &str) -> PResult<()> {
        let at = self.here();
        let name = self.ident()?;
        if name != iterator {
            return Err(ParseError::new(at.0, at.1, format!("loop increment must update the iterator `{iterator}`")));
        }
        Ok(())
    }

    fn assignment(&mut self) -> PResult<StmtKind> {
        let at = self.here();
        let name = self.ident()?;
        if self.eat_punct("[") {
            self.array(&name, at)?;
            let index = self.expr()?;
            self.expect_punct("]")?;
            let target = LValue::index(name, index);
            let value = self.assign_rhs(&target)?;
            return Ok(StmtKind::Assign { target, value });
        }
        self.scalar(&name, at)?;
        // Chained `a = b = ... = e`.
        if self.is_punct("=") && matches!(self.peek_at(1), Tok::Ident(_)) && matches!(self.peek_at(2), Tok::Punct("="))
        {
            let mut targets = alloc::vec![name];
            while self.is_punct("=")
                && matches!(self.peek_at(1), Tok::Ident(_))
                && matches!(self.peek_at(2), Tok::Punct("="))
            {
                self.bump();
                let at = self.here();
                let t = self.ident()?;
                self.scalar(&t, at)?;
                targets.push(t);
            }
            self.expect_punct("=")?;
            let value = self.expr()?;
            return Ok(StmtKind::MultiAssign { targets, value });
        }
        let target = LValue::Var(name);
        let value = self.assign_rhs(&target)?;
        Ok(StmtKind::Assign { target, value })
    }

    fn assign_rhs(&mut self, target: &LValue) -> PResult<Expr> {
        let current = || Expr::Read(target.clone());
        match self.bump() {
            Tok::Punct("=") => self.expr(),
            Tok::Punct("++") => Ok(Expr::bin(BinOp::Add, current(), Expr::Const(1))),
            Tok::Punct("--") => Ok(Expr::bin(BinOp::Sub, current(), Expr::Const(1))),
            Tok::Punct("+=") => Ok(Expr::bin(BinOp::Add, current(), self.expr()?)),
            Tok::Punct("-=") => Ok(Expr::bin(BinOp::Sub, current(), self.expr()?)),
            Tok::Punct("*=") => Ok(Expr::bin(BinOp::Mul, current(), self.expr()?)),
            other => {
                self.pos -= 1;
                self.err(format!("expected assignment, found {}", describe(&other)))
            }
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let cond = self.binary(1)?;
        if self.eat_punct("?") {
            let then = self.expr()?;
            self.expect_punct(":")?;
            let els = self.expr()?;
            return Ok(Expr::ternary(cond, then, els));
        }
        Ok(cond)
    }

    fn binop_here(&self) -> Option<BinOp> {
        let Tok::Punct(p) = self.peek() else { return None };
        BinOp::ALL.into_iter().find(|op| op.symbol() == *p)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop_here() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_punct("-") {
            if let Tok::Int(v) = *self.peek() {
                self.bump();
                return Ok(Expr::Const(-v));
            }
            let e = self.unary()?;
            return Ok(Expr::bin(BinOp::Sub, Expr::Const(0), e));
        }
        if self.eat_punct("!") {
            let e = self.unary()?;
            return Ok(Expr::bin(BinOp::Eq, e, Expr::Const(0)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(name) if !is_keyword(&name) => {
                self.bump();
                if self.eat_punct("(") {
                    return self.call(name, at);
                }
                if self.eat_punct("[") {
                    self.array(&name, at)?;
                    let index = self.expr()?;
                    self.expect_punct("]")?;
                    return Ok(Expr::index(name, index));
                }
                self.scalar(&name, at)?;
                Ok(Expr::var(name))
            }
            other => self.err(format!("expected expression, found {}", describe(&other))),
        }
    }

    fn call(&mut self, name: String, at: (u32, u32)) -> PResult<Expr> {
        if name == "nd" {
            if self.eat_punct(")") {
                return Ok(Expr::Nd);
            }
            let lo = self.expr()?;
            self.expect_punct(",")?;
            let hi = self.expr()?;
            self.expect_punct(")")?;
            return Ok(Expr::NdRange { lo: Box::new(lo), hi: Box::new(hi) });
        }
        if INPUT_FUNCTIONS.contains(&name.as_str()) {
            self.expect_punct(")")?;
            return Ok(Expr::Input(name));
        }
        Err(ParseError::new(at.0, at.1, format!("call to unknown function `{name}`")))
    }
}

const KEYWORDS: &[&str] = &["int", "unsigned", "void", "if", "else", "for", "assert", "break", "continue", "main"];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(v) => format!("`{v}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Annot(_) => "annotation".to_string(),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn fill_loop() {
        let p = parse("int a[4]; int i; main(){ for(i=0;i<4;i++){ a[i]=i; } }").unwrap();
        assert_eq!(p.decls, vec![Decl::array("a", 4), Decl::scalar("i")]);
        assert_eq!(p.body.len(), 1);
        let StmtKind::For { iterator, init, test, step, body } = &p.body[0].kind else {
            panic!("expected a loop");
        };
        assert_eq!(iterator, "i");
        assert_eq!(*init, Expr::Const(0));
        assert_eq!(*test, Expr::bin(BinOp::Lt, Expr::var("i"), Expr::Const(4)));
        assert_eq!(*step, Expr::bin(BinOp::Add, Expr::var("i"), Expr::Const(1)));
        assert_eq!(
            body[0].kind,
            StmtKind::Assign { target: LValue::index("a", Expr::var("i")), value: Expr::var("i") }
        );
    }

    #[test]
    fn smallest_program() {
        let p = parse("int x; main(){ x = 5; }").unwrap();
        assert_eq!(p.body, vec![Stmt { loc: Loc(1), ..Stmt::assign_var("x", Expr::Const(5)) }]);
    }

    #[test]
    fn locations_follow_source_order() {
        let p = parse("int x; main(){ if (x) { x = 1; } else { x = 2; } x = 3; }").unwrap();
        let mut locs = Vec::new();
        p.walk(|s| locs.push(s.loc.0));
        assert_eq!(locs, vec![1, 2, 3, 4]);
    }

    #[test]
    fn precedence_and_associativity() {
        let p = parse("int x; main(){ x = 1 - 2 - 3 * 4 + (5 < 6 && 7 == 7); }").unwrap();
        let StmtKind::Assign { value, .. } = &p.body[0].kind else { panic!() };
        let sub = Expr::bin(
            BinOp::Sub,
            Expr::bin(BinOp::Sub, Expr::Const(1), Expr::Const(2)),
            Expr::bin(BinOp::Mul, Expr::Const(3), Expr::Const(4)),
        );
        let and = Expr::bin(
            BinOp::And,
            Expr::bin(BinOp::Lt, Expr::Const(5), Expr::Const(6)),
            Expr::bin(BinOp::Eq, Expr::Const(7), Expr::Const(7)),
        );
        assert_eq!(*value, Expr::bin(BinOp::Add, sub, and));
    }

    #[test]
    fn sugar_desugars_to_assignments() {
        let p = parse("int x; int i; main(){ x++; x += 2; for (i = 0; i < 9; i += 3) { } }").unwrap();
        assert_eq!(
            p.body[0].kind,
            StmtKind::Assign { target: LValue::var("x"), value: Expr::bin(BinOp::Add, Expr::var("x"), Expr::Const(1)) }
        );
        let StmtKind::For { step, .. } = &p.body[2].kind else { panic!() };
        assert_eq!(*step, Expr::bin(BinOp::Add, Expr::var("i"), Expr::Const(3)));
    }

    #[test]
    fn undeclared_identifier() {
        let err = parse("int x; main(){ y = 1; }").unwrap_err();
        assert_eq!((err.line, err.col), (1, 16));
        assert!(err.message.contains("undeclared identifier `y`"), "{err}");
    }

    #[test]
    fn indexing_a_scalar() {
        let err = parse("int x; main(){ x[0] = 1; }").unwrap_err();
        assert!(err.message.contains("cannot index scalar `x`"), "{err}");
    }

    #[test]
    fn array_without_index() {
        let err = parse("int a[2]; int x; main(){ x = a; }").unwrap_err();
        assert!(err.message.contains("without an index"), "{err}");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse("int x;\nmain(){\n  x = ;\n}").unwrap_err();
        assert_eq!((err.line, err.col), (3, 7));
    }

    #[test]
    fn braces_are_mandatory() {
        assert!(parse("int x; main(){ if (x) x = 1; }").is_err());
    }

    #[test]
    fn break_outside_loop() {
        assert!(parse("int x; main(){ break; }").is_err());
    }

    #[test]
    fn zero_sized_array() {
        assert!(parse("int a[0]; main(){ }").is_err());
    }

    #[test]
    fn output_constructs() {
        let src = "int x_a; /*@ witness_var(a) @*/\nint i_a; /*@ witness_index(a, 4) @*/\nint i_b; /*@ witness_index(b, 4) @*/\nint i; int k;\n\
                   main(){ i_a = i_b = nd(0, 3); (i == i_a) ? x_a = k : k; k = (i == i_a) ? x_a : nd(); }";
        let p = parse(src).unwrap();
        assert_eq!(p.decls[1].kind, DeclKind::WitnessIndex { array: "a".into(), size: 4 });
        assert!(matches!(p.body[0].kind, StmtKind::MultiAssign { ref targets, .. } if targets.len() == 2));
        assert!(matches!(p.body[1].kind, StmtKind::WitnessWrite { .. }));
    }

    #[test]
    fn mismatched_guarded_write() {
        let src = "int x_a; int i; int k; main(){ (i == 0) ? x_a = k : 1; }";
        assert!(parse(src).is_err());
    }

    #[test]
    fn unsigned_and_int_main() {
        let p = parse("unsigned int x, y; int main(void){ x = user_input(); }").unwrap();
        assert_eq!(p.decls.len(), 2);
        let StmtKind::Assign { value, .. } = &p.body[0].kind else { panic!() };
        assert_eq!(*value, Expr::Input("user_input".into()));
    }
}
