//! Pretty-printer producing text that [`crate::parser::parse`] reads back to
//! the same AST.

use alloc::string::String;
use core::fmt::Write;

use crate::ast::*;

const INDENT: &str = "    ";

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.decls {
        print_decl(&mut out, d);
        out.push('\n');
    }
    if !p.decls.is_empty() {
        out.push('\n');
    }
    out.push_str("main()\n{\n");
    print_block_body(&mut out, &p.body, 1);
    out.push_str("}\n");
    out
}

pub fn print_decl(out: &mut String, d: &Decl) {
    let _ = match &d.kind {
        DeclKind::Scalar => write!(out, "int {};", d.name),
        DeclKind::Array { size } => write!(out, "int {}[{size}];", d.name),
        DeclKind::WitnessVar { array } => write!(out, "int {}; /*@ witness_var({array}) @*/", d.name),
        DeclKind::WitnessIndex { array, size } => {
            write!(out, "int {}; /*@ witness_index({array}, {size}) @*/", d.name)
        }
    };
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn print_block_body(out: &mut String, block: &[Stmt], depth: usize) {
    for s in block {
        print_stmt(out, s, depth);
    }
}

fn print_braced(out: &mut String, block: &[Stmt], depth: usize) {
    out.push_str("{\n");
    print_block_body(out, block, depth + 1);
    indent(out, depth);
    out.push('}');
}

pub fn print_stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Seq(b) => print_braced(out, b, depth),
        StmtKind::If { cond, then, els } => {
            let _ = write!(out, "if ({}) ", expr_to_string(cond));
            print_braced(out, then, depth);
            if let Some(e) = els {
                out.push_str(" else ");
                print_braced(out, e, depth);
            }
        }
        StmtKind::For { iterator, init, test, step, body } => {
            let _ = write!(
                out,
                "for ({iterator} = {}; {}; {}) ",
                expr_to_string(init),
                expr_to_string(test),
                step_to_string(iterator, step)
            );
            print_braced(out, body, depth);
        }
        StmtKind::Assign { target, value } => {
            let _ = write!(out, "{} = {};", lvalue_to_string(target), expr_to_string(value));
        }
        StmtKind::Assert(e) => {
            let _ = write!(out, "assert({});", expr_to_string(e));
        }
        StmtKind::Break => out.push_str("break;"),
        StmtKind::Continue => out.push_str("continue;"),
        StmtKind::WitnessWrite { guard, target, value } => {
            let v = expr_to_string(value);
            let _ = write!(out, "({}) ? {target} = {v} : {v};", expr_to_string(guard));
        }
        StmtKind::MultiAssign { targets, value } => {
            for t in targets {
                let _ = write!(out, "{t} = ");
            }
            let _ = write!(out, "{};", expr_to_string(value));
        }
    }
    out.push('\n');
}

fn step_to_string(iterator: &str, step: &Expr) -> String {
    if let Expr::BinOp { op, lhs, rhs } = step {
        if lhs.is_var(iterator) {
            match (op, rhs.as_const()) {
                (BinOp::Add, Some(1)) => return alloc::format!("{iterator}++"),
                (BinOp::Sub, Some(1)) => return alloc::format!("{iterator}--"),
                (BinOp::Add, _) => return alloc::format!("{iterator} += {}", prec_string(rhs, ASSIGN_PREC)),
                (BinOp::Sub, _) => return alloc::format!("{iterator} -= {}", prec_string(rhs, ASSIGN_PREC)),
                (BinOp::Mul, _) => return alloc::format!("{iterator} *= {}", prec_string(rhs, ASSIGN_PREC)),
                _ => {}
            }
        }
    }
    alloc::format!("{iterator} = {}", expr_to_string(step))
}

pub fn lvalue_to_string(lv: &LValue) -> String {
    match lv {
        LValue::Var(n) => n.clone(),
        LValue::ArrayAccess { array, index } => alloc::format!("{array}[{}]", expr_to_string(index)),
    }
}

// Ternary sits below every binary operator.
const TERNARY_PREC: u8 = 0;
const ASSIGN_PREC: u8 = 0;
const ATOM_PREC: u8 = 10;

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::BinOp { op, .. } => op.precedence(),
        Expr::Ternary { .. } => TERNARY_PREC,
        // `-3` would re-associate under a binary minus; keep it atomic only when non-negative.
        Expr::Const(c) if *c < 0 => 7,
        _ => ATOM_PREC,
    }
}

/// Render `e`, parenthesising it if it binds looser than `min`.
fn prec_string(e: &Expr, min: u8) -> String {
    let s = expr_to_string(e);
    if expr_prec(e) < min {
        alloc::format!("({s})")
    } else {
        s
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    match e {
        Expr::Const(c) => alloc::format!("{c}"),
        Expr::Read(lv) => lvalue_to_string(lv),
        Expr::Nd => "nd()".into(),
        Expr::NdRange { lo, hi } => {
            alloc::format!("nd({}, {})", expr_to_string(lo), expr_to_string(hi))
        }
        Expr::Input(name) => alloc::format!("{name}()"),
        Expr::BinOp { op, lhs, rhs } => {
            let p = op.precedence();
            // Left-associative: the right operand needs strictly tighter binding.
            alloc::format!("{} {} {}", prec_string(lhs, p), op.symbol(), prec_string(rhs, p + 1))
        }
        Expr::Ternary { cond, then, els } => {
            alloc::format!("({}) ? {} : {}", expr_to_string(cond), prec_string(then, 1), prec_string(els, 1))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use alloc::vec;

    #[test]
    fn single_assignment() {
        let p = Program::new(vec![Decl::scalar("x")], vec![Stmt::assign_var("x", Expr::Const(5))]);
        assert_eq!(print_program(&p), "int x;\n\nmain()\n{\n    x = 5;\n}\n");
    }

    #[test]
    fn guarded_write_uses_ternary_form() {
        let s = Stmt::new(StmtKind::WitnessWrite {
            guard: Expr::bin(BinOp::Eq, Expr::var("i"), Expr::var("i_a")),
            target: "x_a".into(),
            value: Expr::var("k"),
        });
        let mut out = String::new();
        print_stmt(&mut out, &s, 0);
        assert_eq!(out, "(i == i_a) ? x_a = k : k;\n");
    }

    #[test]
    fn witness_read_form() {
        let e = Expr::ternary(Expr::bin(BinOp::Eq, Expr::var("i"), Expr::var("i_a")), Expr::var("x_a"), Expr::Nd);
        assert_eq!(expr_to_string(&e), "(i == i_a) ? x_a : nd()");
        let sum = Expr::bin(BinOp::Add, e.clone(), e);
        assert_eq!(expr_to_string(&sum), "((i == i_a) ? x_a : nd()) + ((i == i_a) ? x_a : nd())");
    }

    #[test]
    fn negative_constants_survive_subtraction() {
        let src = "int x; main(){ x = 1 - -2; x = -2 * 3; x = 0 - (1 - 2); }";
        let p = parse(src).unwrap();
        assert_eq!(parse(&print_program(&p)).unwrap(), p);
    }
}
