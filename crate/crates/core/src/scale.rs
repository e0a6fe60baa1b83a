//! Shrinks array sizes so a program can be enumerated exhaustively.
//!
//! The largest array becomes `n` elements and every other array keeps its
//! size relative to it. Integer constants equal to an old size (or to an old
//! size minus one) are rewritten along with it, so loop bounds and offsets
//! such as `a[i + 50000]` follow the arrays they index.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::ast::*;

/// Sizes at or below this are left alone when rewriting constants; small
/// literals are far more likely to be plain values than sizes.
const SMALL: u64 = 8;

fn scaled(size: u64, largest: u64, n: u64) -> u64 {
    ((size as u128 * n as u128) / largest as u128).max(1) as u64
}

pub fn scale_program(p: &Program, n: u64) -> Program {
    let sizes: Vec<u64> = p
        .decls
        .iter()
        .filter_map(|d| match d.kind {
            DeclKind::Array { size } | DeclKind::WitnessIndex { size, .. } => Some(size),
            _ => None,
        })
        .collect();
    let Some(&largest) = sizes.iter().max() else { return p.clone() };
    if largest <= n || n == 0 {
        return p.clone();
    }

    let mut consts: BTreeMap<i64, i64> = BTreeMap::new();
    for &s in &sizes {
        if s > SMALL {
            let new = scaled(s, largest, n) as i64;
            consts.insert(s as i64, new);
            consts.insert(s as i64 - 1, new - 1);
        }
    }

    let mut out = p.clone();
    for d in &mut out.decls {
        match &mut d.kind {
            DeclKind::Array { size } | DeclKind::WitnessIndex { size, .. } => *size = scaled(*size, largest, n),
            _ => {}
        }
    }
    fn expr(e: &mut Expr, consts: &BTreeMap<i64, i64>) {
        match e {
            Expr::Const(c) => {
                if let Some(new) = consts.get(c) {
                    *c = *new;
                }
            }
            Expr::BinOp { lhs, rhs, .. } => {
                expr(lhs, consts);
                expr(rhs, consts);
            }
            Expr::Read(LValue::ArrayAccess { index, .. }) => expr(index, consts),
            Expr::Ternary { cond, then, els } => {
                expr(cond, consts);
                expr(then, consts);
                expr(els, consts);
            }
            Expr::NdRange { lo, hi } => {
                expr(lo, consts);
                expr(hi, consts);
            }
            Expr::Read(LValue::Var(_)) | Expr::Nd | Expr::Input(_) => {}
        }
    }
    fn block(b: &mut [Stmt], consts: &BTreeMap<i64, i64>) {
        for s in b {
            match &mut s.kind {
                StmtKind::Seq(b) => block(b, consts),
                StmtKind::If { cond, then, els } => {
                    expr(cond, consts);
                    block(then, consts);
                    if let Some(e) = els {
                        block(e, consts);
                    }
                }
                StmtKind::For { init, test, step, body, .. } => {
                    expr(init, consts);
                    expr(test, consts);
                    expr(step, consts);
                    block(body, consts);
                }
                StmtKind::Assign { target, value } => {
                    if let LValue::ArrayAccess { index, .. } = target {
                        expr(index, consts);
                    }
                    expr(value, consts);
                }
                StmtKind::Assert(e) => expr(e, consts),
                StmtKind::WitnessWrite { guard, value, .. } => {
                    expr(guard, consts);
                    expr(value, consts);
                }
                StmtKind::MultiAssign { value, .. } => expr(value, consts),
                StmtKind::Break | StmtKind::Continue => {}
            }
        }
    }
    block(&mut out.body, &consts);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::printer::print_program;

    #[test]
    fn proportional_sizes_and_offsets() {
        let p = parse(
            "int a[100000]; int b[50000]; int i; int x;
             main(){ for(i=0;i<50000;i++){ a[i] = x; b[i] = x; a[i+50000] = x*2; } }",
        )
        .unwrap();
        let s = scale_program(&p, 4);
        let text = print_program(&s);
        assert!(text.contains("int a[4];"));
        assert!(text.contains("int b[2];"));
        assert!(text.contains("for (i = 0; i < 2; i++)"));
        assert!(text.contains("a[i + 2] = x * 2;"));
    }

    #[test]
    fn inclusive_bounds_and_witness_ranges() {
        let p = parse("int i_a; /*@ witness_index(a, 100000) @*/ int i; main(){ i_a = nd(0, 99999); i = 3; }").unwrap();
        let text = print_program(&scale_program(&p, 4));
        assert!(text.contains("witness_index(a, 4)"));
        assert!(text.contains("i_a = nd(0, 3);"));
        assert!(text.contains("i = 3;"));
    }

    #[test]
    fn small_programs_unchanged() {
        let p = parse("int a[4]; int i; main(){ for(i=0;i<4;i++){ a[i] = 1; } }").unwrap();
        assert_eq!(scale_program(&p, 4), p);
        assert_eq!(
            scale_program(&parse("int x; main(){ x = 100000; }").unwrap(), 4).body,
            parse("int x; main(){ x = 100000; }").unwrap().body
        );
    }
}
