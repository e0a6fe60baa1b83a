//! Rewrites an input program into the loop-free, array-free language.
//!
//! Every array `a` is replaced by a witness pair: `i_a`, fixed once to an
//! arbitrary valid index, and `x_a`, which tracks `a[i_a]`. Each loop is
//! replaced by one representative iteration; everything the loop may modify
//! is overwritten with `nd()` before and after it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::arrays::{collect_arrays_with, lastof, ArrayInfo, NameSupply};
use crate::analysis::dataflow::{live_after_loops, VarSet};
use crate::analysis::loops::{summarize, LoopBound, LoopSummary};
use crate::ast::*;
use crate::error::TransformError;

pub struct TransformContext {
    pub arrays: Vec<ArrayInfo>,
    pub summaries: BTreeMap<Loc, LoopSummary>,
    pub current_loop: Option<Loc>,
    live_after: BTreeMap<Loc, VarSet>,
    names: NameSupply,
    /// Trip variables introduced for loops with `break`/`continue`.
    trip_vars: Vec<Ident>,
}

impl TransformContext {
    pub fn new(p: &Program) -> Self {
        let mut names = NameSupply::for_program(p);
        let arrays = collect_arrays_with(p, &mut names);
        let summaries = summarize(p, &arrays);
        TransformContext {
            arrays,
            summaries,
            current_loop: None,
            live_after: live_after_loops(p),
            names,
            trip_vars: Vec::new(),
        }
    }

    fn array(&self, name: &str) -> &ArrayInfo {
        self.arrays.iter().find(|a| a.name == name).expect("array collected from declarations")
    }

    /// The scalar standing in for `u` when havocking: arrays map to `x_a`.
    fn havoc_target(&self, u: &str) -> Ident {
        match self.arrays.iter().find(|a| a.name == u) {
            Some(a) => a.witness_var.clone(),
            None => String::from(u),
        }
    }
}

/// Result of [`transform_program_with_info`].
#[derive(Clone, Debug)]
pub struct Transformed {
    pub program: Program,
    pub arrays: Vec<ArrayInfo>,
    pub summaries: BTreeMap<Loc, LoopSummary>,
}

fn witness_guard(index: Expr, a: &ArrayInfo) -> Expr {
    Expr::bin(BinOp::Eq, index, Expr::var(a.witness_idx.clone()))
}

pub fn transform_expr(e: &Expr, ctx: &TransformContext) -> Expr {
    match e {
        Expr::BinOp { op, lhs, rhs } => Expr::bin(*op, transform_expr(lhs, ctx), transform_expr(rhs, ctx)),
        Expr::Read(LValue::ArrayAccess { array, index }) => {
            let a = ctx.array(array);
            Expr::ternary(witness_guard(transform_expr(index, ctx), a), Expr::var(a.witness_var.clone()), Expr::Nd)
        }
        Expr::Ternary { cond, then, els } => {
            Expr::ternary(transform_expr(cond, ctx), transform_expr(then, ctx), transform_expr(els, ctx))
        }
        _ => e.clone(),
    }
}

pub fn transform_stmt(s: &Stmt, ctx: &mut TransformContext) -> Vec<Stmt> {
    match &s.kind {
        StmtKind::Assign { target: LValue::ArrayAccess { array, index }, value } => {
            let guard = witness_guard(transform_expr(index, ctx), ctx.array(array));
            vec![Stmt::new(StmtKind::WitnessWrite {
                guard,
                target: ctx.array(array).witness_var.clone(),
                value: transform_expr(value, ctx),
            })]
        }
        StmtKind::Assign { target, value } => {
            vec![Stmt::assign(target.clone(), transform_expr(value, ctx))]
        }
        StmtKind::For { .. } => transform_loop(s, ctx),
        StmtKind::If { cond, then, els } => vec![Stmt::new(StmtKind::If {
            cond: transform_expr(cond, ctx),
            then: transform_block(then, ctx),
            els: els.as_ref().map(|e| transform_block(e, ctx)),
        })],
        StmtKind::Seq(b) => vec![Stmt::new(StmtKind::Seq(transform_block(b, ctx)))],
        StmtKind::Assert(e) => vec![Stmt::new(StmtKind::Assert(transform_expr(e, ctx)))],
        StmtKind::WitnessWrite { guard, target, value } => vec![Stmt::new(StmtKind::WitnessWrite {
            guard: transform_expr(guard, ctx),
            target: target.clone(),
            value: transform_expr(value, ctx),
        })],
        StmtKind::MultiAssign { targets, value } => {
            vec![Stmt::new(StmtKind::MultiAssign { targets: targets.clone(), value: transform_expr(value, ctx) })]
        }
        StmtKind::Break | StmtKind::Continue => vec![Stmt::new(s.kind.clone())],
    }
}

pub fn transform_block(b: &[Stmt], ctx: &mut TransformContext) -> Vec<Stmt> {
    b.iter().flat_map(|s| transform_stmt(s, ctx)).collect()
}

/// Range of iterator values implied by the loop header alone, for upward and
/// downward counting loops with constant init, limit and stride. `None` if
/// the header does not pin it down.
fn header_hull(s: &Stmt) -> Option<(i64, i64)> {
    let StmtKind::For { iterator, init, test, step, body } = &s.kind else { return None };
    if block_assigns(body, iterator) {
        return None;
    }
    let start = init.as_const()?;
    let Expr::BinOp { op, lhs, rhs } = test else { return None };
    if !lhs.is_var(iterator) {
        return None;
    }
    let limit = rhs.as_const()?;
    let Expr::BinOp { op: sop, lhs: slhs, rhs: srhs } = step else { return None };
    if !slhs.is_var(iterator) {
        return None;
    }
    srhs.as_const().filter(|c| *c >= 1)?;
    match (op, sop) {
        (BinOp::Lt | BinOp::Le, BinOp::Add) => {
            let hi = if *op == BinOp::Lt { limit - 1 } else { limit };
            Some((start, start.max(hi)))
        }
        (BinOp::Gt | BinOp::Ge, BinOp::Sub) => {
            let lo = if *op == BinOp::Gt { limit + 1 } else { limit };
            Some((start.min(lo), start))
        }
        _ => None,
    }
}

/// The value assigned to the iterator inside the representative iteration.
fn iterator_choice(s: &Stmt, sum: &LoopSummary, ctx: &TransformContext) -> Expr {
    match sum.bound {
        LoopBound::Known(r) => Expr::nd_range(r.lo, r.hi),
        LoopBound::Empty => Expr::Nd,
        LoopBound::Unknown => {
            let StmtKind::For { body, .. } = &s.kind else { unreachable!() };
            if sum.accessed.len() != 1 || block_assigns(body, &sum.iterator) {
                return Expr::Nd;
            }
            let a = ctx.array(&sum.accessed[0]);
            let last = lastof(a);
            match header_hull(s) {
                Some((lo, hi)) if lo < 0 || hi > last => Expr::Nd,
                _ => Expr::nd_range(0, last),
            }
        }
    }
}

fn havoc(defs: &[Ident], ctx: &TransformContext) -> Vec<Stmt> {
    defs.iter().map(|u| Stmt::assign_var(ctx.havoc_target(u), Expr::Nd)).collect()
}

/// Arrays stored to in `body` whose witnessed element can already hold a
/// value from an earlier iteration when a later one starts: some access is
/// not indexed by the iterator itself, or the body moves the iterator.
fn carried_arrays(body: &[Stmt], iterator: &str) -> Vec<Ident> {
    let mut written: Vec<Ident> = Vec::new();
    for s in body {
        s.walk(&mut |s| {
            if let StmtKind::Assign { target: LValue::ArrayAccess { array, .. }, .. } = &s.kind {
                if !written.contains(array) {
                    written.push(array.clone());
                }
            }
        });
    }
    let moved = block_assigns(body, iterator);
    let accesses = block_array_accesses(body);
    written.retain(|a| moved || accesses.iter().any(|(b, idx)| b == a && !idx.is_var(iterator)));
    written
}

pub fn transform_loop(s: &Stmt, ctx: &mut TransformContext) -> Vec<Stmt> {
    let StmtKind::For { iterator, body, .. } = &s.kind else {
        return transform_stmt(s, ctx);
    };
    let sum = ctx.summaries.get(&s.loc).cloned().expect("every loop is summarized");
    let outer = ctx.current_loop.replace(s.loc);
    let mut body_out = transform_block(body, ctx);
    ctx.current_loop = outer;

    let mut out = Vec::new();
    if sum.full_access {
        out.extend(havoc(&sum.defs, ctx));
        for a in &sum.accessed {
            let idx = ctx.array(a).witness_idx.clone();
            out.push(Stmt::assign_var(iterator.clone(), Expr::var(idx)));
        }
        out.append(&mut body_out);
    } else {
        if let (Some(c), LoopBound::Known(r)) = (sum.stride, sum.bound) {
            if c > 1 && r.lo >= 0 {
                let cond = Expr::bin(
                    BinOp::Eq,
                    Expr::bin(BinOp::Rem, Expr::var(iterator.clone()), Expr::Const(c)),
                    Expr::Const(r.lo % c),
                );
                body_out = vec![Stmt::new(StmtKind::If { cond, then: body_out, els: None })];
            }
        }
        if sum.has_jump {
            let trip = ctx.names.fresh("trip");
            ctx.trip_vars.push(trip.clone());
            body_out = vec![Stmt::new(StmtKind::For {
                iterator: trip.clone(),
                init: Expr::Const(0),
                test: Expr::bin(BinOp::Lt, Expr::var(trip.clone()), Expr::Const(1)),
                step: Expr::bin(BinOp::Add, Expr::var(trip), Expr::Const(1)),
                body: body_out,
            })];
        }
        // The representative iteration may come after earlier iterations
        // stored to the witnessed element.
        let mut entry = sum.defs.clone();
        for a in carried_arrays(body, iterator) {
            if !entry.contains(&a) {
                entry.push(a);
            }
        }
        let mut then = havoc(&entry, ctx);
        then.push(Stmt::assign_var(iterator.clone(), iterator_choice(s, &sum, ctx)));
        then.append(&mut body_out);
        out.push(Stmt::new(StmtKind::If { cond: Expr::nd_range(0, 1), then, els: None }));
    }
    out.extend(havoc(&sum.defs, ctx));

    let iterator_live = ctx.live_after.get(&s.loc).is_some_and(|l| l.contains(iterator));
    if iterator_live {
        let exit = sum.exit_value.map(Expr::Const).unwrap_or(Expr::Nd);
        out.push(Stmt::assign_var(iterator.clone(), exit));
    }
    out
}

fn check_input(p: &Program) -> Result<(), TransformError> {
    for d in &p.decls {
        if !matches!(d.kind, DeclKind::Scalar | DeclKind::Array { .. }) {
            return Err(TransformError::Unsupported {
                loc: None,
                what: format!("witness declaration `{}` in an input program", d.name),
            });
        }
    }
    let mut err = None;
    p.walk(|s| {
        if err.is_some() {
            return;
        }
        let what = match &s.kind {
            StmtKind::WitnessWrite { .. } => Some("guarded witness write"),
            StmtKind::MultiAssign { .. } => Some("chained assignment"),
            _ => s.own_exprs().into_iter().find_map(|e| {
                let mut found = None;
                e.walk(&mut |e| match e {
                    Expr::Ternary { .. } => found = Some("conditional expression"),
                    Expr::Nd | Expr::NdRange { .. } => found = Some("nd()"),
                    _ => {}
                });
                found
            }),
        };
        if let Some(what) = what {
            err = Some(TransformError::Unsupported { loc: Some(s.loc), what: format!("{what} in an input program") });
        }
    });
    err.map_or(Ok(()), Err)
}

pub fn transform_program(p: &Program) -> Result<Program, TransformError> {
    transform_program_with_info(p).map(|t| t.program)
}

pub fn transform_program_with_info(p: &Program) -> Result<Transformed, TransformError> {
    check_input(p)?;
    let mut ctx = TransformContext::new(p);
    let transformed_body = transform_block(&p.body, &mut ctx);

    let mut decls: Vec<Decl> = p.decls.iter().filter(|d| !d.is_array()).cloned().collect();
    for a in &ctx.arrays {
        decls.push(Decl { name: a.witness_var.clone(), kind: DeclKind::WitnessVar { array: a.name.clone() } });
        decls.push(Decl {
            name: a.witness_idx.clone(),
            kind: DeclKind::WitnessIndex { array: a.name.clone(), size: a.size },
        });
    }
    for t in &ctx.trip_vars {
        decls.push(Decl::scalar(t.clone()));
    }

    // Arrays of equal size share one witness index value.
    let mut body = Vec::new();
    let mut done: Vec<u64> = Vec::new();
    for a in &ctx.arrays {
        if done.contains(&a.size) {
            continue;
        }
        done.push(a.size);
        let class: Vec<Ident> = ctx.arrays.iter().filter(|b| b.size == a.size).map(|b| b.witness_idx.clone()).collect();
        let value = Expr::nd_range(0, lastof(a));
        body.push(if class.len() == 1 {
            Stmt::assign_var(class[0].clone(), value)
        } else {
            Stmt::new(StmtKind::MultiAssign { targets: class, value })
        });
    }
    body.extend(transformed_body);

    Ok(Transformed { program: Program::new(decls, body), arrays: ctx.arrays, summaries: ctx.summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::printer::{expr_to_string, print_program};
    use crate::validate::validate_output_grammar;

    fn tr(src: &str) -> Program {
        transform_program(&parse(src).unwrap()).unwrap()
    }

    fn body_text(p: &Program) -> String {
        let text = print_program(p);
        let start = text.find("{\n").unwrap() + 2;
        text[start..text.len() - 2].lines().map(str::trim).collect::<Vec<_>>().join("\n")
    }

    const SQUARES: &str = "int a_p[100000]; int a_q[100000]; int i; int k;
        main() {
            for (i = 0; i < 100000; i++) { k = i; a_p[i] = k; a_q[i] = k * k; }
            for (i = 0; i < 100000; i++) { assert(a_q[i] == a_p[i] * a_p[i]); }
        }";

    #[test]
    fn read_becomes_witness_ternary() {
        let p = parse("int a[4]; int i; int x; main(){ x = a[i] + a[x]; }").unwrap();
        let ctx = TransformContext::new(&p);
        let StmtKind::Assign { value, .. } = &p.body[0].kind else { panic!() };
        assert_eq!(
            expr_to_string(&transform_expr(value, &ctx)),
            "((i == i_a) ? x_a : nd()) + ((x == i_a) ? x_a : nd())"
        );
    }

    #[test]
    fn constants_unchanged() {
        let p = parse("int x; main(){ x = 5; }").unwrap();
        let ctx = TransformContext::new(&p);
        assert_eq!(transform_expr(&Expr::Const(5), &ctx), Expr::Const(5));
    }

    #[test]
    fn motivating_example_shape() {
        let out = tr(SQUARES);
        assert_eq!(
            body_text(&out),
            "i_a_p = i_a_q = nd(0, 99999);
k = nd();
i = i_a_p;
i = i_a_q;
k = i;
(i == i_a_p) ? x_a_p = k : k;
(i == i_a_q) ? x_a_q = k * k : k * k;
k = nd();
i = i_a_p;
i = i_a_q;
assert(((i == i_a_q) ? x_a_q : nd()) == ((i == i_a_p) ? x_a_p : nd()) * ((i == i_a_p) ? x_a_p : nd()));"
        );
        assert!(validate_output_grammar(&out).conformant());
    }

    #[test]
    fn partial_loop_is_guarded() {
        let out = tr("int a[8]; int b[4]; int i; int x; int y;
            main() { for (i = 0; i < 4; i++) { x = input(); y = x; a[i + 4] = x * 2; b[i] = y; } }");
        assert_eq!(
            body_text(&out),
            "i_a = nd(0, 7);
i_b = nd(0, 3);
if (nd(0, 1)) {
x = nd();
y = nd();
x_a = nd();
i = nd(0, 3);
x = input();
y = x;
(i + 4 == i_a) ? x_a = x * 2 : x * 2;
(i == i_b) ? x_b = y : y;
}
x = nd();
y = nd();
x_a = nd();"
        );
    }

    #[test]
    fn live_iterator_gets_exit_value() {
        let out = tr("int a[4]; int i; main(){ for(i=0;i<4;i++){ a[i] = i; } assert(i == 4); }");
        assert!(body_text(&out).ends_with("i = 4;\nassert(i == 4);"), "{}", body_text(&out));
        let out = tr("int i; int x; main(){ for(i=0;i<4;i++){ x = i; if (x == 2) { break; } } assert(i < 4); }");
        assert!(body_text(&out).contains("x = nd();\ni = nd();\nassert"), "{}", body_text(&out));
    }

    #[test]
    fn jump_loop_keeps_single_trip_header() {
        let out = tr("int i; int x; main(){ for(i=0;i<4;i++){ x = x + 1; if (x > 2) { break; } } }");
        let r = validate_output_grammar(&out);
        assert!(r.conformant(), "{:?}", r.violations);
        assert_eq!(r.single_trip_loops, 1);
        assert!(out.decl("trip").is_some());
    }

    #[test]
    fn nested_jump_loops_get_distinct_trip_variables() {
        let out = tr("int i; int j; int x; main(){ for(i=0;i<4;i++){ for(j=0;j<2;j++){ if (x) { break; } } if (x) { continue; } } }");
        let r = validate_output_grammar(&out);
        assert!(r.conformant(), "{:?}", r.violations);
        assert_eq!(r.single_trip_loops, 2);
    }

    #[test]
    fn strided_loop_guards_iterator_phase() {
        let out = tr("int a[9]; int i; main(){ for(i=1;i<9;i+=3){ a[i] = 1; } }");
        assert!(body_text(&out).contains("i = nd(1, 7);\nif (i % 3 == 1) {"), "{}", body_text(&out));
    }

    #[test]
    fn zero_trip_loop_still_havocs() {
        let out = tr("int i; int x; int y; main(){ for(i=0;i<0;i++){ x = y; } }");
        assert_eq!(body_text(&out), "if (nd(0, 1)) {\nx = nd();\ni = nd();\nx = y;\n}\nx = nd();");
    }

    #[test]
    fn unknown_bound_falls_back_to_array_range() {
        let out = tr("int a[4]; int i; int n; main(){ for(i=0;i<n;i++){ a[i] = 1; } }");
        assert!(body_text(&out).contains("i = nd(0, 3);"));
        let out = tr("int i; int n; int x; main(){ for(i=0;i<n;i++){ x = 1; } }");
        assert!(body_text(&out).contains("i = nd();"));
    }

    #[test]
    fn downward_loop_out_of_array_range_is_unconstrained() {
        let out = tr("int a[4]; int i; int x; main(){ for(i=3;i>=0;i--){ x = a[i]; } }");
        assert!(body_text(&out).contains("i = nd(0, 3);"));
        let out = tr("int a[2]; int i; int x; main(){ for(i=3;i>=0;i--){ x = a[0]; } }");
        assert!(body_text(&out).contains("i = nd();"));
    }

    #[test]
    fn no_arrays_no_loops_is_identity_body() {
        let p = parse("int x; int y; main(){ x = 1; if (x == 1) { y = x + 2; } assert(y == 3); }").unwrap();
        let out = transform_program(&p).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn rejects_output_constructs() {
        let p = parse("int x; main(){ x = nd(); }").unwrap();
        assert!(transform_program(&p).is_err());
    }

    #[test]
    fn array_read_across_iterations_is_havocked_on_entry() {
        let out = tr("int a[4]; int b[4]; int i; int j; int y;
            main(){ for(i=0;i<4;i++){ for(j=0;j<4;j++){ y = b[j]; } b[i] = y; } }");
        let text = body_text(&out);
        let entry = text.find("if (nd(0, 1))").unwrap();
        let choice = text.find("i = nd(0, 3);").unwrap();
        assert!(text[entry..choice].contains("x_b = nd();"), "{text}");
    }

    #[test]
    fn own_index_writes_keep_the_witness() {
        let out = tr("int a[8]; int b[4]; int i; int x;
            main(){ for(i=0;i<4;i++){ a[i] = x; b[i] = x; a[i + 4] = x; } }");
        let text = body_text(&out);
        assert!(text.contains("x_a = nd();"));
        assert!(!text.contains("x_b = nd();"), "{text}");
    }
}
