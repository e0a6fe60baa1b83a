//! Per-loop facts consumed by the transformer and the precision classifier.
//!
//! The directions of approximation differ: `full_array_access` may only err
//! towards `false`, `loop_defs` may only err towards a larger set.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::arrays::ArrayInfo;
use crate::ast::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexRange {
    pub lo: i64,
    pub hi: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopBound {
    /// Every value the iterator takes inside the body lies in this range.
    Known(IndexRange),
    /// The body never executes.
    Empty,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopSummary {
    pub loop_loc: Loc,
    pub iterator: Ident,
    pub full_access: bool,
    /// Variables and arrays the loop may modify, in first-occurrence order.
    pub defs: Vec<Ident>,
    pub bound: LoopBound,
    /// Arrays accessed anywhere in the body, in declaration order.
    pub accessed: Vec<Ident>,
    /// Constant stride `c` for headers of the form `i = i + c`, `c >= 1`.
    pub stride: Option<i64>,
    pub has_jump: bool,
    /// Exit value of the iterator when the header and body make it computable.
    pub exit_value: Option<i64>,
}

struct Header<'a> {
    iterator: &'a str,
    init: &'a Expr,
    test: &'a Expr,
    step: &'a Expr,
    body: &'a [Stmt],
}

fn header(s: &Stmt) -> Option<Header<'_>> {
    match &s.kind {
        StmtKind::For { iterator, init, test, step, body } => Some(Header { iterator, init, test, step, body }),
        _ => None,
    }
}

/// `i + c` with constant `c`.
fn step_offset(iterator: &str, step: &Expr) -> Option<i64> {
    match step {
        Expr::BinOp { op: BinOp::Add, lhs, rhs } if lhs.is_var(iterator) => rhs.as_const(),
        Expr::BinOp { op: BinOp::Sub, lhs, rhs } if lhs.is_var(iterator) => rhs.as_const().map(|c| -c),
        _ => None,
    }
}

/// Exclusive upper limit from `i < c` or `i <= c`.
fn upper_limit(iterator: &str, test: &Expr) -> Option<i64> {
    match test {
        Expr::BinOp { op: BinOp::Lt, lhs, rhs } if lhs.is_var(iterator) => rhs.as_const(),
        Expr::BinOp { op: BinOp::Le, lhs, rhs } if lhs.is_var(iterator) => rhs.as_const().map(|c| c + 1),
        _ => None,
    }
}

/// The iterator visits each value at most once.
fn strictly_monotone(h: &Header<'_>) -> bool {
    matches!(step_offset(h.iterator, h.step), Some(c) if c != 0) && !block_assigns(h.body, h.iterator)
}

fn stride(h: &Header<'_>) -> Option<i64> {
    match step_offset(h.iterator, h.step) {
        Some(c) if c >= 1 && !block_assigns(h.body, h.iterator) => Some(c),
        _ => None,
    }
}

/// Range of iterator values seen by the body, for `for (i = c1; i < c2; i += c3)`.
pub fn loop_bound(s: &Stmt) -> LoopBound {
    let Some(h) = header(s) else { return LoopBound::Unknown };
    let (Some(start), Some(limit), Some(step)) = (h.init.as_const(), upper_limit(h.iterator, h.test), stride(&h))
    else {
        return LoopBound::Unknown;
    };
    if start >= limit {
        return LoopBound::Empty;
    }
    let last = start + (limit - 1 - start) / step * step;
    LoopBound::Known(IndexRange { lo: start, hi: last })
}

fn exit_value(s: &Stmt) -> Option<i64> {
    let h = header(s)?;
    if block_has_jump(h.body) {
        return None;
    }
    match loop_bound(s) {
        LoopBound::Known(r) => Some(r.hi + stride(&h)?),
        LoopBound::Empty => h.init.as_const(),
        LoopBound::Unknown => None,
    }
}

/// Top-level statements of a block with nested `{ }` blocks flattened; these
/// run exactly once per iteration unless a jump intervenes.
fn flatten_unconditional(block: &[Stmt]) -> Vec<&Stmt> {
    let mut out = Vec::new();
    for s in block {
        match &s.kind {
            StmtKind::Seq(b) => out.extend(flatten_unconditional(b)),
            _ => out.push(s),
        }
    }
    out
}

fn reads_scalar(s: &Stmt, name: &str) -> bool {
    let mut hit = false;
    s.walk(&mut |s| {
        for e in s.own_exprs() {
            hit |= e.scalar_reads().contains(&name);
        }
    });
    hit
}

/// Scalar `name` is only ever assigned constants, every such assignment runs on
/// every iteration, and no read precedes the first one. Its value is then the
/// same at the end of every iteration.
fn constant_per_iteration(h: &Header<'_>, name: &str) -> bool {
    if block_has_jump(h.body) || h.test.scalar_reads().contains(&name) || h.step.scalar_reads().contains(&name) {
        return false;
    }
    let top = flatten_unconditional(h.body);
    let mut seen_def = false;
    for s in &top {
        match &s.kind {
            StmtKind::Assign { target: LValue::Var(x), value } if x == name => {
                if value.as_const().is_none() {
                    return false;
                }
                seen_def = true;
            }
            _ => {
                if block_assigns(core::slice::from_ref(*s), name) {
                    return false;
                }
                if !seen_def && reads_scalar(s, name) {
                    return false;
                }
            }
        }
    }
    seen_def
}

/// Over-approximation of what the loop body modifies, excluding the iterator.
pub fn loop_defs(s: &Stmt) -> Vec<Ident> {
    let Some(h) = header(s) else { return Vec::new() };
    let monotone = strictly_monotone(&h);
    let mut defs: Vec<Ident> = Vec::new();
    let push = |n: &str, defs: &mut Vec<Ident>| {
        if n != h.iterator && !defs.iter().any(|d| d == n) {
            defs.push(String::from(n));
        }
    };
    for st in h.body {
        st.walk(&mut |st| match &st.kind {
            StmtKind::Assign { target: LValue::Var(x), .. } => push(x, &mut defs),
            StmtKind::Assign { target: LValue::ArrayAccess { array, index }, .. } => {
                if !monotone || !index.is_var(h.iterator) {
                    push(array, &mut defs);
                }
            }
            StmtKind::For { iterator, .. } => push(iterator, &mut defs),
            StmtKind::WitnessWrite { target, .. } => push(target, &mut defs),
            StmtKind::MultiAssign { targets, .. } => {
                for t in targets {
                    push(t, &mut defs);
                }
            }
            _ => {}
        });
    }
    defs.retain(|d| !constant_per_iteration(&h, d));
    defs
}

/// Conservative test that the loop touches every index of every array it
/// accesses: `for (i = 0; i < K; i++)` over arrays of size exactly `K`, every
/// access indexed by `i`, no jumps, no iterator updates in the body, and no
/// nested loop touching arrays.
pub fn full_array_access(s: &Stmt, arrays: &[ArrayInfo]) -> bool {
    let Some(h) = header(s) else { return false };
    if h.init.as_const() != Some(0) || step_offset(h.iterator, h.step) != Some(1) {
        return false;
    }
    let Some(k) = upper_limit(h.iterator, h.test) else { return false };
    if block_has_jump(h.body) || block_assigns(h.body, h.iterator) {
        return false;
    }
    let header_touches = [h.init, h.test, h.step].iter().any(|e| !e.array_reads().is_empty());
    if header_touches {
        return false;
    }
    let accesses = block_array_accesses(h.body);
    if accesses.is_empty() {
        return false;
    }
    for (array, index) in &accesses {
        let Some(info) = arrays.iter().find(|a| a.name == *array) else { return false };
        if info.size as i64 != k || !index.is_var(h.iterator) {
            return false;
        }
    }
    let mut nested_touch = false;
    for st in h.body {
        st.walk(&mut |st| {
            if let StmtKind::For { body, .. } = &st.kind {
                nested_touch |= !block_array_accesses(body).is_empty();
            }
        });
    }
    !nested_touch
}

pub fn summarize_loop(s: &Stmt, arrays: &[ArrayInfo]) -> Option<LoopSummary> {
    let h = header(s)?;
    let touched: Vec<&str> = block_array_accesses(h.body).into_iter().map(|(a, _)| a).collect();
    let accessed = arrays.iter().filter(|a| touched.contains(&a.name.as_str())).map(|a| a.name.clone()).collect();
    Some(LoopSummary {
        loop_loc: s.loc,
        iterator: String::from(h.iterator),
        full_access: full_array_access(s, arrays),
        defs: loop_defs(s),
        bound: loop_bound(s),
        accessed,
        stride: stride(&h),
        has_jump: block_has_jump(h.body),
        exit_value: exit_value(s),
    })
}

/// Summaries for every loop in the program, keyed by location.
pub fn summarize(p: &Program, arrays: &[ArrayInfo]) -> BTreeMap<Loc, LoopSummary> {
    let mut out = BTreeMap::new();
    p.walk(|s| {
        if let Some(sum) = summarize_loop(s, arrays) {
            out.insert(s.loc, sum);
        }
    });
    out
}
