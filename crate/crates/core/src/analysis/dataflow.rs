//! Structured dataflow over the AST: liveness, reaching definitions and
//! must-definition. Loops are solved by iterating to a fixpoint; `break` and
//! `continue` route state to the loop exit and the step respectively.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::*;

pub type VarSet = BTreeSet<Ident>;

/// Scalars and arrays an expression reads.
pub fn expr_uses(e: &Expr) -> VarSet {
    let mut out = VarSet::new();
    e.walk(&mut |e| {
        if let Expr::Read(lv) = e {
            out.insert(String::from(lv.base()));
        }
    });
    out
}

// ---------------------------------------------------------------------------
// Liveness

struct LiveJumps {
    brk: VarSet,
    cont: VarSet,
}

struct Liveness {
    live_out: BTreeMap<Loc, VarSet>,
    live_in: BTreeMap<Loc, VarSet>,
}

impl Liveness {
    fn block(&mut self, b: &[Stmt], out: VarSet, j: Option<&LiveJumps>) -> VarSet {
        b.iter().rev().fold(out, |live, s| self.stmt(s, live, j))
    }

    fn stmt(&mut self, s: &Stmt, out: VarSet, j: Option<&LiveJumps>) -> VarSet {
        let live = self.transfer(s, out, j);
        self.live_in.entry(s.loc).or_default().extend(live.iter().cloned());
        live
    }

    fn transfer(&mut self, s: &Stmt, out: VarSet, j: Option<&LiveJumps>) -> VarSet {
        match &s.kind {
            StmtKind::Assign { target: LValue::Var(x), value } => {
                let mut live = out;
                live.remove(x);
                live.extend(expr_uses(value));
                live
            }
            StmtKind::MultiAssign { targets, value } => {
                let mut live = out;
                for t in targets {
                    live.remove(t);
                }
                live.extend(expr_uses(value));
                live
            }
            StmtKind::Assign { .. } | StmtKind::Assert(_) | StmtKind::WitnessWrite { .. } => {
                // Array stores and guarded writes are weak: nothing is killed.
                let mut live = out;
                for e in s.own_exprs() {
                    live.extend(expr_uses(e));
                }
                live
            }
            StmtKind::Seq(b) => self.block(b, out, j),
            StmtKind::If { cond, then, els } => {
                let mut live = self.block(then, out.clone(), j);
                match els {
                    Some(e) => live.extend(self.block(e, out, j)),
                    None => live.extend(out),
                }
                live.extend(expr_uses(cond));
                live
            }
            StmtKind::Break => j.map(|j| j.brk.clone()).unwrap_or_default(),
            StmtKind::Continue => j.map(|j| j.cont.clone()).unwrap_or_default(),
            StmtKind::For { iterator, init, test, step, body } => {
                let mut head = VarSet::new();
                loop {
                    let mut before_step = head.clone();
                    before_step.remove(iterator);
                    before_step.extend(expr_uses(step));
                    let jumps = LiveJumps { brk: out.clone(), cont: before_step.clone() };
                    let body_in = self.block(body, before_step, Some(&jumps));
                    let mut next = expr_uses(test);
                    next.extend(out.iter().cloned());
                    next.extend(body_in);
                    if next == head {
                        break;
                    }
                    head = next;
                }
                self.live_out.entry(s.loc).or_default().extend(out);
                let mut live = head;
                live.remove(iterator);
                live.extend(expr_uses(init));
                live
            }
        }
    }
}

/// Variables live on exit from each loop, keyed by loop location.
pub fn live_after_loops(p: &Program) -> BTreeMap<Loc, VarSet> {
    liveness(p).live_out
}

/// Variables live on entry to each statement.
pub fn live_before_statements(p: &Program) -> BTreeMap<Loc, VarSet> {
    liveness(p).live_in
}

fn liveness(p: &Program) -> Liveness {
    let mut l = Liveness { live_out: BTreeMap::new(), live_in: BTreeMap::new() };
    l.block(&p.body, VarSet::new(), None);
    l
}

// ---------------------------------------------------------------------------
// Reaching definitions

/// A definition site: the statement at `loc` (an assignment or a loop header
/// for its iterator) may set `var`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Def {
    pub loc: Loc,
    pub var: Ident,
}

type DefSet = BTreeSet<Def>;

#[derive(Clone, Debug, Default)]
pub struct ReachingDefs {
    /// Definitions reaching the entry of each statement. For a loop this also
    /// covers the header test and step.
    pub at: BTreeMap<Loc, DefSet>,
}

impl ReachingDefs {
    /// Locations of definitions of `var` that may reach the statement at `loc`.
    pub fn reaching(&self, loc: Loc, var: &str) -> Vec<Loc> {
        self.at.get(&loc).map(|ds| ds.iter().filter(|d| d.var == var).map(|d| d.loc).collect()).unwrap_or_default()
    }
}

#[derive(Default)]
struct RdJumps {
    brk: DefSet,
    cont: DefSet,
}

fn kill_gen(mut st: DefSet, var: &str, loc: Loc) -> DefSet {
    st.retain(|d| d.var != var);
    st.insert(Def { loc, var: String::from(var) });
    st
}

struct Reaching {
    rd: ReachingDefs,
}

impl Reaching {
    fn block(&mut self, b: &[Stmt], st: DefSet, j: &mut Option<&mut RdJumps>) -> DefSet {
        b.iter().fold(st, |st, s| self.stmt(s, st, j))
    }

    fn stmt(&mut self, s: &Stmt, st: DefSet, j: &mut Option<&mut RdJumps>) -> DefSet {
        self.rd.at.entry(s.loc).or_default().extend(st.iter().cloned());
        match &s.kind {
            StmtKind::Assign { target: LValue::Var(x), .. } => kill_gen(st, x, s.loc),
            StmtKind::MultiAssign { targets, .. } => targets.iter().fold(st, |st, t| kill_gen(st, t, s.loc)),
            StmtKind::Assign { target: LValue::ArrayAccess { array: v, .. }, .. }
            | StmtKind::WitnessWrite { target: v, .. } => {
                let mut st = st;
                st.insert(Def { loc: s.loc, var: v.clone() });
                st
            }
            StmtKind::Assert(_) => st,
            StmtKind::Seq(b) => self.block(b, st, j),
            StmtKind::If { then, els, .. } => {
                let mut out = self.block(then, st.clone(), j);
                match els {
                    Some(e) => out.extend(self.block(e, st, j)),
                    None => out.extend(st),
                }
                out
            }
            StmtKind::Break => {
                if let Some(j) = j {
                    j.brk.extend(st);
                }
                DefSet::new()
            }
            StmtKind::Continue => {
                if let Some(j) = j {
                    j.cont.extend(st);
                }
                DefSet::new()
            }
            StmtKind::For { iterator, body, .. } => {
                let after_init = kill_gen(st, iterator, s.loc);
                let mut head = after_init.clone();
                let brk = loop {
                    let mut jumps = RdJumps::default();
                    let body_out = self.block(body, head.clone(), &mut Some(&mut jumps));
                    let mut step_in = body_out;
                    step_in.extend(jumps.cont.iter().cloned());
                    let mut next = after_init.clone();
                    next.extend(kill_gen(step_in, iterator, s.loc));
                    if next == head {
                        break jumps.brk;
                    }
                    head = next;
                };
                self.rd.at.entry(s.loc).or_default().extend(head.iter().cloned());
                let mut out = head;
                out.extend(brk);
                out
            }
        }
    }
}

pub fn reaching_definitions(p: &Program) -> ReachingDefs {
    let mut r = Reaching { rd: ReachingDefs::default() };
    r.block(&p.body, DefSet::new(), &mut None);
    r.rd
}

// ---------------------------------------------------------------------------
// Must-definition

/// Scalars assigned on every path from the start of `block` to the statement
/// at `target`. `None` if `target` is not inside `block`.
pub fn must_defined_before(block: &[Stmt], target: Loc) -> Option<VarSet> {
    // `None` state: unreachable, i.e. the top element of the must lattice.
    fn meet(a: Option<VarSet>, b: Option<VarSet>) -> Option<VarSet> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => Some(a.intersection(&b).cloned().collect()),
        }
    }

    fn go(b: &[Stmt], mut st: Option<VarSet>, target: Loc, found: &mut Option<VarSet>) -> Option<VarSet> {
        for s in b {
            if s.loc == target {
                *found = Some(st.clone().unwrap_or_default());
            }
            st = match &s.kind {
                StmtKind::Assign { target: LValue::Var(x), .. } => st.map(|mut v| {
                    v.insert(x.clone());
                    v
                }),
                StmtKind::MultiAssign { targets, .. } => st.map(|mut v| {
                    v.extend(targets.iter().cloned());
                    v
                }),
                StmtKind::Seq(inner) => go(inner, st, target, found),
                StmtKind::If { then, els, .. } => {
                    let t = go(then, st.clone(), target, found);
                    let e = match els {
                        Some(e) => go(e, st, target, found),
                        None => st,
                    };
                    meet(t, e)
                }
                StmtKind::Break | StmtKind::Continue => None,
                StmtKind::For { iterator, body, .. } => {
                    // Definitions only accumulate, so the loop head state is
                    // the state right after the initialization.
                    let head = st.map(|mut v| {
                        v.insert(iterator.clone());
                        v
                    });
                    go(body, head.clone(), target, found);
                    head
                }
                _ => st,
            };
        }
        st
    }

    let mut found = None;
    go(block, Some(VarSet::new()), target, &mut found);
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn set(xs: &[&str]) -> VarSet {
        xs.iter().map(|s| String::from(*s)).collect()
    }

    #[test]
    fn iterator_dead_after_loop_when_reassigned() {
        let p = parse("int i; int x; main(){ for(i=0;i<4;i++){ x = i; } i = 0; assert(x == i); }").unwrap();
        let live = live_after_loops(&p);
        assert_eq!(live[&Loc(1)], set(&["x"]));
    }

    #[test]
    fn iterator_live_after_loop_when_read() {
        let p = parse("int i; int x; main(){ for(i=0;i<4;i++){ x = i; } assert(i == 4); }").unwrap();
        assert_eq!(live_after_loops(&p)[&Loc(1)], set(&["i"]));
    }

    #[test]
    fn inner_loop_live_out_includes_outer_header_uses() {
        let p = parse("int i; int j; int n; main(){ for(i=0;i<n;i++){ for(j=0;j<2;j++){ } } }").unwrap();
        let live = live_after_loops(&p);
        assert!(live[&Loc(2)].contains("i"));
        assert!(live[&Loc(2)].contains("n"));
    }

    #[test]
    fn live_in_per_statement() {
        let p = parse("int x; int y; main(){ x = 1; y = x; assert(y == 1); }").unwrap();
        let live = live_before_statements(&p);
        assert_eq!(live[&Loc(1)], set(&[]));
        assert_eq!(live[&Loc(2)], set(&["x"]));
        assert_eq!(live[&Loc(3)], set(&["y"]));
    }

    #[test]
    fn arrays_are_live_through_stores() {
        let p = parse("int a[4]; int i; main(){ for(i=0;i<4;i++){ a[i] = 1; } assert(a[0] == 1); }").unwrap();
        assert_eq!(live_after_loops(&p)[&Loc(1)], set(&["a"]));
    }

    #[test]
    fn reaching_definitions_through_loop() {
        // L1: k = 0; L2: for; L3: k = i; L4: assert
        let p = parse("int i; int k; main(){ k = 0; for(i=0;i<4;i++){ k = i; } assert(k >= 0); }").unwrap();
        let rd = reaching_definitions(&p);
        assert_eq!(rd.reaching(Loc(4), "k"), alloc::vec![Loc(1), Loc(3)]);
        assert_eq!(rd.reaching(Loc(3), "i"), alloc::vec![Loc(2)]);
    }

    #[test]
    fn strong_update_kills() {
        let p = parse("int x; main(){ x = 1; x = 2; assert(x == 2); }").unwrap();
        assert_eq!(reaching_definitions(&p).reaching(Loc(3), "x"), alloc::vec![Loc(2)]);
    }

    #[test]
    fn array_store_is_weak() {
        let p = parse("int a[2]; main(){ a[0] = 1; a[1] = 2; assert(a[0] == 1); }").unwrap();
        assert_eq!(reaching_definitions(&p).reaching(Loc(3), "a"), alloc::vec![Loc(1), Loc(2)]);
    }

    #[test]
    fn break_carries_definitions_to_exit() {
        let p = parse(
            "int i; int x; main(){ for(i=0;i<4;i++){ x = 1; if (i == 2) { x = 2; break; } x = 3; } assert(x > 0); }",
        )
        .unwrap();
        // L1 for, L2 x=1, L3 if, L4 x=2, L5 break, L6 x=3, L7 assert
        assert_eq!(reaching_definitions(&p).reaching(Loc(7), "x"), alloc::vec![Loc(4), Loc(6)]);
    }

    #[test]
    fn continue_reaches_next_iteration() {
        let p = parse("int i; int x; main(){ for(i=0;i<4;i++){ if (x == 1) { continue; } x = 1; } }").unwrap();
        // L1 for, L2 if, L3 continue, L4 x = 1
        assert_eq!(reaching_definitions(&p).reaching(Loc(2), "x"), alloc::vec![Loc(4)]);
    }

    #[test]
    fn must_def_on_both_branches_only() {
        let p = parse("int x; int y; main(){ if (y) { x = 1; } else { x = 2; y = 1; } assert(x == y); }").unwrap();
        assert_eq!(must_defined_before(&p.body, Loc(5)), Some(set(&["x"])));
    }

    #[test]
    fn must_def_ignores_loop_body() {
        let p = parse("int i; int x; main(){ for(i=0;i<4;i++){ x = 1; } assert(x == 1); }").unwrap();
        assert_eq!(must_defined_before(&p.body, Loc(3)), Some(set(&["i"])));
    }

    #[test]
    fn must_def_missing_target() {
        let p = parse("int x; main(){ x = 1; }").unwrap();
        assert_eq!(must_defined_before(&p.body, Loc(9)), None);
    }
}
