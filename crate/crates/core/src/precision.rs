//! Decides whether the transformation is exact for an assertion: whether no
//! `nd()` introduced by the transformation can influence its outcome.
//!
//! The statements an assertion depends on are collected by a backward slice
//! over reaching definitions and enclosing conditions. Each value flowing
//! into the slice is then checked against the places the transformation
//! introduces nondeterminism: loop havocs, array reads away from the witness
//! index, and the guard of loops that are not visited completely.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::analysis::arrays::collect_arrays;
use crate::analysis::dataflow::{must_defined_before, reaching_definitions, ReachingDefs};
use crate::analysis::loops::{summarize, LoopSummary};
use crate::ast::*;
use crate::error::PrecisionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// Every loop involved visits all indices of the arrays it touches.
    L1,
    /// Array reads in the assertion loop use its iterator as index.
    A2,
    /// No involved loop may overwrite an element it does not own.
    A3,
    /// Scalars read in the assertion loop carry no havocked value.
    S4,
    /// Array reads feeding the assertion from other loops use their iterator.
    D5,
    /// Scalars feeding the assertion from other loops carry no havocked value.
    D6,
}

impl Rule {
    pub const ALL: [Rule; 6] = [Rule::L1, Rule::A2, Rule::A3, Rule::S4, Rule::D5, Rule::D6];

    pub fn id(self) -> &'static str {
        match self {
            Rule::L1 => "l1",
            Rule::A2 => "a2",
            Rule::A3 => "a3",
            Rule::S4 => "s4",
            Rule::D5 => "d5",
            Rule::D6 => "d6",
        }
    }

    pub fn from_id(id: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.id() == id)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RuleViolation {
    pub rule: Rule,
    pub location: Loc,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecisionVerdict {
    pub precise: bool,
    pub violated_rules: Vec<RuleViolation>,
}

/// An array read the assertion depends on.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ArrayRead {
    pub loc: Loc,
    pub array: Ident,
    pub index: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependenceClosure {
    /// The innermost loop around the assertion.
    pub assertion_loop: Loc,
    /// Scalars read by relevant statements inside the assertion loop.
    pub v_imp: BTreeSet<Ident>,
    /// Relevant array reads inside the assertion loop, one entry per
    /// occurrence.
    pub e_imp: Vec<ArrayRead>,
    /// Other loops containing definitions the assertion depends on.
    pub s_def: BTreeSet<Loc>,
    /// Every statement in the slice.
    pub relevant: BTreeSet<Loc>,
}

/// Structural facts about every statement.
struct Layout<'a> {
    stmts: BTreeMap<Loc, &'a Stmt>,
    /// Enclosing loops, outermost first. A loop is not its own ancestor.
    loops: BTreeMap<Loc, Vec<Loc>>,
    /// Enclosing conditionals, outermost first.
    ifs: BTreeMap<Loc, Vec<Loc>>,
}

impl<'a> Layout<'a> {
    fn new(p: &'a Program) -> Self {
        fn go<'a>(b: &'a [Stmt], loops: &mut Vec<Loc>, ifs: &mut Vec<Loc>, out: &mut Layout<'a>) {
            for s in b {
                out.stmts.insert(s.loc, s);
                out.loops.insert(s.loc, loops.clone());
                out.ifs.insert(s.loc, ifs.clone());
                match &s.kind {
                    StmtKind::For { body, .. } => {
                        loops.push(s.loc);
                        go(body, loops, ifs, out);
                        loops.pop();
                    }
                    StmtKind::If { .. } => {
                        ifs.push(s.loc);
                        for c in s.children() {
                            go(c, loops, ifs, out);
                        }
                        ifs.pop();
                    }
                    _ => {
                        for c in s.children() {
                            go(c, loops, ifs, out);
                        }
                    }
                }
            }
        }
        let mut l = Layout { stmts: BTreeMap::new(), loops: BTreeMap::new(), ifs: BTreeMap::new() };
        go(&p.body, &mut Vec::new(), &mut Vec::new(), &mut l);
        l
    }

    /// Loops containing `s`; a loop header counts as inside its own loop.
    fn loops_around(&self, s: Loc) -> Vec<Loc> {
        let mut v = self.loops[&s].clone();
        if self.stmts[&s].is_loop() {
            v.push(s);
        }
        v
    }

    fn encloses(&self, outer: Loc, s: Loc) -> bool {
        outer == s && self.stmts[&s].is_loop() || self.loops[&s].contains(&outer)
    }
}

/// Expressions a relevant statement evaluates to produce its effect.
fn slice_exprs(s: &Stmt) -> Vec<&Expr> {
    match &s.kind {
        StmtKind::For { init, step, .. } => alloc::vec![init, step],
        _ => s.own_exprs(),
    }
}

/// Statements the one at `start` depends on, itself included.
fn slice(layout: &Layout<'_>, rd: &ReachingDefs, start: Loc) -> BTreeSet<Loc> {
    let mut relevant = BTreeSet::new();
    let mut work = alloc::vec![start];
    while let Some(loc) = work.pop() {
        if !relevant.insert(loc) {
            continue;
        }
        let s = layout.stmts[&loc];
        for e in slice_exprs(s) {
            e.walk(&mut |e| {
                if let Expr::Read(lv) = e {
                    work.extend(rd.reaching(loc, lv.base()));
                }
            });
        }
        work.extend(layout.ifs[&loc].iter().copied());
    }
    relevant
}

fn find_assertion_loop(p: &Program, layout: &Layout<'_>, assertion: Loc) -> Result<Loc, PrecisionError> {
    match p.find(assertion) {
        Some(Stmt { kind: StmtKind::Assert(_), .. }) => {}
        _ => return Err(PrecisionError::AssertionNotFound(assertion)),
    }
    layout.loops[&assertion].last().copied().ok_or(PrecisionError::AssertionNotInLoop(assertion))
}

pub fn dependence_closure(p: &Program, assertion: Loc) -> Result<DependenceClosure, PrecisionError> {
    let layout = Layout::new(p);
    let s_a = find_assertion_loop(p, &layout, assertion)?;
    let rd = reaching_definitions(p);
    let relevant = slice(&layout, &rd, assertion);
    Ok(closure_from(&layout, s_a, relevant))
}

fn closure_from(layout: &Layout<'_>, s_a: Loc, relevant: BTreeSet<Loc>) -> DependenceClosure {
    let mut v_imp = BTreeSet::new();
    let mut e_imp = Vec::new();
    let mut s_def = BTreeSet::new();
    for &loc in &relevant {
        let s = layout.stmts[&loc];
        let is_def = matches!(
            s.kind,
            StmtKind::Assign { .. }
                | StmtKind::For { .. }
                | StmtKind::MultiAssign { .. }
                | StmtKind::WitnessWrite { .. }
        );
        if is_def {
            s_def.extend(layout.loops_around(loc).into_iter().filter(|l| *l != s_a));
        }
        if layout.encloses(s_a, loc) {
            for e in slice_exprs(s) {
                v_imp.extend(e.scalar_reads().into_iter().map(String::from));
                for (array, index) in e.array_reads() {
                    e_imp.push(ArrayRead { loc, array: array.into(), index: crate::printer::expr_to_string(index) });
                }
            }
        }
    }
    DependenceClosure { assertion_loop: s_a, v_imp, e_imp, s_def, relevant }
}

pub fn classify(p: &Program, assertion: Loc) -> Result<PrecisionVerdict, PrecisionError> {
    let layout = Layout::new(p);
    let s_a = find_assertion_loop(p, &layout, assertion)?;
    let rd = reaching_definitions(p);
    let closure = closure_from(&layout, s_a, slice(&layout, &rd, assertion));
    let arrays = collect_arrays(p);
    let summaries = summarize(p, &arrays);
    Ok(Checker { layout: &layout, rd: &rd, summaries: &summaries, s_a, found: BTreeSet::new() }
        .run(&closure, assertion))
}

struct Checker<'a> {
    layout: &'a Layout<'a>,
    rd: &'a ReachingDefs,
    summaries: &'a BTreeMap<Loc, LoopSummary>,
    s_a: Loc,
    found: BTreeSet<RuleViolation>,
}

impl Checker<'_> {
    fn flag(&mut self, rule: Rule, location: Loc, note: String) {
        self.found.insert(RuleViolation { rule, location, note });
    }

    fn defs(&self, l: Loc) -> &[Ident] {
        &self.summaries[&l].defs
    }

    fn iterator(&self, l: Loc) -> &str {
        &self.summaries[&l].iterator
    }

    fn run(mut self, c: &DependenceClosure, assertion: Loc) -> PrecisionVerdict {
        let mut involved: BTreeSet<Loc> = c.s_def.clone();
        involved.insert(self.s_a);
        involved.extend(self.layout.loops[&assertion].iter().copied());
        for &l in &involved {
            if !self.summaries[&l].full_access {
                self.flag(Rule::L1, l, format!("loop over `{}` does not visit every array element", self.iterator(l)));
            }
        }
        for &loc in &c.relevant {
            let s = self.layout.stmts[&loc];
            for e in slice_exprs(s) {
                for x in e.scalar_reads() {
                    self.check_scalar(loc, x);
                }
                for (array, index) in e.array_reads() {
                    self.check_array_read(loc, array, index);
                }
            }
        }
        let violated_rules: Vec<RuleViolation> = self.found.into_iter().collect();
        PrecisionVerdict { precise: violated_rules.is_empty(), violated_rules }
    }

    fn scalar_rule(&self, loc: Loc) -> Rule {
        if self.layout.encloses(self.s_a, loc) {
            Rule::S4
        } else {
            Rule::D6
        }
    }

    /// Can a havocked value of `x` reach its read at `loc`?
    fn check_scalar(&mut self, loc: Loc, x: &str) {
        let rule = self.scalar_rule(loc);
        // Havoc on entry to an enclosing loop, not yet overwritten.
        for m in self.layout.loops_around(loc) {
            if !self.defs(m).iter().any(|d| d == x) {
                continue;
            }
            let exposed = if m == loc {
                true
            } else {
                let StmtKind::For { body, .. } = &self.layout.stmts[&m].kind else { unreachable!() };
                !must_defined_before(body, loc).is_some_and(|defined| defined.contains(x))
            };
            if exposed {
                self.flag(rule, loc, format!("`{x}` is modified across iterations of the loop at {m}"));
            }
        }
        // Havoc after a loop whose definition reaches the read.
        for d in self.rd.reaching(loc, x) {
            for m in self.layout.loops_around(d) {
                if !self.layout.encloses(m, loc) && self.defs(m).iter().any(|v| v == x) {
                    self.flag(rule, loc, format!("`{x}` is defined in the loop at {m}"));
                }
            }
        }
    }

    fn check_array_read(&mut self, loc: Loc, array: &str, index: &Expr) {
        let in_assertion_loop = self.layout.encloses(self.s_a, loc);
        let rule = if in_assertion_loop { Rule::A2 } else { Rule::D5 };
        match self.layout.loops[&loc].last() {
            None => self.flag(rule, loc, format!("`{array}` read outside any loop")),
            Some(&m) if !index.is_var(self.iterator(m)) => self.flag(
                rule,
                loc,
                format!(
                    "`{array}` indexed by `{}`, not by `{}`",
                    crate::printer::expr_to_string(index),
                    self.iterator(m)
                ),
            ),
            Some(_) => {}
        }
        let mut loops: BTreeSet<Loc> = self.layout.loops[&loc].iter().copied().collect();
        for d in self.rd.reaching(loc, array) {
            loops.extend(self.layout.loops_around(d));
        }
        for m in loops {
            if self.defs(m).iter().any(|d| d == array) {
                self.flag(Rule::A3, loc, format!("the loop at {m} writes `{array}` away from its iterator"));
            }
        }
    }
}
