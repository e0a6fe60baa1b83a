//! Exhaustive interpreter for small programs of either language.
//!
//! Every `nd()`, `nd(l, u)` and `input()` is a choice point. Runs are explored
//! depth first with choices in ascending order by re-executing the program
//! under a growing prefix of choices. A run that reaches a statement in a
//! state (restricted to the variables live there) whose every continuation
//! has already been explored is cut short.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashSet;

use crate::analysis::dataflow::live_before_statements;
use crate::analysis::loops::IndexRange;
use crate::ast::*;
use crate::error::OracleError;
use crate::scale::scale_program;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    /// Values drawn by `nd()` and `input()`.
    pub value_domain: IndexRange,
    /// Total statements executed across the whole enumeration.
    pub max_steps: u64,
    /// Shrink arrays (and the constants that mention their sizes) first.
    pub array_size_override: Option<u64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { value_domain: IndexRange { lo: 0, hi: 3 }, max_steps: 20_000_000, array_size_override: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Safe,
    Unsafe,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub nd_choices: Vec<i64>,
    /// The failing assertion, or the statement that divided by zero.
    pub failing_assert: Loc,
    /// Arrays appear once per cell as `a[0]`, `a[1]`, ...
    pub final_state: BTreeMap<Ident, i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub witness: Option<Trace>,
    /// Runs started, including ones cut short by the memo.
    pub runs: u64,
}

impl Verdict {
    pub fn is_safe(&self) -> bool {
        self.outcome == Outcome::Safe
    }
}

// ---------------------------------------------------------------------------
// Compilation to slot-addressed form

struct Var {
    name: Ident,
    base: usize,
    len: usize,
    array: bool,
}

enum CExpr {
    Const(i64),
    Var(usize),
    Elem { var: usize, idx: Box<CExpr> },
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
    Tern(Box<CExpr>, Box<CExpr>, Box<CExpr>),
    Nd,
    NdRange(Box<CExpr>, Box<CExpr>),
    Input,
}

enum CKind {
    Assign(usize, CExpr),
    Store { var: usize, idx: CExpr, value: CExpr },
    If(CExpr, Vec<CStmt>, Vec<CStmt>),
    For { slot: usize, init: CExpr, test: CExpr, step: CExpr, body: Vec<CStmt> },
    Assert(CExpr),
    Break,
    Continue,
    Guarded { guard: CExpr, slot: usize, value: CExpr },
    Multi(Vec<usize>, CExpr),
    Seq(Vec<CStmt>),
}

struct CStmt {
    loc: Loc,
    /// Memory ranges `(base, len)` of the variables live on entry.
    live: Vec<(usize, usize)>,
    kind: CKind,
}

struct Compiled {
    vars: Vec<Var>,
    cells: usize,
    body: Vec<CStmt>,
}

struct Compiler<'a> {
    vars: &'a [Var],
    by_name: BTreeMap<&'a str, usize>,
    live: BTreeMap<Loc, BTreeSet<Ident>>,
}

impl Compiler<'_> {
    fn var(&self, name: &str) -> Result<usize, OracleError> {
        self.by_name.get(name).copied().ok_or_else(|| OracleError::UnknownVariable { name: name.into() })
    }

    fn scalar(&self, name: &str) -> Result<usize, OracleError> {
        let v = self.var(name)?;
        Ok(self.vars[v].base)
    }

    fn expr(&self, e: &Expr) -> Result<CExpr, OracleError> {
        Ok(match e {
            Expr::Const(c) => CExpr::Const(*c),
            Expr::Read(LValue::Var(n)) => CExpr::Var(self.scalar(n)?),
            Expr::Read(LValue::ArrayAccess { array, index }) => {
                CExpr::Elem { var: self.var(array)?, idx: Box::new(self.expr(index)?) }
            }
            Expr::BinOp { op, lhs, rhs } => CExpr::Bin(*op, Box::new(self.expr(lhs)?), Box::new(self.expr(rhs)?)),
            Expr::Ternary { cond, then, els } => {
                CExpr::Tern(Box::new(self.expr(cond)?), Box::new(self.expr(then)?), Box::new(self.expr(els)?))
            }
            Expr::Nd => CExpr::Nd,
            Expr::NdRange { lo, hi } => CExpr::NdRange(Box::new(self.expr(lo)?), Box::new(self.expr(hi)?)),
            Expr::Input(_) => CExpr::Input,
        })
    }

    fn block(&self, b: &[Stmt]) -> Result<Vec<CStmt>, OracleError> {
        b.iter().map(|s| self.stmt(s)).collect()
    }

    fn stmt(&self, s: &Stmt) -> Result<CStmt, OracleError> {
        let kind = match &s.kind {
            StmtKind::Assign { target: LValue::Var(x), value } => CKind::Assign(self.scalar(x)?, self.expr(value)?),
            StmtKind::Assign { target: LValue::ArrayAccess { array, index }, value } => {
                CKind::Store { var: self.var(array)?, idx: self.expr(index)?, value: self.expr(value)? }
            }
            StmtKind::If { cond, then, els } => CKind::If(
                self.expr(cond)?,
                self.block(then)?,
                match els {
                    Some(e) => self.block(e)?,
                    None => Vec::new(),
                },
            ),
            StmtKind::For { iterator, init, test, step, body } => CKind::For {
                slot: self.scalar(iterator)?,
                init: self.expr(init)?,
                test: self.expr(test)?,
                step: self.expr(step)?,
                body: self.block(body)?,
            },
            StmtKind::Assert(e) => CKind::Assert(self.expr(e)?),
            StmtKind::Break => CKind::Break,
            StmtKind::Continue => CKind::Continue,
            StmtKind::WitnessWrite { guard, target, value } => {
                CKind::Guarded { guard: self.expr(guard)?, slot: self.scalar(target)?, value: self.expr(value)? }
            }
            StmtKind::MultiAssign { targets, value } => {
                CKind::Multi(targets.iter().map(|t| self.scalar(t)).collect::<Result<_, _>>()?, self.expr(value)?)
            }
            StmtKind::Seq(b) => CKind::Seq(self.block(b)?),
        };
        let live = self
            .live
            .get(&s.loc)
            .map(|names| {
                names
                    .iter()
                    .filter_map(|n| self.by_name.get(n.as_str()))
                    .map(|&v| (self.vars[v].base, self.vars[v].len))
                    .collect()
            })
            .unwrap_or_default();
        Ok(CStmt { loc: s.loc, live, kind })
    }
}

/// Loops must stop on their own: the test compares the iterator against a
/// constant, or the loop is a single-trip wrapper.
fn check_bounds(p: &Program) -> Result<(), OracleError> {
    let mut bad = None;
    p.walk(|s| {
        if let StmtKind::For { iterator, test, .. } = &s.kind {
            let constant = match test {
                Expr::BinOp { op: BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Ne, lhs, rhs } => {
                    (lhs.is_var(iterator) && rhs.as_const().is_some())
                        || (rhs.is_var(iterator) && lhs.as_const().is_some())
                }
                _ => false,
            };
            if !constant && !s.is_single_trip() && bad.is_none() {
                bad = Some(s.loc);
            }
        }
    });
    match bad {
        Some(loop_loc) => Err(OracleError::NonConstantBound { loop_loc }),
        None => Ok(()),
    }
}

fn compile(p: &Program) -> Result<Compiled, OracleError> {
    check_bounds(p)?;
    let mut vars = Vec::new();
    let mut cells = 0;
    for d in &p.decls {
        let (len, array) = match d.kind {
            DeclKind::Array { size } => (size as usize, true),
            _ => (1, false),
        };
        vars.push(Var { name: d.name.clone(), base: cells, len, array });
        cells += len;
    }
    let by_name = vars.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
    let c = Compiler { vars: &vars, by_name, live: live_before_statements(p) };
    let body = c.block(&p.body)?;
    Ok(Compiled { vars, cells, body })
}

// ---------------------------------------------------------------------------
// Execution

type Key = (u32, Box<[i64]>);

#[derive(Clone, Copy)]
struct Choice {
    idx: usize,
    len: usize,
    value: i64,
}

enum Halt {
    Fail(Loc),
    Infeasible,
    Pruned,
    Error(OracleError),
}

impl From<OracleError> for Halt {
    fn from(e: OracleError) -> Self {
        Halt::Error(e)
    }
}

enum Flow {
    Next,
    Break,
    Continue,
}

enum Prefix<'a> {
    /// Domain positions, for enumeration.
    Indices(&'a [usize]),
    /// Concrete values, for replay.
    Values(&'a [i64]),
}

struct Machine<'a> {
    prog: &'a Compiled,
    mem: Vec<i64>,
    steps: &'a mut u64,
    max_steps: u64,
    input_domain: IndexRange,
    nd_values: &'a [i64],
    prefix: Prefix<'a>,
    chosen: Vec<Choice>,
    done: Option<&'a HashSet<Key>>,
    boundaries: Vec<(Key, usize)>,
    last_boundary: usize,
    observed: Option<&'a mut BTreeSet<i64>>,
}

impl Machine<'_> {
    fn draw(&mut self, len: usize, value_at: impl Fn(usize) -> i64) -> Result<i64, Halt> {
        if len == 0 {
            return Err(Halt::Infeasible);
        }
        let depth = self.chosen.len();
        let (idx, value) = match self.prefix {
            Prefix::Indices(p) => {
                let idx = p.get(depth).copied().unwrap_or(0);
                (idx, value_at(idx))
            }
            Prefix::Values(v) => match v.get(depth) {
                Some(&value) => (0, value),
                None => (0, value_at(0)),
            },
        };
        self.chosen.push(Choice { idx, len, value });
        Ok(value)
    }

    fn note(&mut self, v: i64) {
        if let Some(o) = self.observed.as_deref_mut() {
            o.insert(v);
        }
    }

    fn elem(&self, var: usize, idx: i64, loc: Loc) -> Result<usize, Halt> {
        let v = &self.prog.vars[var];
        if idx < 0 || idx as usize >= v.len {
            return Err(OracleError::IndexOutOfBounds { loc, array: v.name.clone(), index: idx }.into());
        }
        Ok(v.base + idx as usize)
    }

    fn eval(&mut self, e: &CExpr, loc: Loc) -> Result<i64, Halt> {
        let overflow = || Halt::Error(OracleError::Overflow { loc });
        Ok(match e {
            CExpr::Const(c) => *c,
            CExpr::Var(slot) => self.mem[*slot],
            CExpr::Elem { var, idx } => {
                let i = self.eval(idx, loc)?;
                self.mem[self.elem(*var, i, loc)?]
            }
            CExpr::Bin(BinOp::And, l, r) => (self.eval(l, loc)? != 0 && self.eval(r, loc)? != 0) as i64,
            CExpr::Bin(BinOp::Or, l, r) => (self.eval(l, loc)? != 0 || self.eval(r, loc)? != 0) as i64,
            CExpr::Bin(op, l, r) => {
                let (a, b) = (self.eval(l, loc)?, self.eval(r, loc)?);
                match op {
                    BinOp::Add => a.checked_add(b).ok_or_else(overflow)?,
                    BinOp::Sub => a.checked_sub(b).ok_or_else(overflow)?,
                    BinOp::Mul => a.checked_mul(b).ok_or_else(overflow)?,
                    BinOp::Div | BinOp::Rem if b == 0 => return Err(Halt::Fail(loc)),
                    BinOp::Div => a.checked_div(b).ok_or_else(overflow)?,
                    BinOp::Rem => a.checked_rem(b).ok_or_else(overflow)?,
                    BinOp::Eq => (a == b) as i64,
                    BinOp::Ne => (a != b) as i64,
                    BinOp::Lt => (a < b) as i64,
                    BinOp::Le => (a <= b) as i64,
                    BinOp::Gt => (a > b) as i64,
                    BinOp::Ge => (a >= b) as i64,
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
            CExpr::Tern(c, t, f) => {
                if self.eval(c, loc)? != 0 {
                    self.eval(t, loc)?
                } else {
                    self.eval(f, loc)?
                }
            }
            CExpr::Nd => {
                let vals = self.nd_values;
                self.draw(vals.len(), |i| vals[i])?
            }
            CExpr::Input => {
                let d = self.input_domain;
                let v = self.draw((d.hi - d.lo + 1).max(0) as usize, |i| d.lo + i as i64)?;
                self.note(v);
                v
            }
            CExpr::NdRange(lo, hi) => {
                let (lo, hi) = (self.eval(lo, loc)?, self.eval(hi, loc)?);
                let len = if hi < lo { 0 } else { (hi - lo + 1) as usize };
                self.draw(len, |i| lo + i as i64)?
            }
        })
    }

    fn set(&mut self, slot: usize, v: i64) {
        self.mem[slot] = v;
        self.note(v);
    }

    fn block(&mut self, b: &[CStmt]) -> Result<Flow, Halt> {
        for s in b {
            match self.stmt(s)? {
                Flow::Next => {}
                jump => return Ok(jump),
            }
        }
        Ok(Flow::Next)
    }

    fn boundary(&mut self, s: &CStmt) -> Result<(), Halt> {
        let depth = self.chosen.len();
        let Some(done) = self.done else { return Ok(()) };
        if depth <= self.last_boundary {
            return Ok(());
        }
        let mut state = Vec::new();
        for &(base, len) in &s.live {
            state.extend_from_slice(&self.mem[base..base + len]);
        }
        let key: Key = (s.loc.0, state.into_boxed_slice());
        if done.contains(&key) {
            return Err(Halt::Pruned);
        }
        self.boundaries.push((key, depth));
        self.last_boundary = depth;
        Ok(())
    }

    fn stmt(&mut self, s: &CStmt) -> Result<Flow, Halt> {
        *self.steps += 1;
        if *self.steps > self.max_steps {
            return Err(OracleError::BudgetExceeded { steps: self.max_steps }.into());
        }
        self.boundary(s)?;
        let loc = s.loc;
        match &s.kind {
            CKind::Assign(slot, e) => {
                let v = self.eval(e, loc)?;
                self.set(*slot, v);
            }
            CKind::Store { var, idx, value } => {
                let i = self.eval(idx, loc)?;
                let v = self.eval(value, loc)?;
                let cell = self.elem(*var, i, loc)?;
                self.set(cell, v);
            }
            CKind::If(c, t, f) => {
                let branch = if self.eval(c, loc)? != 0 { t } else { f };
                return self.block(branch);
            }
            CKind::For { slot, init, test, step, body } => {
                let v = self.eval(init, loc)?;
                self.set(*slot, v);
                while self.eval(test, loc)? != 0 {
                    if let Flow::Break = self.block(body)? {
                        break;
                    }
                    *self.steps += 1;
                    if *self.steps > self.max_steps {
                        return Err(OracleError::BudgetExceeded { steps: self.max_steps }.into());
                    }
                    let v = self.eval(step, loc)?;
                    self.set(*slot, v);
                }
            }
            CKind::Assert(e) => {
                if self.eval(e, loc)? == 0 {
                    return Err(Halt::Fail(loc));
                }
            }
            CKind::Break => return Ok(Flow::Break),
            CKind::Continue => return Ok(Flow::Continue),
            CKind::Guarded { guard, slot, value } => {
                let g = self.eval(guard, loc)?;
                let v = self.eval(value, loc)?;
                if g != 0 {
                    self.set(*slot, v);
                }
            }
            CKind::Multi(slots, e) => {
                let v = self.eval(e, loc)?;
                for &slot in slots {
                    self.set(slot, v);
                }
            }
            CKind::Seq(b) => return self.block(b),
        }
        Ok(Flow::Next)
    }
}

fn state_map(prog: &Compiled, mem: &[i64]) -> BTreeMap<Ident, i64> {
    let mut out = BTreeMap::new();
    for v in &prog.vars {
        if v.array {
            for i in 0..v.len {
                out.insert(format!("{}[{i}]", v.name), mem[v.base + i]);
            }
        } else {
            out.insert(v.name.clone(), mem[v.base]);
        }
    }
    out
}

fn domain_values(d: IndexRange) -> Vec<i64> {
    (d.lo..=d.hi).collect()
}

fn prepare(p: &Program, cfg: &OracleConfig) -> Result<Compiled, OracleError> {
    match cfg.array_size_override {
        Some(n) => compile(&scale_program(p, n)),
        None => compile(p),
    }
}

/// Result of a full enumeration plus every value any variable or array cell
/// took in any run.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub verdict: Verdict,
    pub observed: BTreeSet<i64>,
}

/// Enumerate every run. `nd_values` replaces the domain of unranged `nd()`;
/// by default it is `cfg.value_domain`.
pub fn explore(p: &Program, cfg: &OracleConfig, nd_values: Option<&[i64]>) -> Result<Enumeration, OracleError> {
    let prog = prepare(p, cfg)?;
    let default_nd = domain_values(cfg.value_domain);
    let nd_values = nd_values.unwrap_or(&default_nd);
    let mut done: HashSet<Key> = HashSet::new();
    let mut observed: BTreeSet<i64> = domain_values(cfg.value_domain).into_iter().collect();
    observed.insert(0);
    let mut steps = 0u64;
    let mut prefix: Vec<usize> = Vec::new();
    let mut runs = 0u64;
    loop {
        runs += 1;
        let mut m = Machine {
            prog: &prog,
            mem: vec![0; prog.cells],
            steps: &mut steps,
            max_steps: cfg.max_steps,
            input_domain: cfg.value_domain,
            nd_values,
            prefix: Prefix::Indices(&prefix),
            chosen: Vec::new(),
            done: Some(&done),
            boundaries: Vec::new(),
            last_boundary: 0,
            observed: Some(&mut observed),
        };
        let result = m.block(&prog.body);
        let Machine { mem, chosen, boundaries, .. } = m;
        match result {
            Err(Halt::Error(e)) => return Err(e),
            Err(Halt::Fail(loc)) => {
                let trace = Trace {
                    nd_choices: chosen.iter().map(|c| c.value).collect(),
                    failing_assert: loc,
                    final_state: state_map(&prog, &mem),
                };
                return Ok(Enumeration {
                    verdict: Verdict { outcome: Outcome::Unsafe, witness: Some(trace), runs },
                    observed,
                });
            }
            Ok(_) | Err(Halt::Infeasible) | Err(Halt::Pruned) => {}
        }
        let next = chosen.iter().rposition(|c| c.idx + 1 < c.len);
        let keep_below = next.map_or(0, |j| j + 1);
        for (key, depth) in boundaries {
            if depth >= keep_below {
                done.insert(key);
            }
        }
        let Some(j) = next else {
            return Ok(Enumeration { verdict: Verdict { outcome: Outcome::Safe, witness: None, runs }, observed });
        };
        prefix.clear();
        prefix.extend(chosen[..j].iter().map(|c| c.idx));
        prefix.push(chosen[j].idx + 1);
    }
}

pub fn enumerate_runs(p: &Program, cfg: &OracleConfig) -> Result<Verdict, OracleError> {
    explore(p, cfg, None).map(|e| e.verdict)
}

/// Final states of every complete, non-failing run, in enumeration order.
/// No memoization: intended for very small programs.
pub fn final_states(
    p: &Program,
    cfg: &OracleConfig,
    nd_values: Option<&[i64]>,
) -> Result<Vec<BTreeMap<Ident, i64>>, OracleError> {
    let prog = prepare(p, cfg)?;
    let default_nd = domain_values(cfg.value_domain);
    let nd_values = nd_values.unwrap_or(&default_nd);
    let mut steps = 0u64;
    let mut prefix: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    loop {
        let mut m = Machine {
            prog: &prog,
            mem: vec![0; prog.cells],
            steps: &mut steps,
            max_steps: cfg.max_steps,
            input_domain: cfg.value_domain,
            nd_values,
            prefix: Prefix::Indices(&prefix),
            chosen: Vec::new(),
            done: None,
            boundaries: Vec::new(),
            last_boundary: 0,
            observed: None,
        };
        let result = m.block(&prog.body);
        let Machine { mem, chosen, .. } = m;
        match result {
            Err(Halt::Error(e)) => return Err(e),
            Ok(_) => out.push(state_map(&prog, &mem)),
            _ => {}
        }
        let Some(j) = chosen.iter().rposition(|c| c.idx + 1 < c.len) else { return Ok(out) };
        prefix.clear();
        prefix.extend(chosen[..j].iter().map(|c| c.idx));
        prefix.push(chosen[j].idx + 1);
    }
}

/// Outcome of re-running a program under fixed choices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    /// Location of the failure, if the run failed.
    pub failed: Option<Loc>,
    pub final_state: BTreeMap<Ident, i64>,
}

/// Run once, taking choices from `choices` in order (the lowest domain value
/// once they run out).
pub fn replay(p: &Program, cfg: &OracleConfig, choices: &[i64]) -> Result<Replay, OracleError> {
    let prog = prepare(p, cfg)?;
    let nd_values = domain_values(cfg.value_domain);
    let mut steps = 0u64;
    let mut m = Machine {
        prog: &prog,
        mem: vec![0; prog.cells],
        steps: &mut steps,
        max_steps: cfg.max_steps,
        input_domain: cfg.value_domain,
        nd_values: &nd_values,
        prefix: Prefix::Values(choices),
        chosen: Vec::new(),
        done: None,
        boundaries: Vec::new(),
        last_boundary: 0,
        observed: None,
    };
    let result = m.block(&prog.body);
    let failed = match result {
        Err(Halt::Error(e)) => return Err(e),
        Err(Halt::Fail(loc)) => Some(loc),
        _ => None,
    };
    Ok(Replay { failed, final_state: state_map(&prog, &m.mem) })
}

// ---------------------------------------------------------------------------
// Differential check

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialResult {
    pub original: Verdict,
    pub transformed: Verdict,
    /// Original unsafe implies transformed unsafe.
    pub sound: bool,
    /// Every assertion of the original classified precise.
    pub precise: bool,
    /// When `precise`, both verdicts agree.
    pub precise_consistent: bool,
    /// Size of the value set used for `nd()` in the transformed program.
    pub nd_domain: usize,
}

/// The transformed program's `nd()` ranges over every value the original
/// program can store (together with `value_domain`), so any value a
/// witnessing run of the transformed program needs is available to it.
pub fn differential_check(
    original: &Program,
    transformed: &Program,
    cfg: &OracleConfig,
) -> Result<DifferentialResult, OracleError> {
    let (original, transformed) = match cfg.array_size_override {
        Some(n) => (scale_program(original, n), scale_program(transformed, n)),
        None => (original.clone(), transformed.clone()),
    };
    let cfg = OracleConfig { array_size_override: None, ..cfg.clone() };
    let orig = explore(&original, &cfg, None)?;
    let mut nd = orig.observed.clone();
    nd.extend(domain_values(cfg.value_domain));
    let nd: Vec<i64> = nd.into_iter().collect();
    let trans = explore(&transformed, &cfg, Some(&nd))?;
    let precise =
        original.assertions().iter().all(|&a| crate::precision::classify(&original, a).is_ok_and(|v| v.precise));
    let (o, t) = (orig.verdict, trans.verdict);
    Ok(DifferentialResult {
        sound: !(o.outcome == Outcome::Unsafe && t.outcome == Outcome::Safe),
        precise,
        precise_consistent: !precise || o.outcome == t.outcome,
        nd_domain: nd.len(),
        original: o,
        transformed: t,
    })
}

/// Human-readable verdict name.
pub fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Safe => "Safe",
        Outcome::Unsafe => "Unsafe",
    }
}

impl core::fmt::Display for Outcome {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(outcome_name(*self))
    }
}
