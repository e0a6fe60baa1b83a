//! Random programs of the array language, small enough for the oracle, and
//! the differential harness that runs them.
//!
//! Shape: at most two arrays of size at most four, at most three loops nested
//! at most two deep, constants in `0..=3` (plus the array sizes as loop
//! bounds), exactly one assertion, `input()` only outside loops.

use arrayless_core::analysis::IndexRange;
use arrayless_core::error::OracleError;
use arrayless_core::oracle::{differential_check, DifferentialResult, OracleConfig};
use arrayless_core::transform::transform_program;
use arrayless_core::validate::validate_output_grammar;
use arrayless_core::{parse, print_program, Program};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5eed_a11a;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub max_arrays: usize,
    pub max_size: u64,
    pub max_loops: usize,
    pub max_depth: usize,
    pub max_const: i64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig { max_arrays: 2, max_size: 4, max_loops: 3, max_depth: 2, max_const: 3 }
    }
}

const SCALARS: [&str; 2] = ["x", "y"];
const ITERATORS: [&str; 2] = ["i", "j"];

enum Node {
    Line(String),
    Block { head: String, body: Vec<Node>, iterator: Option<&'static str> },
}

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    cfg: FuzzConfig,
    arrays: Vec<(String, u64)>,
    loops_left: usize,
    /// Same-size arrays, canonical headers, iterator indices: the shape the
    /// precision rules accept, so the precise subset is not vanishingly small.
    structured: bool,
}

impl Gen<'_> {
    fn konst(&mut self) -> i64 {
        self.rng.random_range(0..=self.cfg.max_const)
    }

    fn index(&mut self, size: u64, scope: &[&'static str]) -> String {
        let roll = self.rng.random_range(0..10);
        if let (true, Some(it), 0..=8) = (self.structured, scope.last(), roll) {
            return (*it).into();
        }
        match (scope.last(), roll) {
            (Some(it), 0..=4) => (*it).into(),
            (Some(_), 5) => (*scope.choose(self.rng).unwrap()).into(),
            (Some(it), 6) => format!("{it} + 1"),
            (Some(it), 7) if size > 1 => format!("{it} - 1"),
            (_, 8) => (*SCALARS.choose(self.rng).unwrap()).into(),
            _ => self.rng.random_range(0..size).to_string(),
        }
    }

    fn atom(&mut self, scope: &[&'static str], allow_input: bool) -> String {
        match self.rng.random_range(0..10) {
            0..=1 => self.konst().to_string(),
            2..=3 => (*SCALARS.choose(self.rng).unwrap()).into(),
            4 if !scope.is_empty() => (*scope.choose(self.rng).unwrap()).into(),
            5 if allow_input => "input()".into(),
            _ if !self.arrays.is_empty() => {
                let (a, n) = self.arrays.choose(self.rng).unwrap().clone();
                format!("{a}[{}]", self.index(n, scope))
            }
            _ => self.konst().to_string(),
        }
    }

    fn expr(&mut self, scope: &[&'static str], depth: usize, allow_input: bool) -> String {
        if depth >= 2 || self.rng.random_bool(0.55) {
            return self.atom(scope, allow_input);
        }
        let op = *["+", "-", "*"].choose(self.rng).unwrap();
        let l = self.expr(scope, depth + 1, allow_input);
        let r = self.expr(scope, depth + 1, false);
        format!("{l} {op} {r}")
    }

    fn cond(&mut self, scope: &[&'static str]) -> String {
        let op = *["==", "!=", "<", "<="].choose(self.rng).unwrap();
        let l = self.expr(scope, 1, false);
        let r = self.expr(scope, 1, false);
        format!("{l} {op} {r}")
    }

    fn assign(&mut self, scope: &[&'static str], top: bool) -> Node {
        if !self.arrays.is_empty() && self.rng.random_bool(0.5) {
            let (a, n) = self.arrays.choose(self.rng).unwrap().clone();
            let idx = self.index(n, scope);
            let v = self.expr(scope, 0, false);
            Node::Line(format!("{a}[{idx}] = {v};"))
        } else {
            let x = *SCALARS.choose(self.rng).unwrap();
            let v = self.expr(scope, 0, top);
            Node::Line(format!("{x} = {v};"))
        }
    }

    fn header(&mut self, it: &'static str) -> String {
        let sizes: Vec<i64> = self.arrays.iter().map(|(_, n)| *n as i64).collect();
        if self.structured && self.rng.random_bool(0.9) {
            return format!("for ({it} = 0; {it} < {}; {it}++)", sizes[0]);
        }
        let bound = if !sizes.is_empty() && self.rng.random_bool(0.7) {
            *sizes.choose(self.rng).unwrap()
        } else {
            self.konst()
        };
        match self.rng.random_range(0..10) {
            0..=5 => format!("for ({it} = 0; {it} < {bound}; {it}++)"),
            6 => format!("for ({it} = {}; {it} < {bound}; {it}++)", self.rng.random_range(0..=1)),
            7 => format!("for ({it} = 0; {it} <= {}; {it}++)", (bound - 1).max(0)),
            8 => format!("for ({it} = 0; {it} < {bound}; {it} += 2)"),
            _ => format!("for ({it} = {}; {it} >= 0; {it}--)", (bound - 1).max(0)),
        }
    }

    fn body(&mut self, scope: &mut Vec<&'static str>, in_loop: bool) -> Vec<Node> {
        let n = self.rng.random_range(1..=3);
        let mut out = Vec::new();
        for _ in 0..n {
            let roll = self.rng.random_range(0..10);
            if roll < 3 && self.loops_left > 0 && scope.len() < self.cfg.max_depth {
                out.push(self.for_loop(scope));
            } else if roll < 5 {
                let cond = self.cond(scope);
                let inner = if in_loop && !self.structured && self.rng.random_bool(0.2) {
                    vec![Node::Line((*["break;", "continue;"].choose(self.rng).unwrap()).into())]
                } else {
                    vec![self.assign(scope, false)]
                };
                out.push(Node::Block { head: format!("if ({cond})"), body: inner, iterator: None });
            } else {
                out.push(self.assign(scope, !in_loop));
            }
        }
        out
    }

    fn for_loop(&mut self, scope: &mut Vec<&'static str>) -> Node {
        self.loops_left -= 1;
        let it = ITERATORS[scope.len()];
        let head = self.header(it);
        scope.push(it);
        let body = self.body(scope, true);
        scope.pop();
        Node::Block { head, body, iterator: Some(it) }
    }
}

/// Every block as (path of child indices, iterators in scope), pre-order.
fn slots(
    nodes: &[Node],
    path: &mut Vec<usize>,
    scope: &mut Vec<&'static str>,
    out: &mut Vec<(Vec<usize>, Vec<&'static str>)>,
) {
    out.push((path.clone(), scope.clone()));
    for (k, n) in nodes.iter().enumerate() {
        if let Node::Block { body, iterator, .. } = n {
            path.push(k);
            if let Some(it) = iterator {
                scope.push(it);
            }
            slots(body, path, scope, out);
            if iterator.is_some() {
                scope.pop();
            }
            path.pop();
        }
    }
}

fn block_at<'a>(nodes: &'a mut Vec<Node>, path: &[usize]) -> &'a mut Vec<Node> {
    match path.split_first() {
        None => nodes,
        Some((k, rest)) => match &mut nodes[*k] {
            Node::Block { body, .. } => block_at(body, rest),
            Node::Line(_) => unreachable!("slot paths only name blocks"),
        },
    }
}

fn render(nodes: &[Node], depth: usize, out: &mut String) {
    for n in nodes {
        for _ in 0..depth {
            out.push_str("    ");
        }
        match n {
            Node::Line(l) => {
                out.push_str(l);
                out.push('\n');
            }
            Node::Block { head, body, .. } => {
                out.push_str(head);
                out.push_str(" {\n");
                render(body, depth + 1, out);
                for _ in 0..depth {
                    out.push_str("    ");
                }
                out.push_str("}\n");
            }
        }
    }
}

/// One random program as source text.
pub fn generate_source(rng: &mut ChaCha8Rng, cfg: FuzzConfig) -> String {
    let structured = rng.random_bool(0.5);
    let n_arrays = rng.random_range(1..=cfg.max_arrays.max(1));
    let shared = rng.random_range(1..=cfg.max_size);
    let arrays: Vec<(String, u64)> = ["a", "b"]
        .iter()
        .take(n_arrays)
        .map(|a| (a.to_string(), if structured { shared } else { rng.random_range(1..=cfg.max_size) }))
        .collect();
    let loops = rng.random_range(1..=cfg.max_loops);
    let mut g = Gen { rng, cfg, arrays, loops_left: loops, structured };

    let mut top = Vec::new();
    let n_top = g.rng.random_range(1..=4);
    for _ in 0..n_top {
        if g.loops_left > 0 && g.rng.random_bool(0.6) {
            top.push(g.for_loop(&mut Vec::new()));
        } else {
            top.push(g.assign(&[], true));
        }
    }
    while g.loops_left > 0 && g.rng.random_bool(0.5) {
        top.push(g.for_loop(&mut Vec::new()));
    }

    let mut all = Vec::new();
    slots(&top, &mut Vec::new(), &mut Vec::new(), &mut all);
    let in_loops: Vec<_> = all.iter().filter(|(_, s)| !s.is_empty()).cloned().collect();
    let (path, scope) = if !in_loops.is_empty() && g.rng.random_bool(0.85) {
        in_loops.choose(g.rng).unwrap().clone()
    } else {
        all.choose(g.rng).unwrap().clone()
    };
    let assertion = format!("assert({});", g.cond(&scope));
    let block = block_at(&mut top, &path);
    let at = g.rng.random_range(0..=block.len());
    block.insert(at, Node::Line(assertion));

    let mut src = String::new();
    for (a, n) in &g.arrays {
        src.push_str(&format!("int {a}[{n}];\n"));
    }
    src.push_str("int x, y, i, j;\n\nmain()\n{\n");
    render(&top, 1, &mut src);
    src.push_str("}\n");
    src
}

/// A generated program together with its transform and oracle results.
#[derive(Clone, Debug)]
pub struct FuzzCase {
    pub index: usize,
    pub source: String,
    pub program: Program,
    pub transformed: Program,
    pub conformant: bool,
    pub result: DifferentialResult,
}

#[derive(Clone, Debug, Default)]
pub struct CorpusStats {
    pub generated: usize,
    /// Discarded because a run indexes out of bounds or overflows.
    pub discarded: usize,
    /// Discarded because enumeration exceeded the step budget.
    pub budget_exceeded: usize,
    pub cases: Vec<FuzzCase>,
}

impl CorpusStats {
    pub fn unsound(&self) -> impl Iterator<Item = &FuzzCase> {
        self.cases.iter().filter(|c| !c.result.sound)
    }

    pub fn precise(&self) -> impl Iterator<Item = &FuzzCase> {
        self.cases.iter().filter(|c| c.result.precise)
    }

    pub fn inconsistent(&self) -> impl Iterator<Item = &FuzzCase> {
        self.cases.iter().filter(|c| !c.result.precise_consistent)
    }

    pub fn nonconformant(&self) -> impl Iterator<Item = &FuzzCase> {
        self.cases.iter().filter(|c| !c.conformant)
    }
}

pub fn oracle_config() -> OracleConfig {
    OracleConfig { value_domain: IndexRange { lo: 0, hi: 3 }, max_steps: 2_000_000, array_size_override: None }
}

pub enum Checked {
    Case(Box<FuzzCase>),
    /// A run indexes out of bounds or overflows.
    Invalid,
    OverBudget,
}

/// Transform and check one source.
pub fn check_source(index: usize, source: String, cfg: &OracleConfig) -> Result<Checked, String> {
    let program = parse(&source).map_err(|e| format!("generated program does not parse: {e}\n{source}"))?;
    let transformed =
        transform_program(&program).map_err(|e| format!("transform failed: {e}\n{}", print_program(&program)))?;
    let conformant = validate_output_grammar(&transformed).conformant();
    match differential_check(&program, &transformed, cfg) {
        Ok(result) => Ok(Checked::Case(Box::new(FuzzCase { index, source, program, transformed, conformant, result }))),
        Err(OracleError::IndexOutOfBounds { .. } | OracleError::Overflow { .. }) => Ok(Checked::Invalid),
        Err(OracleError::BudgetExceeded { .. }) => Ok(Checked::OverBudget),
        Err(e) => Err(format!("oracle error {e}\n{}", print_program(&program))),
    }
}

/// Generate until `valid` programs have been checked.
pub fn run_corpus(seed: u64, valid: usize, fuzz: FuzzConfig, cfg: &OracleConfig) -> Result<CorpusStats, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = CorpusStats::default();
    while stats.cases.len() < valid {
        let src = generate_source(&mut rng, fuzz);
        let index = stats.generated;
        stats.generated += 1;
        match check_source(index, src, cfg)? {
            Checked::Case(case) => stats.cases.push(*case),
            Checked::Invalid => stats.discarded += 1,
            Checked::OverBudget => stats.budget_exceeded += 1,
        }
    }
    Ok(stats)
}
