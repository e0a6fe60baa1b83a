//! C text for transformed programs, ready for a model checker or a compiler.
//!
//! `nd()` becomes a call to the style's nondet function. `nd(l, u)` is moved
//! into a fresh temporary constrained by an assume on the line before the
//! statement that uses it. Guarded witness writes become a one-line
//! `if`/`else`. [`lift_verifiable`] undoes all of this on the text.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::analysis::arrays::NameSupply;
use crate::ast::*;
use crate::error::{EmitError, ParseError};
use crate::printer::{expr_to_string, lvalue_to_string, print_decl};
use crate::validate::validate_output_grammar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NdStyle {
    #[default]
    Cbmc,
    Svcomp,
    Stub,
}

impl NdStyle {
    pub const ALL: [NdStyle; 3] = [NdStyle::Cbmc, NdStyle::Svcomp, NdStyle::Stub];

    pub fn name(self) -> &'static str {
        match self {
            NdStyle::Cbmc => "cbmc",
            NdStyle::Svcomp => "svcomp",
            NdStyle::Stub => "stub",
        }
    }

    pub fn nondet(self) -> &'static str {
        match self {
            NdStyle::Cbmc => "nondet_int",
            NdStyle::Svcomp => "__VERIFIER_nondet_int",
            NdStyle::Stub => "nd_int",
        }
    }

    pub fn assume(self) -> &'static str {
        match self {
            NdStyle::Cbmc => "__CPROVER_assume",
            NdStyle::Svcomp => "__VERIFIER_assume",
            NdStyle::Stub => "nd_assume",
        }
    }
}

impl core::str::FromStr for NdStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NdStyle::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown nd style `{s}` (expected cbmc, svcomp or stub)"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EmitConfig {
    pub nd_style: NdStyle,
    pub header_comment: bool,
}

/// Environment variable the stub style reads its choices from.
pub const STUB_CHOICES_VAR: &str = "ND_CHOICES";

const MARKER: &str = "/* program */";
const TEMP_PREFIX: &str = "__nd_t";
const INDENT: &str = "    ";

fn preamble(style: NdStyle, inputs: &[&str]) -> String {
    let mut out = String::from("#include <assert.h>\n");
    match style {
        NdStyle::Cbmc => {
            out.push_str("\nint nondet_int(void);\nvoid __CPROVER_assume(_Bool assumption);\n");
        }
        NdStyle::Svcomp => {
            out.push_str("\nextern int __VERIFIER_nondet_int(void);\nextern void __VERIFIER_assume(int cond);\n");
        }
        NdStyle::Stub => {
            let _ = write!(
                out,
                "#include <stdlib.h>

/* Choices come from ${STUB_CHOICES_VAR}, a comma-separated list; 0 once exhausted. */
static const char *nd_cursor;

static int nd_int(void)
{{
    char *end;
    long v;
    if (nd_cursor == 0) {{
        nd_cursor = getenv(\"{STUB_CHOICES_VAR}\");
        if (nd_cursor == 0) {{
            nd_cursor = \"\";
        }}
    }}
    while (*nd_cursor == ',' || *nd_cursor == ' ') {{
        nd_cursor++;
    }}
    if (*nd_cursor == '\\0') {{
        return 0;
    }}
    v = strtol(nd_cursor, &end, 10);
    if (end == nd_cursor) {{
        return 0;
    }}
    nd_cursor = end;
    return (int)v;
}}

/* An infeasible run ends quietly. */
static void nd_assume(int cond)
{{
    if (!cond) {{
        exit(0);
    }}
}}
"
            );
        }
    }
    for name in inputs {
        let _ = write!(out, "\nint {name}(void)\n{{\n    return {}();\n}}\n", style.nondet());
    }
    out
}

struct Emitter {
    style: NdStyle,
    names: NameSupply,
    temps: Vec<String>,
    out: String,
}

impl Emitter {
    fn indent(&mut self, depth: usize) {
        for _ in 0..depth {
            self.out.push_str(INDENT);
        }
    }

    /// Replace `nd()` by the nondet call and hoist every `nd(l, u)` into a
    /// temporary, emitting its definition lines.
    fn lower(&mut self, e: &Expr, depth: usize) -> Expr {
        match e {
            Expr::Nd => Expr::Input(self.style.nondet().into()),
            Expr::NdRange { lo, hi } => {
                let lo = self.lower(lo, depth);
                let hi = self.lower(hi, depth);
                let t = self.names.fresh(&format!("{TEMP_PREFIX}{}", self.temps.len()));
                self.temps.push(t.clone());
                self.indent(depth);
                let _ = writeln!(
                    self.out,
                    "{t} = {}(); {}({} <= {t} && {t} <= {});",
                    self.style.nondet(),
                    self.style.assume(),
                    expr_to_string(&lo),
                    expr_to_string(&hi)
                );
                Expr::var(t)
            }
            Expr::BinOp { op, lhs, rhs } => {
                let l = self.lower(lhs, depth);
                let r = self.lower(rhs, depth);
                Expr::bin(*op, l, r)
            }
            Expr::Ternary { cond, then, els } => {
                let c = self.lower(cond, depth);
                let t = self.lower(then, depth);
                let f = self.lower(els, depth);
                Expr::ternary(c, t, f)
            }
            Expr::Read(LValue::ArrayAccess { array, index }) => Expr::index(array.clone(), self.lower(index, depth)),
            Expr::Read(LValue::Var(_)) | Expr::Const(_) | Expr::Input(_) => e.clone(),
        }
    }

    fn braced(&mut self, b: &[Stmt], depth: usize) {
        self.out.push_str("{\n");
        for s in b {
            self.stmt(s, depth + 1);
        }
        self.indent(depth);
        self.out.push('}');
    }

    fn stmt(&mut self, s: &Stmt, depth: usize) {
        match &s.kind {
            StmtKind::Seq(b) => {
                self.indent(depth);
                self.braced(b, depth);
            }
            StmtKind::If { cond, then, els } => {
                let c = self.lower(cond, depth);
                self.indent(depth);
                let _ = write!(self.out, "if ({}) ", expr_to_string(&c));
                self.braced(then, depth);
                if let Some(e) = els {
                    self.out.push_str(" else ");
                    self.braced(e, depth);
                }
            }
            StmtKind::For { iterator, init, test, step, body } => {
                let (i, t, st) = (self.lower(init, depth), self.lower(test, depth), self.lower(step, depth));
                self.indent(depth);
                let _ = write!(
                    self.out,
                    "for ({iterator} = {}; {}; {iterator} = {}) ",
                    expr_to_string(&i),
                    expr_to_string(&t),
                    expr_to_string(&st)
                );
                self.braced(body, depth);
            }
            StmtKind::Assign { target, value } => {
                let v = self.lower(value, depth);
                self.indent(depth);
                let _ = write!(self.out, "{} = {};", lvalue_to_string(target), expr_to_string(&v));
            }
            StmtKind::MultiAssign { targets, value } => {
                let v = self.lower(value, depth);
                self.indent(depth);
                for t in targets {
                    let _ = write!(self.out, "{t} = ");
                }
                let _ = write!(self.out, "{};", expr_to_string(&v));
            }
            StmtKind::Assert(e) => {
                let e = self.lower(e, depth);
                self.indent(depth);
                let _ = write!(self.out, "assert({});", expr_to_string(&e));
            }
            StmtKind::WitnessWrite { guard, target, value } => {
                let g = self.lower(guard, depth);
                let v = self.lower(value, depth);
                let v = expr_to_string(&v);
                self.indent(depth);
                let _ = write!(self.out, "if ({}) {{ {target} = {v}; }} else {{ (void)({v}); }}", expr_to_string(&g));
            }
            StmtKind::Break => {
                self.indent(depth);
                self.out.push_str("break;");
            }
            StmtKind::Continue => {
                self.indent(depth);
                self.out.push_str("continue;");
            }
        }
        self.out.push('\n');
    }
}

fn input_functions(p: &Program) -> Vec<&str> {
    let mut names: Vec<&str> = Vec::new();
    p.walk(|s| {
        for e in s.own_exprs() {
            e.walk(&mut |e| {
                if let Expr::Input(n) = e {
                    if !names.contains(&n.as_str()) {
                        names.push(n);
                    }
                }
            });
        }
    });
    names.sort_unstable();
    names
}

pub fn emit_verifiable(p: &Program, cfg: &EmitConfig) -> Result<String, EmitError> {
    let report = validate_output_grammar(p);
    if let Some(v) = report.violations.first() {
        return Err(EmitError::NotOutputGrammar(v.to_string()));
    }
    let mut e =
        Emitter { style: cfg.nd_style, names: NameSupply::for_program(p), temps: Vec::new(), out: String::new() };
    for s in &p.body {
        e.stmt(s, 1);
    }
    let body = core::mem::take(&mut e.out);

    let mut out = String::new();
    if cfg.header_comment {
        let _ =
            writeln!(out, "/* Array-free, loop-free abstraction; nondeterminism style: {}. */\n", cfg.nd_style.name());
    }
    out.push_str(&preamble(cfg.nd_style, &input_functions(p)));
    out.push('\n');
    out.push_str(MARKER);
    out.push('\n');
    for d in &p.decls {
        print_decl(&mut out, d);
        out.push('\n');
    }
    for t in &e.temps {
        let _ = writeln!(out, "int {t};");
    }
    out.push_str("\nint main(void)\n{\n");
    out.push_str(&body);
    out.push_str("    return 0;\n}\n");
    Ok(out)
}

/// Replace whole-identifier occurrences of `name` in `text`.
fn replace_ident(text: &str, name: &str, with: &str) -> String {
    let is_ident = |c: char| c.is_ascii_alphanumeric() || c == '_';
    let mut out = String::new();
    let mut rest = text;
    while let Some(pos) = rest.find(name) {
        let before_ok = rest[..pos].chars().next_back().is_none_or(|c| !is_ident(c));
        let after = &rest[pos + name.len()..];
        let after_ok = after.chars().next().is_none_or(|c| !is_ident(c));
        out.push_str(&rest[..pos]);
        out.push_str(if before_ok && after_ok { with } else { name });
        rest = after;
    }
    out.push_str(rest);
    out
}

/// `t = NONDET(); ASSUME(lo <= t && t <= hi);` as `(t, lo, hi)`.
fn parse_temp_line(line: &str, style: NdStyle) -> Option<(&str, &str, &str)> {
    let line = line.trim();
    let (t, rest) = line.split_once(" = ")?;
    if !t.starts_with(TEMP_PREFIX) {
        return None;
    }
    let rest = rest.strip_prefix(style.nondet())?.strip_prefix("(); ")?;
    let inner = rest.strip_prefix(style.assume())?.strip_prefix('(')?.strip_suffix(");")?;
    let (lo, rest) = inner.split_once(&format!(" <= {t} && "))?;
    let hi = rest.strip_prefix(&format!("{t} <= "))?;
    Some((t, lo, hi))
}

/// `if (g) { x = e; } else { (void)(e); }` back to `(g) ? x = e : e;`.
fn lift_guarded(line: &str) -> Option<String> {
    let trimmed = line.trim();
    let body = trimmed.strip_prefix("if (")?.strip_suffix("); }")?;
    let (head, value) = body.rsplit_once("; } else { (void)(")?;
    let (guard, assign) = head.split_once(") { ")?;
    let (target, value2) = assign.split_once(" = ")?;
    if value != value2 {
        return None;
    }
    let indent = &line[..line.len() - line.trim_start().len()];
    Some(format!("{indent}({guard}) ? {target} = {value} : {value};"))
}

/// Undo [`emit_verifiable`]: drop the preamble and temporaries, fold `nd`
/// calls and guarded writes back into their source forms, and parse.
pub fn lift_verifiable(text: &str, style: NdStyle) -> Result<Program, ParseError> {
    let program = match text.find(MARKER) {
        Some(at) => &text[at + MARKER.len()..],
        None => text,
    };
    let nondet_call = format!("{}()", style.nondet());
    let mut out = String::new();
    let mut pending: Vec<(String, String)> = Vec::new();
    for line in program.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with(&format!("int {TEMP_PREFIX}")) || trimmed == "return 0;" {
            continue;
        }
        if let Some((t, lo, hi)) = parse_temp_line(line, style) {
            pending.push((t.into(), format!("nd({lo}, {hi})")));
            continue;
        }
        let mut l = match lift_guarded(line) {
            Some(l) => l,
            None if trimmed == "int main(void)" => "main()".into(),
            None => line.into(),
        };
        for (t, nd) in pending.drain(..) {
            l = replace_ident(&l, &t, &nd);
        }
        l = l.replace(&nondet_call, "nd()");
        out.push_str(&l);
        out.push('\n');
    }
    crate::parser::parse(&out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::transform::transform_program;

    const HALVES: &str = "int i; int x; int y; int a[8]; int b[4];
        main() {
            x = user_input(); y = user_input();
            for (i = 0; i < 4; i++) { a[i] = x; b[i] = y; a[i + 4] = x * 2; x = x + 1; y = y + 1; }
            for (i = 0; i < 4; i++) { assert(a[i] * 2 == a[i + 4]); }
        }";

    #[test]
    fn svcomp_lowering_of_ranged_nd() {
        let p = parse("int i_a; /*@ witness_index(a, 100000) @*/ main(){ i_a = nd(0, 99999); }").unwrap();
        let text = emit_verifiable(&p, &EmitConfig { nd_style: NdStyle::Svcomp, header_comment: false }).unwrap();
        assert!(text.contains(
            "    __nd_t0 = __VERIFIER_nondet_int(); __VERIFIER_assume(0 <= __nd_t0 && __nd_t0 <= 99999);\n    i_a = __nd_t0;\n"
        ), "{text}");
    }

    #[test]
    fn cbmc_names() {
        let t = transform_program(&parse(HALVES).unwrap()).unwrap();
        let text = emit_verifiable(&t, &EmitConfig::default()).unwrap();
        assert!(text.contains("int nondet_int(void);"));
        assert!(text.contains("__CPROVER_assume("));
        assert!(text.contains("x = nondet_int();"));
        assert!(
            text.contains("if ((i + 4 == i_a)) { x_a = x * 2; } else { (void)(x * 2); }")
                || text.contains("if (i + 4 == i_a) { x_a = x * 2; } else { (void)(x * 2); }"),
            "{text}"
        );
        assert!(text.contains("int user_input(void)"));
    }

    #[test]
    fn stub_is_self_contained() {
        let t = transform_program(&parse(HALVES).unwrap()).unwrap();
        let text = emit_verifiable(&t, &EmitConfig { nd_style: NdStyle::Stub, header_comment: true }).unwrap();
        assert!(text.starts_with("/* Array-free"));
        assert!(text.contains("static int nd_int(void)"));
        assert!(text.contains("getenv(\"ND_CHOICES\")"));
        assert!(!text.contains("nondet_int"));
    }

    #[test]
    fn round_trip_every_style() {
        for src in [HALVES, "int a[4]; int i; int x; main(){ for(i=0;i<4;i++){ x = a[i]; if (x > 2) { break; } } }"] {
            let t = transform_program(&parse(src).unwrap()).unwrap();
            for style in NdStyle::ALL {
                let text = emit_verifiable(&t, &EmitConfig { nd_style: style, header_comment: true }).unwrap();
                assert_eq!(lift_verifiable(&text, style).unwrap(), t, "{}\n{text}", style.name());
            }
        }
    }

    #[test]
    fn rejects_programs_with_arrays() {
        let p = parse("int a[2]; main(){ a[0] = 1; }").unwrap();
        assert!(emit_verifiable(&p, &EmitConfig::default()).is_err());
    }

    #[test]
    fn ident_replacement_respects_boundaries() {
        assert_eq!(replace_ident("__nd_t1 + __nd_t10", "__nd_t1", "X"), "X + __nd_t10");
    }

    #[test]
    fn style_names_parse() {
        for s in NdStyle::ALL {
            assert_eq!(s.name().parse::<NdStyle>(), Ok(s));
        }
        assert!("z3".parse::<NdStyle>().is_err());
    }
}
