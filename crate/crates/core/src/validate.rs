//! Conformance check against the array-free, loop-free output language.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Loop {
        loc: Loc,
    },
    ArrayAccess {
        loc: Loc,
        array: String,
    },
    ArrayDecl {
        name: String,
    },
    /// A witness index that the leading initialization block does not set
    /// from `nd(lo, hi)`.
    WitnessIndexNotInitialized {
        name: String,
    },
    /// A jump outside of a single-trip loop.
    StrayJump {
        loc: Loc,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Loop { loc } => write!(f, "{loc}: loop"),
            Violation::ArrayAccess { loc, array } => write!(f, "{loc}: access to array `{array}`"),
            Violation::ArrayDecl { name } => write!(f, "array declaration `{name}`"),
            Violation::WitnessIndexNotInitialized { name } => {
                write!(f, "witness index `{name}` is not initialized by nd(lo, hi) up front")
            }
            Violation::StrayJump { loc } => write!(f, "{loc}: break/continue outside a single-trip loop"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConformanceReport {
    pub loops: usize,
    pub single_trip_loops: usize,
    pub array_accesses: usize,
    pub violations: Vec<Violation>,
}

impl ConformanceReport {
    pub fn conformant(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_output_grammar(p: &Program) -> ConformanceReport {
    let mut report = ConformanceReport::default();
    for d in &p.decls {
        if d.is_array() {
            report.violations.push(Violation::ArrayDecl { name: d.name.clone() });
        }
    }

    fn visit(block: &[Stmt], in_single_trip: bool, report: &mut ConformanceReport) {
        for s in block {
            if let StmtKind::Assign { target: LValue::ArrayAccess { array, .. }, .. } = &s.kind {
                report.array_accesses += 1;
                report.violations.push(Violation::ArrayAccess { loc: s.loc, array: array.clone() });
            }
            for e in s.own_exprs() {
                for (array, _) in e.array_reads() {
                    report.array_accesses += 1;
                    report.violations.push(Violation::ArrayAccess { loc: s.loc, array: array.into() });
                }
            }
            match &s.kind {
                StmtKind::For { body, .. } => {
                    if s.is_single_trip() {
                        report.single_trip_loops += 1;
                        visit(body, true, report);
                    } else {
                        report.loops += 1;
                        report.violations.push(Violation::Loop { loc: s.loc });
                        visit(body, false, report);
                    }
                }
                StmtKind::Break | StmtKind::Continue if !in_single_trip => {
                    report.violations.push(Violation::StrayJump { loc: s.loc });
                }
                _ => {
                    for b in s.children() {
                        visit(b, in_single_trip, report);
                    }
                }
            }
        }
    }
    visit(&p.body, false, &mut report);

    // Leading statements that assign nd(lo, hi) to witness indices.
    let witness_indices: Vec<&str> =
        p.decls.iter().filter(|d| matches!(d.kind, DeclKind::WitnessIndex { .. })).map(|d| d.name.as_str()).collect();
    let mut initialized: Vec<&str> = Vec::new();
    for s in &p.body {
        let (targets, value): (Vec<&str>, &Expr) = match &s.kind {
            StmtKind::Assign { target: LValue::Var(t), value } => (alloc::vec![t.as_str()], value),
            StmtKind::MultiAssign { targets, value } => (targets.iter().map(String::as_str).collect(), value),
            _ => break,
        };
        if !matches!(value, Expr::NdRange { .. }) || !targets.iter().all(|t| witness_indices.contains(t)) {
            break;
        }
        initialized.extend(targets);
    }
    for w in witness_indices {
        if !initialized.contains(&w) {
            report.violations.push(Violation::WitnessIndexNotInitialized { name: w.into() });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn empty_body_is_conformant() {
        let r = validate_output_grammar(&parse("main(){ }").unwrap());
        assert!(r.conformant());
    }

    #[test]
    fn counts_loops_and_accesses() {
        let p = parse("int a[2]; int i; main(){ for (i = 0; i < 2; i++) { a[i] = a[i] + 1; } }").unwrap();
        let r = validate_output_grammar(&p);
        assert_eq!((r.loops, r.array_accesses), (1, 2));
        assert!(!r.conformant());
    }

    #[test]
    fn single_trip_loop_is_whitelisted() {
        let p = parse("int t; int x; main(){ for (t = 0; t < 1; t++) { x = 1; break; } }").unwrap();
        let r = validate_output_grammar(&p);
        assert!(r.conformant(), "{:?}", r.violations);
        assert_eq!(r.single_trip_loops, 1);
    }

    #[test]
    fn loop_assigning_its_trip_variable_is_not_single_trip() {
        let p = parse("int t; main(){ for (t = 0; t < 1; t++) { t = 0; } }").unwrap();
        assert!(!validate_output_grammar(&p).conformant());
    }

    #[test]
    fn witness_index_must_be_initialized_first() {
        let ok = parse("int i_a; /*@ witness_index(a, 4) @*/ int k; main(){ i_a = nd(0, 3); k = 1; }").unwrap();
        assert!(validate_output_grammar(&ok).conformant());
        let late = parse("int i_a; /*@ witness_index(a, 4) @*/ int k; main(){ k = 1; i_a = nd(0, 3); }").unwrap();
        let r = validate_output_grammar(&late);
        assert_eq!(r.violations, alloc::vec![Violation::WitnessIndexNotInitialized { name: "i_a".into() }]);
    }
}
