use std::process::Command;

use arrayless::fixtures::{self, SQUARES_TRANSFORMED};
use arrayless::fuzz::{check_source, generate_source, oracle_config, run_corpus, Checked, FuzzConfig, DEFAULT_SEED};
use arrayless_core::analysis::IndexRange;
use arrayless_core::ast::*;
use arrayless_core::oracle::{differential_check, enumerate_runs, OracleConfig, Outcome};
use arrayless_core::precision::classify;
use arrayless_core::scale::scale_program;
use arrayless_core::transform::transform_program;
use arrayless_core::validate::validate_output_grammar;
use arrayless_core::{emit_verifiable, lift_verifiable, parse, print_program, EmitConfig, NdStyle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sources(seed: u64, n: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| generate_source(&mut rng, FuzzConfig::default())).collect()
}

#[test]
fn generator_is_deterministic() {
    assert_eq!(sources(7, 50), sources(7, 50));
    assert_ne!(sources(7, 50), sources(8, 50));
}

#[test]
fn corpus_run_is_deterministic() {
    let cfg = oracle_config();
    let a = run_corpus(DEFAULT_SEED, 40, FuzzConfig::default(), &cfg).unwrap();
    let b = run_corpus(DEFAULT_SEED, 40, FuzzConfig::default(), &cfg).unwrap();
    assert_eq!((a.generated, a.discarded, a.budget_exceeded), (b.generated, b.discarded, b.budget_exceeded));
    for (x, y) in a.cases.iter().zip(&b.cases) {
        assert_eq!(x.source, y.source);
        assert_eq!(x.result, y.result);
    }
}

#[test]
fn fixtures_round_trip_through_the_printer() {
    for (name, src) in fixtures::ALL.iter().copied().chain([("squares.transformed", SQUARES_TRANSFORMED)]) {
        let p = parse(src).unwrap();
        assert_eq!(parse(&print_program(&p)).unwrap(), p, "{name}");
        let t = transform_program(&p);
        if let Ok(t) = t {
            assert_eq!(parse(&print_program(&t)).unwrap(), t, "{name} transformed");
        }
    }
}

#[test]
fn emitted_text_lifts_back_for_fixtures_and_fuzz_output() {
    let mut programs: Vec<Program> =
        fixtures::ALL.iter().map(|(_, s)| transform_program(&parse(s).unwrap()).unwrap()).collect();
    for src in sources(11, 200) {
        if let Ok(p) = parse(&src) {
            if let Ok(t) = transform_program(&p) {
                programs.push(t);
            }
        }
    }
    assert!(programs.len() > 150);
    for t in &programs {
        assert!(validate_output_grammar(t).conformant());
        for style in NdStyle::ALL {
            let text = emit_verifiable(t, &EmitConfig { nd_style: style, header_comment: true }).unwrap();
            let back = lift_verifiable(&text, style).unwrap_or_else(|e| panic!("{e}\n{text}"));
            assert_eq!(&back, t, "{}\n{text}", style.name());
        }
    }
}

/// Adding code that shares nothing with an assertion keeps it precise.
#[test]
fn unrelated_code_keeps_precision() {
    let mut checked = 0;
    for src in sources(13, 400) {
        let Ok(p) = parse(&src) else { continue };
        let asserts = p.assertions();
        if asserts.is_empty() || !asserts.iter().all(|&a| classify(&p, a).is_ok_and(|v| v.precise)) {
            continue;
        }
        let mut decls = p.decls.clone();
        decls.push(Decl::scalar("fresh"));
        decls.push(Decl::scalar("m"));
        decls.push(Decl::array("other", 3));
        let scalar = Stmt::assign_var("fresh", Expr::bin(BinOp::Add, Expr::Nd, Expr::Const(1)));
        let lp = Stmt::new(StmtKind::For {
            iterator: "m".into(),
            init: Expr::Const(0),
            test: Expr::bin(BinOp::Lt, Expr::var("m"), Expr::Const(3)),
            step: Expr::bin(BinOp::Add, Expr::var("m"), Expr::Const(1)),
            body: vec![Stmt::assign(LValue::index("other", Expr::var("m")), Expr::var("fresh"))],
        });
        for (front, back) in [(vec![scalar.clone()], vec![]), (vec![], vec![lp.clone()]), (vec![lp, scalar], vec![])] {
            let mut body = front;
            body.extend(p.body.iter().cloned());
            body.extend(back);
            let q = Program::new(decls.clone(), body);
            for a in q.assertions() {
                let v = classify(&q, a).unwrap();
                assert!(v.precise, "{:?}\n{}", v.violated_rules, print_program(&q));
            }
        }
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} precise programs");
}

/// Widening the input domain can only add failing runs.
#[test]
fn verdicts_are_monotone_in_the_value_domain() {
    let narrow = OracleConfig { value_domain: IndexRange { lo: 0, hi: 1 }, ..oracle_config() };
    let wide = oracle_config();
    let mut checked = 0;
    for (k, src) in sources(17, 300).into_iter().enumerate() {
        let Ok(Checked::Case(c)) = check_source(k, src, &narrow) else { continue };
        let Ok(w) = differential_check(&c.program, &c.transformed, &wide) else { continue };
        if c.result.original.outcome == Outcome::Unsafe {
            assert_eq!(w.original.outcome, Outcome::Unsafe, "{}", c.source);
        }
        if c.result.transformed.outcome == Outcome::Unsafe {
            assert_eq!(w.transformed.outcome, Outcome::Unsafe, "{}", c.source);
        }
        checked += 1;
    }
    assert!(checked >= 100);
}

fn cc() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

/// The stub output compiles, and replaying the oracle's witness fails the
/// same way the oracle says it does.
#[test]
fn stub_output_replays_oracle_witnesses() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    for (name, src) in fixtures::ALL {
        let p = scale_program(&parse(src).unwrap(), 4);
        let t = transform_program(&p).unwrap();
        let text = emit_verifiable(&t, &EmitConfig { nd_style: NdStyle::Stub, header_comment: true }).unwrap();
        let c = dir.path().join(format!("{name}.c"));
        let exe = dir.path().join(name);
        std::fs::write(&c, &text).unwrap();
        let o = Command::new(&cc).arg("-w").arg("-o").arg(&exe).arg(&c).output().unwrap();
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));

        let v = enumerate_runs(&t, &OracleConfig::default()).unwrap();
        let run = |choices: &[i64]| {
            let list: Vec<String> = choices.iter().map(i64::to_string).collect();
            Command::new(&exe).env("ND_CHOICES", list.join(",")).output().unwrap().status.success()
        };
        match v.witness {
            Some(w) => assert!(!run(&w.nd_choices), "{name}: witness {:?} did not fail", w.nd_choices),
            None => assert!(run(&[]), "{name}: default run failed"),
        }
    }
}
