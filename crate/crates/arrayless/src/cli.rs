//! Command-line driver: parse, transform, classify, emit, and optionally run
//! the bounded oracle or an external checker.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use arrayless_core::analysis::IndexRange;
use arrayless_core::oracle::{differential_check, OracleConfig};
use arrayless_core::transform::transform_program_with_info;
use arrayless_core::{emit_verifiable, parse, EmitConfig, NdStyle};
use clap::{Args, Parser, Subcommand};

use crate::report::{assertion_entry, build_report, emit_report};
use crate::trace;
use crate::{write_atomic, Error};

/// Largest array size the oracle accepts.
pub const MAX_ORACLE_SIZE: u64 = 8;

#[derive(Debug, Parser)]
#[command(name = "arrayless", version, about = "Rewrite array-looping C programs into array-free, loop-free ones")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Transform one program.
    Transform(TransformArgs),
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Program to transform.
    pub input: PathBuf,
    /// Where to write the C output (default: standard output).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// How nondeterminism is spelled: cbmc, svcomp or stub.
    #[arg(long, default_value = "cbmc", value_parser = parse_style)]
    pub nd_style: NdStyle,
    /// Write the JSON analysis report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Print the precision verdict of every assertion.
    #[arg(long)]
    pub check_precision: bool,
    /// Run the bounded oracle on the original and the transformed program.
    #[arg(long, requires = "array_size")]
    pub oracle: bool,
    /// Shrink arrays to this size for the oracle.
    #[arg(long)]
    pub array_size: Option<u64>,
    /// Values taken by nd() and input() in the oracle.
    #[arg(long, default_value = "0:3", value_parser = parse_domain)]
    pub value_domain: IndexRange,
    /// Dump the oracle verdicts and witnesses as JSON.
    #[arg(long, requires = "oracle")]
    pub trace_json: Option<PathBuf>,
    /// Hand the emitted program to the checker named by BMC_BIN.
    #[arg(long)]
    pub bmc: bool,
}

fn parse_style(s: &str) -> Result<NdStyle, String> {
    s.parse()
}

pub fn parse_domain(s: &str) -> Result<IndexRange, String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if lo > hi {
        return Err(format!("empty domain {lo}:{hi}"));
    }
    Ok(IndexRange { lo, hi })
}

/// Exit status for a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The oracle found a soundness or precision-consistency violation.
    Violation,
    /// External checker exit status, relayed.
    Relayed(u8),
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        match s {
            Status::Ok => ExitCode::SUCCESS,
            Status::Violation => ExitCode::from(1),
            Status::Relayed(c) => ExitCode::from(c),
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> Result<Status, Error> {
    match cli.command {
        Cmd::Transform(args) => transform(&args, out, err),
    }
}

fn read_input(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
        _ => Error::Io { path: path.to_path_buf(), source },
    })
}

fn transform(
    args: &TransformArgs,
    out: &mut dyn std::io::Write,
    err: &mut dyn std::io::Write,
) -> Result<Status, Error> {
    if args.oracle {
        match args.array_size {
            Some(n) if (1..=MAX_ORACLE_SIZE).contains(&n) => {}
            _ => return Err(Error::Usage(format!("--oracle needs --array-size between 1 and {MAX_ORACLE_SIZE}"))),
        }
    }
    let src = read_input(&args.input)?;
    let original = parse(&src).map_err(|e| Error::Parse { path: args.input.clone(), error: e })?;
    let info = transform_program_with_info(&original).map_err(|e| Error::Analysis(e.to_string()))?;
    let text = emit_verifiable(&info.program, &EmitConfig { nd_style: args.nd_style, header_comment: true })
        .map_err(|e| Error::Analysis(e.to_string()))?;

    let summary_mode = args.oracle || args.check_precision;
    match &args.output {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None if !summary_mode => out.write_all(text.as_bytes()).map_err(Error::stdout)?,
        None => {}
    }
    if let Some(path) = &args.report {
        let report = build_report(&original, &info.arrays, &info.summaries);
        write_atomic(path, emit_report(&report).as_bytes())?;
    }
    if args.check_precision {
        for loc in original.assertions() {
            let e = assertion_entry(&original, loc);
            let line = match (e.precise, &e.note) {
                (true, _) => format!("assertion {}: precise", e.location),
                (false, Some(note)) => format!("assertion {}: imprecise ({note})", e.location),
                (false, None) => {
                    let rules: Vec<String> =
                        e.violated_rules.iter().map(|v| format!("{} at {}: {}", v.rule, v.location, v.note)).collect();
                    format!("assertion {}: imprecise [{}]", e.location, rules.join("; "))
                }
            };
            writeln!(out, "{line}").map_err(Error::stdout)?;
        }
    }

    let mut status = Status::Ok;
    if args.oracle {
        let cfg = OracleConfig {
            value_domain: args.value_domain,
            array_size_override: args.array_size,
            ..OracleConfig::default()
        };
        let d = differential_check(&original, &info.program, &cfg).map_err(|e| Error::Oracle(e.to_string()))?;
        let verdict = |v: &arrayless_core::oracle::Verdict| match &v.witness {
            Some(t) => format!(
                "{} (runs {}; fails at {} with choices {:?})",
                v.outcome, v.runs, t.failing_assert, t.nd_choices
            ),
            None => format!("{} (runs {})", v.outcome, v.runs),
        };
        let yes = |b: bool| if b { "yes" } else { "no" };
        writeln!(out, "original:           {}", verdict(&d.original)).map_err(Error::stdout)?;
        writeln!(out, "transformed:        {}", verdict(&d.transformed)).map_err(Error::stdout)?;
        writeln!(out, "sound:              {}", yes(d.sound)).map_err(Error::stdout)?;
        writeln!(out, "precise:            {}", yes(d.precise)).map_err(Error::stdout)?;
        writeln!(out, "precise-consistent: {}", yes(d.precise_consistent)).map_err(Error::stdout)?;
        if let Some(path) = &args.trace_json {
            write_atomic(path, trace::to_json(&d).as_bytes())?;
        }
        if !d.sound || !d.precise_consistent {
            status = Status::Violation;
        }
    }

    if args.bmc {
        match std::env::var_os("BMC_BIN") {
            None => writeln!(err, "warning: --bmc given but BMC_BIN is not set; skipping").map_err(Error::stdout)?,
            Some(bin) => match run_checker(Path::new(&bin), &text, args.output.as_deref())? {
                None => writeln!(err, "warning: checker {} not found; skipping", Path::new(&bin).display())
                    .map_err(Error::stdout)?,
                Some(code) if status == Status::Ok && code != 0 => status = Status::Relayed(code),
                Some(_) => {}
            },
        }
    }
    Ok(status)
}

/// Run the checker on the emitted file (a temporary copy when no output path
/// was given) and return its exit status, or `None` if it cannot be found.
fn run_checker(bin: &Path, text: &str, output: Option<&Path>) -> Result<Option<u8>, Error> {
    let tmp;
    let file = match output {
        Some(p) => p.to_path_buf(),
        None => {
            tmp = tempfile::Builder::new()
                .suffix(".c")
                .tempfile()
                .map_err(|source| Error::Io { path: std::env::temp_dir(), source })?;
            std::fs::write(tmp.path(), text).map_err(|source| Error::Io { path: tmp.path().into(), source })?;
            tmp.path().to_path_buf()
        }
    };
    match Command::new(bin).arg(&file).status() {
        Ok(status) => Ok(Some(status.code().map_or(1, |c| c.clamp(0, 255) as u8))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(Error::Io { path: bin.to_path_buf(), source }),
    }
}
