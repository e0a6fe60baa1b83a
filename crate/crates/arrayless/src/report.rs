//! JSON analysis report: arrays and their witnesses, loop facts, and the
//! precision verdict of every assertion.

use std::collections::BTreeMap;

use arrayless_core::analysis::{ArrayInfo, LoopBound, LoopSummary};
use arrayless_core::error::PrecisionError;
use arrayless_core::precision::classify;
use arrayless_core::{Loc, Program};
use serde::{Deserialize, Serialize};

pub const REPORT_EXTENSION: &str = ".report.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub arrays: Vec<ArrayEntry>,
    pub loops: Vec<LoopEntry>,
    pub assertions: Vec<AssertionEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayEntry {
    pub name: String,
    pub size: u64,
    pub witness_var: String,
    pub witness_idx: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopEntry {
    pub location: String,
    pub iterator: String,
    pub full_access: bool,
    pub defs: Vec<String>,
    pub bound: Bound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Bound {
    Known { lo: i64, hi: i64 },
    Empty,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertionEntry {
    pub location: String,
    pub precise: bool,
    pub violated_rules: Vec<ViolationEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationEntry {
    pub rule: String,
    pub location: String,
    pub note: String,
}

impl From<LoopBound> for Bound {
    fn from(b: LoopBound) -> Self {
        match b {
            LoopBound::Known(r) => Bound::Known { lo: r.lo, hi: r.hi },
            LoopBound::Empty => Bound::Empty,
            LoopBound::Unknown => Bound::Unknown,
        }
    }
}

/// Classify one assertion. Assertions outside every loop get no precision
/// claim and are reported imprecise with a note.
pub fn assertion_entry(p: &Program, loc: Loc) -> AssertionEntry {
    match classify(p, loc) {
        Ok(v) => AssertionEntry {
            location: loc.to_string(),
            precise: v.precise,
            violated_rules: v
                .violated_rules
                .into_iter()
                .map(|r| ViolationEntry { rule: r.rule.id().into(), location: r.location.to_string(), note: r.note })
                .collect(),
            note: None,
        },
        Err(e @ (PrecisionError::AssertionNotInLoop(_) | PrecisionError::AssertionNotFound(_))) => AssertionEntry {
            location: loc.to_string(),
            precise: false,
            violated_rules: Vec::new(),
            note: Some(e.to_string()),
        },
    }
}

pub fn build_report(original: &Program, arrays: &[ArrayInfo], summaries: &BTreeMap<Loc, LoopSummary>) -> Report {
    Report {
        arrays: arrays
            .iter()
            .map(|a| ArrayEntry {
                name: a.name.clone(),
                size: a.size,
                witness_var: a.witness_var.clone(),
                witness_idx: a.witness_idx.clone(),
            })
            .collect(),
        loops: summaries
            .values()
            .map(|s| LoopEntry {
                location: s.loop_loc.to_string(),
                iterator: s.iterator.clone(),
                full_access: s.full_access,
                defs: s.defs.clone(),
                bound: s.bound.into(),
            })
            .collect(),
        assertions: original.assertions().into_iter().map(|l| assertion_entry(original, l)).collect(),
    }
}

pub fn emit_report(r: &Report) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

/// Parse a report, rejecting unknown or missing fields.
pub fn parse_report(text: &str) -> Result<Report, serde_json::Error> {
    serde_json::from_str(text)
}

/// Report path derived from an input path: `dir/squares.c` -> `dir/squares.report.json`.
pub fn default_report_path(input: &std::path::Path) -> std::path::PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    input.with_file_name(format!("{stem}{REPORT_EXTENSION}"))
}
