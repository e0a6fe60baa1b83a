//! JSON dumps of oracle verdicts and failing traces.

use std::collections::BTreeMap;

use arrayless_core::oracle::{DifferentialResult, Trace, Verdict};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceJson {
    pub nd_choices: Vec<i64>,
    pub failing_location: String,
    pub final_state: BTreeMap<String, i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictJson {
    pub outcome: String,
    pub runs: u64,
    pub witness: Option<TraceJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifferentialJson {
    pub original: VerdictJson,
    pub transformed: VerdictJson,
    pub sound: bool,
    pub precise: bool,
    pub precise_consistent: bool,
}

impl From<&Trace> for TraceJson {
    fn from(t: &Trace) -> Self {
        TraceJson {
            nd_choices: t.nd_choices.clone(),
            failing_location: t.failing_assert.to_string(),
            final_state: t.final_state.clone().into_iter().collect(),
        }
    }
}

impl From<&Verdict> for VerdictJson {
    fn from(v: &Verdict) -> Self {
        VerdictJson { outcome: v.outcome.to_string(), runs: v.runs, witness: v.witness.as_ref().map(TraceJson::from) }
    }
}

impl From<&DifferentialResult> for DifferentialJson {
    fn from(d: &DifferentialResult) -> Self {
        DifferentialJson {
            original: (&d.original).into(),
            transformed: (&d.transformed).into(),
            sound: d.sound,
            precise: d.precise,
            precise_consistent: d.precise_consistent,
        }
    }
}

pub fn to_json(d: &DifferentialResult) -> String {
    let mut s = serde_json::to_string_pretty(&DifferentialJson::from(d)).expect("trace serializes");
    s.push('\n');
    s
}
