use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Stored counterexamples per report; the total is always in `violations`.
const MAX_STORED: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    HypothesisNotMet,
    Fail,
}

impl Outcome {
    /// Process exit code for this outcome.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::HypothesisNotMet => 2,
        }
    }

    /// Worst-of aggregation: any failure fails, otherwise any unmet hypothesis.
    pub fn combine(outcomes: impl IntoIterator<Item = Outcome>) -> Outcome {
        outcomes.into_iter().max().unwrap_or(Outcome::Pass)
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::HypothesisNotMet => "hypothesis-not-met",
            Outcome::Fail => "fail",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    pub name: String,
    pub met: bool,
}

/// One row of a point-count table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub p: u64,
    pub d: usize,
    pub r: usize,
    pub exact: u64,
    pub main_term: u64,
    /// `(exact − main) / main`.
    pub normalized_deviation: f64,
}

/// Machine-independent cost measure; wall-clock time is logged to stderr only.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub work_units: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub lemma: String,
    pub anchor: String,
    pub config: ExperimentConfig,
    pub hypotheses: Vec<HypothesisRecord>,
    pub outcome: Outcome,
    pub checks: u64,
    pub violations: u64,
    pub counterexamples: Vec<Value>,
    pub timing: Timing,
    pub observed: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub counting_rows: Vec<CountRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub pass: usize,
    pub fail: usize,
    pub hypothesis_not_met: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub outcome: Outcome,
    pub summary: SuiteSummary,
    pub reports: Vec<Report>,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: Option<u64>, reports: Vec<Report>) -> Self {
        let count = |o| reports.iter().filter(|r| r.outcome == o).count();
        Self {
            schema_version: SCHEMA_VERSION,
            suite: suite.to_string(),
            seed,
            outcome: Outcome::combine(reports.iter().map(|r| r.outcome)),
            summary: SuiteSummary {
                pass: count(Outcome::Pass),
                fail: count(Outcome::Fail),
                hypothesis_not_met: count(Outcome::HypothesisNotMet),
            },
            reports,
        }
    }
}

/// Either kind of report file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Document {
    Lemma(Report),
    Suite(SuiteReport),
}

impl Document {
    pub fn outcome(&self) -> Outcome {
        match self {
            Document::Lemma(r) => r.outcome,
            Document::Suite(s) => s.outcome,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Accumulates the evidence a job produces.
#[derive(Debug, Default)]
pub struct Findings {
    pub(crate) hypotheses: Vec<HypothesisRecord>,
    pub(crate) checks: u64,
    pub(crate) violations: u64,
    pub(crate) counterexamples: Vec<Value>,
    pub(crate) observed: BTreeMap<String, Value>,
    pub(crate) rows: Vec<CountRow>,
    pub(crate) work: u64,
}

impl Findings {
    /// Records a hypothesis of the job as a whole.
    pub fn hypothesis(&mut self, name: &str, met: bool) {
        self.hypotheses.push(HypothesisRecord {
            name: name.to_string(),
            met,
        });
    }

    /// Records one checked claim; `witness` is built only on failure.
    pub fn check(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
            if self.counterexamples.len() < MAX_STORED {
                self.counterexamples.push(witness());
            }
        }
    }

    pub fn observe(&mut self, key: &str, value: impl Serialize) {
        self.observed
            .insert(key.to_string(), serde_json::to_value(value).expect("observations serialize"));
    }

    pub fn work(&mut self, units: u64) {
        self.work = self.work.saturating_add(units);
    }

    pub fn row(&mut self, row: CountRow) {
        self.rows.push(row);
    }

    pub fn outcome(&self) -> Outcome {
        if self.violations > 0 {
            Outcome::Fail
        } else if self.checks == 0 || self.hypotheses.iter().any(|h| !h.met) {
            Outcome::HypothesisNotMet
        } else {
            Outcome::Pass
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_rules() {
        let mut f = Findings::default();
        assert_eq!(f.outcome(), Outcome::HypothesisNotMet);
        f.check(true, || Value::Null);
        assert_eq!(f.outcome(), Outcome::Pass);
        f.hypothesis("dimension", false);
        assert_eq!(f.outcome(), Outcome::HypothesisNotMet);
        for _ in 0..20 {
            f.check(false, || Value::from(1));
        }
        assert_eq!(f.outcome(), Outcome::Fail);
        assert_eq!(f.violations, 20);
        assert_eq!(f.counterexamples.len(), MAX_STORED);
    }

    #[test]
    fn combine_is_worst_of() {
        use Outcome::*;
        assert_eq!(Outcome::combine([Pass, HypothesisNotMet]), HypothesisNotMet);
        assert_eq!(Outcome::combine([Fail, HypothesisNotMet, Pass]), Fail);
        assert_eq!(Outcome::combine([]), Pass);
        assert_eq!([Pass, Fail, HypothesisNotMet].map(Outcome::exit_code), [0, 1, 2]);
    }
}
