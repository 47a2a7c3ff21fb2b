//! Seeded verification jobs over the `silab-core` library, with schema-versioned reports.

pub mod config;
pub mod emit;
pub mod jobs;
pub mod registry;
pub mod report;
pub mod suite;

use std::path::PathBuf;

pub use config::{ExperimentConfig, Overrides, Params};
pub use report::{Document, Outcome, Report, SuiteReport};

/// Usage-level failures; all map to exit code 3.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown lemma id `{0}`")]
    UnknownLemma(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("job `{lemma}` failed: {source}")]
    Job {
        lemma: String,
        #[source]
        source: silab_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        3
    }
}

/// Runs one configured job. Errors that say the instance is out of reach
/// (unmet hypotheses, budget, unsupported scale) become unmet hypotheses in the report.
pub fn run(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let entry = registry::lookup(&cfg.lemma)?;
    cfg.params.validate()?;
    let mut findings = report::Findings::default();
    let started = std::time::Instant::now();
    match (entry.runner)(&cfg.params, &mut findings) {
        Ok(()) => {}
        Err(e @ (silab_core::Error::HypothesisNotMet(_) | silab_core::Error::BudgetExceeded { .. } | silab_core::Error::Unsupported(_))) => {
            findings.hypothesis(&e.to_string(), false);
        }
        Err(source) => {
            return Err(HarnessError::Job {
                lemma: entry.id.to_string(),
                source,
            })
        }
    }
    let outcome = findings.outcome();
    eprintln!("[silab] {} {} in {:.2?}", entry.id, outcome, started.elapsed());
    Ok(Report {
        schema_version: report::SCHEMA_VERSION,
        lemma: entry.id.to_string(),
        anchor: entry.anchor.to_string(),
        config: cfg.clone(),
        hypotheses: findings.hypotheses,
        outcome,
        checks: findings.checks,
        violations: findings.violations,
        counterexamples: findings.counterexamples,
        timing: report::Timing { work_units: findings.work },
        observed: findings.observed,
        counting_rows: findings.rows,
    })
}
