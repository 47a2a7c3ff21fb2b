use rayon::prelude::*;

use crate::config::{ExperimentConfig, Overrides};
use crate::report::SuiteReport;
use crate::{registry, run, HarnessError};

pub const SUITES: [&str; 2] = ["fast", "full"];

/// Worker count from `SILAB_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("SILAB_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every registry entry with the suite's parameters. Reports come back in
/// registry order whatever the scheduling.
pub fn run_suite(name: &str, seed: Option<u64>) -> Result<SuiteReport, HarnessError> {
    if !SUITES.contains(&name) {
        return Err(HarnessError::OutOfRange(format!("suite `{name}` is not one of {SUITES:?}")));
    }
    let configs: Vec<ExperimentConfig> = registry::entries()
        .iter()
        .map(|e| {
            let base = e.params_for(name);
            let params = seed.map_or(base.clone(), |s| Overrides::seed(s).apply(&base));
            params.validate()?;
            Ok(ExperimentConfig {
                lemma: e.id.to_string(),
                params,
                out: None,
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    let go = || configs.par_iter().map(run).collect::<Result<Vec<_>, _>>();
    let reports = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::OutOfRange(format!("SILAB_THREADS: {e}")))?
            .install(go)?,
        None => go()?,
    };
    Ok(SuiteReport::new(name, seed, reports))
}
