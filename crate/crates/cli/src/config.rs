use serde::{Deserialize, Serialize};
use silab_core::field_linalg::is_prime;
use std::path::PathBuf;

use crate::HarnessError;

/// Fully resolved job parameters. Every job reads the subset it needs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub p: u64,
    pub d: usize,
    pub s: u32,
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Point-evaluation budget for enumerations.
    pub budget: u64,
}

/// Documented parameter ranges.
pub mod limits {
    pub const P_MAX: u64 = 257;
    pub const D_MAX: usize = 16;
    pub const S_MAX: u32 = 6;
    pub const K_MAX: usize = 8;
    pub const N_MAX: usize = 64;
    pub const TRIALS_MAX: usize = 100_000;
    pub const BUDGET_MAX: u64 = 10_000_000_000;
}

impl Params {
    pub const fn new(p: u64, d: usize, s: u32, k: usize, n: usize, trials: usize, seed: u64, budget: u64) -> Self {
        Self {
            p,
            d,
            s,
            k,
            n,
            trials,
            seed,
            budget,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        use limits::*;
        let bad = |what: &str, v: String, range: &str| Err(HarnessError::OutOfRange(format!("{what} = {v} outside {range}")));
        if !(3..=P_MAX).contains(&self.p) || !is_prime(self.p) {
            return bad("p", self.p.to_string(), &format!("odd primes up to {P_MAX}"));
        }
        if !(1..=D_MAX).contains(&self.d) {
            return bad("d", self.d.to_string(), &format!("1..={D_MAX}"));
        }
        if self.s > S_MAX {
            return bad("s", self.s.to_string(), &format!("0..={S_MAX}"));
        }
        if self.k > K_MAX {
            return bad("k", self.k.to_string(), &format!("0..={K_MAX}"));
        }
        if self.n > N_MAX {
            return bad("N", self.n.to_string(), &format!("0..={N_MAX}"));
        }
        if !(1..=TRIALS_MAX).contains(&self.trials) {
            return bad("trials", self.trials.to_string(), &format!("1..={TRIALS_MAX}"));
        }
        if !(1..=BUDGET_MAX).contains(&self.budget) {
            return bad("budget", self.budget.to_string(), &format!("1..={BUDGET_MAX}"));
        }
        Ok(())
    }
}

/// Optional overrides applied on top of a registry entry's defaults.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overrides {
    pub p: Option<u64>,
    pub d: Option<usize>,
    pub s: Option<u32>,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, base: &Params) -> Params {
        Params {
            p: self.p.unwrap_or(base.p),
            d: self.d.unwrap_or(base.d),
            s: self.s.unwrap_or(base.s),
            k: self.k.unwrap_or(base.k),
            n: self.n.unwrap_or(base.n),
            trials: self.trials.unwrap_or(base.trials),
            seed: self.seed.unwrap_or(base.seed),
            budget: self.budget.unwrap_or(base.budget),
        }
    }

    pub fn seed(seed: u64) -> Self {
        Self {
            seed: Some(seed),
            ..Self::default()
        }
    }
}

/// A validated request to run one registry job.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub lemma: String,
    pub params: Params,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Resolves `lemma` against the registry and validates the merged parameters.
    pub fn resolve(lemma: &str, overrides: &Overrides, out: Option<PathBuf>) -> Result<Self, HarnessError> {
        let entry = crate::registry::lookup(lemma)?;
        let params = overrides.apply(&entry.defaults);
        params.validate()?;
        Ok(Self {
            lemma: entry.id.to_string(),
            params,
            out,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Params {
        Params::new(11, 7, 1, 1, 2, 10, 1, 1 << 20)
    }

    #[test]
    fn ranges() {
        assert!(base().validate().is_ok());
        for bad in [
            Params { p: 9, ..base() },
            Params { p: 2, ..base() },
            Params { d: 0, ..base() },
            Params { s: 9, ..base() },
            Params { trials: 0, ..base() },
            Params { budget: 0, ..base() },
        ] {
            assert!(matches!(bad.validate(), Err(HarnessError::OutOfRange(_))), "{bad:?}");
        }
    }

    #[test]
    fn overrides_merge() {
        let o = Overrides {
            p: Some(13),
            seed: Some(9),
            ..Overrides::default()
        };
        let r = o.apply(&base());
        assert_eq!((r.p, r.seed, r.d), (13, 9, 7));
    }
}
