//! Flipping one membership answer must turn a passing job into a failing one.
//! Kept in its own binary because the hook is process-global.

use silab::config::{ExperimentConfig, Overrides};
use silab::report::Outcome;
use silab::run;
use silab_core::mideal::mutation;

#[test]
fn flipped_membership_is_detected() {
    let cfg = ExperimentConfig::resolve("nott", &Overrides::default(), None).unwrap();
    assert_eq!(run(&cfg).unwrap().outcome, Outcome::Pass);

    mutation::arm(0);
    let mutated = run(&cfg);
    mutation::disarm();
    assert_eq!(mutated.unwrap().outcome, Outcome::Fail);

    assert_eq!(run(&cfg).unwrap().outcome, Outcome::Pass);
}
