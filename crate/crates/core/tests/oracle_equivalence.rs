#[path = "common/oracle_checks.rs"]
mod oracle_checks;

use oracle_checks::{check_abduction, check_ground_program};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solve_agrees_with_fixpoint(seed in any::<u64>()) {
        check_ground_program(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn abduce_agrees_with_subset_enumeration(seed in any::<u64>()) {
        check_abduction(seed).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn fixed_seed_sweeps() {
    for seed in 0..200 {
        check_ground_program(seed).unwrap();
        check_abduction(seed).unwrap();
    }
}

#[test]
fn open_query_with_millions_of_proofs() {
    check_ground_program(5021299161562010808).unwrap();
}
