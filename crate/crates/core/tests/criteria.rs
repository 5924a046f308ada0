//! The construction checks at reduced sizes; the acceptance target runs them
//! at full size.

#[path = "support/criteria.rs"]
mod criteria;

fn pass(c: criteria::Check) {
    match c {
        Ok(msg) => println!("{msg}"),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn recursive_machine_agrees_with_direct_simulation() {
    pass(criteria::rtm_equivalence());
}

#[test]
fn memoized_invocations_grow_linearly() {
    pass(criteria::rtm_linear_memo());
}

#[test]
fn unmemoized_invocations_respect_the_cost_recurrence() {
    pass(criteria::rtm_unmemoized_growth());
}

#[test]
fn alternating_evaluation_agrees_with_win_values() {
    pass(criteria::atm_equivalence());
}

#[test]
fn summarizer_stays_at_depth_two_with_bounded_frames() {
    pass(criteria::summarizer());
}

#[test]
fn sat_solver_is_sound_on_small_bands() {
    pass(criteria::sat_soundness(10));
}

#[test]
fn band_trend_holds_on_a_small_sample() {
    pass(criteria::band_trend(30));
}

#[test]
fn scaffold_fixtures_and_prover_verifier_cases() {
    pass(criteria::scaffolds());
}

#[test]
fn linear_fit_of_a_line_is_exact() {
    let pts: Vec<(f64, f64)> = (0..10).map(|x| (x as f64, 3.0 * x as f64 + 1.0)).collect();
    let (b, r2) = criteria::linear_fit(&pts);
    assert!((b - 3.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
}
