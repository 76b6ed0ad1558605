//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test -p fracspec --test acceptance -- --nocapture` to see
//! every line; tolerances are pinned inside the criterion runners.

use fracspec::verify;

fn check(report: verify::CriterionReport) {
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
}

#[test]
fn criterion_01_free_operator_exactness() {
    check(verify::criterion_01_free_exactness(1.0));
}

#[test]
fn criterion_02_first_correction_scaling() {
    check(verify::criterion_02_f1_scaling(1.0, None));
}

#[test]
fn criterion_03_binding_formula() {
    check(verify::criterion_03_binding(1.0, None));
}

#[test]
fn criterion_04_iteration_identity() {
    check(verify::criterion_04_iteration_identity(1.0, None));
}

#[test]
fn criterion_05_mean_value_inclusions() {
    check(verify::criterion_05_mvt_inclusions(1.0));
}

#[test]
fn criterion_06_series_term_bound() {
    check(verify::criterion_06_series_bound(1.0, None));
}

#[test]
fn criterion_07_matching_and_window_mass() {
    check(verify::criterion_07_matching(1.0, None));
}

#[test]
fn criterion_08_measure_trend() {
    check(verify::criterion_08_measure_trend(1.0));
}

#[test]
fn criterion_09_band_narrowing() {
    check(verify::criterion_09_band_narrowing(1.0));
}

#[test]
fn criterion_10_assembly_vs_quadrature() {
    check(verify::criterion_10_assembly_quadrature(1.0));
}

#[test]
fn criterion_11_window_counting() {
    check(verify::criterion_11_window_counts(1.0));
}
