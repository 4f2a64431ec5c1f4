//! Acceptance criteria 1-13. Each test prints one `criterion N: PASS|FAIL` line.

use std::sync::LazyLock;

use latquant::reproduce::{Context, Settings};

static CTX: LazyLock<Context> = LazyLock::new(|| Context::new(Settings::full()));

fn check(id: u32) {
    let r = CTX.run(id).unwrap_or_else(|e| panic!("criterion {id}: FAIL (error: {e})"));
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn criterion_01_optimum_14() {
    check(1);
}

#[test]
fn criterion_02_optimum_13() {
    check(2);
}

#[test]
fn criterion_03_unit_scale_values() {
    check(3);
}

#[test]
fn criterion_04_phase_gap() {
    check(4);
}

#[test]
fn criterion_05_facet_counts() {
    check(5);
}

#[test]
fn criterion_06_theta_steps() {
    check(6);
}

#[test]
fn criterion_07_packing_and_covering() {
    check(7);
}

#[test]
fn criterion_08_monte_carlo_nsm() {
    check(8);
}

#[test]
fn criterion_09_isotropy_discrimination() {
    check(9);
}

#[test]
fn criterion_10_one_step_descent() {
    check(10);
}

#[test]
fn criterion_11_phase_test() {
    check(11);
}

#[test]
fn criterion_12_equivalence_certificates() {
    check(12);
}

#[test]
fn criterion_13_structural_invariants() {
    check(13);
}
