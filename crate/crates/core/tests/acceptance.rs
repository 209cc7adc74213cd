//! Acceptance criteria, one test per criterion.

use magnitude::verify;

fn check(id: u8) {
    let report = verify::run_one(id).expect("criterion exists");
    println!("{report}");
    assert!(report.passed, "{report}");
}

#[test]
fn c01_linear_closed_form() {
    check(1);
}

#[test]
fn c02_homogeneous_fast_path() {
    check(2);
}

#[test]
fn c03_segment_limit() {
    check(3);
}

#[test]
fn c04_separation_positive_definite() {
    check(4);
}

#[test]
fn c05_large_scale_limit() {
    check(5);
}

#[test]
fn c06_cantor_decomposition() {
    check(6);
}

#[test]
fn c07_cantor_bounds() {
    check(7);
}

#[test]
fn c08_cantor_fourier() {
    check(8);
}

#[test]
fn c09_intrinsic_circle() {
    check(9);
}

#[test]
fn c10_circle_asymptotics() {
    check(10);
}

#[test]
fn c11_circle_riemann_sums() {
    check(11);
}

#[test]
fn c12_property_suite() {
    check(12);
}

#[test]
fn all_criteria_listed() {
    let ids: Vec<u8> = verify::criteria().iter().map(|c| c.id).collect();
    assert_eq!(ids, (1..=12).collect::<Vec<_>>());
}
