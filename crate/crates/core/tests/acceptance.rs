//! The twelve acceptance criteria on the reference pencil, one test each.
//! Each test writes a PASS/FAIL line to stdout whether or not it passes.

use std::io::Write;
use std::sync::OnceLock;

use pencil_lab::battery::{Battery, BatteryConfig};

fn battery() -> &'static Battery {
    static B: OnceLock<Battery> = OnceLock::new();
    B.get_or_init(|| Battery::new(BatteryConfig::fig1()))
}

fn criterion(id: usize) {
    let o = battery().run(id);
    // Bypasses output capture so every line shows up in the test log.
    let _ = writeln!(std::io::stdout().lock(), "{}", o.line());
    assert!(o.passed, "{}", o.line());
}

#[test]
fn c01_branch_point_count() {
    criterion(1);
}

#[test]
fn c02_eigenvalue_asymptotics() {
    criterion(2);
}

#[test]
fn c03_root_localization() {
    criterion(3);
}

#[test]
fn c04_two_route_series_agreement() {
    criterion(4);
}

#[test]
fn c05_formal_limit_to_the_curve() {
    criterion(5);
}

#[test]
fn c06_phi0_closed_form() {
    criterion(6);
}

#[test]
fn c07_majorant_radius() {
    criterion(7);
}

#[test]
fn c08_branch_convergence() {
    criterion(8);
}

#[test]
fn c09_potential_example() {
    criterion(9);
}

#[test]
fn c10_example3_circle() {
    criterion(10);
}

#[test]
fn c11_tangent_orthogonality_and_density() {
    criterion(11);
}

#[test]
fn c12_cauchy_identity() {
    criterion(12);
}
