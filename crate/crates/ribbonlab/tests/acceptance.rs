//! Acceptance gate: every criterion of the verification suite must pass at
//! its stated tolerance.  One test per criterion, each printing a single
//! pass/fail status line with the measured margins.

use ribbonlab::verify;

fn run(check: impl FnOnce() -> ribbonlab::Result<verify::CheckResult>) {
    let result = check().expect("verification check failed to run");
    println!("{}", result.status_line());
    assert!(result.passed, "{}", result.details);
}

#[test]
fn criterion_01_twist_plate_constants() {
    run(verify::check_twist_constants);
}

#[test]
fn criterion_02_thickness_relaxation_oracle_equivalence() {
    run(verify::check_oracle_equivalence);
}

#[test]
fn criterion_03_splaybend_target_and_residual() {
    run(verify::check_splaybend_constants);
}

#[test]
fn criterion_04_bilayer_residual_closed_form() {
    run(verify::check_bilayer_residual);
}

#[test]
fn criterion_05_cylinder_minimizers_of_the_plate_energy() {
    run(verify::check_plate_minimum);
}

#[test]
fn criterion_06_rod_density_continuity_and_minimum() {
    run(verify::check_rod_density);
}

#[test]
fn criterion_07_rod_density_symmetries() {
    run(verify::check_rod_symmetries);
}

#[test]
fn criterion_08_frame_integration_and_rate_recovery() {
    run(verify::check_geometry);
}

#[test]
fn criterion_09_thickness_scaling_of_the_3d_energy() {
    run(verify::check_gamma_scaling);
}

#[test]
fn criterion_10_bulk_density_and_curvature_obstruction() {
    run(verify::check_material_layer);
}

#[test]
fn negative_control_boundary_continuity_probe() {
    run(verify::check_continuity_negative_control);
}
