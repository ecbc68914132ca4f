mod common;

use std::f64::consts::PI;

use common::rng;
use proptest::prelude::*;
use rand::Rng;
use wirephase::geometry::DeformableCurve;
use wirephase::grid::SGrid;
use wirephase::holonomy::{
    berry_curvature_plaquette, berry_phase_wilson_loop, ground_states_on_loop, wilczek_zee_transport,
    wilson_loop_phase, Orientation, ParameterLoop,
};
use wirephase::linalg::C64;
use wirephase::perturbation::{analytic_curvature, per_revolution_phase};

fn loop_phase(eps: f64, m: usize, orientation: Orientation, sigma: i32) -> f64 {
    let lp = ParameterLoop::circle(eps, m, orientation).unwrap();
    let g = SGrid::new(32).unwrap();
    berry_phase_wilson_loop(&DeformableCurve::deformed_circle(), sigma, &lp, g).unwrap().phase().unwrap()
}

#[test]
fn small_loop_phase_matches_closed_form() {
    let want = -9.0 / 8.0 * PI * 0.05f64.powi(2);
    let got = loop_phase(0.05, 64, Orientation::Counterclockwise, 1);
    assert!(((got - want) / want).abs() < 0.01, "{got} vs {want}");
    let opposite = loop_phase(0.05, 64, Orientation::Counterclockwise, -1);
    assert!(((opposite + want) / want).abs() < 0.01);
}

#[test]
fn reversing_the_loop_negates_the_phase() {
    let a = loop_phase(0.04, 32, Orientation::Counterclockwise, 1);
    let b = loop_phase(0.04, 32, Orientation::Clockwise, 1);
    assert!((a + b).abs() < 1e-12, "{a} {b}");
}

#[test]
fn traversing_twice_doubles_the_phase() {
    let g = SGrid::new(32).unwrap();
    let lp = ParameterLoop::circle(0.05, 48, Orientation::Counterclockwise).unwrap();
    let c = DeformableCurve::deformed_circle();
    let once = berry_phase_wilson_loop(&c, 1, &lp, g).unwrap();
    let twice = berry_phase_wilson_loop(&c, 1, &lp.repeated(2), g).unwrap();
    assert!((twice.phase().unwrap() - 2.0 * once.phase().unwrap()).abs() < 1e-12);
    assert!((twice.unwrapped_phase().unwrap() - 2.0 * once.unwrapped_phase().unwrap()).abs() < 1e-12);
}

#[test]
fn refinement_converges() {
    let coarse = loop_phase(0.05, 32, Orientation::Counterclockwise, 1);
    let mid = loop_phase(0.05, 64, Orientation::Counterclockwise, 1);
    let fine = loop_phase(0.05, 128, Orientation::Counterclockwise, 1);
    assert!((fine - mid).abs() < (mid - coarse).abs());
    // second-order estimator: successive differences shrink about fourfold
    let ratio = (mid - coarse) / (fine - mid);
    assert!(ratio > 3.0 && ratio < 5.0, "{ratio}");
}

#[test]
fn loop_phase_equals_curvature_flux() {
    let g = SGrid::new(32).unwrap();
    let c = DeformableCurve::deformed_circle();
    let k = berry_curvature_plaquette(&c, 1, (0.0, 0.0), 1e-3, g).unwrap().curvature().unwrap();
    let eps = 0.02;
    let lp = ParameterLoop::circle(eps, 256, Orientation::Counterclockwise).unwrap();
    let gamma = berry_phase_wilson_loop(&c, 1, &lp, g).unwrap().phase().unwrap();
    let flux = 2.0 * k * lp.signed_area();
    assert!(((gamma - flux) / flux).abs() < 5e-3, "{gamma} vs {flux}");
}

#[test]
fn plaquette_and_analytic_curvature_agree() {
    let g = SGrid::new(32).unwrap();
    let c = DeformableCurve::deformed_circle();
    for sigma in [1, -1] {
        let k = berry_curvature_plaquette(&c, sigma, (0.0, 0.0), 1e-3, g).unwrap().curvature().unwrap();
        let a = analytic_curvature(sigma).unwrap();
        assert!((a + 9.0 / 16.0 * sigma as f64).abs() < 1e-8);
        assert!(((k - a) / a).abs() < 0.01);
    }
}

#[test]
fn doublet_transport_is_diagonal() {
    let g = SGrid::new(32).unwrap();
    let lp = ParameterLoop::circle(0.05, 64, Orientation::Counterclockwise).unwrap();
    let c = DeformableCurve::deformed_circle();
    let u = wilczek_zee_transport(&c, &lp, g).unwrap();
    let u = u.unitary().unwrap();
    assert!(u[(0, 1)].norm() < 1e-6 && u[(1, 0)].norm() < 1e-6);
    let want = per_revolution_phase(0.05, analytic_curvature(1).unwrap());
    assert!(((u[(0, 0)].arg() - want) / want).abs() < 0.01);
    assert!(((u[(1, 1)].arg() + want) / want).abs() < 0.01);
}

#[test]
fn phase_is_gauge_invariant() {
    let g = SGrid::new(32).unwrap();
    let lp = ParameterLoop::circle(0.05, 32, Orientation::Counterclockwise).unwrap();
    let (states, _) = ground_states_on_loop(&DeformableCurve::deformed_circle(), 1, &lp, g).unwrap();
    let base = wilson_loop_phase(&states, g).unwrap().gamma;
    let mut r = rng(5);
    for _ in 0..20 {
        let regauged: Vec<Vec<C64>> = states
            .iter()
            .map(|v| {
                let ph = C64::from_polar(1.0, r.gen_range(-PI..PI));
                v.iter().map(|z| z * ph).collect()
            })
            .collect();
        let gamma = wilson_loop_phase(&regauged, g).unwrap().gamma;
        assert!((gamma - base).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn phase_scales_with_enclosed_area(eps in 0.01..0.04f64) {
        let gamma = loop_phase(eps, 64, Orientation::Counterclockwise, 1);
        let want = -9.0 / 8.0 * PI * eps * eps;
        prop_assert!(((gamma - want) / want).abs() < 0.02);
    }
}
