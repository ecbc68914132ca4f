use wirephase::geometry::{DeformableCurve, Direction, TorsionConvention};
use wirephase::grid::SGrid;
use wirephase::hamiltonian::{ground_state_k0, hamiltonian_at};
use wirephase::linalg::{CMatrix, C64};
use wirephase::perturbation::{
    closed_form_h1, extract_h1, extract_h1_with, first_order_state, plane_wave_block, plane_wave_element,
};

fn rel_block_error(a: &CMatrix, b: &CMatrix) -> f64 {
    a.max_abs_diff(b) / b.max_abs()
}

#[test]
fn extracted_response_matches_closed_form() {
    let g = SGrid::new(32).unwrap();
    let c = DeformableCurve::deformed_circle();
    for sigma in [1, -1] {
        let (hx, hz) = extract_h1(&c, sigma, g).unwrap();
        for (op, dir) in [(&hx, Direction::Xi), (&hz, Direction::Zeta)] {
            let want = plane_wave_block(&closed_form_h1(dir, sigma, g), g, 6);
            let got = plane_wave_block(&op.matrix, g, 6);
            assert!(rel_block_error(&got, &want) < 1e-6, "{dir:?} sigma={sigma}");
        }
    }
}

#[test]
fn closed_form_elements_by_hand() {
    // ⟨±2|¾cos2s|0⟩ = 3/8 and ⟨k±2|6iσ(sin2s ∂ + cos2s)|k⟩ = 3iσ(1 ± k)
    let g = SGrid::new(32).unwrap();
    let x = closed_form_h1(Direction::Xi, 1, g);
    let z = closed_form_h1(Direction::Zeta, -1, g);
    assert!((plane_wave_element(&x, g, 2, 0) - 0.375).norm() < 1e-14);
    assert!((plane_wave_element(&x, g, -2, 0) - 0.375).norm() < 1e-14);
    assert!((plane_wave_element(&z, g, 3, 1) - C64::new(0.0, -6.0)).norm() < 1e-12);
    assert!(plane_wave_element(&z, g, -1, 1).norm() < 1e-12);
    assert!((plane_wave_element(&z, g, 2, 0) - C64::new(0.0, -3.0)).norm() < 1e-12);
}

#[test]
fn flipped_torsion_breaks_the_zeta_response() {
    let g = SGrid::new(32).unwrap();
    let c = DeformableCurve::deformed_circle();
    let (_, hz) = extract_h1_with(&c, 1, g, TorsionConvention::Flipped).unwrap();
    let want = plane_wave_block(&closed_form_h1(Direction::Zeta, 1, g), g, 4);
    assert!(rel_block_error(&plane_wave_block(&hz.matrix, g, 4), &want) > 1.0);
}

#[test]
fn first_order_state_matches_exact_ground_state() {
    let g = SGrid::new(32).unwrap();
    let c = DeformableCurve::deformed_circle();
    let (xi, zeta) = (1e-3, 1e-3);
    for sigma in [1, -1] {
        let (hx, hz) = extract_h1(&c, sigma, g).unwrap();
        let approx = first_order_state(&hx, &hz, xi, zeta, sigma).unwrap();
        let h = hamiltonian_at(&c, sigma, xi, zeta, g, TorsionConvention::Standard).unwrap();
        let exact = ground_state_k0(&h).unwrap().pair.vector;
        let overlap = g.inner(&exact, &approx.vector).norm();
        assert!(1.0 - overlap < 1e-9, "{overlap}");

        let want = C64::new(-3.0 * xi / 8.0, -3.0 * zeta * sigma as f64);
        let got = approx.cos_coefficient(2);
        assert!((got - want).norm() / want.norm() < 1e-6, "{got} vs {want}");
    }
}
