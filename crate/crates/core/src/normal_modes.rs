//! Normal-plane sector: the first excited doublet `χ_±` of the transverse
//! 2D oscillator, superpositions of it, and density samples of the full
//! state around the curve.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DeformableCurve;
use crate::grid::SGrid;
use crate::hamiltonian::{ground_state_k0, hamiltonian_at};
use crate::linalg::C64;
use crate::geometry::TorsionConvention;

/// Oscillator level `n`, angular momentum `σ` and confinement width `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalModeSpec {
    pub n: u32,
    pub sigma: i32,
    pub eta: f64,
}

impl NormalModeSpec {
    /// The `|±⟩` doublet used throughout: `n = 1`, `σ = ±1`.
    pub fn doublet(sigma: i32, eta: f64) -> Self {
        Self { n: 1, sigma, eta }
    }

    /// Eigenvalue `n + 1` of the transverse oscillator.
    pub fn oscillator_energy(&self) -> f64 {
        (self.n + 1) as f64
    }

    /// `(n+1)/η² + E` for a tangential energy `E`.
    pub fn total_energy(&self, tangential: f64) -> f64 {
        self.oscillator_energy() / (self.eta * self.eta) + tangential
    }
}

/// `χ_σ(ρ, φ) = ρ e^{−ρ²/2} e^{iσφ}/√π`.
pub fn chi_eval(sigma: i32, rho: f64, phi: f64) -> C64 {
    C64::from_polar(rho * (-0.5 * rho * rho).exp() / PI.sqrt(), sigma as f64 * phi)
}

/// `c₊χ₊ + c₋χ₋` at `(ρ, φ)`.
pub fn doublet_amplitude(coeffs: [C64; 2], rho: f64, phi: f64) -> C64 {
    coeffs[0] * chi_eval(1, rho, phi) + coeffs[1] * chi_eval(-1, rho, phi)
}

/// Density of `(e^{iγ}χ₊ + e^{−iγ}χ₋)/√2`, i.e. `(2/π) ρ² e^{−ρ²} cos²(φ + γ)`.
pub fn doublet_density(gamma: f64, rho: f64, phi: f64) -> f64 {
    2.0 / PI * rho * rho * (-rho * rho).exp() * (phi + gamma).cos().powi(2)
}

/// Sampling of the tube around the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeResolution {
    /// Samples along the curve (the tangential grid size).
    pub along: usize,
    pub radial: usize,
    pub angular: usize,
    /// Outer radius in oscillator units.
    pub rho_max: f64,
    /// Confinement width; physical tube radius is `η ρ`.
    pub eta: f64,
}

impl Default for TubeResolution {
    fn default() -> Self {
        Self { along: 32, radial: 12, angular: 24, rho_max: 2.5, eta: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubeSample {
    pub s: f64,
    pub rho: f64,
    pub phi: f64,
    pub position: [f64; 3],
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TubeField {
    pub resolution: TubeResolution,
    pub samples: Vec<TubeSample>,
}

impl TubeField {
    /// Sample with the largest density at the `i`-th curve station.
    pub fn argmax_at_station(&self, i: usize) -> &TubeSample {
        let per = self.resolution.radial * self.resolution.angular;
        self.samples[i * per..(i + 1) * per]
            .iter()
            .max_by(|a, b| a.density.total_cmp(&b.density))
            .expect("non-empty station")
    }
}

/// Samples `|Ψ|²` of `(e^{iγ}χ₊ψ₊ + e^{−iγ}χ₋ψ₋)/√2` on the adapted grid
/// `(s, ρ, φ)`, mapped to space by `R(s) + ηρ cosφ N(s) + ηρ sinφ B(s)`.
/// `ψ_±` are the tangential ground states at `(ξ, ζ)`.
pub fn tube_density_grid(
    curve: &DeformableCurve,
    xi: f64,
    zeta: f64,
    gamma: f64,
    resolution: TubeResolution,
) -> Result<TubeField> {
    if resolution.radial == 0 || resolution.angular == 0 || !(resolution.rho_max > 0.0) || !(resolution.eta > 0.0) {
        return Err(Error::InvalidInput("tube resolution must be positive".into()));
    }
    let grid = SGrid::new(resolution.along)?;
    let plus = ground_state_k0(&hamiltonian_at(curve, 1, xi, zeta, grid, TorsionConvention::Standard)?)?;
    let minus = ground_state_k0(&hamiltonian_at(curve, -1, xi, zeta, grid, TorsionConvention::Standard)?)?;
    let cp = C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, gamma);
    let cm = C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -gamma);

    let mut samples = Vec::with_capacity(grid.len() * resolution.radial * resolution.angular);
    for (i, s) in grid.points().into_iter().enumerate() {
        let frame = curve.frenet_frame(xi, zeta, s)?;
        let origin = curve.point(xi, zeta, s);
        let (pp, pm) = (plus.pair.vector[i], minus.pair.vector[i]);
        for r in 0..resolution.radial {
            let rho = resolution.rho_max * (r as f64 + 0.5) / resolution.radial as f64;
            for a in 0..resolution.angular {
                let phi = 2.0 * PI * a as f64 / resolution.angular as f64;
                let amp = cp * chi_eval(1, rho, phi) * pp + cm * chi_eval(-1, rho, phi) * pm;
                let (al, be) = (resolution.eta * rho * phi.cos(), resolution.eta * rho * phi.sin());
                let position = [
                    origin[0] + al * frame.normal[0] + be * frame.binormal[0],
                    origin[1] + al * frame.normal[1] + be * frame.binormal[1],
                    origin[2] + al * frame.normal[2] + be * frame.binormal[2],
                ];
                samples.push(TubeSample { s, rho, phi, position, density: amp.norm_sqr() });
            }
        }
    }
    Ok(TubeField { resolution, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint rule over `[0, ρ_max] × [0, 2π)` with measure `ρ dρ dφ`.
    fn plane_integral(f: impl Fn(f64, f64) -> f64) -> f64 {
        let (nr, na, rmax) = (2000, 256, 12.0);
        let dr = rmax / nr as f64;
        let da = 2.0 * PI / na as f64;
        let mut acc = 0.0;
        for i in 0..nr {
            let r = (i as f64 + 0.5) * dr;
            for j in 0..na {
                acc += f(r, j as f64 * da) * r;
            }
        }
        acc * dr * da
    }

    #[test]
    fn chi_point_values() {
        assert_eq!(chi_eval(1, 0.0, 1.3).norm(), 0.0);
        let v = chi_eval(1, 1.0, 0.0);
        assert!((v.re - 0.342_15).abs() < 1e-4 && v.im == 0.0);
        assert!((v.re - (-0.5_f64).exp() / PI.sqrt()).abs() < 1e-15);
        let a = chi_eval(1, 0.7, 0.4);
        let b = chi_eval(-1, 0.7, 0.4);
        assert!((a.conj() - b).norm() < 1e-15);
    }

    #[test]
    fn chi_is_normalized_and_orthogonal() {
        for s in [1, -1] {
            let nrm = plane_integral(|r, p| chi_eval(s, r, p).norm_sqr());
            assert!((nrm - 1.0).abs() < 1e-8, "{nrm}");
        }
        let re = plane_integral(|r, p| (chi_eval(1, r, p).conj() * chi_eval(-1, r, p)).re);
        let im = plane_integral(|r, p| (chi_eval(1, r, p).conj() * chi_eval(-1, r, p)).im);
        assert!(re.abs() < 1e-10 && im.abs() < 1e-10);
    }

    #[test]
    fn doublet_density_values() {
        assert!((doublet_density(0.0, 1.0, 0.0) - 2.0 * (-1.0_f64).exp() / PI).abs() < 1e-15);
        assert!((doublet_density(0.0, 1.0, 0.0) - 0.234_18).abs() < 1e-4);
        assert!(doublet_density(0.0, 1.0, PI / 2.0) < 1e-30);
        assert!(doublet_density(PI / 2.0, 1.0, 0.0) < 1e-30);
    }

    #[test]
    fn doublet_density_matches_superposition() {
        let g = 0.37;
        let coeffs = [C64::from_polar(0.5_f64.sqrt(), g), C64::from_polar(0.5_f64.sqrt(), -g)];
        for (r, p) in [(0.3, 0.1), (1.0, 2.0), (1.7, -0.8)] {
            let direct = doublet_amplitude(coeffs, r, p).norm_sqr();
            assert!((direct - doublet_density(g, r, p)).abs() < 1e-14);
        }
    }

    #[test]
    fn doublet_density_integrates_to_one() {
        for g in [0.0, 0.4, 1.9] {
            let total = plane_integral(|r, p| doublet_density(g, r, p));
            assert!((total - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn doublet_energy_offset() {
        let spec = NormalModeSpec::doublet(1, 0.1);
        assert_eq!(spec.oscillator_energy(), 2.0);
        assert!((spec.total_energy(-0.125) - (200.0 - 0.125)).abs() < 1e-12);
    }

    #[test]
    fn tube_lobes_follow_gamma() {
        let curve = DeformableCurve::deformed_circle();
        let res = TubeResolution { along: 16, radial: 10, angular: 32, rho_max: 2.5, eta: 0.1 };
        let f0 = tube_density_grid(&curve, 0.0, 0.0, 0.0, res).unwrap();
        let f1 = tube_density_grid(&curve, 0.0, 0.0, PI / 2.0, res).unwrap();
        assert!(f0.samples.iter().all(|s| s.density >= 0.0));
        for i in 0..16 {
            let a = f0.argmax_at_station(i);
            assert!(a.phi.sin().abs() < 1e-12, "normal lobe expected, phi = {}", a.phi);
            let b = f1.argmax_at_station(i);
            assert!(b.phi.cos().abs() < 1e-12, "binormal lobe expected, phi = {}", b.phi);
        }
        // on the unit circle the normal points towards the centre
        let a = f0.argmax_at_station(0);
        let r = (a.position[0].powi(2) + a.position[1].powi(2)).sqrt();
        assert!((r - 1.0).abs() > 0.05);
    }
}
