//! First-order perturbation theory around the undeformed circle: the
//! parameter-linear Hamiltonian response, the corrected ground states and
//! the Berry curvature they imply.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{DeformableCurve, Direction, GeometryProfile, TorsionConvention};
use crate::grid::SGrid;
use crate::hamiltonian::{build_hamiltonian, check_sigma, eigensolve, hamiltonian_at};
use crate::linalg::{CMatrix, C64, I};

/// Linear response `∂H/∂ξ` or `∂H/∂ζ` at the origin for one σ sector.
#[derive(Debug, Clone)]
pub struct PerturbationOperator {
    pub matrix: CMatrix,
    pub direction: Direction,
    pub sigma: i32,
}

/// Central-difference step for the parameter derivative.
pub const H1_STEP: f64 = 1e-5;

fn response(
    curve: &DeformableCurve,
    sigma: i32,
    grid: SGrid,
    dir: Direction,
    convention: TorsionConvention,
) -> Result<CMatrix> {
    let at = |t: f64| -> Result<CMatrix> {
        let (xi, zeta) = match dir {
            Direction::Xi => (t, 0.0),
            Direction::Zeta => (0.0, t),
        };
        Ok(hamiltonian_at(curve, sigma, xi, zeta, grid, convention)?.into_matrix())
    };
    let h = H1_STEP;
    let d1 = (&at(h)? - &at(-h)?).scale(C64::new(0.5 / h, 0.0));
    let d2 = (&at(2.0 * h)? - &at(-2.0 * h)?).scale(C64::new(0.25 / h, 0.0));
    // one Richardson level removes the O(h²) term
    Ok(&d1.scale(C64::new(4.0 / 3.0, 0.0)) - &d2.scale(C64::new(1.0 / 3.0, 0.0)))
}

/// Numerically differentiates the assembled Hamiltonian with respect to ξ
/// and ζ at the origin.
pub fn extract_h1(
    curve: &DeformableCurve,
    sigma: i32,
    grid: SGrid,
) -> Result<(PerturbationOperator, PerturbationOperator)> {
    extract_h1_with(curve, sigma, grid, TorsionConvention::Standard)
}

pub fn extract_h1_with(
    curve: &DeformableCurve,
    sigma: i32,
    grid: SGrid,
    convention: TorsionConvention,
) -> Result<(PerturbationOperator, PerturbationOperator)> {
    check_sigma(sigma)?;
    let xi = response(curve, sigma, grid, Direction::Xi, convention)?;
    let zeta = response(curve, sigma, grid, Direction::Zeta, convention)?;
    Ok((
        PerturbationOperator { matrix: xi, direction: Direction::Xi, sigma },
        PerturbationOperator { matrix: zeta, direction: Direction::Zeta, sigma },
    ))
}

/// The closed-form response of the built-in family:
/// `¾ cos 2s` for ξ and `6iσ(sin 2s ∂_s + cos 2s)` for ζ.
pub fn closed_form_h1(dir: Direction, sigma: i32, grid: SGrid) -> CMatrix {
    let n = grid.len();
    let s = grid.points();
    match dir {
        Direction::Xi => CMatrix::diagonal(&s.iter().map(|x| 0.75 * (2.0 * x).cos()).collect::<Vec<_>>()),
        Direction::Zeta => {
            let d = grid.first_derivative();
            let sg = sigma as f64;
            CMatrix::from_fn(n, n, |i, j| {
                let diag = if i == j { (2.0 * s[i]).cos() } else { 0.0 };
                I * (6.0 * sg * ((2.0 * s[i]).sin() * d[i * n + j] + diag))
            })
        }
    }
}

/// `⟨k'|M|k⟩` in the plane-wave basis `e^{iks}/√(2π)`.
pub fn plane_wave_element(m: &CMatrix, grid: SGrid, k_out: i64, k_in: i64) -> C64 {
    let win = grid.plane_wave(k_in);
    let wout = grid.plane_wave(k_out);
    grid.inner(&wout, &m.matvec(&win))
}

/// Plane-wave matrix of `m` restricted to `|k| <= kmax`.
pub fn plane_wave_block(m: &CMatrix, grid: SGrid, kmax: i64) -> CMatrix {
    let ks: Vec<i64> = (-kmax..=kmax).collect();
    CMatrix::from_fn(ks.len(), ks.len(), |a, b| plane_wave_element(m, grid, ks[a], ks[b]))
}

/// First-order corrected tangential ground state.
#[derive(Debug, Clone)]
pub struct CorrectedState {
    pub grid: SGrid,
    pub xi: f64,
    pub zeta: f64,
    pub sigma: i32,
    /// Samples on the grid, unit grid norm, `a_0` real positive.
    pub vector: Vec<C64>,
    /// Plane-wave coefficients indexed by DFT bin.
    pub coefficients: Vec<C64>,
}

impl CorrectedState {
    /// Coefficient `c` in `ψ ∝ 1 + c cos(ks) + …`, i.e. `(a_k + a_{−k})/a_0`.
    pub fn cos_coefficient(&self, k: i64) -> C64 {
        let a0 = self.grid.fourier_coefficient(&self.vector, 0);
        (self.grid.fourier_coefficient(&self.vector, k) + self.grid.fourier_coefficient(&self.vector, -k)) / a0
    }
}

/// Unperturbed circle: ground vector plus `−(H₀ − E₀)⁺`.
struct Reference {
    ground: Vec<C64>,
    excited: Vec<(f64, Vec<C64>)>,
    e0: f64,
}

fn reference(grid: SGrid, sigma: i32) -> Result<Reference> {
    let h0 = build_hamiltonian(&GeometryProfile::circle(grid), sigma, grid)?;
    let mut pairs = eigensolve(&h0, grid.len())?;
    let g = pairs.remove(0);
    Ok(Reference { ground: g.vector, e0: g.value, excited: pairs.into_iter().map(|p| (p.value, p.vector)).collect() })
}

impl Reference {
    /// `Σ_{m≠0} |m⟩⟨m|V|0⟩/(E₀ − E_m)`
    fn correction(&self, grid: SGrid, v: &CMatrix) -> Vec<C64> {
        let v0 = v.matvec(&self.ground);
        let mut out = vec![C64::new(0.0, 0.0); grid.len()];
        for (e, m) in &self.excited {
            let amp = grid.inner(m, &v0) / (self.e0 - e);
            for (o, x) in out.iter_mut().zip(m) {
                *o += amp * x;
            }
        }
        out
    }
}

fn operator_grid(op: &PerturbationOperator) -> Result<SGrid> {
    SGrid::new(op.matrix.rows())
}

fn check_pair(h1_xi: &PerturbationOperator, h1_zeta: &PerturbationOperator, sigma: i32) -> Result<SGrid> {
    check_sigma(sigma)?;
    let g = operator_grid(h1_xi)?;
    if h1_zeta.matrix.rows() != g.len() {
        return Err(Error::GridMismatch { expected: g.len(), found: h1_zeta.matrix.rows() });
    }
    if h1_xi.sigma != sigma || h1_zeta.sigma != sigma {
        return Err(Error::InvalidInput("perturbation operators belong to a different sigma sector".into()));
    }
    Ok(g)
}

/// Rayleigh–Schrödinger first-order state for `V = ξ H₁ξ + ζ H₁ζ`.
pub fn first_order_state(
    h1_xi: &PerturbationOperator,
    h1_zeta: &PerturbationOperator,
    xi: f64,
    zeta: f64,
    sigma: i32,
) -> Result<CorrectedState> {
    let grid = check_pair(h1_xi, h1_zeta, sigma)?;
    let r = reference(grid, sigma)?;
    let v = &h1_xi.matrix.scale(C64::new(xi, 0.0)) + &h1_zeta.matrix.scale(C64::new(zeta, 0.0));
    let corr = r.correction(grid, &v);
    let mut vector: Vec<C64> = r.ground.iter().zip(&corr).map(|(a, b)| a + b).collect();
    grid.normalize(&mut vector);
    let a0 = grid.fourier_coefficient(&vector, 0);
    let rot = a0.conj() / a0.norm();
    vector.iter_mut().for_each(|z| *z *= rot);
    let coefficients = grid.fourier_coefficients(&vector);
    Ok(CorrectedState { grid, xi, zeta, sigma, vector, coefficients })
}

/// `K_ξζ = i⟨∂_ξψ|∂_ζψ⟩` at the origin from the first-order state
/// derivatives (no antisymmetrization).
pub fn curvature_from_operators(
    h1_xi: &PerturbationOperator,
    h1_zeta: &PerturbationOperator,
    sigma: i32,
) -> Result<C64> {
    let grid = check_pair(h1_xi, h1_zeta, sigma)?;
    let r = reference(grid, sigma)?;
    let dxi = r.correction(grid, &h1_xi.matrix);
    let dzeta = r.correction(grid, &h1_zeta.matrix);
    Ok(I * grid.inner(&dxi, &dzeta))
}

/// Default grid for the analytic curvature.
pub const ANALYTIC_GRID: usize = 64;

/// Berry curvature of the built-in family's ground state at the origin.
pub fn analytic_curvature(sigma: i32) -> Result<f64> {
    let grid = SGrid::new(ANALYTIC_GRID)?;
    let (hx, hz) = extract_h1(&DeformableCurve::deformed_circle(), sigma, grid)?;
    Ok(curvature_from_operators(&hx, &hz, sigma)?.re)
}

/// Phase per revolution around a circle of radius ε: `2π ε² K`.
pub fn per_revolution_phase(epsilon: f64, curvature: f64) -> f64 {
    2.0 * PI * epsilon * epsilon * curvature
}
