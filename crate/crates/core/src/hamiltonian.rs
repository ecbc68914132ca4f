//! Effective tangential Hamiltonian of a particle confined to a curve, for a
//! fixed normal-plane angular momentum σ, discretized with Fourier spectral
//! operators on a periodic grid. Units: ħ = m = 1, reference radius 1.
//!
//! The operator is assembled in covariant form
//!
//! ```text
//! H = ½ (P − σ τ)² − κ²/8,      P = −i d/ds
//! ```
//!
//! which expands to `−½ψ″ + iστψ′ + ½(iστ′ + σ²τ² − κ²/4)ψ`. On the grid the
//! kinetic term uses the second-derivative matrix, so the Nyquist mode keeps
//! its kinetic energy `(n/2)²/2`; every other entry follows the symmetric
//! product `P_ij (τ_i + τ_j)` and is Hermitian to the last bit.

use crate::error::{Error, Result};
use crate::geometry::{frenet_profile_with, DeformableCurve, GeometryProfile, TorsionConvention};
use crate::grid::SGrid;
use crate::linalg::{fix_phase, hermitian_eigen_lowest, CMatrix, C64};

/// Minimum ground-state gap for the adiabatic/perturbative regime. The
/// undeformed circle has gap 1/2.
pub const GAP_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct TangentialHamiltonian {
    matrix: CMatrix,
    sigma: i32,
    grid: SGrid,
    fingerprint: u64,
}

impl TangentialHamiltonian {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn sigma(&self) -> i32 {
        self.sigma
    }

    pub fn grid(&self) -> SGrid {
        self.grid
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub(crate) fn from_matrix(matrix: CMatrix, sigma: i32, grid: SGrid) -> Self {
        Self { matrix, sigma, grid, fingerprint: 0 }
    }
}

/// Eigenvalue with an eigenvector normalized to `Σ|ψ_i|² 2π/n = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<C64>,
}

pub(crate) fn check_sigma(sigma: i32) -> Result<()> {
    if sigma == 1 || sigma == -1 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("sigma must be +1 or -1, got {sigma}")))
    }
}

/// Spectral derivative matrices of one grid, reusable across many builds.
#[derive(Debug, Clone)]
pub struct SpectralOperators {
    grid: SGrid,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl SpectralOperators {
    pub fn new(grid: SGrid) -> Self {
        Self { grid, d1: grid.first_derivative(), d2: grid.second_derivative() }
    }

    pub fn grid(&self) -> SGrid {
        self.grid
    }
}

pub fn build_hamiltonian(profile: &GeometryProfile, sigma: i32, grid: SGrid) -> Result<TangentialHamiltonian> {
    build_hamiltonian_with(&SpectralOperators::new(grid), profile, sigma)
}

pub fn build_hamiltonian_with(
    ops: &SpectralOperators,
    profile: &GeometryProfile,
    sigma: i32,
) -> Result<TangentialHamiltonian> {
    check_sigma(sigma)?;
    let grid = ops.grid;
    let n = grid.len();
    if profile.len() != n {
        return Err(Error::GridMismatch { expected: n, found: profile.len() });
    }
    let (d1, d2) = (&ops.d1, &ops.d2);
    let sg = sigma as f64;
    let tau = &profile.tau;
    let matrix = CMatrix::from_fn(n, n, |i, j| {
        let kinetic = -0.5 * d2[i * n + j];
        let coupling = 0.5 * sg * d1[i * n + j] * (tau[i] + tau[j]);
        let potential = if i == j {
            0.5 * tau[i] * tau[i] - profile.kappa[i] * profile.kappa[i] / 8.0
        } else {
            0.0
        };
        C64::new(kinetic + potential, coupling)
    });
    Ok(TangentialHamiltonian { matrix, sigma, grid, fingerprint: profile.fingerprint() })
}

/// Hamiltonian of the curve `curve` at parameters `(ξ, ζ)`.
pub fn hamiltonian_at(
    curve: &DeformableCurve,
    sigma: i32,
    xi: f64,
    zeta: f64,
    grid: SGrid,
    convention: TorsionConvention,
) -> Result<TangentialHamiltonian> {
    let profile = frenet_profile_with(curve, xi, zeta, grid, convention)?;
    build_hamiltonian(&profile, sigma, grid)
}

fn to_pair(grid: SGrid, value: f64, mut vector: Vec<C64>) -> EigenPair {
    grid.normalize(&mut vector);
    fix_phase(&mut vector);
    EigenPair { value, vector }
}

/// The `count` lowest eigenpairs, ascending.
pub fn eigensolve(h: &TangentialHamiltonian, count: usize) -> Result<Vec<EigenPair>> {
    let n = h.grid.len();
    if count == 0 || count > n {
        return Err(Error::InvalidInput(format!("count must lie in 1..={n}, got {count}")));
    }
    let eig = hermitian_eigen_lowest(&h.matrix, count)?;
    Ok((0..count).map(|j| to_pair(h.grid, eig.values[j], eig.vectors.column(j))).collect())
}

/// Ground state together with its gap to the first excited level.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub pair: EigenPair,
    pub gap: f64,
}

/// The k = 0 ground state of a weakly deformed circle.
pub fn ground_state_k0(h: &TangentialHamiltonian) -> Result<GroundState> {
    let mut pairs = eigensolve(h, 2)?;
    let gap = pairs[1].value - pairs[0].value;
    if gap < GAP_THRESHOLD {
        return Err(Error::GapCollapse { gap, threshold: GAP_THRESHOLD });
    }
    pairs.truncate(1);
    Ok(GroundState { pair: pairs.pop().unwrap(), gap })
}
