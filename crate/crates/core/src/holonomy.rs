//! Gauge-invariant geometric phases over closed loops in `(ξ, ζ)`.
//!
//! Every estimator is built from products of overlaps between eigenstates
//! at neighbouring loop points (discrete Wilson loops), so the arbitrary
//! phase (or, for the doublet, the arbitrary frame) chosen by the
//! eigensolver at each point drops out.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{arclength_defect, DeformableCurve, TorsionConvention};
use crate::grid::SGrid;
use crate::hamiltonian::{ground_state_k0, hamiltonian_at, GAP_THRESHOLD};
use crate::linalg::{dot, hermitian_eigen, polar_unitary, CMatrix, C64};

/// Smallest acceptable overlap magnitude between neighbouring loop points.
pub const MIN_OVERLAP: f64 = 0.9;

/// Traversal sense in the `(ξ, ζ)` plane with ξ on the horizontal axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Counterclockwise,
    Clockwise,
}

impl Orientation {
    /// Sign multiplying `ε sin θ` in the ζ coordinate of the driving circle.
    pub fn zeta_sign(self) -> f64 {
        match self {
            Orientation::Counterclockwise => -1.0,
            Orientation::Clockwise => 1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::Counterclockwise => Orientation::Clockwise,
            Orientation::Clockwise => Orientation::Counterclockwise,
        }
    }
}

/// Point on the driving circle through the origin centred at `(ε, 0)`:
/// `ξ = ε(1 − cos θ)`, `ζ = ∓ε sin θ` (upper sign counterclockwise).
pub fn driving_circle(epsilon: f64, theta: f64, orientation: Orientation) -> (f64, f64) {
    (epsilon * (1.0 - theta.cos()), orientation.zeta_sign() * epsilon * theta.sin())
}

/// Closed polygon in parameter space; the last point connects to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterLoop {
    points: Vec<(f64, f64)>,
}

impl ParameterLoop {
    pub const MIN_POINTS: usize = 8;

    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < Self::MIN_POINTS {
            return Err(Error::InvalidInput(format!(
                "a loop needs at least {} points, got {}",
                Self::MIN_POINTS,
                points.len()
            )));
        }
        if points.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidInput("loop points must be finite".into()));
        }
        Ok(Self { points })
    }

    /// `m` points `θ_j = 2πj/m` on the driving circle of radius ε.
    pub fn circle(epsilon: f64, m: usize, orientation: Orientation) -> Result<Self> {
        Self::from_points(
            (0..m)
                .map(|j| driving_circle(epsilon, 2.0 * PI * j as f64 / m as f64, orientation))
                .collect(),
        )
    }

    /// A single point visited `m` times.
    pub fn constant(point: (f64, f64), m: usize) -> Result<Self> {
        Self::from_points(vec![point; m])
    }

    /// Counterclockwise square of side δ centred at `center` (four corners).
    pub fn plaquette(center: (f64, f64), delta: f64) -> Self {
        let h = 0.5 * delta;
        let (x, y) = center;
        Self { points: vec![(x - h, y - h), (x + h, y - h), (x + h, y + h), (x - h, y + h)] }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same polygon traversed backwards from the same starting point.
    pub fn reversed(&self) -> Self {
        let mut points = vec![self.points[0]];
        points.extend(self.points[1..].iter().rev());
        Self { points }
    }

    /// The loop traversed `times` times in a row.
    pub fn repeated(&self, times: usize) -> Self {
        Self { points: (0..times).flat_map(|_| self.points.iter().copied()).collect() }
    }

    /// Signed (counterclockwise positive) enclosed area.
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        0.5 * (0..n)
            .map(|i| {
                let (x0, y0) = self.points[i];
                let (x1, y1) = self.points[(i + 1) % n];
                x0 * y1 - x1 * y0
            })
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopDiagnostics {
    pub points: usize,
    pub min_overlap: f64,
    pub min_gap: f64,
    pub max_arclength_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HolonomyValue {
    /// `γ` in (−π, π] and the same phase accumulated from per-step increments.
    Phase { gamma: f64, unwrapped: f64 },
    /// Plaquette estimate of the curvature with the loop phase it came from.
    Curvature { estimate: f64, phase: f64, delta: f64 },
    /// Doublet transport unitary in the `(σ = +1, σ = −1)` basis.
    Unitary(CMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyResult {
    pub value: HolonomyValue,
    pub diagnostics: LoopDiagnostics,
}

impl HolonomyResult {
    pub fn phase(&self) -> Option<f64> {
        match self.value {
            HolonomyValue::Phase { gamma, .. } => Some(gamma),
            HolonomyValue::Curvature { phase, .. } => Some(phase),
            HolonomyValue::Unitary(_) => None,
        }
    }

    pub fn unwrapped_phase(&self) -> Option<f64> {
        match self.value {
            HolonomyValue::Phase { unwrapped, .. } => Some(unwrapped),
            _ => None,
        }
    }

    pub fn curvature(&self) -> Option<f64> {
        match self.value {
            HolonomyValue::Curvature { estimate, .. } => Some(estimate),
            _ => None,
        }
    }

    pub fn unitary(&self) -> Option<&CMatrix> {
        match &self.value {
            HolonomyValue::Unitary(u) => Some(u),
            _ => None,
        }
    }
}

/// Phase of the ordered overlap product around a closed sequence of states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopPhase {
    pub gamma: f64,
    pub unwrapped: f64,
    pub min_overlap: f64,
}

/// `γ = −arg Π_j ⟨ψ_j|ψ_{j+1}⟩` over a closed sequence of unit states.
pub fn wilson_loop_phase(states: &[Vec<C64>], grid: SGrid) -> Result<LoopPhase> {
    let m = states.len();
    let mut product = C64::new(1.0, 0.0);
    let mut unwrapped = 0.0;
    let mut min_overlap = f64::INFINITY;
    for j in 0..m {
        let o = grid.inner(&states[j], &states[(j + 1) % m]);
        min_overlap = min_overlap.min(o.norm());
        product *= o;
        unwrapped -= o.arg();
    }
    if min_overlap < MIN_OVERLAP {
        return Err(Error::OverlapTooSmall { overlap: min_overlap, min: MIN_OVERLAP });
    }
    Ok(LoopPhase { gamma: -product.arg(), unwrapped, min_overlap })
}

/// Phase-fixed ground states (and their gaps) at every loop point.
pub fn ground_states_on_loop(
    curve: &DeformableCurve,
    sigma: i32,
    lp: &ParameterLoop,
    grid: SGrid,
) -> Result<(Vec<Vec<C64>>, f64)> {
    let solved: Vec<_> = lp
        .points()
        .par_iter()
        .map(|&(xi, zeta)| {
            let h = hamiltonian_at(curve, sigma, xi, zeta, grid, TorsionConvention::Standard)?;
            ground_state_k0(&h)
        })
        .collect::<Result<_>>()?;
    let min_gap = solved.iter().map(|g| g.gap).fold(f64::INFINITY, f64::min);
    Ok((solved.into_iter().map(|g| g.pair.vector).collect(), min_gap))
}

fn max_defect(curve: &DeformableCurve, lp: &ParameterLoop) -> f64 {
    lp.points().iter().map(|&(x, z)| arclength_defect(curve, x, z)).fold(0.0, f64::max)
}

/// Berry phase of the σ-sector ground state around `lp`.
pub fn berry_phase_wilson_loop(
    curve: &DeformableCurve,
    sigma: i32,
    lp: &ParameterLoop,
    grid: SGrid,
) -> Result<HolonomyResult> {
    let (states, min_gap) = ground_states_on_loop(curve, sigma, lp, grid)?;
    let ph = wilson_loop_phase(&states, grid)?;
    Ok(HolonomyResult {
        value: HolonomyValue::Phase { gamma: ph.gamma, unwrapped: ph.unwrapped },
        diagnostics: LoopDiagnostics {
            points: lp.len(),
            min_overlap: ph.min_overlap,
            min_gap,
            max_arclength_defect: max_defect(curve, lp),
        },
    })
}

pub const DEFAULT_PLAQUETTE: f64 = 1e-3;

/// Curvature from the Wilson loop around a counterclockwise square of side
/// δ: `phase / (2δ²)`. The factor two converts the flux density into the
/// non-antisymmetrized `K_ξζ = i⟨∂_ξψ|∂_ζψ⟩`.
pub fn berry_curvature_plaquette(
    curve: &DeformableCurve,
    sigma: i32,
    center: (f64, f64),
    delta: f64,
    grid: SGrid,
) -> Result<HolonomyResult> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("plaquette side must be positive, got {delta}")));
    }
    let lp = ParameterLoop::plaquette(center, delta);
    let (states, min_gap) = ground_states_on_loop(curve, sigma, &lp, grid)?;
    let ph = wilson_loop_phase(&states, grid)?;
    Ok(HolonomyResult {
        value: HolonomyValue::Curvature { estimate: ph.gamma / (2.0 * delta * delta), phase: ph.gamma, delta },
        diagnostics: LoopDiagnostics {
            points: lp.len(),
            min_overlap: ph.min_overlap,
            min_gap,
            max_arclength_defect: max_defect(curve, &lp),
        },
    })
}

/// Lowest two states of `H(+1) ⊕ H(−1)` as vectors of length `2n`, plus the
/// gap from that doublet to the next level.
fn doublet_frame(curve: &DeformableCurve, xi: f64, zeta: f64, grid: SGrid) -> Result<([Vec<C64>; 2], f64)> {
    let n = grid.len();
    let hp = hamiltonian_at(curve, 1, xi, zeta, grid, TorsionConvention::Standard)?;
    let hm = hamiltonian_at(curve, -1, xi, zeta, grid, TorsionConvention::Standard)?;
    let block = CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => hp.matrix()[(i, j)],
        (false, false) => hm.matrix()[(i - n, j - n)],
        _ => C64::new(0.0, 0.0),
    });
    let eig = hermitian_eigen(&block)?;
    let gap = eig.values[2] - eig.values[1];
    if gap < GAP_THRESHOLD {
        return Err(Error::GapCollapse { gap, threshold: GAP_THRESHOLD });
    }
    Ok(([eig.vectors.column(0), eig.vectors.column(1)], gap))
}

fn frame_overlap(a: &[Vec<C64>; 2], b: &[Vec<C64>; 2]) -> CMatrix {
    CMatrix::from_fn(2, 2, |r, c| dot(&a[r], &b[c]))
}

/// Smallest singular value of a 2×2 matrix.
fn min_singular(m: &CMatrix) -> f64 {
    hermitian_eigen(&(&m.adjoint() * m)).map(|e| e.values[0].max(0.0).sqrt()).unwrap_or(0.0)
}

/// Wilczek–Zee transport of the degenerate doublet `{σ = +1, σ = −1}`.
///
/// The doublet is tracked jointly in `H(+1) ⊕ H(−1)` (the normal-plane
/// factors `χ_±` are orthonormal and parameter independent), with whatever
/// frame the eigensolver returns inside the degenerate subspace. The ordered
/// product of 2×2 overlap matrices is rotated into the σ basis of the base
/// point, unitarized by polar decomposition, and returned as
/// `U = P exp(i∮A)`, whose diagonal entries are `e^{iγ_σ}`.
pub fn wilczek_zee_transport(curve: &DeformableCurve, lp: &ParameterLoop, grid: SGrid) -> Result<HolonomyResult> {
    let n = grid.len();
    let frames: Vec<_> = lp
        .points()
        .par_iter()
        .map(|&(xi, zeta)| doublet_frame(curve, xi, zeta, grid))
        .collect::<Result<_>>()?;
    let min_gap = frames.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);

    let m = frames.len();
    let mut w = CMatrix::identity(2);
    let mut min_overlap = f64::INFINITY;
    for j in 0..m {
        let o = frame_overlap(&frames[j].0, &frames[(j + 1) % m].0);
        min_overlap = min_overlap.min(min_singular(&o));
        w = &w * &o;
    }
    if min_overlap < MIN_OVERLAP {
        return Err(Error::OverlapTooSmall { overlap: min_overlap, min: MIN_OVERLAP });
    }

    // σ basis at the base point
    let (xi0, zeta0) = lp.points()[0];
    let sector = |sigma: i32| -> Result<Vec<C64>> {
        let h = hamiltonian_at(curve, sigma, xi0, zeta0, grid, TorsionConvention::Standard)?;
        let mut v = ground_state_k0(&h)?.pair.vector;
        let nrm = crate::linalg::norm(&v);
        v.iter_mut().for_each(|z| *z /= nrm);
        let mut out = vec![C64::new(0.0, 0.0); 2 * n];
        let off = if sigma == 1 { 0 } else { n };
        out[off..off + n].copy_from_slice(&v);
        Ok(out)
    };
    let basis = [sector(1)?, sector(-1)?];
    let c = frame_overlap(&basis, &frames[0].0);
    let w_sigma = &(&c * &w) * &c.adjoint();
    let (polar, smallest) = polar_unitary(&w_sigma)?;
    if smallest < 1e-3 {
        return Err(Error::NonUnitarizable { singular_value: smallest });
    }
    Ok(HolonomyResult {
        value: HolonomyValue::Unitary(polar.adjoint()),
        diagnostics: LoopDiagnostics {
            points: lp.len(),
            min_overlap,
            min_gap,
            max_arclength_defect: max_defect(curve, lp),
        },
    })
}

/// Doublet coefficients `(e^{imΔφ}, e^{−imΔφ})/√2` after `m` revolutions.
pub fn accumulate_revolutions(delta_phi: f64, m: u32) -> [C64; 2] {
    let g = m as f64 * delta_phi;
    [C64::from_polar(FRAC_1_SQRT_2, g), C64::from_polar(FRAC_1_SQRT_2, -g)]
}
