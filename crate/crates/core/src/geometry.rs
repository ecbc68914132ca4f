//! Closed curves given as trigonometric polynomials that depend linearly on
//! two deformation parameters `(ξ, ζ)`, and their Frenet data.
//!
//! All curve derivatives are taken analytically from the coefficients.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SGrid;

pub type Vec3 = [f64; 3];

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

fn scale3(a: Vec3, f: f64) -> Vec3 {
    [a[0] * f, a[1] * f, a[2] * f]
}

/// One term `a cos(ks) + b sin(ks)`, serialized as `[k, a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic(pub u32, pub f64, pub f64);

/// Finite trigonometric polynomial in `s`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrigPoly(pub Vec<Harmonic>);

impl TrigPoly {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn cos(k: u32, amp: f64) -> Self {
        Self(vec![Harmonic(k, amp, 0.0)])
    }

    pub fn sin(k: u32, amp: f64) -> Self {
        Self(vec![Harmonic(k, 0.0, amp)])
    }

    pub fn constant(c: f64) -> Self {
        Self(vec![Harmonic(0, c, 0.0)])
    }

    /// `order`-th derivative at `s`.
    pub fn derivative(&self, s: f64, order: u32) -> f64 {
        self.0
            .iter()
            .map(|&Harmonic(k, a, b)| {
                if k == 0 {
                    return if order == 0 { a } else { 0.0 };
                }
                let kf = k as f64;
                let (c, sn) = ((kf * s).cos(), (kf * s).sin());
                let amp = kf.powi(order as i32);
                // d^n/ds^n [a cos + b sin] cycles with period four
                let v = match order % 4 {
                    0 => a * c + b * sn,
                    1 => -a * sn + b * c,
                    2 => -a * c - b * sn,
                    _ => a * sn - b * c,
                };
                amp * v
            })
            .sum()
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.derivative(s, 0)
    }

    /// `Σ w_i p_i`, with like harmonics merged.
    pub fn linear_combination(terms: &[(f64, &TrigPoly)]) -> TrigPoly {
        let mut out: Vec<Harmonic> = Vec::new();
        for &(w, p) in terms {
            for &Harmonic(k, a, b) in &p.0 {
                match out.iter_mut().find(|h| h.0 == k) {
                    Some(h) => {
                        h.1 += w * a;
                        h.2 += w * b;
                    }
                    None => out.push(Harmonic(k, w * a, w * b)),
                }
            }
        }
        out.sort_by_key(|h| h.0);
        TrigPoly(out)
    }

    pub fn max_harmonic(&self) -> u32 {
        self.0.iter().map(|h| h.0).max().unwrap_or(0)
    }
}

/// Three coordinate polynomials.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceCurve {
    #[serde(default)]
    pub x: TrigPoly,
    #[serde(default)]
    pub y: TrigPoly,
    #[serde(default)]
    pub z: TrigPoly,
}

impl SpaceCurve {
    fn coords(&self) -> [&TrigPoly; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn derivative(&self, s: f64, order: u32) -> Vec3 {
        let [x, y, z] = self.coords();
        [x.derivative(s, order), y.derivative(s, order), z.derivative(s, order)]
    }
}

/// Which deformation parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Xi,
    Zeta,
}

/// `R(s; ξ, ζ) = base(s) + ξ·xi(s) + ζ·zeta(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformableCurve {
    pub base: SpaceCurve,
    #[serde(default)]
    pub xi: SpaceCurve,
    #[serde(default)]
    pub zeta: SpaceCurve,
}

impl DeformableCurve {
    /// Unit circle in the xy-plane deformed by `ξ(−cos³s, sin³s, 0)` and
    /// `ζ(0, 0, cos 2s)`.
    pub fn deformed_circle() -> Self {
        Self {
            base: SpaceCurve { x: TrigPoly::cos(1, 1.0), y: TrigPoly::sin(1, 1.0), z: TrigPoly::zero() },
            xi: SpaceCurve {
                // cos³s = (3 cos s + cos 3s)/4, sin³s = (3 sin s − sin 3s)/4
                x: TrigPoly(vec![Harmonic(1, -0.75, 0.0), Harmonic(3, -0.25, 0.0)]),
                y: TrigPoly(vec![Harmonic(1, 0.0, 0.75), Harmonic(3, 0.0, -0.25)]),
                z: TrigPoly::zero(),
            },
            zeta: SpaceCurve { x: TrigPoly::zero(), y: TrigPoly::zero(), z: TrigPoly::cos(2, 1.0) },
        }
    }

    pub fn unit_circle() -> Self {
        let mut c = Self::deformed_circle();
        c.xi = SpaceCurve::default();
        c.zeta = SpaceCurve::default();
        c
    }

    pub fn direction(&self, dir: Direction) -> &SpaceCurve {
        match dir {
            Direction::Xi => &self.xi,
            Direction::Zeta => &self.zeta,
        }
    }

    /// `order`-th s-derivative of `R(s; ξ, ζ)`.
    pub fn derivative(&self, xi: f64, zeta: f64, s: f64, order: u32) -> Vec3 {
        let b = self.base.derivative(s, order);
        let u = self.xi.derivative(s, order);
        let w = self.zeta.derivative(s, order);
        [b[0] + xi * u[0] + zeta * w[0], b[1] + xi * u[1] + zeta * w[1], b[2] + xi * u[2] + zeta * w[2]]
    }

    pub fn point(&self, xi: f64, zeta: f64, s: f64) -> Vec3 {
        self.derivative(xi, zeta, s, 0)
    }

    /// Applies `x -> rotation·x + translation` to every member of the family.
    pub fn transformed(&self, rotation: [[f64; 3]; 3], translation: Vec3) -> Self {
        let map = |c: &SpaceCurve, shift: bool| {
            let rows: Vec<TrigPoly> = (0..3)
                .map(|r| {
                    let mut p = TrigPoly::linear_combination(&[
                        (rotation[r][0], &c.x),
                        (rotation[r][1], &c.y),
                        (rotation[r][2], &c.z),
                    ]);
                    if shift {
                        p = TrigPoly::linear_combination(&[(1.0, &p), (translation[r], &TrigPoly::constant(1.0))]);
                    }
                    p
                })
                .collect();
            SpaceCurve { x: rows[0].clone(), y: rows[1].clone(), z: rows[2].clone() }
        };
        Self { base: map(&self.base, true), xi: map(&self.xi, false), zeta: map(&self.zeta, false) }
    }

    /// Frenet frame `(T, N, B)` at `s`.
    pub fn frenet_frame(&self, xi: f64, zeta: f64, s: f64) -> Result<FrenetFrame> {
        let d1 = self.derivative(xi, zeta, s, 1);
        let d2 = self.derivative(xi, zeta, s, 2);
        let b = cross(d1, d2);
        let bn = norm3(b);
        if bn < DEGENERATE_FRAME_TOL {
            return Err(Error::DegenerateFrame { s, cross_norm: bn });
        }
        let t = scale3(d1, 1.0 / norm3(d1));
        let b = scale3(b, 1.0 / bn);
        Ok(FrenetFrame { tangent: t, normal: cross(b, t), binormal: b })
    }
}

pub const DEGENERATE_FRAME_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetFrame {
    pub tangent: Vec3,
    pub normal: Vec3,
    pub binormal: Vec3,
}

/// Sign convention for torsion. `Standard` is `B' = −τN`; `Flipped` exists
/// as a negative control for the convention checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TorsionConvention {
    #[default]
    Standard,
    Flipped,
}

impl TorsionConvention {
    pub fn sign(self) -> f64 {
        match self {
            TorsionConvention::Standard => 1.0,
            TorsionConvention::Flipped => -1.0,
        }
    }
}

/// Curvature and torsion sampled on a uniform periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryProfile {
    pub s_grid: Vec<f64>,
    pub kappa: Vec<f64>,
    pub tau: Vec<f64>,
    pub tau_prime: Vec<f64>,
    pub speed: Vec<f64>,
}

impl GeometryProfile {
    /// Builds a profile from sampled κ and τ (unit speed, τ′ spectral).
    pub fn from_samples(grid: SGrid, kappa: Vec<f64>, tau: Vec<f64>) -> Result<Self> {
        for v in [&kappa, &tau] {
            if v.len() != grid.len() {
                return Err(Error::GridMismatch { expected: grid.len(), found: v.len() });
            }
        }
        if let Some(i) = kappa.iter().position(|&k| !(k > 0.0)) {
            return Err(Error::DegenerateFrame { s: grid.point(i), cross_norm: kappa[i] });
        }
        let tau_prime = grid.differentiate(&tau);
        Ok(Self { s_grid: grid.points(), kappa, tau, tau_prime, speed: vec![1.0; grid.len()] })
    }

    pub fn circle(grid: SGrid) -> Self {
        Self::from_samples(grid, vec![1.0; grid.len()], vec![0.0; grid.len()]).expect("circle profile")
    }

    pub fn len(&self) -> usize {
        self.s_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_grid.is_empty()
    }

    /// Order-independent digest of the samples, used to tag Hamiltonians.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.kappa.iter().chain(&self.tau) {
            for b in v.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

/// Frenet profile with the standard torsion convention.
pub fn frenet_profile(curve: &DeformableCurve, xi: f64, zeta: f64, grid: SGrid) -> Result<GeometryProfile> {
    frenet_profile_with(curve, xi, zeta, grid, TorsionConvention::Standard)
}

/// κ = |R′×R″|/|R′|³, τ = (R′×R″)·R‴/|R′×R″|², τ′ by spectral differentiation.
pub fn frenet_profile_with(
    curve: &DeformableCurve,
    xi: f64,
    zeta: f64,
    grid: SGrid,
    convention: TorsionConvention,
) -> Result<GeometryProfile> {
    let n = grid.len();
    let mut kappa = Vec::with_capacity(n);
    let mut tau = Vec::with_capacity(n);
    let mut speed = Vec::with_capacity(n);
    for s in grid.points() {
        let d1 = curve.derivative(xi, zeta, s, 1);
        let d2 = curve.derivative(xi, zeta, s, 2);
        let d3 = curve.derivative(xi, zeta, s, 3);
        let c = cross(d1, d2);
        let cn = norm3(c);
        if cn < DEGENERATE_FRAME_TOL {
            return Err(Error::DegenerateFrame { s, cross_norm: cn });
        }
        let v = norm3(d1);
        speed.push(v);
        kappa.push(cn / (v * v * v));
        tau.push(convention.sign() * dot3(c, d3) / (cn * cn));
    }
    let tau_prime = grid.differentiate(&tau);
    Ok(GeometryProfile { s_grid: grid.points(), kappa, tau, tau_prime, speed })
}

const DEFECT_SAMPLES: usize = 512;

/// `max_s | |∂R/∂s| − 1 |` over a dense uniform sample.
pub fn arclength_defect(curve: &DeformableCurve, xi: f64, zeta: f64) -> f64 {
    (0..DEFECT_SAMPLES)
        .map(|i| {
            let s = 2.0 * PI * i as f64 / DEFECT_SAMPLES as f64;
            (norm3(curve.derivative(xi, zeta, s, 1)) - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Deformation velocity decomposed in the Frenet frame of the base curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationField {
    pub s_grid: Vec<f64>,
    pub tangential: Vec<f64>,
    pub normal: Vec<f64>,
    pub binormal: Vec<f64>,
}

impl DeformationField {
    /// `∂R/∂ξ` or `∂R/∂ζ` at ξ = ζ = 0.
    pub fn of_curve(curve: &DeformableCurve, dir: Direction, grid: SGrid) -> Result<Self> {
        let field = curve.direction(dir);
        let mut out = Self {
            s_grid: grid.points(),
            tangential: Vec::with_capacity(grid.len()),
            normal: Vec::with_capacity(grid.len()),
            binormal: Vec::with_capacity(grid.len()),
        };
        for s in grid.points() {
            let frame = curve.frenet_frame(0.0, 0.0, s)?;
            let v = field.derivative(s, 0);
            out.tangential.push(dot3(v, frame.tangent));
            out.normal.push(dot3(v, frame.normal));
            out.binormal.push(dot3(v, frame.binormal));
        }
        Ok(out)
    }

    pub fn from_components(grid: SGrid, tangential: Vec<f64>, normal: Vec<f64>, binormal: Vec<f64>) -> Result<Self> {
        for v in [&tangential, &normal, &binormal] {
            if v.len() != grid.len() {
                return Err(Error::GridMismatch { expected: grid.len(), found: v.len() });
            }
        }
        Ok(Self { s_grid: grid.points(), tangential, normal, binormal })
    }
}

/// `max |∂_s v^t − κ v^n|`, with `∂_s` the arclength derivative of the base.
pub fn check_locally_arclength_preserving(field: &DeformationField, base: &GeometryProfile) -> Result<f64> {
    if field.s_grid.len() != base.len() {
        return Err(Error::GridMismatch { expected: base.len(), found: field.s_grid.len() });
    }
    let grid = SGrid::new(base.len())?;
    let dvt = grid.differentiate(&field.tangential);
    Ok((0..base.len())
        .map(|i| (dvt[i] / base.speed[i] - base.kappa[i] * field.normal[i]).abs())
        .fold(0.0, f64::max))
}
