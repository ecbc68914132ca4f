//! Run configuration. Every field has a default; a TOML file only needs the
//! keys it changes, and unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wirephase::geometry::{DeformableCurve, TorsionConvention};
use wirephase::grid::SGrid;
use wirephase::holonomy::Orientation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaSelection {
    Plus,
    Minus,
    #[default]
    Both,
}

impl SigmaSelection {
    pub fn sectors(self) -> &'static [i32] {
        match self {
            SigmaSelection::Plus => &[1],
            SigmaSelection::Minus => &[-1],
            SigmaSelection::Both => &[1, -1],
        }
    }
}

/// Parameter point for `geometry`, `spectrum` and `tube`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointConfig {
    pub xi: f64,
    pub zeta: f64,
}

impl Default for PointConfig {
    fn default() -> Self {
        Self { xi: 0.0, zeta: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Number of lowest eigenvalues written per σ sector.
    pub count: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { count: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopConfig {
    /// Radius ε of the driving circle.
    pub epsilon: f64,
    /// Points M on the discretized loop.
    pub points: usize,
    pub orientation: Orientation,
    /// Side δ of the plaquette at the origin.
    pub plaquette: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self { epsilon: 0.05, points: 64, orientation: Orientation::Counterclockwise, plaquette: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Angular driving rate λ.
    pub rate: f64,
    pub revolutions: u32,
    pub time_step: f64,
    /// Trace row every this many steps; 0 writes no trace.
    pub trace_every: usize,
    /// Extra rates for an adiabaticity sweep (one revolution each).
    pub sweep_rates: Vec<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { rate: 1e-3, revolutions: 1, time_step: 0.25, trace_every: 100, sweep_rates: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubeConfig {
    pub radial: usize,
    pub angular: usize,
    pub rho_max: f64,
    pub eta: f64,
    /// Doublet phase γ; when absent, `revolutions · Δφ` of the configured loop.
    pub gamma: Option<f64>,
    pub revolutions: u32,
    /// Loop radius used for the figure exports of `reproduce-paper`.
    pub figure_epsilon: f64,
}

impl Default for TubeConfig {
    fn default() -> Self {
        Self { radial: 12, angular: 64, rho_max: 2.5, eta: 0.1, gamma: None, revolutions: 0, figure_epsilon: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub spectrum: f64,
    pub first_order_operator: f64,
    pub first_order_state: f64,
    pub curvature: f64,
    pub curvature_analytic: f64,
    pub loop_phase: f64,
    pub transport_offdiagonal: f64,
    pub adiabatic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            spectrum: 1e-10,
            first_order_operator: 1e-5,
            first_order_state: 1e-6,
            curvature: 0.01,
            curvature_analytic: 1e-8,
            loop_phase: 0.01,
            transport_offdiagonal: 1e-6,
            adiabatic: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Free-form label copied into every metadata block.
    pub scenario: String,
    /// Grid size N along the curve.
    pub grid: usize,
    pub sigma: SigmaSelection,
    /// `flipped` negates τ in the operator extraction (negative control).
    pub torsion: TorsionConvention,
    pub point: PointConfig,
    pub spectrum: SpectrumConfig,
    #[serde(rename = "loop")]
    pub holonomy: LoopConfig,
    pub schedule: ScheduleConfig,
    pub tube: TubeConfig,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
    pub curve: DeformableCurve,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: "deformed-circle".into(),
            grid: 32,
            sigma: SigmaSelection::Both,
            torsion: TorsionConvention::Standard,
            point: PointConfig::default(),
            spectrum: SpectrumConfig::default(),
            holonomy: LoopConfig::default(),
            schedule: ScheduleConfig::default(),
            tube: TubeConfig::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
            curve: DeformableCurve::deformed_circle(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn require(ok: bool, msg: impl Into<String>) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError(msg.into()))
    }
}

fn finite(v: f64) -> bool {
    v.is_finite()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn sgrid(&self) -> SGrid {
        SGrid::new(self.grid).expect("validated")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        SGrid::new(self.grid).map_err(|e| ConfigError(format!("grid: {e}")))?;
        require(self.grid <= 512, format!("grid must be at most 512, got {}", self.grid))?;
        require(finite(self.point.xi) && finite(self.point.zeta), "point must be finite")?;
        require(
            self.spectrum.count >= 2 && self.spectrum.count <= self.grid,
            format!("spectrum.count must lie in 2..={}, got {}", self.grid, self.spectrum.count),
        )?;
        let l = &self.holonomy;
        require(finite(l.epsilon) && l.epsilon > 0.0, "loop.epsilon must be positive")?;
        require(l.points >= 8, format!("loop.points must be at least 8, got {}", l.points))?;
        require(finite(l.plaquette) && l.plaquette > 0.0, "loop.plaquette must be positive")?;
        let s = &self.schedule;
        require(finite(s.rate) && s.rate > 0.0, "schedule.rate must be positive")?;
        require(s.revolutions >= 1, "schedule.revolutions must be at least 1")?;
        require(finite(s.time_step) && s.time_step > 0.0, "schedule.time_step must be positive")?;
        require(s.sweep_rates.iter().all(|r| finite(*r) && *r > 0.0), "schedule.sweep_rates must be positive")?;
        let t = &self.tube;
        require(t.radial > 0 && t.angular > 0, "tube.radial and tube.angular must be positive")?;
        require(finite(t.rho_max) && t.rho_max > 0.0, "tube.rho_max must be positive")?;
        require(finite(t.eta) && t.eta > 0.0, "tube.eta must be positive")?;
        require(t.gamma.is_none_or(finite), "tube.gamma must be finite")?;
        require(finite(t.figure_epsilon) && t.figure_epsilon > 0.0, "tube.figure_epsilon must be positive")?;
        let tol = &self.tolerances;
        let all = [
            tol.spectrum,
            tol.first_order_operator,
            tol.first_order_state,
            tol.curvature,
            tol.curvature_analytic,
            tol.loop_phase,
            tol.transport_offdiagonal,
            tol.adiabatic,
        ];
        require(all.iter().all(|v| finite(*v) && *v > 0.0), "tolerances must be positive")?;
        Ok(())
    }
}
