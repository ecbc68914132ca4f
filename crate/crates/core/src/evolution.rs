//! Time-dependent propagation along the driving schedule and the split of
//! the accumulated phase into dynamical and geometric parts.
//!
//! Each step is a midpoint Crank–Nicolson update with the Hamiltonian
//! rebuilt from the curve geometry at the step midpoint. The Hamiltonian is
//! shifted by the instantaneous ground energy before stepping and the shift
//! is accumulated separately as the dynamical phase `∫E₀ dt`; the phase that
//! remains on the state relative to the instantaneous eigenvector is then
//! the geometric phase, tracked as an unwrapped sum of small per-step
//! increments.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{frenet_profile, DeformableCurve};
use crate::grid::SGrid;
use crate::hamiltonian::{build_hamiltonian_with, eigensolve, SpectralOperators};
use crate::holonomy::{berry_phase_wilson_loop, driving_circle, Orientation, ParameterLoop};
use crate::linalg::{CMatrix, C64, I};

/// Norm drift that aborts a propagation.
pub const MAX_NORM_DRIFT: f64 = 1e-8;
/// Ground-state population below which adiabatic following is declared lost.
pub const MIN_POPULATION: f64 = 0.99;
/// Default time step (ħ = m = 1 units).
pub const DEFAULT_TIME_STEP: f64 = 0.25;

/// `(ξ(t), ζ(t))` on the driving circle with angular rate λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivingSchedule {
    pub epsilon: f64,
    /// Angular driving rate λ; zero holds the curve still.
    pub rate: f64,
    pub duration: f64,
    pub time_step: f64,
    #[serde(default)]
    pub orientation: Orientation,
    /// Traverse the path backwards in time, `p(T − t)`.
    #[serde(default)]
    pub reverse: bool,
}

impl DrivingSchedule {
    /// `m` full revolutions at rate λ.
    pub fn revolutions(epsilon: f64, rate: f64, m: u32) -> Self {
        Self {
            epsilon,
            rate,
            duration: 2.0 * PI * m as f64 / rate,
            time_step: DEFAULT_TIME_STEP,
            orientation: Orientation::Counterclockwise,
            reverse: false,
        }
    }

    /// Undeformed curve held for `duration`.
    pub fn hold(duration: f64) -> Self {
        Self {
            epsilon: 0.0,
            rate: 0.0,
            duration,
            time_step: DEFAULT_TIME_STEP,
            orientation: Orientation::Counterclockwise,
            reverse: false,
        }
    }

    pub fn with_time_step(mut self, dt: f64) -> Self {
        self.time_step = dt;
        self
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// The same path retraced from its end back to its start.
    pub fn reversed(mut self) -> Self {
        self.reverse = !self.reverse;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.epsilon >= 0.0
            && self.rate >= 0.0
            && self.duration >= 0.0
            && self.time_step > 0.0
            && [self.epsilon, self.rate, self.duration, self.time_step].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid driving schedule {self:?}")))
        }
    }

    pub fn point(&self, t: f64) -> (f64, f64) {
        let t = if self.reverse { self.duration - t } else { t };
        driving_circle(self.epsilon, self.rate * t, self.orientation)
    }

    /// Number of steps and the uniform step that divides the duration.
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.duration / self.time_step).ceil().max(1.0) as usize;
        (n, self.duration / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub xi: f64,
    pub zeta: f64,
    pub e0: f64,
    pub population: f64,
    pub dynamical_phase: f64,
    pub geometric_phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationReport {
    pub final_state: Vec<C64>,
    /// `arg⟨ψ_inst(T)|ψ(T)⟩`, unwrapped; equals `geometric − dynamical`.
    pub total_phase: f64,
    /// `∫₀ᵀ E₀(t) dt`.
    pub dynamical_phase: f64,
    pub geometric_phase: f64,
    pub final_population: f64,
    pub min_population: f64,
    pub max_norm_drift: f64,
    pub steps: usize,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PropagateOptions {
    /// Report low populations instead of failing with `AdiabaticityLoss`.
    pub tolerate_population_loss: bool,
    /// Record a trace row every this many steps (0 disables the trace).
    pub trace_every: usize,
}

struct Stepper<'a> {
    curve: &'a DeformableCurve,
    sigma: i32,
    ops: SpectralOperators,
}

impl Stepper<'_> {
    fn hamiltonian(&self, p: (f64, f64)) -> Result<CMatrix> {
        let profile = frenet_profile(self.curve, p.0, p.1, self.ops.grid())?;
        Ok(build_hamiltonian_with(&self.ops, &profile, self.sigma)?.into_matrix())
    }

    /// Ground energy and phase-fixed ground vector at `p`.
    fn ground(&self, h: &CMatrix) -> Result<(f64, Vec<C64>)> {
        let th = crate::hamiltonian::TangentialHamiltonian::from_matrix(h.clone(), self.sigma, self.ops.grid());
        let mut pairs = eigensolve(&th, 1)?;
        let p = pairs.pop().unwrap();
        Ok((p.value, p.vector))
    }
}

/// Propagates the instantaneous ground state at `t = 0` along `schedule`.
pub fn propagate(
    curve: &DeformableCurve,
    sigma: i32,
    schedule: &DrivingSchedule,
    grid: SGrid,
) -> Result<PropagationReport> {
    propagate_with(curve, sigma, schedule, grid, None, PropagateOptions::default())
}

/// Propagation from an arbitrary initial state (defaults to the
/// instantaneous ground state at `t = 0`).
pub fn propagate_with(
    curve: &DeformableCurve,
    sigma: i32,
    schedule: &DrivingSchedule,
    grid: SGrid,
    initial: Option<Vec<C64>>,
    options: PropagateOptions,
) -> Result<PropagationReport> {
    schedule.validate()?;
    crate::hamiltonian::check_sigma(sigma)?;
    let stepper = Stepper { curve, sigma, ops: SpectralOperators::new(grid) };
    let (steps, dt) = schedule.steps();

    let h_start = stepper.hamiltonian(schedule.point(0.0))?;
    let (mut e_prev, inst) = stepper.ground(&h_start)?;
    let mut psi = match initial {
        Some(v) => {
            if v.len() != grid.len() {
                return Err(Error::GridMismatch { expected: grid.len(), found: v.len() });
            }
            v
        }
        None => inst.clone(),
    };

    let mut overlap = grid.inner(&inst, &psi);
    let mut geometric = overlap.arg();
    let mut dynamical = 0.0;
    let mut min_population = overlap.norm_sqr();
    let mut max_norm_drift = 0.0_f64;
    let mut trace = Vec::new();
    let record = |t: f64, e0: f64, pop: f64, dyn_: f64, geo: f64, trace: &mut Vec<TraceRow>| {
        let (xi, zeta) = schedule.point(t);
        trace.push(TraceRow { t, xi, zeta, e0, population: pop, dynamical_phase: dyn_, geometric_phase: geo });
    };
    if options.trace_every > 0 {
        record(0.0, e_prev, min_population, 0.0, geometric, &mut trace);
    }

    for k in 0..steps {
        let t0 = k as f64 * dt;
        let t1 = t0 + dt;
        let h_end = stepper.hamiltonian(schedule.point(t1))?;
        let (e_next, inst_next) = stepper.ground(&h_end)?;
        let shift = 0.5 * (e_prev + e_next);

        let mut h_mid = stepper.hamiltonian(schedule.point(t0 + 0.5 * dt))?;
        h_mid.shift_diagonal(C64::new(-shift, 0.0));
        let half = I * (0.5 * dt);
        let mut lhs = h_mid.scale(half);
        lhs.shift_diagonal(C64::new(1.0, 0.0));
        let rhs_op = {
            let mut m = h_mid.scale(-half);
            m.shift_diagonal(C64::new(1.0, 0.0));
            m
        };
        psi = lhs.solve(&rhs_op.matvec(&psi))?;
        dynamical += shift * dt;

        let drift = (grid.norm(&psi) - 1.0).abs();
        max_norm_drift = max_norm_drift.max(drift);
        if drift > MAX_NORM_DRIFT {
            return Err(Error::NormDrift { drift, time: t1 });
        }

        let next = grid.inner(&inst_next, &psi);
        geometric += (next * overlap.conj()).arg();
        overlap = next;
        e_prev = e_next;

        let pop = overlap.norm_sqr();
        min_population = min_population.min(pop);
        if pop < MIN_POPULATION && !options.tolerate_population_loss {
            return Err(Error::AdiabaticityLoss { population: pop, time: t1 });
        }
        if options.trace_every > 0 && ((k + 1) % options.trace_every == 0 || k + 1 == steps) {
            record(t1, e_prev, pop, dynamical, geometric, &mut trace);
        }
    }

    Ok(PropagationReport {
        final_state: psi,
        total_phase: geometric - dynamical,
        dynamical_phase: dynamical,
        geometric_phase: geometric,
        final_population: overlap.norm_sqr(),
        min_population,
        max_norm_drift,
        steps,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub rate: f64,
    pub geometric_phase: f64,
    pub holonomy_phase: f64,
    pub error: f64,
    pub min_population: f64,
    pub adiabatic: bool,
}

/// Loop resolution used for the holonomy reference in sweeps.
pub const SWEEP_LOOP_POINTS: usize = 64;

/// One revolution per rate, compared against the Wilson-loop phase.
pub fn adiabaticity_sweep(
    curve: &DeformableCurve,
    sigma: i32,
    epsilon: f64,
    rates: &[f64],
    grid: SGrid,
    time_step: f64,
) -> Result<Vec<SweepRow>> {
    let reference = if epsilon == 0.0 {
        0.0
    } else {
        let lp = ParameterLoop::circle(epsilon, SWEEP_LOOP_POINTS, Orientation::Counterclockwise)?;
        berry_phase_wilson_loop(curve, sigma, &lp, grid)?.phase().unwrap_or(0.0)
    };
    rates
        .par_iter()
        .map(|&rate| {
            let schedule = DrivingSchedule::revolutions(epsilon, rate, 1).with_time_step(time_step);
            let opts = PropagateOptions { tolerate_population_loss: true, trace_every: 0 };
            let rep = propagate_with(curve, sigma, &schedule, grid, None, opts)?;
            Ok(SweepRow {
                rate,
                geometric_phase: rep.geometric_phase,
                holonomy_phase: reference,
                error: (rep.geometric_phase - reference).abs(),
                min_population: rep.min_population,
                adiabatic: rep.min_population >= MIN_POPULATION,
            })
        })
        .collect()
}
