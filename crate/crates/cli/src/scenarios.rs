//! The subcommands. Each writes its files into the output directory and
//! returns the paths it wrote.

use std::f64::consts::PI;
use std::fmt;
use std::io;
use std::path::PathBuf;

use serde::Serialize;
use wirephase::evolution::{adiabaticity_sweep, propagate_with, DrivingSchedule, PropagateOptions};
use wirephase::geometry::{arclength_defect, frenet_profile, frenet_profile_with, Direction, GeometryProfile};
use wirephase::grid::SGrid;
use wirephase::hamiltonian::{build_hamiltonian, eigensolve, GAP_THRESHOLD};
use wirephase::holonomy::{
    berry_curvature_plaquette, berry_phase_wilson_loop, wilczek_zee_transport, LoopDiagnostics, Orientation,
    ParameterLoop,
};
use wirephase::normal_modes::{tube_density_grid, TubeField, TubeResolution};
use wirephase::perturbation::{
    closed_form_h1, curvature_from_operators, extract_h1_with, first_order_state, per_revolution_phase,
    plane_wave_block,
};
use wirephase::Error;

use crate::config::{ConfigError, RunConfig};
use crate::export::{num, Csv, Metadata, OutDir};

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    /// A numerical error; any partial report has already been written.
    Numerical(Error),
    Io(io::Error),
    /// `reproduce-paper` finished but some checks failed.
    ChecksFailed(usize),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(e) if !e.is_numerical() => 2,
            Failure::Numerical(_) | Failure::ChecksFailed(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "{e}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::ChecksFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

pub type Outcome = Result<Vec<PathBuf>, Failure>;

/// +1 for the counterclockwise loop, −1 for the clockwise one.
fn orientation_sign(o: Orientation) -> f64 {
    match o {
        Orientation::Counterclockwise => 1.0,
        Orientation::Clockwise => -1.0,
    }
}

/// `K = i⟨∂_ξψ|∂_ζψ⟩` at the origin from the extracted first-order operators.
fn perturbative_curvature(cfg: &RunConfig, sigma: i32) -> Result<f64, Error> {
    let (hx, hz) = extract_h1_with(&cfg.curve, sigma, cfg.sgrid(), cfg.torsion)?;
    Ok(curvature_from_operators(&hx, &hz, sigma)?.re)
}

fn parameter_loop(cfg: &RunConfig) -> Result<ParameterLoop, Error> {
    ParameterLoop::circle(cfg.holonomy.epsilon, cfg.holonomy.points, cfg.holonomy.orientation)
}

// geometry ------------------------------------------------------------------

#[derive(Serialize)]
struct GeometryReport {
    meta: Metadata,
    xi: f64,
    zeta: f64,
    kappa_min: f64,
    kappa_max: f64,
    tau_max_abs: f64,
    max_arclength_defect: f64,
    fingerprint: String,
}

pub fn cmd_geometry(cfg: &RunConfig, out: &OutDir) -> Outcome {
    let (xi, zeta) = (cfg.point.xi, cfg.point.zeta);
    let p = frenet_profile_with(&cfg.curve, xi, zeta, cfg.sgrid(), cfg.torsion)?;
    let mut csv = Csv::new(&["s", "kappa", "tau", "speed"]);
    for i in 0..p.len() {
        csv.row(&[num(p.s_grid[i]), num(p.kappa[i]), num(p.tau[i]), num(p.speed[i])]);
    }
    let report = GeometryReport {
        meta: Metadata::new("geometry", cfg),
        xi,
        zeta,
        kappa_min: p.kappa.iter().copied().fold(f64::INFINITY, f64::min),
        kappa_max: p.kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        tau_max_abs: p.tau.iter().fold(0.0, |m, t| m.max(t.abs())),
        max_arclength_defect: arclength_defect(&cfg.curve, xi, zeta),
        fingerprint: format!("{:016x}", p.fingerprint()),
    };
    Ok(vec![out.write_csv("geometry.csv", &csv)?, out.write_json("geometry.json", &report)?])
}

// spectrum ------------------------------------------------------------------

#[derive(Serialize)]
struct SpectrumSector {
    sigma: i32,
    energies: Vec<f64>,
    gap: f64,
    gap_margin: f64,
}

#[derive(Serialize)]
struct SpectrumReport {
    meta: Metadata,
    xi: f64,
    zeta: f64,
    gap_threshold: f64,
    sectors: Vec<SpectrumSector>,
    /// `max |E_k(+1) − E_k(−1)|` when both sectors are computed.
    sigma_asymmetry: Option<f64>,
}

pub fn cmd_spectrum(cfg: &RunConfig, out: &OutDir) -> Outcome {
    let g = cfg.sgrid();
    let profile = frenet_profile_with(&cfg.curve, cfg.point.xi, cfg.point.zeta, g, cfg.torsion)?;
    let mut levels = Csv::new(&["sigma", "index", "energy"]);
    let mut density = Csv::new(&["sigma", "s", "density"]);
    let mut sectors = Vec::new();
    for &sigma in cfg.sigma.sectors() {
        let pairs = eigensolve(&build_hamiltonian(&profile, sigma, g)?, cfg.spectrum.count)?;
        for (k, p) in pairs.iter().enumerate() {
            levels.row(&[sigma.to_string(), k.to_string(), num(p.value)]);
        }
        for (s, z) in g.points().into_iter().zip(&pairs[0].vector) {
            density.row(&[sigma.to_string(), num(s), num(z.norm_sqr())]);
        }
        let gap = pairs[1].value - pairs[0].value;
        sectors.push(SpectrumSector {
            sigma,
            energies: pairs.iter().map(|p| p.value).collect(),
            gap,
            gap_margin: gap - GAP_THRESHOLD,
        });
    }
    let sigma_asymmetry = (sectors.len() == 2).then(|| {
        sectors[0].energies.iter().zip(&sectors[1].energies).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    });
    let report = SpectrumReport {
        meta: Metadata::new("spectrum", cfg),
        xi: cfg.point.xi,
        zeta: cfg.point.zeta,
        gap_threshold: GAP_THRESHOLD,
        sectors,
        sigma_asymmetry,
    };
    Ok(vec![
        out.write_csv("spectrum.csv", &levels)?,
        out.write_csv("ground_density.csv", &density)?,
        out.write_json("spectrum.json", &report)?,
    ])
}

// holonomy ------------------------------------------------------------------

#[derive(Serialize)]
struct SectorHolonomy {
    sigma: i32,
    gamma: Option<f64>,
    gamma_unwrapped: Option<f64>,
    #[serde(rename = "K_numeric")]
    k_numeric: Option<f64>,
    #[serde(rename = "K_analytic")]
    k_analytic: f64,
    /// `|K_numeric − K_analytic| / |K_analytic|`.
    rel_err: Option<f64>,
    /// `±2πε²K_analytic`, signed by the loop orientation.
    delta_phi_analytic: f64,
    gamma_rel_err: Option<f64>,
    loop_diagnostics: Option<LoopDiagnostics>,
    plaquette_diagnostics: Option<LoopDiagnostics>,
    errors: Vec<Error>,
}

#[derive(Serialize)]
struct TransportReport {
    /// Row-major `[[re, im], ...]` entries of the 2×2 unitary in the (σ=+1, σ=−1) basis.
    unitary: Option<[[[f64; 2]; 2]; 2]>,
    offdiagonal_max: Option<f64>,
    phases: Option<[f64; 2]>,
    error: Option<Error>,
}

#[derive(Serialize)]
struct HolonomyReport {
    meta: Metadata,
    orientation: Orientation,
    plaquette: f64,
    sectors: Vec<SectorHolonomy>,
    transport: Option<TransportReport>,
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn cmd_holonomy(cfg: &RunConfig, out: &OutDir) -> Outcome {
    let g = cfg.sgrid();
    let lp = parameter_loop(cfg)?;
    let mut first_error = None;
    let mut sectors = Vec::new();
    for &sigma in cfg.sigma.sectors() {
        let k_analytic = perturbative_curvature(cfg, sigma)?;
        let delta_phi =
            orientation_sign(cfg.holonomy.orientation) * per_revolution_phase(cfg.holonomy.epsilon, k_analytic);
        let mut sec = SectorHolonomy {
            sigma,
            gamma: None,
            gamma_unwrapped: None,
            k_numeric: None,
            k_analytic,
            rel_err: None,
            delta_phi_analytic: delta_phi,
            gamma_rel_err: None,
            loop_diagnostics: None,
            plaquette_diagnostics: None,
            errors: Vec::new(),
        };
        match berry_phase_wilson_loop(&cfg.curve, sigma, &lp, g) {
            Ok(r) => {
                sec.gamma = r.phase();
                sec.gamma_unwrapped = r.unwrapped_phase();
                sec.gamma_rel_err = r.phase().map(|p| rel(p, delta_phi));
                sec.loop_diagnostics = Some(r.diagnostics);
            }
            Err(e) => sec.errors.push(e),
        }
        match berry_curvature_plaquette(&cfg.curve, sigma, (0.0, 0.0), cfg.holonomy.plaquette, g) {
            Ok(r) => {
                sec.k_numeric = r.curvature();
                sec.rel_err = r.curvature().map(|k| rel(k, k_analytic));
                sec.plaquette_diagnostics = Some(r.diagnostics);
            }
            Err(e) => sec.errors.push(e),
        }
        if first_error.is_none() {
            first_error = sec.errors.first().cloned();
        }
        sectors.push(sec);
    }
    let transport = (cfg.sigma.sectors().len() == 2).then(|| match wilczek_zee_transport(&cfg.curve, &lp, g) {
        Ok(r) => {
            let u = r.unitary().expect("transport returns a unitary");
            let entry = |i, j| {
                let z: wirephase::linalg::C64 = u[(i, j)];
                [z.re, z.im]
            };
            TransportReport {
                unitary: Some([[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]]),
                offdiagonal_max: Some(u[(0, 1)].norm().max(u[(1, 0)].norm())),
                phases: Some([u[(0, 0)].arg(), u[(1, 1)].arg()]),
                error: None,
            }
        }
        Err(e) => {
            if first_error.is_none() {
                first_error = Some(e.clone());
            }
            TransportReport { unitary: None, offdiagonal_max: None, phases: None, error: Some(e) }
        }
    });
    let report = HolonomyReport {
        meta: Metadata::new("holonomy", cfg),
        orientation: cfg.holonomy.orientation,
        plaquette: cfg.holonomy.plaquette,
        sectors,
        transport,
    };
    let written = vec![out.write_json("holonomy.json", &report)?];
    match first_error {
        Some(e) => Err(Failure::Numerical(e)),
        None => Ok(written),
    }
}

// evolve --------------------------------------------------------------------

#[derive(Serialize)]
struct SectorEvolution {
    sigma: i32,
    geometric_phase: Option<f64>,
    dynamical_phase: Option<f64>,
    total_phase: Option<f64>,
    final_population: Option<f64>,
    min_population: Option<f64>,
    max_norm_drift: Option<f64>,
    steps: Option<usize>,
    /// Wilson-loop phase of the same loop times the number of revolutions.
    holonomy_reference: Option<f64>,
    relative_difference: Option<f64>,
    error: Option<Error>,
}

#[derive(Serialize)]
struct EvolutionReport {
    meta: Metadata,
    schedule: DrivingSchedule,
    revolutions: u32,
    sectors: Vec<SectorEvolution>,
}

pub fn cmd_evolve(cfg: &RunConfig, out: &OutDir) -> Outcome {
    let g = cfg.sgrid();
    let sc = &cfg.schedule;
    let schedule = DrivingSchedule::revolutions(cfg.holonomy.epsilon, sc.rate, sc.revolutions)
        .with_time_step(sc.time_step)
        .with_orientation(cfg.holonomy.orientation);
    let lp = parameter_loop(cfg)?;
    let opts = PropagateOptions { tolerate_population_loss: false, trace_every: sc.trace_every };
    let mut trace = Csv::new(&["sigma", "t", "xi", "zeta", "e0", "population", "dynamical_phase", "geometric_phase"]);
    let mut sectors = Vec::new();
    let mut first_error = None;
    for &sigma in cfg.sigma.sectors() {
        let reference = berry_phase_wilson_loop(&cfg.curve, sigma, &lp, g)
            .ok()
            .and_then(|r| r.phase())
            .map(|p| p * sc.revolutions as f64);
        let mut sec = SectorEvolution {
            sigma,
            geometric_phase: None,
            dynamical_phase: None,
            total_phase: None,
            final_population: None,
            min_population: None,
            max_norm_drift: None,
            steps: None,
            holonomy_reference: reference,
            relative_difference: None,
            error: None,
        };
        match propagate_with(&cfg.curve, sigma, &schedule, g, None, opts) {
            Ok(rep) => {
                for r in &rep.trace {
                    trace.row(&[
                        sigma.to_string(),
                        num(r.t),
                        num(r.xi),
                        num(r.zeta),
                        num(r.e0),
                        num(r.population),
                        num(r.dynamical_phase),
                        num(r.geometric_phase),
                    ]);
                }
                sec.geometric_phase = Some(rep.geometric_phase);
                sec.dynamical_phase = Some(rep.dynamical_phase);
                sec.total_phase = Some(rep.total_phase);
                sec.final_population = Some(rep.final_population);
                sec.min_population = Some(rep.min_population);
                sec.max_norm_drift = Some(rep.max_norm_drift);
                sec.steps = Some(rep.steps);
                sec.relative_difference = reference.map(|r| rel(rep.geometric_phase, r));
            }
            Err(e) => {
                first_error.get_or_insert(e.clone());
                sec.error = Some(e);
            }
        }
        sectors.push(sec);
    }
    let mut written = Vec::new();
    if sc.trace_every > 0 {
        written.push(out.write_csv("trace.csv", &trace)?);
    }
    if !sc.sweep_rates.is_empty() {
        let mut sweep =
            Csv::new(&["sigma", "rate", "geometric_phase", "holonomy_phase", "error", "min_population", "adiabatic"]);
        for &sigma in cfg.sigma.sectors() {
            let rows = adiabaticity_sweep(&cfg.curve, sigma, cfg.holonomy.epsilon, &sc.sweep_rates, g, sc.time_step)?;
            for r in rows {
                sweep.row(&[
                    sigma.to_string(),
                    num(r.rate),
                    num(r.geometric_phase),
                    num(r.holonomy_phase),
                    num(r.error),
                    num(r.min_population),
                    r.adiabatic.to_string(),
                ]);
            }
        }
        written.push(out.write_csv("sweep.csv", &sweep)?);
    }
    let report = EvolutionReport {
        meta: Metadata::new("evolve", cfg),
        schedule,
        revolutions: sc.revolutions,
        sectors,
    };
    written.push(out.write_json("evolve.json", &report)?);
    match first_error {
        Some(e) => Err(Failure::Numerical(e)),
        None => Ok(written),
    }
}

// tube ----------------------------------------------------------------------

#[derive(Serialize)]
struct TubeReport {
    meta: Metadata,
    xi: f64,
    zeta: f64,
    gamma: f64,
    revolutions: u32,
    delta_phi: f64,
    resolution: TubeResolution,
    /// Angle φ of the density maximum at each curve station.
    lobe_phi: Vec<f64>,
}

fn tube_csv(field: &TubeField) -> Csv {
    let mut csv = Csv::new(&["s", "rho", "phi", "x", "y", "z", "density"]);
    for t in &field.samples {
        csv.row(&[
            num(t.s),
            num(t.rho),
            num(t.phi),
            num(t.position[0]),
            num(t.position[1]),
            num(t.position[2]),
            num(t.density),
        ]);
    }
    csv
}

fn resolution(cfg: &RunConfig) -> TubeResolution {
    let t = &cfg.tube;
    TubeResolution { along: cfg.grid, radial: t.radial, angular: t.angular, rho_max: t.rho_max, eta: t.eta }
}

fn lobes(field: &TubeField) -> Vec<f64> {
    (0..field.resolution.along).map(|i| field.argmax_at_station(i).phi).collect()
}

pub fn cmd_tube(cfg: &RunConfig, out: &OutDir) -> Outcome {
    let k = perturbative_curvature(cfg, 1)?;
    let delta_phi = orientation_sign(cfg.holonomy.orientation) * per_revolution_phase(cfg.holonomy.epsilon, k);
    let gamma = cfg.tube.gamma.unwrap_or(cfg.tube.revolutions as f64 * delta_phi);
    let field = tube_density_grid(&cfg.curve, cfg.point.xi, cfg.point.zeta, gamma, resolution(cfg))?;
    let report = TubeReport {
        meta: Metadata::new("tube", cfg),
        xi: cfg.point.xi,
        zeta: cfg.point.zeta,
        gamma,
        revolutions: cfg.tube.revolutions,
        delta_phi,
        resolution: field.resolution,
        lobe_phi: lobes(&field),
    };
    Ok(vec![out.write_csv("tube.csv", &tube_csv(&field))?, out.write_json("tube.json", &report)?])
}

// reproduce-paper -----------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: String,
}

impl Check {
    fn new(name: &str, value: f64, expected: f64, error: f64, tolerance: f64, note: impl Into<String>) -> Self {
        Self { name: name.into(), value, expected, error, tolerance, pass: error <= tolerance, note: note.into() }
    }

    fn failed(name: &str, tolerance: f64, e: &Error) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            expected: f64::NAN,
            error: f64::NAN,
            tolerance,
            pass: false,
            note: e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct ReproductionReport {
    meta: Metadata,
    torsion: wirephase::geometry::TorsionConvention,
    checks: Vec<Check>,
    passed: usize,
    failed: usize,
    exports: Vec<String>,
}

fn record(checks: &mut Vec<Check>, name: &str, tol: f64, r: Result<Check, Error>) {
    checks.push(r.unwrap_or_else(|e| Check::failed(name, tol, &e)));
}

fn circle_check(g: SGrid, tol: f64) -> Result<Check, Error> {
    let h = build_hamiltonian(&GeometryProfile::circle(g), 1, g)?;
    let got = eigensolve(&h, 5)?;
    let want = [-0.125, 0.375, 0.375, 1.875, 1.875];
    let err = got.iter().zip(want).map(|(p, w)| (p.value - w).abs()).fold(0.0, f64::max);
    Ok(Check::new("circle spectrum", got[0].value, -0.125, err, tol, "lowest five vs (4k^2-1)/8, max abs error"))
}

fn frenet_check(cfg: &RunConfig) -> Result<Check, Error> {
    let g = cfg.sgrid();
    let e = 0.01;
    let px = frenet_profile(&cfg.curve, e, 0.0, g)?;
    let pz = frenet_profile(&cfg.curve, 0.0, e, g)?;
    let mut err = 0.0_f64;
    for (i, s) in g.points().into_iter().enumerate() {
        err = err.max((px.kappa[i] - (1.0 - 3.0 * e * (2.0 * s).cos())).abs());
        err = err.max((pz.tau[i] - 6.0 * e * (2.0 * s).sin()).abs());
    }
    Ok(Check::new("curvature and torsion", px.kappa[0], 1.0 - 3.0 * e, err, 5.0 * e * e, "first order at 0.01, max abs error"))
}

fn operator_check(cfg: &RunConfig) -> Result<Check, Error> {
    let g = cfg.sgrid();
    let mut worst = 0.0_f64;
    let mut zeta_element = 0.0;
    for sigma in [1, -1] {
        let (hx, hz) = extract_h1_with(&cfg.curve, sigma, g, cfg.torsion)?;
        for (op, dir) in [(&hx, Direction::Xi), (&hz, Direction::Zeta)] {
            let want = plane_wave_block(&closed_form_h1(dir, sigma, g), g, 6);
            let got = plane_wave_block(&op.matrix, g, 6);
            worst = worst.max(got.max_abs_diff(&want) / want.max_abs());
            if sigma == 1 && dir == Direction::Zeta {
                zeta_element = wirephase::perturbation::plane_wave_element(&op.matrix, g, 2, 0).im;
            }
        }
    }
    Ok(Check::new(
        "first-order Hamiltonian",
        zeta_element,
        3.0,
        worst,
        cfg.tolerances.first_order_operator,
        "Im<2|H1_zeta|0> for sigma=+1; error is max relative element error, |k| <= 6",
    ))
}

fn state_check(cfg: &RunConfig) -> Result<Check, Error> {
    let g = cfg.sgrid();
    let (xi, zeta) = (1e-3, 1e-3);
    let mut worst = 0.0_f64;
    let mut shown = 0.0;
    for sigma in [1, -1] {
        let (hx, hz) = extract_h1_with(&cfg.curve, sigma, g, cfg.torsion)?;
        let st = first_order_state(&hx, &hz, xi, zeta, sigma)?;
        let want = wirephase::linalg::C64::new(-3.0 * xi / 8.0, -3.0 * zeta * sigma as f64);
        let got = st.cos_coefficient(2);
        worst = worst.max((got - want).norm() / want.norm());
        if sigma == 1 {
            shown = got.im;
        }
    }
    Ok(Check::new(
        "first-order states",
        shown,
        -3.0 * zeta,
        worst,
        cfg.tolerances.first_order_state,
        "Im of the cos2s coefficient for sigma=+1 at xi=zeta=1e-3; error relative, both sigma",
    ))
}

fn curvature_checks(cfg: &RunConfig, checks: &mut Vec<Check>) {
    let g = cfg.sgrid();
    let tol = cfg.tolerances;
    for sigma in [1, -1] {
        let want = -9.0 / 16.0 * sigma as f64;
        let name = format!("plaquette curvature sigma={sigma:+}");
        let r = berry_curvature_plaquette(&cfg.curve, sigma, (0.0, 0.0), cfg.holonomy.plaquette, g)
            .map(|r| r.curvature().unwrap())
            .map(|k| Check::new(&name, k, want, rel(k, want), tol.curvature, "relative"));
        record(checks, &name, tol.curvature, r);
        let name = format!("analytic curvature sigma={sigma:+}");
        let r = perturbative_curvature(cfg, sigma)
            .map(|k| Check::new(&name, k, want, (k - want).abs(), tol.curvature_analytic, "absolute"));
        record(checks, &name, tol.curvature_analytic, r);
    }
}

/// Checks the loop phases and returns the σ = +1 value for later checks.
fn loop_checks(cfg: &RunConfig, checks: &mut Vec<Check>) -> Option<f64> {
    let g = cfg.sgrid();
    let tol = cfg.tolerances.loop_phase;
    let eps = cfg.holonomy.epsilon;
    let lp = match parameter_loop(cfg) {
        Ok(lp) => lp,
        Err(e) => {
            checks.push(Check::failed("loop phase", tol, &e));
            return None;
        }
    };
    let mut plus = None;
    for sigma in [1, -1] {
        let want = orientation_sign(cfg.holonomy.orientation) * -9.0 / 8.0 * PI * eps * eps * sigma as f64;
        let name = format!("loop phase sigma={sigma:+}");
        let r = berry_phase_wilson_loop(&cfg.curve, sigma, &lp, g).map(|r| r.phase().unwrap());
        if sigma == 1 {
            plus = r.as_ref().ok().copied();
        }
        let r = r.map(|p| Check::new(&name, p, want, rel(p, want), tol, format!("Wilson loop, eps={eps}, M={}", lp.len())));
        record(checks, &name, tol, r);
    }
    let name = "doublet transport";
    let r = wilczek_zee_transport(&cfg.curve, &lp, g).map(|r| {
        let u = r.unitary().unwrap();
        let off = u[(0, 1)].norm().max(u[(1, 0)].norm());
        let phase = u[(0, 0)].arg();
        let note = format!("max off-diagonal magnitude; diagonal phases {:.6e}, {:.6e}", phase, u[(1, 1)].arg());
        Check::new(name, off, 0.0, off, cfg.tolerances.transport_offdiagonal, note)
    });
    record(checks, name, cfg.tolerances.transport_offdiagonal, r);
    plus
}

fn adiabatic_check(cfg: &RunConfig, reference: f64) -> Result<Check, Error> {
    let sc = &cfg.schedule;
    let schedule = DrivingSchedule::revolutions(cfg.holonomy.epsilon, sc.rate, 1)
        .with_time_step(sc.time_step)
        .with_orientation(cfg.holonomy.orientation);
    let rep = propagate_with(&cfg.curve, 1, &schedule, cfg.sgrid(), None, PropagateOptions::default())?;
    Ok(Check::new(
        "adiabatic propagation",
        rep.geometric_phase,
        reference,
        rel(rep.geometric_phase, reference),
        cfg.tolerances.adiabatic,
        format!("one revolution at rate {}, relative to the loop phase", sc.rate),
    ))
}

fn off_binormal(phi: f64) -> f64 {
    let d = (phi - PI / 2.0).rem_euclid(PI);
    d.min(PI - d)
}

fn revolutions_to_quarter_turn(delta_phi: f64) -> u32 {
    ((PI / 2.0) / delta_phi.abs()).round() as u32
}

fn density_check(cfg: &RunConfig, delta_phi: f64) -> Result<Check, Error> {
    let m = revolutions_to_quarter_turn(delta_phi);
    let field = tube_density_grid(&cfg.curve, 0.0, 0.0, m as f64 * delta_phi, resolution(cfg))?;
    let worst = lobes(&field).into_iter().map(off_binormal).fold(0.0, f64::max);
    let cell = 2.0 * PI / cfg.tube.angular as f64;
    Ok(Check::new(
        "density rotation",
        worst,
        0.0,
        worst,
        cell,
        format!("m={m}: largest angle between density maximum and binormal; tolerance one angular cell"),
    ))
}

fn figure_exports(cfg: &RunConfig, out: &OutDir) -> Result<Vec<PathBuf>, Failure> {
    let res = resolution(cfg);
    let start = tube_density_grid(&cfg.curve, 0.0, 0.0, 0.0, res)?;
    let eps = cfg.tube.figure_epsilon;
    let delta_phi = orientation_sign(cfg.holonomy.orientation) * per_revolution_phase(eps, perturbative_curvature(cfg, 1)?);
    let m = revolutions_to_quarter_turn(delta_phi);
    let rotated = tube_density_grid(&cfg.curve, 0.0, 0.0, m as f64 * delta_phi, res)?;

    let mut surface = Csv::new(&["theta", "s", "x", "y", "z"]);
    let g = cfg.sgrid();
    let thetas = 48;
    for a in 0..thetas {
        let theta = 2.0 * PI * a as f64 / thetas as f64;
        let (xi, zeta) = wirephase::holonomy::driving_circle(eps, theta, cfg.holonomy.orientation);
        for s in g.points() {
            let p = cfg.curve.point(xi, zeta, s);
            surface.row(&[num(theta), num(s), num(p[0]), num(p[1]), num(p[2])]);
        }
    }
    Ok(vec![
        out.write_csv("initial_tube.csv", &tube_csv(&start))?,
        out.write_csv("swept_surface.csv", &surface)?,
        out.write_csv("rotated_tube.csv", &tube_csv(&rotated))?,
    ])
}

/// Runs every check, writes `report.json` and the figure exports, and
/// returns the checks for printing.
pub fn cmd_reproduce_paper(cfg: &RunConfig, out: &OutDir) -> Result<(Vec<PathBuf>, Vec<Check>), Failure> {
    let g = cfg.sgrid();
    let tol = cfg.tolerances;
    let mut checks = Vec::new();
    record(&mut checks, "circle spectrum", tol.spectrum, circle_check(g, tol.spectrum));
    record(&mut checks, "curvature and torsion", 5e-4, frenet_check(cfg));
    record(&mut checks, "first-order Hamiltonian", tol.first_order_operator, operator_check(cfg));
    record(&mut checks, "first-order states", tol.first_order_state, state_check(cfg));
    curvature_checks(cfg, &mut checks);
    match loop_checks(cfg, &mut checks) {
        Some(phase) => {
            record(&mut checks, "adiabatic propagation", tol.adiabatic, adiabatic_check(cfg, phase));
            let cell = 2.0 * PI / cfg.tube.angular as f64;
            record(&mut checks, "density rotation", cell, density_check(cfg, phase));
        }
        None => {
            let missing = Error::InvalidInput("needs the loop phase".into());
            checks.push(Check::failed("adiabatic propagation", tol.adiabatic, &missing));
            checks.push(Check::failed("density rotation", 0.0, &missing));
        }
    }
    let mut written = figure_exports(cfg, out)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    let report = ReproductionReport {
        meta: Metadata::new("reproduce-paper", cfg),
        torsion: cfg.torsion,
        passed: checks.len() - failed,
        failed,
        exports: written.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect(),
        checks: checks.clone(),
    };
    written.push(out.write_json("report.json", &report)?);
    Ok((written, checks))
}
