//! Galvanostatic cycling of one particle: couples the finite-element
//! system to the NDF integrator, commits plastic history, adapts the mesh
//! and samples traces and field snapshots.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::chemistry::butler_volmer_voltage;
use crate::constitutive::{Inelastic, StrainMeasure};
use crate::fem1d::banded::BandMatrix;
use crate::fem1d::{
    adapt_mesh, assemble_jacobian, assemble_residual, build_mesh_with_max, component,
    estimate_spatial_error, field_profile, initial_state, mass_matrix, soc_of_field,
    surface_trace, AdaptOptions, FemError, Field, Mesh1D, Physics, PointState, QuadratureField,
    TangentMode, N_FIELDS, DEFAULT_MAX_LEVEL, DEFAULT_MIN_LEVEL, DEFAULT_ORDER,
};
use crate::params::DimensionlessParams;
use crate::timestepper::{wrms, DaeSystem, EvalFailure, IntegrationError, IntegratorConfig, Ndf};

/// Length of one half cycle in cycle time units.
pub const HALF_CYCLE: f64 = 0.9;

/// Bounds on admissible concentrations, with a little slack for roundoff.
const C_SLACK: f64 = 1e-8;

const RECONCILE_MAX_ITER: usize = 20;
/// Update norm, in integrator tolerance units, ending the equilibrium solve.
const RECONCILE_TOL: f64 = 1e-6;
/// Step length for the material update during the equilibrium solve; short
/// enough that rate-dependent flow is negligible.
const RECONCILE_TAU: f64 = 1e-12;

/// Surface concentration above which a failed step counts as saturation.
const SATURATION: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Elastic,
    /// Rate-independent with isotropic hardening.
    Plastic,
    /// Rate-independent without hardening.
    IdealPlastic,
    Viscoplastic,
}

impl Model {
    pub fn inelastic(self) -> Inelastic {
        match self {
            Model::Elastic => Inelastic::Elastic,
            Model::Plastic | Model::IdealPlastic => Inelastic::RateIndependent,
            Model::Viscoplastic => Inelastic::Viscoplastic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Elastic => "elastic",
            Model::Plastic => "plastic",
            Model::IdealPlastic => "ideal_plastic",
            Model::Viscoplastic => "viscoplastic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub params: DimensionlessParams,
    pub model: Model,
    pub measure: StrainMeasure,
    pub tangent: TangentMode,
    pub half_cycles: usize,
    pub integrator: IntegratorConfig,
    pub adapt: AdaptOptions,
    /// Accepted steps between mesh adaptations.
    pub adapt_every: usize,
    pub min_level: u32,
    pub max_level: u32,
    pub order: usize,
    /// State-of-charge values at which field profiles are recorded, in
    /// every half cycle that passes them.
    pub snapshot_soc: Vec<f64>,
}

impl SimulationConfig {
    pub fn new(params: DimensionlessParams, model: Model) -> Self {
        SimulationConfig {
            params,
            model,
            measure: StrainMeasure::Hencky,
            tangent: TangentMode::Analytic,
            half_cycles: 1,
            integrator: IntegratorConfig::default(),
            adapt: AdaptOptions::default(),
            adapt_every: 5,
            min_level: DEFAULT_MIN_LEVEL,
            max_level: DEFAULT_MAX_LEVEL,
            order: DEFAULT_ORDER,
            snapshot_soc: vec![0.13, 0.5, 0.92],
        }
    }

    pub fn physics(&self) -> Physics {
        let mut p = self.params;
        if self.model == Model::IdealPlastic {
            p.hardening = 0.0;
        }
        Physics::new(p, self.model.inelastic(), self.measure)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error("equilibrium after mesh change failed: {0}")]
    Reconcile(String),
    #[error("invalid simulation setup: {0}")]
    Setup(String),
}

/// One accepted time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub tau: f64,
    pub order: usize,
    pub newton_iters: usize,
    pub soc: f64,
    pub c_surf: f64,
    pub sigma_phi_surf: f64,
    pub eps_pl_surf: f64,
    /// Butler-Volmer cell voltage in volts; NaN where undefined.
    pub voltage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub half_cycle: usize,
    pub soc: f64,
    pub t: f64,
    pub points: Vec<PointState>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfCycleStats {
    pub index: usize,
    pub accepted_steps: usize,
    /// Sum over accepted steps of the largest plastic-strain increment.
    pub plastic_growth: f64,
    pub max_eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    /// The surface filled up before the end of the protocol.
    SurfaceSaturated { t: f64, soc: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub newton_iterations: usize,
    pub adaptations: usize,
    pub final_soc: f64,
    /// Largest deviation of the state of charge from the prescribed charge.
    pub max_soc_drift: f64,
    pub max_eps: f64,
    pub final_elements: usize,
    pub termination: Termination,
    pub wall: Duration,
    pub assembly: Duration,
    pub solve: Duration,
}

impl RunSummary {
    pub fn mean_newton(&self) -> f64 {
        self.newton_iterations as f64 / self.accepted_steps.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
    pub cycles: Vec<HalfCycleStats>,
    pub summary: RunSummary,
}

/// State of charge prescribed by the flux protocol at time `t`.
pub fn expected_soc(t: f64, c0: f64) -> f64 {
    let k = (t / HALF_CYCLE).floor();
    let s = t - k * HALF_CYCLE;
    if (k as i64) % 2 == 0 {
        c0 + s
    } else {
        c0 + HALF_CYCLE - s
    }
}

/// Times within half cycle `k` at which the state of charge equals `soc`.
fn snapshot_time(k: usize, soc: f64, c0: f64) -> Option<f64> {
    let s = if k % 2 == 0 { soc - c0 } else { c0 + HALF_CYCLE - soc };
    (-1e-12..=HALF_CYCLE + 1e-12)
        .contains(&s)
        .then(|| k as f64 * HALF_CYCLE + s.clamp(0.0, HALF_CYCLE))
}

struct Particle<'a> {
    mesh: Mesh1D,
    history: QuadratureField,
    phys: &'a Physics,
    mode: TangentMode,
    mass: BandMatrix,
    ext_flux: f64,
    assembly: Duration,
}

impl DaeSystem for Particle<'_> {
    fn mass(&self) -> &BandMatrix {
        &self.mass
    }

    fn residual_and_jacobian(
        &mut self,
        _t: f64,
        y: &[f64],
        tau: f64,
    ) -> Result<(Vec<f64>, BandMatrix), EvalFailure> {
        let start = Instant::now();
        let out = assemble_jacobian(y, &self.mesh, &self.history, tau, self.ext_flux, self.phys, self.mode);
        self.assembly += start.elapsed();
        let (f, jac, _) = out.map_err(|e| EvalFailure(e.to_string()))?;
        Ok((f, jac))
    }

    fn residual(&mut self, _t: f64, y: &[f64], tau: f64) -> Result<Vec<f64>, EvalFailure> {
        let start = Instant::now();
        let out = assemble_residual(y, &self.mesh, &self.history, tau, self.ext_flux, self.phys);
        self.assembly += start.elapsed();
        out.map(|(f, _)| f).map_err(|e| EvalFailure(e.to_string()))
    }

    fn admissible(&self, y: &[f64]) -> Result<(), EvalFailure> {
        match y.iter().step_by(N_FIELDS).find(|c| !(-C_SLACK..=1.0 + C_SLACK).contains(*c)) {
            Some(c) => Err(EvalFailure(format!("concentration {c} outside [0, 1]"))),
            None => Ok(()),
        }
    }
}

impl Particle<'_> {
    fn record(&self, y: &[f64], step: Option<(f64, f64, usize, usize)>) -> Result<StepRecord, FemError> {
        let (t, tau, order, newton_iters) = step.unwrap_or((0.0, 0.0, 0, 0));
        let soc = soc_of_field(&component(y, Field::Concentration), &self.mesh)?;
        let surf = surface_trace(y, &self.mesh, &self.history, self.phys)?;
        let voltage =
            butler_volmer_voltage(surf.c, surf.mu, self.ext_flux, &self.phys.params).unwrap_or(f64::NAN);
        Ok(StepRecord {
            t,
            tau,
            order,
            newton_iters,
            soc,
            c_surf: surf.c,
            sigma_phi_surf: surf.sigma_phi,
            eps_pl_surf: surf.eps_pl,
            voltage,
        })
    }

    fn adapt(&mut self, ndf: &mut Ndf, opts: &AdaptOptions) -> Result<bool, SimulationError> {
        let indicators = estimate_spatial_error(ndf.y(), &self.mesh);
        let Some(transfer) = adapt_mesh(&self.mesh, &indicators, opts) else {
            return Ok(false);
        };
        ndf.remap(|v| transfer.apply(v));
        self.history = transfer.history(&self.history);
        self.mesh = transfer.new.clone();
        self.mass = mass_matrix(&self.mesh);
        let y = self.reconcile(ndf.y(), ndf.config())?;
        ndf.correct_solution(y);
        Ok(true)
    }

    /// Solves the potential and displacement equations at fixed
    /// concentration, then commits the plastic state they imply. Transferred
    /// fields and history are otherwise slightly out of equilibrium.
    fn reconcile(&mut self, y0: &[f64], cfg: &IntegratorConfig) -> Result<Vec<f64>, SimulationError> {
        let mut y = y0.to_vec();
        for _ in 0..RECONCILE_MAX_ITER {
            let (mut f, mut jac, _) = assemble_jacobian(
                &y, &self.mesh, &self.history, RECONCILE_TAU, self.ext_flux, self.phys, self.mode,
            )?;
            for row in (0..y.len()).step_by(N_FIELDS) {
                jac.clear_row(row);
                jac.add(row, row, 1.0);
                f[row] = 0.0;
            }
            let lu = jac.factor().map_err(|e| SimulationError::Reconcile(e.to_string()))?;
            let dy = lu.solve(&f);
            let scale: Vec<f64> = y.iter().map(|v| cfg.abs_tol + cfg.rel_tol * v.abs()).collect();
            for (yi, d) in y.iter_mut().zip(&dy) {
                *yi -= d;
            }
            if wrms(&dy, &scale) <= RECONCILE_TOL {
                let (_, trial) = assemble_residual(
                    &y, &self.mesh, &self.history, RECONCILE_TAU, self.ext_flux, self.phys,
                )?;
                self.history = self.history.committed(&trial);
                return Ok(y);
            }
        }
        Err(SimulationError::Reconcile(format!(
            "no convergence in {RECONCILE_MAX_ITER} iterations"
        )))
    }
}

/// Runs the configured cycling protocol.
pub fn simulate(cfg: &SimulationConfig) -> Result<RunOutput, SimulationError> {
    cfg.integrator.validate().map_err(|e| SimulationError::Setup(e.to_string()))?;
    if cfg.half_cycles == 0 {
        return Err(SimulationError::Setup("at least one half cycle is required".into()));
    }
    if cfg.min_level > cfg.max_level || !(1..=4).contains(&cfg.order) {
        return Err(SimulationError::Setup("mesh levels or element order out of range".into()));
    }
    let wall = Instant::now();
    let phys = cfg.physics();
    let c0 = phys.params.c0;
    let mesh = build_mesh_with_max(cfg.min_level, cfg.max_level, cfg.order);
    let (y0, history) = initial_state(&mesh, &phys);
    let mut sys = Particle {
        mass: mass_matrix(&mesh),
        mesh,
        history,
        phys: &phys,
        mode: cfg.tangent,
        ext_flux: phys.params.ext_flux,
        assembly: Duration::ZERO,
    };
    let mut ndf = Ndf::new(0.0, y0, cfg.integrator);

    let mut records = vec![sys.record(ndf.y(), None)?];
    let mut snapshots = Vec::new();
    let mut cycles = Vec::new();
    let mut accepted = 0;
    let mut rejected = 0;
    let mut newton = 0;
    let mut adaptations = 0;
    let mut max_drift = 0.0f64;
    let mut termination = Termination::Completed;

    'cycles: for k in 0..cfg.half_cycles {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sys.ext_flux = sign * phys.params.ext_flux;
        if k > 0 {
            ndf.restart(cfg.integrator.tau0);
            if sys.adapt(&mut ndf, &cfg.adapt)? {
                adaptations += 1;
            }
        }
        let t_end = (k + 1) as f64 * HALF_CYCLE;
        let mut events: Vec<f64> = cfg
            .snapshot_soc
            .iter()
            .filter_map(|&s| snapshot_time(k, s, c0))
            .collect();
        events.sort_by(f64::total_cmp);
        // Coarsening re-interpolates c and starts fast transients, so inside
        // a half cycle the mesh only grows. It may shrink at reversals.
        let refine_only = AdaptOptions { theta_coarsen: 0.0, ..cfg.adapt };
        let mut stats = HalfCycleStats { index: k, accepted_steps: 0, plastic_growth: 0.0, max_eps: 0.0 };

        if k == 0 && events.first() == Some(&0.0) {
            snapshots.push(Snapshot {
                half_cycle: 0,
                soc: c0,
                t: 0.0,
                points: field_profile(ndf.y(), &sys.mesh, &sys.history, &phys)?,
            });
        }

        while ndf.t() < t_end - 1e-12 {
            let t_stop = events
                .iter()
                .copied()
                .find(|&te| te > ndf.t() + 1e-12)
                .unwrap_or(t_end)
                .min(t_end);
            let info = match ndf.step(&mut sys, t_stop) {
                Ok(info) => info,
                Err(err) => {
                    let surf = surface_trace(ndf.y(), &sys.mesh, &sys.history, &phys)?;
                    if surf.c > SATURATION {
                        let soc = soc_of_field(&component(ndf.y(), Field::Concentration), &sys.mesh)?;
                        termination = Termination::SurfaceSaturated { t: ndf.t(), soc };
                        cycles.push(stats);
                        break 'cycles;
                    }
                    return Err(err.into());
                }
            };
            let (_, trial) =
                assemble_residual(ndf.y(), &sys.mesh, &sys.history, info.tau, sys.ext_flux, &phys)?;
            sys.history = sys.history.committed(&trial);
            accepted += 1;
            rejected += info.rejections;
            newton += info.newton_iters;
            stats.accepted_steps += 1;
            stats.plastic_growth += sys.history.max_increment();
            stats.max_eps = sys.history.max_eps();

            let rec = sys.record(ndf.y(), Some((info.t, info.tau, info.order, info.newton_iters)))?;
            max_drift = max_drift.max((rec.soc - expected_soc(info.t.min(t_end - 1e-15), c0)).abs());
            records.push(rec);

            if events.iter().any(|&te| (te - ndf.t()).abs() < 1e-12) {
                snapshots.push(Snapshot {
                    half_cycle: k,
                    soc: cfg.snapshot_soc_near(ndf.t(), k, c0),
                    t: ndf.t(),
                    points: field_profile(ndf.y(), &sys.mesh, &sys.history, &phys)?,
                });
            }
            if accepted % cfg.adapt_every.max(1) == 0 && sys.adapt(&mut ndf, &refine_only)? {
                adaptations += 1;
            }
        }
        cycles.push(stats);
    }

    let last = records.last().expect("initial record");
    let summary = RunSummary {
        accepted_steps: accepted,
        rejected_steps: rejected,
        newton_iterations: newton,
        adaptations,
        final_soc: last.soc,
        max_soc_drift: max_drift,
        max_eps: sys.history.max_eps(),
        final_elements: sys.mesh.n_elements(),
        termination,
        wall: wall.elapsed(),
        assembly: sys.assembly,
        solve: wall.elapsed().saturating_sub(sys.assembly),
    };
    Ok(RunOutput { records, snapshots, cycles, summary })
}

impl SimulationConfig {
    fn snapshot_soc_near(&self, t: f64, k: usize, c0: f64) -> f64 {
        self.snapshot_soc
            .iter()
            .copied()
            .find(|&s| snapshot_time(k, s, c0).is_some_and(|te| (te - t).abs() < 1e-12))
            .unwrap_or_else(|| expected_soc(t, c0))
    }
}
