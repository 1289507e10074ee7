//! Self-checks of the material kernel on randomized states, run by the
//! `check` subcommand and the acceptance suite.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constitutive::{
    project_rate_independent, project_viscoplastic, update_plastic_flow, yield_stress,
    yield_stress_scaled, Inelastic, Material, PlasticState, ProjectedStress, StrainMeasure,
};
use crate::fem1d::{point_eval, point_jacobian_ad, point_jacobian_analytic, Physics};
use crate::params::{nondimensionalize, DimensionlessParams, PhysicalParams};
use crate::tensor::{sym_exp, Mat3};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

/// Tolerances and sample counts.
pub const TABLE_REL_TOL: f64 = 5e-3;
pub const KKT_SAMPLES: usize = 10_000;
pub const KKT_TOL: f64 = 1e-9;
pub const VISCO_SAMPLES: usize = 1_000;
pub const VISCO_TOL: f64 = 1e-10;
pub const TANGENT_SAMPLES: usize = 100;
pub const TANGENT_AD_TOL: f64 = 1e-8;
pub const TANGENT_FD_TOL: f64 = 1e-5;
pub const FLOW_UPDATES: usize = 10_000;
pub const DET_TOL: f64 = 1e-8;

fn material() -> Material {
    Material::from_params(&DimensionlessParams::reference())
}

/// Random symmetric matrix with entries in `[-1, 1]`.
fn random_sym(rng: &mut ChaCha8Rng) -> Mat3<f64> {
    let mut m = Mat3::zero();
    for i in 0..3 {
        for j in i..3 {
            let v = rng.gen_range(-1.0..1.0);
            m.0[i][j] = v;
            m.0[j][i] = v;
        }
    }
    m
}

/// Random isochoric plastic history.
fn random_history(rng: &mut ChaCha8Rng, spread: f64) -> PlasticState {
    let a = random_sym(rng).dev();
    let n = a.norm();
    let f_pl = if n > 0.0 { sym_exp(&a.scale(rng.gen_range(0.0..spread) / n)) } else { Mat3::identity() };
    PlasticState { f_pl, eps: rng.gen_range(0.0..0.1) }
}

/// Scaled dimensionless values against the tabulated column.
pub fn table_reproduction() -> CheckOutcome {
    let name = "dimensionless table";
    let got = match nondimensionalize(&PhysicalParams::default()) {
        Ok(d) => d,
        Err(e) => return CheckOutcome { name, passed: false, detail: e.to_string() },
    };
    let want = DimensionlessParams::reference();
    let pairs = [
        ("E", got.youngs, want.youngs),
        ("Fo", got.fourier, want.fourier),
        ("v", got.molar_volume, want.molar_volume),
        ("sigma_Y_max", got.yield_max, want.yield_max),
        ("sigma_Y_min", got.yield_min, want.yield_min),
        ("gamma", got.hardening, want.hardening),
        ("k0", got.exchange_rate, want.exchange_rate),
    ];
    let misses: Vec<String> = pairs
        .iter()
        .filter(|(_, g, w)| ((g - w) / w).abs() > TABLE_REL_TOL)
        .map(|(n, g, w)| format!("{n} = {g:.5} vs {w} ({:+.2}%)", 100.0 * (g - w) / w))
        .collect();
    let detail = if misses.is_empty() {
        format!("{} values within {:.1}%", pairs.len(), 100.0 * TABLE_REL_TOL)
    } else {
        misses.join(", ")
    };
    CheckOutcome { name, passed: misses.is_empty(), detail }
}

/// Random trial Mandel stress whose deviator norm is `ratio` times `radius`.
fn trial_with_ratio(rng: &mut ChaCha8Rng, radius: f64, ratio: f64) -> Mat3<f64> {
    let dir = loop {
        let d = random_sym(rng).dev();
        if d.norm() > 1e-3 {
            break d;
        }
    };
    let mut m = dir.scale(ratio * radius / dir.norm());
    let p = rng.gen_range(-5.0..5.0);
    for i in 0..3 {
        m.0[i][i] += p;
    }
    m
}

/// Yield condition, complementarity and radial flow of the rate-independent projector.
pub fn return_mapping_kkt(samples: usize, seed: u64) -> CheckOutcome {
    let name = "return-mapping KKT";
    let mat = material();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_f, mut worst_comp, mut worst_dir) = (0.0f64, 0.0f64, 0.0f64);
    let mut active = 0;
    let mut failures = Vec::new();
    for _ in 0..samples {
        let c = rng.gen_range(0.0..1.0);
        let old = random_history(&mut rng, 0.2);
        let radius = yield_stress(c, old.eps, &mat);
        let ratio = rng.gen_range(0.0..3.0);
        let m_tri = trial_with_ratio(&mut rng, radius, ratio);
        let proj = match project_rate_independent(&m_tri, c, &old, &mat) {
            Ok(p) => p,
            Err(e) => {
                failures.push(e.to_string());
                continue;
            }
        };
        let delta = proj.eps_new - old.eps;
        let f_yield = proj.mandel.dev().norm() - yield_stress(c, proj.eps_new, &mat);
        // Admissibility, non-negative multiplier, complementarity.
        if delta < 0.0 {
            failures.push(format!("negative increment {delta:e}"));
        }
        worst_f = worst_f.max(f_yield.max(0.0));
        worst_comp = worst_comp.max((delta * f_yield).abs());
        if proj.active {
            active += 1;
            worst_f = worst_f.max(f_yield.abs());
            let dev = proj.mandel.dev();
            let n_tri = m_tri.dev().scale(1.0 / m_tri.dev().norm());
            worst_dir = worst_dir.max((dev.scale(1.0 / dev.norm()) + n_tri.scale(-1.0)).max_abs());
            worst_dir = worst_dir.max((proj.mandel.trace() - m_tri.trace()).abs());
        }
    }
    let worst = worst_f.max(worst_comp).max(worst_dir);
    let passed = failures.is_empty() && worst <= KKT_TOL;
    let mut detail = format!(
        "{samples} states ({active} plastic): max |F_Y| {worst_f:.2e}, max |dEps F_Y| {worst_comp:.2e}, flow-direction error {worst_dir:.2e}"
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; {} failures, first: {f}", failures.len()));
    }
    CheckOutcome { name, passed, detail }
}

/// Bisection on the overstress law, written out independently of the solver.
fn bisect_overstress(trial: f64, radius: f64, tau: f64, mat: &Material) -> f64 {
    let g = |x: f64| {
        let over = (trial - 2.0 * mat.shear * x - radius) / mat.overstress_ref;
        mat.ref_strain_rate * over.max(0.0).powf(mat.rate_exponent) - x / tau
    };
    let (mut lo, mut hi) = (0.0, (trial - radius) / (2.0 * mat.shear));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Viscoplastic increments against bisection.
pub fn viscoplastic_root(samples: usize, seed: u64) -> CheckOutcome {
    let name = "viscoplastic root";
    let mat = material();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for _ in 0..samples {
        let c = rng.gen_range(0.0..1.0);
        let old = random_history(&mut rng, 0.2);
        let radius = yield_stress_scaled(c, &mat);
        let ratio = rng.gen_range(1.0..4.0);
        let m_tri = trial_with_ratio(&mut rng, radius, ratio);
        let tau = 10f64.powf(rng.gen_range(-7.0..-1.0));
        match project_viscoplastic(&m_tri, c, &old, tau, &mat) {
            Ok(p) => {
                let oracle = bisect_overstress(m_tri.dev().norm(), radius, tau, &mat);
                worst = worst.max((p.increment - oracle).abs());
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    let passed = failures.is_empty() && worst <= VISCO_TOL;
    let mut detail = format!("{samples} states: max |dEps - bisection| {worst:.2e}");
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; {} failures, first: {f}", failures.len()));
    }
    CheckOutcome { name, passed, detail }
}

fn max_rel(a: &[[f64; 6]; 4], b: &[[f64; 6]; 4]) -> f64 {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().flatten().zip(b.iter().flatten()).fold(0.0, |m, (x, y)| m.max((x - y).abs() / scale))
}

/// Central differences of the point kernel.
fn fd_jacobian(x: &[f64; 6], r: f64, old: &PlasticState, tau: f64, phys: &Physics) -> Option<[[f64; 6]; 4]> {
    let mut jac = [[0.0; 6]; 4];
    for k in 0..6 {
        let h = 1e-6 * x[k].abs().max(1e-2);
        let (mut xp, mut xm) = (*x, *x);
        xp[k] += h;
        xm[k] -= h;
        let (fp, pp) = point_eval(&xp, r, old, tau, phys).ok()?;
        let (fm, pm) = point_eval(&xm, r, old, tau, phys).ok()?;
        if pp.active != pm.active {
            return None;
        }
        for i in 0..4 {
            jac[i][k] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Some(jac)
}

/// Distance of the trial state from the yield surface, relative to it.
fn yield_gap(proj: &ProjectedStress<f64>, c: f64, old: &PlasticState, model: Inelastic, mat: &Material) -> f64 {
    let radius = match model {
        Inelastic::Viscoplastic => yield_stress_scaled(c, mat),
        _ => yield_stress(c, old.eps, mat),
    };
    (proj.trial_dev_norm - radius).abs() / radius
}

/// Analytic, forward-mode and finite-difference point Jacobians.
pub fn tangents(samples: usize, seed: u64) -> CheckOutcome {
    let name = "tangents";
    let params = DimensionlessParams::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_ad, mut worst_fd) = (0.0f64, 0.0f64);
    let mut counts = [0usize; 3];
    let mut failures = Vec::new();
    let models = [Inelastic::Elastic, Inelastic::RateIndependent, Inelastic::Viscoplastic];
    let mut done = 0;
    let mut attempts = 0;
    while done < samples && attempts < 100 * samples {
        attempts += 1;
        let model = models[done % 3];
        let measure = if rng.gen_bool(0.5) { StrainMeasure::Hencky } else { StrainMeasure::GreenStVenant };
        let phys = Physics::new(params, model, measure);
        let r = rng.gen_range(0.05..1.0);
        let u_over_r = rng.gen_range(-0.05..0.25);
        let x = [
            rng.gen_range(0.05..0.95),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-5.0..5.0),
            u_over_r * r,
            u_over_r + rng.gen_range(-0.05..0.05),
        ];
        let f_rr = rng.gen_range(-0.1f64..0.1).exp();
        let old = PlasticState {
            f_pl: Mat3::diag(f_rr, 1.0 / f_rr.sqrt(), 1.0 / f_rr.sqrt()),
            eps: rng.gen_range(0.0..0.1),
        };
        let tau = 10f64.powf(rng.gen_range(-5.0..-2.0));
        let Ok((_, ana, proj)) = point_jacobian_analytic(&x, r, &old, tau, &phys) else {
            continue;
        };
        if model != Inelastic::Elastic && yield_gap(&proj, x[0], &old, model, &phys.mat) < 1e-4 {
            continue;
        }
        let ad = match point_jacobian_ad(&x, r, &old, tau, &phys) {
            Ok((_, j, _)) => j,
            Err(e) => {
                failures.push(e.to_string());
                continue;
            }
        };
        let Some(fd) = fd_jacobian(&x, r, &old, tau, &phys) else {
            continue;
        };
        worst_ad = worst_ad.max(max_rel(&ad, &ana));
        worst_fd = worst_fd.max(max_rel(&ad, &fd));
        if proj.active {
            counts[if model == Inelastic::Viscoplastic { 2 } else { 1 }] += 1;
        } else {
            counts[0] += 1;
        }
        done += 1;
    }
    let passed = failures.is_empty() && done == samples && worst_ad <= TANGENT_AD_TOL && worst_fd <= TANGENT_FD_TOL;
    let mut detail = format!(
        "{done} states ({} elastic, {} plastic, {} viscoplastic): analytic vs AD {worst_ad:.2e}, FD vs AD {worst_fd:.2e}",
        counts[0], counts[1], counts[2]
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; {} failures, first: {f}", failures.len()));
    }
    CheckOutcome { name, passed, detail }
}

/// Determinant of the plastic deformation gradient under repeated flow.
pub fn plastic_incompressibility(updates: usize, seed: u64) -> CheckOutcome {
    let name = "plastic incompressibility";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = PlasticState::default();
    let mut worst = 0.0f64;
    for _ in 0..updates {
        let dir = random_sym(&mut rng).dev();
        let n = dir.norm();
        if n == 0.0 {
            continue;
        }
        let increment = rng.gen_range(0.0..1e-2);
        let proj = ProjectedStress {
            mandel: Mat3::zero(),
            dev_norm: 0.0,
            trial_dev_norm: 0.0,
            eps_new: state.eps + increment,
            increment,
            flow_dir: dir.scale(1.0 / n),
            active: true,
        };
        state = update_plastic_flow(&state, &proj);
        worst = worst.max((state.f_pl.det() - 1.0).abs());
    }
    CheckOutcome {
        name,
        passed: worst <= DET_TOL,
        detail: format!("{updates} updates, eps = {:.2}: max |det F_pl - 1| {worst:.2e}", state.eps),
    }
}

/// Every check with its default sample count, timed.
pub fn run_all(seed: u64) -> Vec<(CheckOutcome, f64)> {
    let timed = |f: &dyn Fn() -> CheckOutcome| {
        let start = Instant::now();
        let out = f();
        (out, start.elapsed().as_secs_f64())
    };
    vec![
        timed(&table_reproduction),
        timed(&|| return_mapping_kkt(KKT_SAMPLES, seed)),
        timed(&|| viscoplastic_root(VISCO_SAMPLES, seed + 1)),
        timed(&|| tangents(TANGENT_SAMPLES, seed + 2)),
        timed(&|| plastic_incompressibility(FLOW_UPDATES, seed + 3)),
    ]
}
