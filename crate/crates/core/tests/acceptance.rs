//! End-to-end acceptance criteria. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chemoplast::checks;
use chemoplast::constitutive::StrainMeasure;
use chemoplast::fem1d::{PointState, TangentMode};
use chemoplast::scenario::ScenarioConfig;
use chemoplast::simulation::{simulate, Model, RunOutput, StepRecord, HALF_CYCLE};

const SEED: u64 = 20_240_601;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Run {
    Half(Model),
    HalfAd,
    HalfGsv,
    StiffYield,
    HalfRate,
    Nine(Model),
}

impl Run {
    fn config(self) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        match self {
            Run::Half(m) => cfg.model = m,
            Run::HalfAd => cfg.tangent = TangentMode::Ad,
            Run::HalfGsv => cfg.measure = StrainMeasure::GreenStVenant,
            Run::StiffYield => cfg.physical.yield_max = 1.0e9,
            Run::HalfRate => cfg.physical.c_rate = 0.5,
            Run::Nine(m) => {
                cfg.model = m;
                cfg.half_cycles = 9;
            }
        }
        cfg
    }
}

/// Simulations shared between criteria, run on first use.
#[derive(Default)]
struct Runs {
    done: HashMap<Run, Result<(RunOutput, Duration), String>>,
}

impl Runs {
    fn get(&mut self, run: Run) -> Result<&RunOutput, String> {
        let entry = self.done.entry(run).or_insert_with(|| {
            let start = Instant::now();
            run.config()
                .simulation()
                .map_err(|e| e.to_string())
                .and_then(|sim| simulate(&sim).map_err(|e| e.to_string()))
                .map(|out| (out, start.elapsed()))
        });
        match entry {
            Ok((out, _)) => Ok(out),
            Err(e) => Err(format!("{run:?} failed: {e}")),
        }
    }

    fn elapsed(&self, run: Run) -> f64 {
        match self.done.get(&run) {
            Some(Ok((_, d))) => d.as_secs_f64(),
            _ => f64::NAN,
        }
    }
}

type Verdict = Result<(bool, String), String>;

fn timed_check(outcome: checks::CheckOutcome, start: Instant, limit: f64) -> Verdict {
    let secs = start.elapsed().as_secs_f64();
    let fast = secs < limit;
    Ok((outcome.passed && fast, format!("{}; {secs:.2} s (limit {limit} s)", outcome.detail)))
}

fn snapshot<'a>(out: &'a RunOutput, half_cycle: usize, soc: f64) -> Result<&'a [PointState], String> {
    out.snapshots
        .iter()
        .find(|s| s.half_cycle == half_cycle && (s.soc - soc).abs() < 1e-9)
        .map(|s| s.points.as_slice())
        .ok_or_else(|| format!("no snapshot at SOC {soc} in half cycle {half_cycle}"))
}

fn peak_eps(points: &[PointState]) -> f64 {
    points.iter().map(|p| p.eps_pl).fold(0.0, f64::max)
}

/// Piecewise-linear interpolation of `(xs, ys)` at `x`; `xs` ascending.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|v| *v < x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[i - 1], xs[i]);
    if x1 == x0 {
        return ys[i];
    }
    let w = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
    ys[i - 1] + w * (ys[i] - ys[i - 1])
}

/// Largest deviation of `b` from `a`, relative to the largest `|a|`, with
/// `b` interpolated onto the abscissae of `a`.
fn rel_linf(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (bx, by): (Vec<f64>, Vec<f64>) = b.iter().copied().unzip();
    let scale = a.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    a.iter().map(|&(x, y)| (interp(&bx, &by, x) - y).abs()).fold(0.0, f64::max) / scale
}

/// Surface hoop stress of half cycle `k` against time since its start.
fn half_cycle_trace(records: &[StepRecord], k: usize) -> Vec<(f64, f64)> {
    let t0 = k as f64 * HALF_CYCLE;
    records
        .iter()
        .filter(|r| r.t >= t0 - 1e-12 && r.t <= t0 + HALF_CYCLE + 1e-12)
        .map(|r| (r.t - t0, r.sigma_phi_surf))
        .collect()
}

/// Largest pointwise gap between two traces, `b` interpolated onto `a`.
fn trace_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (bx, by): (Vec<f64>, Vec<f64>) = b.iter().copied().unzip();
    a.iter().map(|&(x, y)| (interp(&bx, &by, x) - y).abs()).fold(0.0, f64::max)
}

fn c1_table() -> Verdict {
    let start = Instant::now();
    timed_check(checks::table_reproduction(), start, 1.0)
}

fn c2_kkt() -> Verdict {
    let start = Instant::now();
    timed_check(checks::return_mapping_kkt(checks::KKT_SAMPLES, SEED), start, 10.0)
}

fn c3_visco_root() -> Verdict {
    let start = Instant::now();
    timed_check(checks::viscoplastic_root(checks::VISCO_SAMPLES, SEED + 1), start, 10.0)
}

fn c4_tangents() -> Verdict {
    let out = checks::tangents(checks::TANGENT_SAMPLES, SEED + 2);
    Ok((out.passed, out.detail))
}

fn c5_det() -> Verdict {
    let out = checks::plastic_incompressibility(checks::FLOW_UPDATES, SEED + 3);
    Ok((out.passed, out.detail))
}

fn c6_mass(runs: &mut Runs) -> Verdict {
    let run = Run::Half(Model::Viscoplastic);
    let out = runs.get(run)?;
    let c0 = run.config().physical.c0_frac;
    let drift = out.records.iter().map(|r| (r.soc - (c0 + r.t)).abs()).fold(0.0, f64::max);
    let final_soc = out.summary.final_soc;
    let secs = runs.elapsed(run);
    Ok((
        drift <= 1e-6 && (final_soc - 0.92).abs() <= 1e-3 && secs < 300.0,
        format!("max |SOC - (c0 + t)| {drift:.2e}, final SOC {final_soc:.6}, {secs:.2} s"),
    ))
}

fn c7_reversal(runs: &mut Runs) -> Verdict {
    let mut s = Vec::new();
    for m in [Model::Elastic, Model::Plastic, Model::Viscoplastic] {
        let out = runs.get(Run::Half(m))?;
        let last = out.records.last().ok_or("empty trace")?;
        if (last.soc - 0.92).abs() > 1e-3 {
            return Err(format!("{} run ended at SOC {}", m.name(), last.soc));
        }
        s.push(last.sigma_phi_surf);
    }
    Ok((
        s[0] < 0.0 && s[1] > 0.0 && s[2] > 0.0,
        format!("surface sigma_phi at SOC 0.92: elastic {:+.4}, plastic {:+.4}, viscoplastic {:+.4}", s[0], s[1], s[2]),
    ))
}

fn c8_magnitudes(runs: &mut Runs) -> Verdict {
    let within = |x: f64, target: f64| (x - target).abs() <= 0.01;
    let pl = runs.get(Run::Half(Model::Plastic))?;
    let (early, late) = (peak_eps(snapshot(pl, 0, 0.13)?), peak_eps(snapshot(pl, 0, 0.92)?));
    let vp = runs.get(Run::Half(Model::Viscoplastic))?;
    let (v_early, v_late) = (peak_eps(snapshot(vp, 0, 0.13)?), peak_eps(snapshot(vp, 0, 0.92)?));
    Ok((
        within(early, 0.034) && within(late, 0.04),
        format!(
            "plastic peak eps_pl_v {:.2}% at SOC 0.13, {:.2}% at SOC 0.92 (viscoplastic {:.2}%, {:.2}%)",
            100.0 * early,
            100.0 * late,
            100.0 * v_early,
            100.0 * v_late
        ),
    ))
}

fn c9_thresholds(runs: &mut Runs) -> Verdict {
    // Numerically zero: six orders below the strains of the reference run.
    const ZERO: f64 = 1e-8;
    let stiff = runs.get(Run::StiffYield)?.summary.max_eps;
    let slow = runs.get(Run::HalfRate)?.summary.max_eps;
    Ok((
        stiff <= ZERO && slow <= ZERO,
        format!("viscoplastic max eps_pl_v: sigma_Y_max 1 GPa {stiff:.2e}, 0.5C {slow:.2e} (zero means <= {ZERO:e})"),
    ))
}

fn c10_measures(runs: &mut Runs) -> Verdict {
    let h = snapshot(runs.get(Run::Half(Model::Viscoplastic))?, 0, 0.5)?.to_vec();
    let g = snapshot(runs.get(Run::HalfGsv)?, 0, 0.5)?.to_vec();
    let profile = |pts: &[PointState], f: fn(&PointState) -> f64| -> Vec<(f64, f64)> {
        pts.iter().map(|p| (p.r, f(p))).collect()
    };
    let dc = rel_linf(&profile(&h, |p| p.c), &profile(&g, |p| p.c));
    let ds = rel_linf(&profile(&h, PointState::hydrostatic), &profile(&g, PointState::hydrostatic));
    Ok((
        dc <= 0.02 && ds <= 0.02,
        format!("Hencky vs GSV at SOC 0.5: concentration {:.3}%, hydrostatic stress {:.3}% (relative L-inf)", 100.0 * dc, 100.0 * ds),
    ))
}

fn c11_efficiency(runs: &mut Runs) -> Verdict {
    let mut detail = Vec::new();
    let mut ok = true;
    for m in [Model::Elastic, Model::Plastic, Model::Viscoplastic] {
        let s = &runs.get(Run::Half(m))?.summary;
        ok &= (200..=400).contains(&s.accepted_steps) && s.mean_newton() <= 1.5;
        detail.push(format!(
            "{} {} steps / {:.2} Newton / {:.2} s (assembly {:.2} s, solve {:.2} s)",
            m.name(),
            s.accepted_steps,
            s.mean_newton(),
            s.wall.as_secs_f64(),
            s.assembly.as_secs_f64(),
            s.solve.as_secs_f64()
        ));
    }
    let ana = runs.get(Run::Half(Model::Viscoplastic))?.clone();
    let ad = runs.get(Run::HalfAd)?;
    let trace = |o: &RunOutput| o.records.iter().map(|r| (r.t, r.sigma_phi_surf)).collect::<Vec<_>>();
    let gap = trace_distance(&trace(&ana), &trace(ad));
    let (na, nd) = (ana.summary.accepted_steps as f64, ad.summary.accepted_steps as f64);
    let step_diff = (na - nd).abs() / na;
    ok &= gap <= 1e-6 && step_diff <= 0.05;
    detail.push(format!(
        "AD {} steps / {:.2} s, trace gap to analytic {gap:.2e}",
        ad.summary.accepted_steps,
        ad.summary.wall.as_secs_f64()
    ));
    Ok((ok, detail.join("; ")))
}

fn c12_cycles(runs: &mut Runs) -> Verdict {
    let el = runs.get(Run::Nine(Model::Elastic))?.records.clone();
    let pl = runs.get(Run::Nine(Model::Plastic))?.records.clone();
    let growth: Vec<f64> = runs.get(Run::Nine(Model::Plastic))?.cycles.iter().map(|c| c.plastic_growth).collect();
    let vp = runs.get(Run::Nine(Model::Viscoplastic))?;
    let last = vp.cycles.last().ok_or("no half cycles")?;
    let visco_growth = last.plastic_growth;
    let d: Vec<f64> = (0..9)
        .map(|k| trace_distance(&half_cycle_trace(&pl, k), &half_cycle_trace(&el, k)))
        .collect();
    // Compare half cycles of the same direction: lithiation k = 0, 2, ..
    // and delithiation k = 1, 3, ...
    let approaches = d[8] < d[0] && d[7] < d[1];
    Ok((
        approaches && visco_growth > 0.0 && last.index == 8,
        format!(
            "plastic-elastic surface sigma_phi gap per half cycle [{}]; plastic growth first {:.2e} last {:.2e}; viscoplastic growth in last half cycle {visco_growth:.2e}",
            d.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(", "),
            growth[0],
            growth[8],
        ),
    ))
}

fn main() -> ExitCode {
    let mut runs = Runs::default();
    let criteria: [(&str, Box<dyn Fn(&mut Runs) -> Verdict>); 12] = [
        ("dimensionless table", Box::new(|_| c1_table())),
        ("return-mapping consistency", Box::new(|_| c2_kkt())),
        ("viscoplastic root", Box::new(|_| c3_visco_root())),
        ("tangent correctness", Box::new(|_| c4_tangents())),
        ("plastic incompressibility", Box::new(|_| c5_det())),
        ("mass conservation", Box::new(c6_mass)),
        ("stress reversal", Box::new(c7_reversal)),
        ("plastic strain magnitudes", Box::new(c8_magnitudes)),
        ("elastic thresholds", Box::new(c9_thresholds)),
        ("strain-measure equivalence", Box::new(c10_measures)),
        ("solver efficiency", Box::new(c11_efficiency)),
        ("multi-cycle divergence", Box::new(c12_cycles)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (passed, detail) = check(&mut runs).unwrap_or_else(|e| (false, e));
        if !passed {
            failed += 1;
        }
        println!("{} {:>2} {name}: {detail}", if passed { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
