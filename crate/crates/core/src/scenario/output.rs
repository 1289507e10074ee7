use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{termination_label, ScenarioConfig, ScenarioError, SweepAxis, SweepEntry};
use crate::simulation::{HalfCycleStats, RunOutput, Snapshot, StepRecord};

/// Schema version stamped into the first line of every CSV.
pub const CSV_VERSION: u32 = 1;

const TRACE_COLUMNS: [&str; 9] = [
    "t", "tau", "order", "newton_iters", "SOC", "c_surf", "sigma_phi_surf", "eps_pl_v_surf",
    "U_voltage",
];
const SNAPSHOT_COLUMNS: [&str; 10] = [
    "r", "c", "mu", "u", "sigma_r", "sigma_phi", "eps_pl_v", "F_pl_rr", "F_el_rr", "F_ch_rr",
];
const CYCLE_COLUMNS: [&str; 4] = ["half_cycle", "accepted_steps", "plastic_growth", "max_eps_pl_v"];
const SWEEP_COLUMNS: [&str; 10] = [
    "value", "status", "termination", "final_soc", "max_eps_pl_v", "min_sigma_phi_surf",
    "max_sigma_phi_surf", "steps", "mean_newton", "message",
];

/// Seventeen significant digits, enough to round-trip any f64.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::Io { path: path.to_path_buf(), source }
}

/// Opens `path`, writes the version comment and the column row.
fn open_csv(
    path: &Path,
    kind: &str,
    columns: &[&str],
) -> Result<csv::Writer<BufWriter<File>>, ScenarioError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut buf = BufWriter::new(file);
    writeln!(buf, "# chemoplast {kind} v{CSV_VERSION}").map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(columns).map_err(|source| ScenarioError::Csv { path: path.to_path_buf(), source })?;
    Ok(w)
}

fn finish(path: &Path, mut w: csv::Writer<BufWriter<File>>) -> Result<(), ScenarioError> {
    w.flush().map_err(io_err(path))
}

fn write_rows<I>(path: &Path, kind: &str, columns: &[&str], rows: I) -> Result<(), ScenarioError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = open_csv(path, kind, columns)?;
    for row in rows {
        w.write_record(&row)
            .map_err(|source| ScenarioError::Csv { path: path.to_path_buf(), source })?;
    }
    finish(path, w)
}

pub fn write_trace(path: &Path, records: &[StepRecord]) -> Result<(), ScenarioError> {
    let rows = records.iter().map(|r| {
        vec![
            num(r.t),
            num(r.tau),
            r.order.to_string(),
            r.newton_iters.to_string(),
            num(r.soc),
            num(r.c_surf),
            num(r.sigma_phi_surf),
            num(r.eps_pl_surf),
            num(r.voltage),
        ]
    });
    write_rows(path, "trace", &TRACE_COLUMNS, rows)
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<(), ScenarioError> {
    let rows = snap.points.iter().map(|p| {
        [p.r, p.c, p.mu, p.u, p.sigma_r, p.sigma_phi, p.eps_pl, p.f_pl_rr, p.f_el_rr, p.f_ch_rr]
            .into_iter()
            .map(num)
            .collect()
    });
    write_rows(path, "snapshot", &SNAPSHOT_COLUMNS, rows)
}

pub fn write_cycles(path: &Path, cycles: &[HalfCycleStats]) -> Result<(), ScenarioError> {
    let rows = cycles.iter().map(|c| {
        vec![c.index.to_string(), c.accepted_steps.to_string(), num(c.plastic_growth), num(c.max_eps)]
    });
    write_rows(path, "cycles", &CYCLE_COLUMNS, rows)
}

pub(super) fn write_sweep(path: &Path, axis: SweepAxis, entries: &[SweepEntry]) -> Result<(), ScenarioError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let rows = entries.iter().map(|e| match &e.outcome {
        Ok(out) => {
            let s = &out.summary;
            let (lo, hi) = out.records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.sigma_phi_surf), hi.max(r.sigma_phi_surf))
            });
            vec![
                num(e.value),
                "ok".into(),
                termination_label(&s.termination),
                num(s.final_soc),
                num(s.max_eps),
                num(lo),
                num(hi),
                s.accepted_steps.to_string(),
                num(s.mean_newton()),
                String::new(),
            ]
        }
        Err(err) => {
            let mut row = vec![num(e.value), "failed".into()];
            row.extend(std::iter::repeat_n(String::new(), 7));
            row.push(err.to_string());
            row
        }
    });
    write_rows(path, &format!("sweep {axis}"), &SWEEP_COLUMNS, rows)
}

/// Human-readable run summary, including the wall-clock split.
pub fn write_summary(path: &Path, cfg: &ScenarioConfig, out: &RunOutput) -> Result<(), ScenarioError> {
    let s = &out.summary;
    let p = &cfg.physical;
    let wall = s.wall.as_secs_f64();
    let assembly = s.assembly.as_secs_f64();
    let solve = s.solve.as_secs_f64();
    let text = format!(
        "model            {}\n\
         tangent          {:?}\n\
         strain           {:?}\n\
         c_rate           {} 1/h\n\
         radius           {} nm\n\
         sigma_y_max      {} GPa\n\
         half_cycles      {}\n\
         termination      {}\n\
         accepted_steps   {}\n\
         rejected_steps   {}\n\
         newton_total     {}\n\
         newton_mean      {:.4}\n\
         adaptations      {}\n\
         final_elements   {}\n\
         final_soc        {:.6}\n\
         max_soc_drift    {:.3e}\n\
         max_eps_pl_v     {:.6e}\n\
         wall_s           {:.3}\n\
         assembly_s       {:.3}\n\
         solve_s          {:.3}\n\
         other_s          {:.3}\n",
        cfg.model.name(),
        cfg.tangent,
        cfg.measure,
        p.c_rate,
        p.radius * 1e9,
        p.yield_max * 1e-9,
        cfg.half_cycles,
        termination_label(&s.termination),
        s.accepted_steps,
        s.rejected_steps,
        s.newton_iterations,
        s.mean_newton(),
        s.adaptations,
        s.final_elements,
        s.final_soc,
        s.max_soc_drift,
        s.max_eps,
        wall,
        assembly,
        solve,
        (wall - assembly - solve).max(0.0),
    );
    std::fs::write(path, text).map_err(io_err(path))
}
