//! Scenario driver: configuration files, single runs, parameter sweeps and
//! their CSV artifacts.

mod config;
mod output;

pub use config::{load_config, parse_config, ConfigError, ScenarioConfig, KEYS};
pub use output::{write_cycles, write_snapshot, write_summary, write_trace, CSV_VERSION};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::constitutive::StrainMeasure;
use crate::fem1d::TangentMode;
use crate::simulation::{simulate, Model, RunOutput, SimulationError, Termination};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Simulation(#[from] SimulationError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("sweep needs at least one value")]
    EmptySweep,
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "elastic" => Ok(Model::Elastic),
            "plastic" => Ok(Model::Plastic),
            "ideal_plastic" => Ok(Model::IdealPlastic),
            "viscoplastic" | "visco" => Ok(Model::Viscoplastic),
            other => Err(format!(
                "unknown model `{other}`, expected elastic, plastic, ideal_plastic or viscoplastic"
            )),
        }
    }
}

pub fn parse_tangent(s: &str) -> Result<TangentMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "analytic" => Ok(TangentMode::Analytic),
        "ad" => Ok(TangentMode::Ad),
        "fd" => Ok(TangentMode::Fd),
        other => Err(format!("unknown tangent `{other}`, expected analytic, ad or fd")),
    }
}

pub fn parse_measure(s: &str) -> Result<StrainMeasure, String> {
    match s.to_ascii_lowercase().as_str() {
        "hencky" => Ok(StrainMeasure::Hencky),
        "gsv" => Ok(StrainMeasure::GreenStVenant),
        other => Err(format!("unknown strain measure `{other}`, expected hencky or gsv")),
    }
}

/// Parameter varied by [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    CRate,
    RadiusNm,
    SigmaYMaxGpa,
}

impl SweepAxis {
    pub fn key(self) -> &'static str {
        match self {
            SweepAxis::CRate => "c_rate",
            SweepAxis::RadiusNm => "radius_nm",
            SweepAxis::SigmaYMaxGpa => "sigma_y_max_gpa",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "c_rate" | "crate" => Ok(SweepAxis::CRate),
            "radius" | "radius_nm" => Ok(SweepAxis::RadiusNm),
            "sigma_y_max" | "sigma_y_max_gpa" => Ok(SweepAxis::SigmaYMaxGpa),
            other => Err(format!("unknown sweep axis `{other}`, expected c_rate, radius or sigma_y_max")),
        }
    }
}

/// Runs one configuration and writes its artifacts into `cfg.out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, ScenarioError> {
    let sim = cfg.simulation()?;
    let out = simulate(&sim)?;
    write_artifacts(&cfg.out_dir, cfg, &out)?;
    Ok(out)
}

fn write_artifacts(dir: &Path, cfg: &ScenarioConfig, out: &RunOutput) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir)
        .map_err(|source| ScenarioError::Io { path: dir.to_path_buf(), source })?;
    write_trace(&dir.join("trace.csv"), &out.records)?;
    write_cycles(&dir.join("cycles.csv"), &out.cycles)?;
    for snap in &out.snapshots {
        let name = format!("snapshot_h{}_soc{:.4}.csv", snap.half_cycle, snap.soc);
        write_snapshot(&dir.join(name), snap)?;
    }
    write_summary(&dir.join("summary.txt"), cfg, out)
}

/// Result of one sweep value.
#[derive(Debug)]
pub struct SweepEntry {
    pub value: f64,
    pub dir: PathBuf,
    pub outcome: Result<RunOutput, ScenarioError>,
}

/// Runs `base` once per value of `axis`, each into its own subdirectory of
/// `base.out_dir`, and writes `sweep.csv` there. A failed value is recorded
/// and the sweep moves on.
pub fn run_sweep(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepEntry>, ScenarioError> {
    if values.is_empty() {
        return Err(ScenarioError::EmptySweep);
    }
    let mut entries = Vec::with_capacity(values.len());
    for &value in values {
        let dir = base.out_dir.join(format!("{}_{}", axis.key(), value));
        let mut cfg = base.clone();
        cfg.out_dir = dir.clone();
        let outcome = cfg
            .set(axis.key(), &value.to_string())
            .map_err(|message| ConfigError::Value { line: 0, key: axis.key().into(), message })
            .map_err(ScenarioError::from)
            .and_then(|()| run_scenario(&cfg));
        entries.push(SweepEntry { value, dir, outcome });
    }
    output::write_sweep(&base.out_dir.join("sweep.csv"), axis, &entries)?;
    Ok(entries)
}

/// Short label for a termination, used in tables.
pub fn termination_label(t: &Termination) -> String {
    match t {
        Termination::Completed => "completed".into(),
        Termination::SurfaceSaturated { soc, .. } => format!("surface_saturated_at_soc_{soc:.4}"),
    }
}
