use std::collections::HashMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::constitutive::StrainMeasure;
use crate::fem1d::{AdaptOptions, TangentMode, DEFAULT_MAX_LEVEL, DEFAULT_MIN_LEVEL, DEFAULT_ORDER};
use crate::params::{nondimensionalize, ParamError, PhysicalParams};
use crate::simulation::{Model, SimulationConfig};
use crate::timestepper::IntegratorConfig;

const GPA: f64 = 1e9;
const NM: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    Value { line: usize, key: String, message: String },
    #[error("{}`{key}`: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid { line: Option<usize>, key: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Everything one run needs. Physical inputs are SI; they are scaled when
/// the simulation is set up.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub model: Model,
    pub tangent: TangentMode,
    pub measure: StrainMeasure,
    pub physical: PhysicalParams,
    pub half_cycles: usize,
    pub snapshot_soc: Vec<f64>,
    pub out_dir: PathBuf,
    pub integrator: IntegratorConfig,
    pub adapt: AdaptOptions,
    pub adapt_every: usize,
    pub min_level: u32,
    pub max_level: u32,
    pub fe_order: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            model: Model::Viscoplastic,
            tangent: TangentMode::Analytic,
            measure: StrainMeasure::Hencky,
            physical: PhysicalParams::default(),
            half_cycles: 1,
            snapshot_soc: vec![0.13, 0.5, 0.92],
            out_dir: PathBuf::from("out"),
            integrator: IntegratorConfig::default(),
            adapt: AdaptOptions::default(),
            adapt_every: 5,
            min_level: DEFAULT_MIN_LEVEL,
            max_level: DEFAULT_MAX_LEVEL,
            fe_order: DEFAULT_ORDER,
        }
    }
}

/// Recognized keys with their meaning, in the order `config` templates list them.
pub const KEYS: &[(&str, &str)] = &[
    ("model", "elastic | plastic | ideal_plastic | viscoplastic"),
    ("tangent", "analytic | ad | fd"),
    ("strain", "hencky | gsv"),
    ("half_cycles", "number of half cycles, at least 1"),
    ("c_rate", "charge rate, 1/h"),
    ("radius_nm", "particle radius, nm"),
    ("sigma_y_max_gpa", "yield stress of the unlithiated material, GPa"),
    ("sigma_y_min_gpa", "yield stress of the lithiated material, GPa"),
    ("hardening_gpa", "isotropic hardening modulus, GPa"),
    ("overstress_gpa", "viscoplastic overstress normalization, GPa"),
    ("youngs_gpa", "Young's modulus, GPa"),
    ("nu", "Poisson ratio"),
    ("diffusivity", "diffusion coefficient, m^2/s"),
    ("temperature", "K"),
    ("c0", "initial fill fraction"),
    ("snapshot_soc", "comma-separated states of charge for field snapshots"),
    ("out", "output directory"),
    ("rel_tol", "relative time-integration tolerance"),
    ("abs_tol", "absolute time-integration tolerance"),
    ("tau0", "initial step"),
    ("tau_max", "largest step"),
    ("max_order", "highest NDF order"),
    ("theta_r", "refinement fraction of the largest indicator"),
    ("theta_c", "coarsening fraction of the largest indicator"),
    ("spatial_tol", "indicators below this never refine"),
    ("adapt_every", "accepted steps between mesh adaptations"),
    ("min_level", "coarsest refinement level"),
    ("max_level", "finest refinement level"),
    ("fe_order", "polynomial order of the elements, 1 to 4"),
];

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| e.to_string())
}

impl ScenarioConfig {
    /// Applies one `key = value` pair. Range checks happen in [`Self::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let p = &mut self.physical;
        match key {
            "model" => self.model = value.parse()?,
            "tangent" => self.tangent = super::parse_tangent(value)?,
            "strain" => self.measure = super::parse_measure(value)?,
            "half_cycles" => self.half_cycles = parse_num(value)?,
            "c_rate" => p.c_rate = parse_num(value)?,
            "radius_nm" => p.radius = parse_num::<f64>(value)? * NM,
            "sigma_y_max_gpa" => p.yield_max = parse_num::<f64>(value)? * GPA,
            "sigma_y_min_gpa" => p.yield_min = parse_num::<f64>(value)? * GPA,
            "hardening_gpa" => p.hardening = parse_num::<f64>(value)? * GPA,
            "overstress_gpa" => p.overstress_ref = parse_num::<f64>(value)? * GPA,
            "youngs_gpa" => p.youngs_modulus = parse_num::<f64>(value)? * GPA,
            "nu" => p.poisson = parse_num(value)?,
            "diffusivity" => p.diffusivity = parse_num(value)?,
            "temperature" => p.temperature = parse_num(value)?,
            "c0" => p.c0_frac = parse_num(value)?,
            "snapshot_soc" => {
                self.snapshot_soc = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(parse_num)
                    .collect::<Result<_, _>>()?
            }
            "out" => self.out_dir = PathBuf::from(value),
            "rel_tol" => self.integrator.rel_tol = parse_num(value)?,
            "abs_tol" => self.integrator.abs_tol = parse_num(value)?,
            "tau0" => self.integrator.tau0 = parse_num(value)?,
            "tau_max" => self.integrator.tau_max = parse_num(value)?,
            "max_order" => self.integrator.max_order = parse_num(value)?,
            "theta_r" => self.adapt.theta_refine = parse_num(value)?,
            "theta_c" => self.adapt.theta_coarsen = parse_num(value)?,
            "spatial_tol" => self.adapt.tolerance = parse_num(value)?,
            "adapt_every" => self.adapt_every = parse_num(value)?,
            "min_level" => self.min_level = parse_num(value)?,
            "max_level" => self.max_level = parse_num(value)?,
            "fe_order" => self.fe_order = parse_num(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Checks ranges. `lines` maps keys to the line that set them, for messages.
    pub fn validate_with(&self, lines: &HashMap<String, usize>) -> Result<(), ConfigError> {
        let invalid = |key: &str, message: String| ConfigError::Invalid {
            line: lines.get(key).copied(),
            key: key.to_string(),
            message,
        };
        self.physical.validate().map_err(|e| {
            let key = match &e {
                ParamError::NotFinite { field, .. }
                | ParamError::NotPositive { field, .. }
                | ParamError::OutOfRange { field, .. } => param_key(field),
            };
            invalid(key, e.to_string())
        })?;
        if self.half_cycles == 0 {
            return Err(invalid("half_cycles", "at least one half cycle is required".into()));
        }
        if let Some(s) = self.snapshot_soc.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(invalid("snapshot_soc", format!("{s} outside [0, 1]")));
        }
        self.integrator.validate().map_err(|e| invalid("tau0", e.to_string()))?;
        if !(self.adapt.theta_coarsen >= 0.0
            && self.adapt.theta_coarsen < self.adapt.theta_refine
            && self.adapt.theta_refine <= 1.0)
        {
            return Err(invalid("theta_r", "need 0 <= theta_c < theta_r <= 1".into()));
        }
        if self.adapt_every == 0 {
            return Err(invalid("adapt_every", "must be at least 1".into()));
        }
        if self.min_level > self.max_level || self.max_level > 16 {
            return Err(invalid("max_level", "need min_level <= max_level <= 16".into()));
        }
        if !(1..=4).contains(&self.fe_order) {
            return Err(invalid("fe_order", format!("{} outside 1..=4", self.fe_order)));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_with(&HashMap::new())
    }

    /// Scales the physical inputs and assembles the solver configuration.
    pub fn simulation(&self) -> Result<SimulationConfig, ConfigError> {
        self.validate()?;
        let params = nondimensionalize(&self.physical).map_err(|e| ConfigError::Invalid {
            line: None,
            key: "parameters".into(),
            message: e.to_string(),
        })?;
        let mut sim = SimulationConfig::new(params, self.model);
        sim.measure = self.measure;
        sim.tangent = self.tangent;
        sim.half_cycles = self.half_cycles;
        sim.integrator = self.integrator;
        sim.adapt = self.adapt;
        sim.adapt_every = self.adapt_every;
        sim.min_level = self.min_level;
        sim.max_level = self.max_level;
        sim.order = self.fe_order;
        sim.snapshot_soc = self.snapshot_soc.clone();
        Ok(sim)
    }
}

/// Config key that sets a [`PhysicalParams`] field.
fn param_key(field: &str) -> &str {
    match field {
        "poisson" => "nu",
        "radius" => "radius_nm",
        "yield_max" => "sigma_y_max_gpa",
        "yield_min" => "sigma_y_min_gpa",
        "hardening" => "hardening_gpa",
        "overstress_ref" => "overstress_gpa",
        "youngs_modulus" => "youngs_gpa",
        "c0_frac" => "c0",
        other => other,
    }
}

/// Parses the `key = value` format. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    let mut lines: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax { line, text: content.to_string() });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::UnknownKey { line, key: key.to_string() });
        }
        if lines.insert(key.to_string(), line).is_some() {
            return Err(ConfigError::Duplicate { line, key: key.to_string() });
        }
        cfg.set(key, value).map_err(|message| ConfigError::Value {
            line,
            key: key.to_string(),
            message,
        })?;
    }
    cfg.validate_with(&lines)?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}
