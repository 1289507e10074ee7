use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chemoplast::checks;
use chemoplast::scenario::{
    load_config, parse_measure, parse_tangent, run_scenario, run_sweep, termination_label,
    ScenarioConfig, ScenarioError, SweepAxis,
};
use chemoplast::simulation::Model;

#[derive(Parser)]
#[command(name = "chemoplast", version, about = "Chemo-elasto-plastic silicon particle under galvanostatic cycling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV artifacts.
    Run(Overrides),
    /// Repeat a scenario over values of one parameter.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// c_rate, radius or sigma_y_max
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated axis values, e.g. 50,100,200
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Run the randomized material invariant suite.
    Check {
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
    },
}

#[derive(Args)]
struct Overrides {
    /// key = value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = |s: &str| s.parse::<Model>())]
    model: Option<Model>,
    #[arg(long, value_parser = parse_tangent)]
    tangent: Option<chemoplast::fem1d::TangentMode>,
    /// Number of half cycles.
    #[arg(long)]
    cycles: Option<usize>,
    /// C-rate in 1/h.
    #[arg(long = "crate")]
    c_rate: Option<f64>,
    #[arg(long)]
    radius_nm: Option<f64>,
    #[arg(long)]
    sigma_y_max_gpa: Option<f64>,
    /// hencky or gsv
    #[arg(long, value_parser = parse_measure)]
    strain: Option<chemoplast::constitutive::StrainMeasure>,
}

impl Overrides {
    fn resolve(&self) -> Result<ScenarioConfig, ScenarioError> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(v) = &self.out {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.model {
            cfg.model = v;
        }
        if let Some(v) = self.tangent {
            cfg.tangent = v;
        }
        if let Some(v) = self.strain {
            cfg.measure = v;
        }
        if let Some(v) = self.cycles {
            cfg.half_cycles = v;
        }
        if let Some(v) = self.c_rate {
            cfg.physical.c_rate = v;
        }
        if let Some(v) = self.radius_nm {
            cfg.physical.radius = v * 1e-9;
        }
        if let Some(v) = self.sigma_y_max_gpa {
            cfg.physical.yield_max = v * 1e9;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(overrides: &Overrides) -> Result<(), ScenarioError> {
    let cfg = overrides.resolve()?;
    let out = run_scenario(&cfg)?;
    let s = &out.summary;
    println!(
        "{} {}: {} steps ({} rejected), mean Newton {:.2}, final SOC {:.4}, max eps_pl_v {:.3e}, {:.2} s",
        cfg.model.name(),
        termination_label(&s.termination),
        s.accepted_steps,
        s.rejected_steps,
        s.mean_newton(),
        s.final_soc,
        s.max_eps,
        s.wall.as_secs_f64(),
    );
    println!("artifacts in {}", cfg.out_dir.display());
    Ok(())
}

fn sweep(overrides: &Overrides, axis: SweepAxis, values: &[f64]) -> Result<bool, ScenarioError> {
    let cfg = overrides.resolve()?;
    let entries = run_sweep(&cfg, axis, values)?;
    let mut all_ok = true;
    for e in &entries {
        match &e.outcome {
            Ok(out) => println!(
                "{axis} = {}: {}, {} steps, max eps_pl_v {:.3e}",
                e.value,
                termination_label(&out.summary.termination),
                out.summary.accepted_steps,
                out.summary.max_eps
            ),
            Err(err) => {
                all_ok = false;
                println!("{axis} = {}: failed: {err}", e.value);
            }
        }
    }
    println!("combined table in {}", cfg.out_dir.join("sweep.csv").display());
    Ok(all_ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(o) => run(o).map(|()| true),
        Command::Sweep { overrides, axis, values } => sweep(overrides, *axis, values),
        Command::Check { seed } => {
            let mut ok = true;
            for (outcome, secs) in checks::run_all(*seed) {
                ok &= outcome.passed;
                println!("{outcome} [{secs:.2} s]");
            }
            Ok(ok)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
