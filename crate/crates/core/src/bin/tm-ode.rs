use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tm_ode::harness::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "tm-ode", version, about = "Triple momentum ODE experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run discrete iterations and ODE flows, writing one CSV per run.
    Simulate(Common),
    /// Write the μ, rate and stepsize-robustness tables.
    Rates(Common),
    /// Run the IQC rate search over a grid of (M, κ).
    Iqc(Common),
    /// Check the Lyapunov decay along an integrated trajectory.
    Certify(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    scale: Option<f64>,
}

impl Common {
    fn config(&self) -> tm_ode::Result<ExperimentConfig> {
        let mut c = match &self.preset {
            Some(p) => ExperimentConfig::preset(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(path) = &self.config {
            c.apply_text(&std::fs::read_to_string(path)?)?;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        c.dt = self.dt.or(c.dt);
        c.t_end = self.t_end.or(c.t_end);
        if let Some(s) = self.scale {
            c.stepsize_scale = s;
        }
        c.validate()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, fn(&ExperimentConfig) -> tm_ode::Result<harness::CommandReport>) =
        match &cli.command {
            Command::Simulate(c) => (c, harness::cmd_simulate),
            Command::Rates(c) => (c, harness::cmd_rates),
            Command::Iqc(c) => (c, harness::cmd_iqc),
            Command::Certify(c) => (c, harness::cmd_certify),
        };
    let result = common.config().and_then(|c| run(&c));
    match result {
        Ok(report) => {
            print!("{}", report.message);
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: certificate check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
