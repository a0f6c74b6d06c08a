//! `dbar`: drive the conductivity-reconstruction pipeline from the shell.

mod config;
mod error;
mod manifest;
mod selftest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{Overrides, RunConfig};
use error::CliError;
use manifest::Manifest;

#[derive(Parser)]
#[command(name = "dbar", version, about = "D-bar reconstruction of 2-D conductivities from Dirichlet-to-Neumann data")]
struct Cli {
    /// TOML run configuration (defaults are used when absent)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// output directory (overrides the config)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// worker-thread cap
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// spectral-grid half width (overrides the config)
    #[arg(long, global = true, value_name = "R")]
    lambda_radius: Option<f64>,
    /// reconstruction-grid cells per side (overrides the config)
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// boundary nodes (overrides the config)
    #[arg(long, global = true, value_name = "N_B")]
    boundary_nodes: Option<usize>,
    /// relative DtN perturbation level (overrides the config)
    #[arg(long, global = true, value_name = "LEVEL")]
    noise: Option<f64>,
    /// RNG seed for the DtN perturbation (overrides the config)
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the embedding conditions of an algebraic curve file
    ValidateCurve {
        /// text file of monomials, one `i j re im` line per term
        file: PathBuf,
    },
    /// Write the phantom conductivity and its potential
    Phantom,
    /// Solve the Dirichlet problem for a reference boundary datum
    Forward,
    /// Assemble and export the DtN trace operators
    Dtn,
    /// Solve the boundary integral equation for the CGO trace
    BoundaryPsi,
    /// Extract the scattering coefficient on the spectral grid
    Scatter,
    /// Solve the spectral d-bar equation over the reconstruction grid
    Dbar,
    /// Read the potential off the spectral fields and recover sigma
    Reconstruct,
    /// Run all stages in order
    Pipeline,
    /// Run the built-in invariant suite
    Selftest {
        #[arg(value_enum, default_value = "quick")]
        level: SelftestLevel,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SelftestLevel {
    Quick,
    Full,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dbar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }

    match &cli.cmd {
        Command::ValidateCurve { file } => return validate_curve(file),
        Command::Selftest { level } => {
            let report = selftest::run(matches!(level, SelftestLevel::Full));
            println!(
                "{}",
                serde_json::to_string_pretty(&report.checks).map_err(CliError::numeric)?
            );
            return if report.all_passed() {
                Ok(())
            } else {
                Err(CliError::Numeric("selftest reported failures".into()))
            };
        }
        _ => {}
    }

    let over = Overrides {
        out: cli.out.clone(),
        lambda_radius: cli.lambda_radius,
        grid: cli.grid,
        boundary_nodes: cli.boundary_nodes,
        noise: cli.noise,
        seed: cli.seed,
    };
    let cfg = RunConfig::load(cli.config.as_deref(), &over)?;
    let hash = cfg.hash();
    let mut manifest = Manifest::load_or_new(&cfg.output.dir, &hash);

    let stages: &[&str] = match &cli.cmd {
        Command::Phantom => &["phantom"],
        Command::Forward => &["forward"],
        Command::Dtn => &["dtn"],
        Command::BoundaryPsi => &["boundary-psi"],
        Command::Scatter => &["scatter"],
        Command::Dbar => &["dbar"],
        Command::Reconstruct => &["reconstruct"],
        Command::Pipeline => &stages::PIPELINE,
        Command::ValidateCurve { .. } | Command::Selftest { .. } => unreachable!(),
    };
    for stage in stages {
        eprintln!("dbar: running stage {stage}");
        stages::run_stage(stage, &cfg, &mut manifest)?;
    }
    manifest.completed = true;
    manifest.save(&cfg.output.dir)?;
    Ok(())
}

fn validate_curve(file: &std::path::Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", file.display())))?;
    let curve = dbar_core::geometry::AlgebraicCurve::parse(&text)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let report = curve.validate(curve.r0).map_err(CliError::numeric)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(CliError::numeric)?
    );
    Ok(())
}
