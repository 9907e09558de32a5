//! Batch interface over the experiment runner: one subcommand per
//! experiment family, all parameters in a TOML config.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

use clap::{Parser, Subcommand};
use rcm::config::{self, ExperimentConfig, OutputFormat};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rcm",
    version,
    about = "Random-conductance lattice experiments: walks, resistances, correctors, heat kernels, gradient fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format override: csv or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Build an environment and emit it (JSON debug form or CSV edge list).
    GenEnv(Common),
    /// Simulate walks and emit endpoint displacements as CSV.
    Walk(Common),
    /// Effective resistance between a source and a sink set.
    Resistance(Common),
    /// Plate problem on a slab: potential pinned to -1/+1 on the bottom/top.
    Plate(Common),
    /// Left-right box conductance with free side faces.
    Boxcond(Common),
    /// Harmonic embedding positions (vertex -> position CSV).
    Embed(Common),
    /// Periodized corrector on a torus (vertex -> chi CSV).
    Corrector(Common),
    /// Homogenized diffusion matrix with calibration metadata.
    Diffmat(Common),
    /// Diagonal return-probability series and its tail slope.
    Heatkernel(Common),
    /// Isoperimetric profile breakpoints.
    Isoperimetry(Common),
    /// Trap experiment: measured diagonal against the product lower bound.
    Trap(Common),
    /// Sample a Gaussian gradient field (vertex -> height CSV).
    Gradfield(Common),
    /// Variance of the rescaled field functional against the Fourier target.
    GffScaling(Common),
    /// L2 error table of the lattice Cauchy problem vs its homogenized limit.
    Homogenize(Common),
    /// Rescaled resolvent pairing against the Fourier target.
    Resolvent(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GenEnv(_) => "gen-env",
            Command::Walk(_) => "walk",
            Command::Resistance(_) => "resistance",
            Command::Plate(_) => "plate",
            Command::Boxcond(_) => "boxcond",
            Command::Embed(_) => "embed",
            Command::Corrector(_) => "corrector",
            Command::Diffmat(_) => "diffmat",
            Command::Heatkernel(_) => "heatkernel",
            Command::Isoperimetry(_) => "isoperimetry",
            Command::Trap(_) => "trap",
            Command::Gradfield(_) => "gradfield",
            Command::GffScaling(_) => "gff-scaling",
            Command::Homogenize(_) => "homogenize",
            Command::Resolvent(_) => "resolvent",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::GenEnv(c)
            | Command::Walk(c)
            | Command::Resistance(c)
            | Command::Plate(c)
            | Command::Boxcond(c)
            | Command::Embed(c)
            | Command::Corrector(c)
            | Command::Diffmat(c)
            | Command::Heatkernel(c)
            | Command::Isoperimetry(c)
            | Command::Trap(c)
            | Command::Gradfield(c)
            | Command::GffScaling(c)
            | Command::Homogenize(c)
            | Command::Resolvent(c) => c,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sub = cli.command.name();
    let common = cli.command.common();

    let config_text = match std::fs::read_to_string(&common.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("rcm: cannot read {}: {e}", common.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg: ExperimentConfig = match toml::from_str(&config_text) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("rcm: config parse error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    match common.format.as_deref() {
        Some("csv") => cfg.format = Some(OutputFormat::Csv),
        Some("json") => cfg.format = Some(OutputFormat::Json),
        Some("binary") => cfg.format = Some(OutputFormat::Binary),
        Some(other) => {
            eprintln!("rcm: unknown format `{other}` (csv, json or binary)");
            return ExitCode::from(2);
        }
        None => {}
    }

    let findings = config::validate(sub, &cfg);
    if !findings.is_empty() {
        for f in &findings {
            eprintln!("rcm: config error at `{}`: {}", f.field, f.message);
        }
        return ExitCode::from(2);
    }

    // the effective config (after overrides) is what provenance must record
    let effective_text = match toml::to_string(&cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("rcm: cannot canonicalize config: {e}");
            return ExitCode::from(1);
        }
    };

    match config::run(sub, &cfg, &effective_text) {
        Ok(artifact) => {
            if let Some(path) = &common.out {
                if let Err(e) = std::fs::write(path, &artifact.content) {
                    eprintln!("rcm: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                use std::io::Write;
                if std::io::stdout().write_all(&artifact.content).is_err() {
                    return ExitCode::from(1);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rcm: {e}");
            ExitCode::from(1)
        }
    }
}
