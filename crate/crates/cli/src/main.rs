mod commands;
mod config;
mod persist;
mod report;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{BackendKind, ProblemConfig};

/// Forward solver for piecewise-constant conductivity in nested 2D regions.
#[derive(Parser, Debug)]
#[command(name = "bie", version)]
struct Cli {
    /// Problem description (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the summation backend.
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendKind>,
    /// Override the FMM accuracy.
    #[arg(long, global = true)]
    fmm_eps: Option<f64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the interface densities.
    Solve,
    /// Evaluate the potential at the configured points.
    Eval {
        /// Reuse a solution written by `solve`.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Potential and density differences over a ladder of uniform grids.
    RefineStudy,
    /// GMRES iteration counts with and without rescaling.
    RescaleStudy,
    /// Built-in numerical checks.
    Selftest,
}

fn load_config(cli: &Cli) -> Result<ProblemConfig> {
    let path = cli.config.as_deref().context("--config is required for this command")?;
    let mut cfg = ProblemConfig::load(path)?;
    if let Some(b) = cli.backend {
        cfg.settings.backend = b;
    }
    if let Some(eps) = cli.fmm_eps {
        cfg.settings.fmm_eps = eps;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    if let Command::Selftest = cli.command {
        let mut ok = true;
        for c in selftest::run(cli.seed)? {
            let tag = if c.passed() { "PASS" } else { "FAIL" };
            println!("{tag} {}: {:.3e} (tol {:.0e})", c.name, c.value, c.tol);
            ok &= c.passed();
        }
        return Ok(ok);
    }
    let cfg = load_config(cli)?;
    let out: &Path = &cli.out;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let outcome = match &cli.command {
        Command::Solve => commands::solve(&cfg, out)?,
        Command::Eval { solution } => commands::eval(&cfg, solution.as_deref(), out)?,
        Command::RefineStudy => commands::refine_study(&cfg, out)?,
        Command::RescaleStudy => commands::rescale_study(&cfg, out)?,
        Command::Selftest => unreachable!(),
    };
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BIE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: requested tolerances were not met");
            ExitCode::from(2)
        }
        Err(e) => {
            let name = e
                .chain()
                .find_map(|c| c.downcast_ref::<bie_core::Error>())
                .map_or("Error", |c| c.name());
            eprintln!("error [{name}]: {e:#}");
            ExitCode::from(1)
        }
    }
}
