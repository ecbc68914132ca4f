use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use wirephase_cli::config::RunConfig;
use wirephase_cli::export::OutDir;
use wirephase_cli::scenarios::{self, Failure};

/// Berry and Wilczek–Zee phases of a particle on a cyclically deformed closed curve.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// TOML configuration; defaults are used for missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel loops and sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Curvature, torsion and speed along the curve at `point`.
    Geometry,
    /// Lowest tangential eigenvalues and ground-state densities at `point`.
    Spectrum,
    /// Loop phase, plaquette curvature and doublet transport.
    Holonomy,
    /// Time-dependent propagation around the loop.
    Evolve,
    /// Density of the doublet superposition sampled around the curve.
    Tube,
    /// Every check plus the figure exports, with a pass/fail table.
    ReproducePaper,
}

fn load(args: &Args) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &args.out {
        cfg.output.dir = dir.clone();
    }
    Ok(cfg)
}

fn run(command: Command, cfg: &RunConfig) -> Result<(), Failure> {
    let out = OutDir::create(&cfg.output.dir)?;
    let written = match command {
        Command::Geometry => scenarios::cmd_geometry(cfg, &out),
        Command::Spectrum => scenarios::cmd_spectrum(cfg, &out),
        Command::Holonomy => scenarios::cmd_holonomy(cfg, &out),
        Command::Evolve => scenarios::cmd_evolve(cfg, &out),
        Command::Tube => scenarios::cmd_tube(cfg, &out),
        Command::ReproducePaper => {
            let start = Instant::now();
            let (written, checks) = scenarios::cmd_reproduce_paper(cfg, &out)?;
            println!("{:<36} {:>14} {:>14} {:>10} {:>10}  result", "check", "value", "expected", "error", "tol");
            for c in &checks {
                println!(
                    "{:<36} {:>14.6e} {:>14.6e} {:>10.2e} {:>10.2e}  {}",
                    c.name,
                    c.value,
                    c.expected,
                    c.error,
                    c.tolerance,
                    if c.pass { "PASS" } else { "FAIL" }
                );
            }
            let failed = checks.iter().filter(|c| !c.pass).count();
            println!("{} passed, {failed} failed in {:.1}s", checks.len() - failed, start.elapsed().as_secs_f64());
            for p in &written {
                println!("wrote {}", p.display());
            }
            return if failed == 0 { Ok(()) } else { Err(Failure::ChecksFailed(failed)) };
        }
    }?;
    for p in &written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match load(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("wirephase: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if args.print_config {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    let Some(command) = args.command else {
        eprintln!("wirephase: no subcommand given (see --help)");
        return ExitCode::from(2);
    };
    if let Some(k) = args.threads {
        if k == 0 {
            eprintln!("wirephase: config error: --threads must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().expect("thread pool is configured once");
    }
    match run(command, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wirephase: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
