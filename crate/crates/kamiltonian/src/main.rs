//! `kamiltonian` command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kamiltonian::app::{self, Command, RunOptions};
use kamiltonian::config::RunConfig;
use kamiltonian::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "kamiltonian", version, about = "Static effective Hamiltonians of driven nonlinear oscillators")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Perturbative order.
    #[arg(long, global = true, value_name = "N")]
    order: Option<usize>,
    /// Study the (q:p) process: sets the frame and reports its coupling.
    #[arg(long, global = true, value_name = "q:p")]
    target_coupling: Option<String>,
    /// Processes treated as slow (static) in the frame.
    #[arg(long, global = true, value_name = "q:p[,q:p]", value_delimiter = ',')]
    slow: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Write the enumerated diagrams of the target process.
    #[arg(long, global = true)]
    dump_diagrams: bool,
    /// Treat validity warnings as errors (exit code 4).
    #[arg(long, global = true)]
    strict: bool,
    /// Seed of randomised checks.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Canonical effective Hamiltonian (JSON).
    Effham,
    /// Multiphoton resonance lines over a drive grid (CSV).
    Landscape,
    /// Floquet quasienergy scans, anticrossing gaps and excitation maps.
    Floquet,
    /// Classical Duffing steady states, Fourier content, basins and domains.
    Duffing,
    /// Oscillator parameters from circuit parameters (JSON).
    Circuit,
    /// Golden-coefficient suite and randomised algebra checks.
    Selftest,
}

fn configure(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = cli.order {
        cfg.order = Some(o);
    }
    if let Some(t) = &cli.target_coupling {
        let (q, p) = kamiltonian::config::parse_process(t)?;
        cfg.frame.q = q;
        cfg.frame.p = p;
        cfg.target_coupling = Some(t.clone());
    }
    if !cli.slow.is_empty() {
        cfg.frame.slow = cli.slow.clone();
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.display().to_string());
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = Some(j);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match configure(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(j) = cfg.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let cmd = match cli.command {
        Cmd::Effham => Command::Effham,
        Cmd::Landscape => Command::Landscape,
        Cmd::Floquet => Command::Floquet,
        Cmd::Duffing => Command::Duffing,
        Cmd::Circuit => Command::Circuit,
        Cmd::Selftest => Command::Selftest,
    };
    match app::run(cmd, &cfg, RunOptions { dump_diagrams: cli.dump_diagrams }) {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if cli.strict && !report.warnings.is_empty() {
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error ({}): {e}", cmd.name());
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
