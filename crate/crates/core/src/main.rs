use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evosurf::cli::{self, Axis, RunConfig};
use evosurf::Result;

#[derive(Parser)]
#[command(name = "evosurf", version, about = "Space-time trace FEM for PDEs on evolving surfaces")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation described by a config file.
    Run { config: PathBuf },
    /// Repeat the run while halving h (space) or dt (time).
    Convergence {
        config: PathBuf,
        #[arg(long, value_parser = parse_axis)]
        axis: Axis,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Mass conservation study over an h or dt series.
    Mass {
        config: PathBuf,
        #[arg(long, value_parser = parse_axis)]
        series: Axis,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

fn parse_axis(s: &str) -> std::result::Result<Axis, String> {
    s.parse().map_err(|e: evosurf::Error| e.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.6e}"))
}

fn print_outcome(o: &cli::RunOutcome) {
    println!(
        "{} h={} dt={} T={}: err_l2_final={} err_l2h1={} mass_abs_err={:.6e} ({:.2}s)",
        o.config.problem,
        o.config.h,
        o.config.dt,
        o.config.t_end,
        opt(o.report.err_l2_final),
        opt(o.report.err_l2h1),
        o.report.mass_abs_err,
        o.wall_seconds
    );
}

fn execute(args: Args) -> Result<()> {
    if let Some(n) = cli::requested_threads()? {
        // a second initialization only happens in embedding contexts; ignore it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match args.command {
        Command::Run { config } => {
            let cfg = RunConfig::from_file(&config)?;
            print_outcome(&cli::run(&cfg)?);
        }
        Command::Convergence { config, axis, levels } => {
            let cfg = RunConfig::from_file(&config)?;
            for o in cli::convergence_study(&cfg, axis, levels)? {
                print_outcome(&o);
            }
        }
        Command::Mass { config, series, levels } => {
            let cfg = RunConfig::from_file(&config)?;
            for o in cli::mass_study(&cfg, series, levels)? {
                print_outcome(&o);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}: {e}", e.class());
            ExitCode::FAILURE
        }
    }
}
