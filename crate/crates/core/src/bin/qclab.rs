use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use qclab::harness::{load_config, run, Experiment};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    DiophScan,
    FreeCheck,
    Cayley,
    U1Scan,
    ComplexityScan,
    Flag,
    Geodesic,
    Holder,
    Cutloc,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::DiophScan => Experiment::DiophScan,
            Command::FreeCheck => Experiment::FreeCheck,
            Command::Cayley => Experiment::Cayley,
            Command::U1Scan => Experiment::U1Scan,
            Command::ComplexityScan => Experiment::ComplexityScan,
            Command::Flag => Experiment::Flag,
            Command::Geodesic => Experiment::Geodesic,
            Command::Holder => Experiment::Holder,
            Command::Cutloc => Experiment::Cutloc,
        }
    }
}

/// Runs one named experiment and records it in the output manifest.
#[derive(Debug, Parser)]
#[command(name = "qclab", version)]
struct Cli {
    experiment: Command,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Ok(v) = std::env::var("QCLAB_THREADS") {
        let threads = match v.parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                eprintln!("QCLAB_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .expect("thread pool is configured once");
    }
    let config = match load_config(&cli.config, Some(cli.experiment.into()), cli.seed, cli.out) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let report = run(&config);
    let entry = &report.entry;
    match &entry.error {
        None => println!(
            "{}: ok in {:.2}s, outputs in {}",
            entry.experiment,
            entry.wall_time_s,
            config.output_dir.display()
        ),
        Some(err) => eprintln!("{}: {} ({err})", entry.experiment, entry.status),
    }
    ExitCode::from(report.exit_code as u8)
}
