use std::path::PathBuf;
use std::process::ExitCode;

use apkin_cli::registry::Source;
use apkin_cli::{prepare, run, Overrides, Registry, ScenarioConfig};
use clap::{Parser, Subcommand};

/// Kinetic active-particle scenarios.
///
/// Exit status: 0 on success, 1 for an invalid command line or scenario,
/// 2 when a run fails.
#[derive(Debug, Parser)]
#[command(name = "apkin", version)]
struct Cli {
    /// Extra directory of `*.cfg` scenarios; repeatable.
    #[arg(long = "scenario-dir", global = true)]
    scenario_dirs: Vec<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file or registered scenario name.
    Run {
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Output directory (default `out/<name>`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List registered scenarios.
    List,
    /// Load a scenario and build its model without running it.
    Validate { scenario: String },
}

enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

fn load(registry: &Registry, reference: &str) -> Result<ScenarioConfig, Failure> {
    registry
        .resolve(reference)
        .map_err(|e| Failure::Invalid(e.into()))
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let registry = cli
        .scenario_dirs
        .iter()
        .fold(Registry::new(), |r, d| r.with_dir(d));
    match cli.command {
        Command::List => {
            let entries = registry.list().map_err(|e| Failure::Invalid(e.into()))?;
            let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
            for e in entries {
                let solver = e.solver.map(|s| s.table()).unwrap_or("?");
                let origin = match &e.source {
                    Source::Builtin => String::new(),
                    Source::File(p) => format!("  [{}]", p.display()),
                };
                println!("{:width$}  {solver:11}  {}{origin}", e.name, e.description);
            }
        }
        Command::Validate { scenario } => {
            let cfg = load(&registry, &scenario)?;
            prepare(&cfg).map_err(|e| Failure::Invalid(e.into()))?;
            println!(
                "{}: ok ({} solver)",
                cfg.scenario.name,
                cfg.scenario.solver.table()
            );
        }
        Command::Run {
            scenario,
            seed,
            t_end,
            dt,
            out,
        } => {
            let mut cfg = load(&registry, &scenario)?;
            cfg.apply(&Overrides {
                seed,
                t_end,
                dt,
                out,
            })
            .map_err(|e| Failure::Invalid(e.into()))?;
            prepare(&cfg).map_err(|e| Failure::Invalid(e.into()))?;
            let report = run(&cfg).map_err(Failure::Runtime)?;
            println!(
                "{}: {} steps in {:.2} s, drift {:e}, {} clamps, output in {}",
                report.scenario,
                report.steps,
                report.wall_time_s,
                report.conservation_drift,
                report.clamp_events,
                cfg.out_dir().display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
