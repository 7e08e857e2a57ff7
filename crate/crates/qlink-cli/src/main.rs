mod output;

use clap::{Args, Parser, Subcommand};
use qlink_core::figures::{run_figure, sweep, FigureError, FigureId};
use qlink_core::scenario::{parse_scenario, Scenario, ScenarioError};
use qlink_core::sync::{drift_statistics, ingest_ranging, required_sync_rate};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qlink", version, about = "Satellite optical link feasibility toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; falls back to the scenario's output_dir, then
    /// $QLINK_OUT_DIR, then the working directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one figure and write <id>.csv plus <id>.meta.json.
    Figure {
        /// Figure id, fig1 through fig15.
        id: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Evaluate the scenario's sweep block and write sweep.csv plus
    /// sweep.meta.json.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Timing analyses over satellite ranging data.
    Sync {
        #[command(subcommand)]
        command: SyncCommand,
    },
    /// Parse a scenario file, resolve every block, and report the result.
    Validate {
        scenario: PathBuf,
    },
}

#[derive(Subcommand)]
enum SyncCommand {
    /// Drift statistics of a ranging file and the synchronization pulse
    /// rate they imply.
    Analyze {
        /// Two-column ranging file with a `# units: s,s` or `# units: s,m`
        /// header.
        ranging_file: PathBuf,
        /// Timing accuracy target the pulse rate must hold, ns.
        #[arg(long, default_value_t = 1.0)]
        accuracy_ns: f64,
        /// Histogram bin count for the drift distribution.
        #[arg(long, default_value_t = 41)]
        bins: usize,
    },
}

/// Failure classes the process reports through its exit status: 2 for
/// invalid input, 3 for a non-finite numerical result.
enum Failure {
    Validation(String),
    Numerical(String),
}

impl From<FigureError> for Failure {
    fn from(e: FigureError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<qlink_core::sync::SyncError> for Failure {
    fn from(e: qlink_core::sync::SyncError) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(message)) => {
            eprintln!("numerical failure: {message}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Figure { id, run } => {
            let figure: FigureId = id.parse().map_err(|e: FigureError| Failure::from(e))?;
            let scenario = load_scenario(&run.scenario, run.seed)?;
            let table = run_figure(figure, &scenario)?;
            write_run(&run, &scenario, figure.id(), &table)
        }
        Command::Sweep { run } => {
            let scenario = load_scenario(&run.scenario, run.seed)?;
            let table = sweep(&scenario)?;
            write_run(&run, &scenario, "sweep", &table)
        }
        Command::Sync { command } => match command {
            SyncCommand::Analyze {
                ranging_file,
                accuracy_ns,
                bins,
            } => analyze_ranging(&ranging_file, accuracy_ns, bins),
        },
        Command::Validate { scenario } => validate(&scenario),
    }
}

fn load_scenario(path: &Path, seed: Option<u64>) -> Result<Scenario, Failure> {
    let mut scenario = parse_scenario(path)?;
    scenario.validate()?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    Ok(scenario)
}

fn write_run(
    run: &RunArgs,
    scenario: &Scenario,
    stem: &str,
    table: &qlink_core::figures::FigureOutput,
) -> Result<(), Failure> {
    let dir = output::resolve_out_dir(run.out.clone(), scenario);
    let (csv, meta) = output::write_tables(&dir, stem, table)
        .map_err(|e| Failure::Validation(format!("cannot write output to {}: {e}", dir.display())))?;
    println!("wrote {} ({} rows)", csv.display(), table.rows.len());
    println!("wrote {}", meta.display());
    Ok(())
}

fn analyze_ranging(path: &Path, accuracy_ns: f64, bins: usize) -> Result<(), Failure> {
    let series = ingest_ranging(path)?;
    let stats = drift_statistics(&series, bins)?;
    let rate = required_sync_rate(stats.max_abs, accuracy_ns * 1e-9)?;

    println!("records:                {}", series.len());
    if series.gaps.is_empty() {
        println!("sampling gaps:          none");
    } else {
        let spans: Vec<String> = series
            .gaps
            .iter()
            .map(|&i| {
                format!(
                    "{}..{} s",
                    series.records[i].epoch,
                    series.records[i + 1].epoch
                )
            })
            .collect();
        println!(
            "sampling gaps:          {} ({})",
            series.gaps.len(),
            spans.join(", ")
        );
    }
    println!("max |dtau/dt|:          {:.6e} s/s", stats.max_abs);
    println!(
        "range rate (one-way):   {:.3} m/s",
        stats.range_rate_one_way
    );
    println!(
        "range rate (two-way):   {:.3} m/s",
        stats.range_rate_two_way
    );
    println!(
        "required sync rate:     {:.3} Hz for {accuracy_ns} ns accuracy",
        rate.base
    );
    println!(
        "with safety margin:     {:.3} to {:.3} Hz",
        rate.margin_low, rate.margin_high
    );
    Ok(())
}

fn validate(path: &Path) -> Result<(), Failure> {
    let scenario = load_scenario(path, None)?;
    println!("scenario {:?}: valid", scenario.name);
    println!("  seed: {}", scenario.seed);
    if let Some(g) = &scenario.geometry {
        println!(
            "  geometry: {:?} at {} nm, L = {} km, receiver radius {} m",
            g.direction, g.wavelength_nm, g.path_length_km, g.receiver_radius_m
        );
    }
    if let Some(g) = &scenario.downlink_geometry {
        println!(
            "  downlink geometry: {} nm, L = {} km, receiver radius {} m",
            g.wavelength_nm, g.path_length_km, g.receiver_radius_m
        );
    }
    if let Some(sweep) = &scenario.sweep {
        let axes: Vec<String> = sweep
            .axes
            .iter()
            .map(|a| match a.expand() {
                Ok(grid) => format!("{} ({} points)", a.name, grid.len()),
                Err(_) => a.name.clone(),
            })
            .collect();
        println!("  sweep axes: {}", axes.join(", "));
    }
    Ok(())
}
