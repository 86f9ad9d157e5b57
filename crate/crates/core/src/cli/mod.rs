//! Scenario runner behind the `harnack-lab` binary.

mod config;
mod pipeline;
mod registry;
mod study;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{
    BackgroundSpec, Basis, FlowName, FlowSpec, HeatSpec, IdentitySpec, MonitorSpec, PathSpec,
    Profile, QuantityName, ScenarioConfig, ToleranceSpec, SCHEMA_VERSION,
};
pub use pipeline::{
    report_text, run_config, series_csv, solve_scenario, write_outputs, FlowSummary,
    IdentityEntry, IdentityRow, MonitorEntry, Overrides, PathEntry, PositivityEntry, RunReport,
    Solved, Summary, REPORT_SCHEMA_VERSION,
};
pub use registry::{bundled, list_scenarios, load_bundled, BUNDLED};
pub use study::{convergence_study, study_text, Order, StudyReport, StudyRow, MIN_ORDER};

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "harnack-lab", version, about = "Differential Harnack monitors for heat equations under Ricci-type flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Only report errors and the exit status.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file or a bundled scenario by name.
    Run {
        scenario: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run a scenario at successively refined resolutions and fit orders.
    Study {
        scenario: String,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// List bundled scenarios.
    List,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Constant part of the monitor tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Refuse schedules longer than this many steps.
    #[arg(long)]
    pub max_steps: Option<usize>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides { tolerance: self.tolerance, max_steps: self.max_steps }
    }
}

/// Loads `arg` as a file path when it exists, otherwise as a bundled name.
pub fn resolve_scenario(arg: &str) -> Result<ScenarioConfig> {
    let path = Path::new(arg);
    if path.exists() {
        ScenarioConfig::load(path)
    } else if let Some(text) = bundled(arg) {
        ScenarioConfig::from_toml(text)
    } else {
        Err(Error::Config(format!(
            "'{arg}' is neither a readable file nor a bundled scenario (see `harnack-lab list`)"
        )))
    }
}

fn output_dir(common: &CommonArgs, config: &ScenarioConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("harnack-out").join(&config.name))
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::List => {
            print!("{}", list_scenarios());
            Ok(EXIT_OK)
        }
        Command::Run { scenario, common } => {
            let config = resolve_scenario(scenario)?;
            let report = run_config(&config, &common.overrides())?;
            let dir = output_dir(common, &config);
            write_outputs(&report, &dir)?;
            if !cli.quiet {
                print!("{}", report_text(&report));
                println!("outputs: {}", dir.display());
            }
            eprintln!("wall clock: {:.3} s", report.wall_clock);
            Ok(if report.holds() { EXIT_OK } else { EXIT_VIOLATION })
        }
        Command::Study { scenario, levels, common } => {
            let config = resolve_scenario(scenario)?;
            let started = std::time::Instant::now();
            let report = convergence_study(&config, *levels, &common.overrides())?;
            let dir = output_dir(common, &config);
            std::fs::create_dir_all(&dir)?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Io(format!("cannot serialize study: {e}")))?;
            std::fs::write(dir.join("study.json"), json + "\n")?;
            let text = study_text(&report);
            std::fs::write(dir.join("study.txt"), &text)?;
            if !cli.quiet {
                print!("{text}");
            }
            eprintln!("wall clock: {:.3} s", started.elapsed().as_secs_f64());
            Ok(if report.passes { EXIT_OK } else { EXIT_VIOLATION })
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
