//! Command-line front end: `analyze`, `sweep`, `simulate` and `scenario`.
//!
//! Exit status is 0 on success, 1 on usage or configuration errors and 2
//! when the parameters cannot supply `B_crit` responders.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{parse_config, read_config, ConfigError, RunConfig};
use crate::error::ModelError;
use crate::output::{format_sig9, write_csv_to, CsvRow, SUMMARY_TRIAL};
use crate::scaling::{sweep, total_response_time, DetectionMode, TimingBreakdown};
use crate::scenario::{evaluate_scenario, ScenarioProfile, ScenarioVerdict};
use crate::sim::{simulate, EventLog};
use crate::stats::mean_and_std_err;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "lymphscale",
    version,
    about = "Detection, recruitment and expansion times of hub-and-region networks",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Flat `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,

    /// Overrides the configuration seed
    #[arg(long)]
    seed: Option<u64>,

    /// Output file (default: the config's `output`, else stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic breakdown for one mass and exponent
    Analyze {
        #[arg(long)]
        mass: f64,
        #[arg(long)]
        exponent: f64,
        /// spatial | contention (default: from config)
        #[arg(long)]
        mode: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Analytic breakdowns over the configured masses x exponents
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Seeded discrete-event runs: one row per trial plus a mean row per mass
    Simulate {
        /// Number of trials per mass (default: from config)
        #[arg(long)]
        trials: Option<usize>,
        /// Also write the event logs here
        #[arg(long)]
        events: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Rank the three architectures under a bandwidth regime
    Scenario {
        /// unlimited-unlimited | limited-unlimited | unlimited-limited | limited-limited | all
        #[arg(long)]
        profile: String,
        /// Also write per-architecture breakdown rows here
        #[arg(long)]
        rows: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_infeasible() => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        }
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn dispatch<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match run(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => read_config(path)?,
        None => parse_config("")?,
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(path) = &common.output {
        config.output = Some(path.display().to_string());
    }
    Ok(config)
}

fn with_output<F>(path: Option<&Path>, stdout: &mut dyn Write, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match path {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            body(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

fn run(command: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Analyze {
            mass,
            exponent,
            mode,
            common,
        } => {
            let config = load(&common)?;
            let mode = match mode {
                Some(m) => m.parse::<DetectionMode>()?,
                None => config.mode,
            };
            let arch = config.arch.with_exponent(exponent)?;
            let timing = total_response_time(mass, &arch, &config.params, mode)?;
            let row = CsvRow::new(mass, exponent, mode, timing, config.seed, 0);
            with_output(config.output.as_deref().map(Path::new), stdout, |out| {
                Ok(write_csv_to(&[row], out)?)
            })
        }
        Command::Sweep { common } => {
            let config = load(&common)?;
            let rows: Vec<CsvRow> = sweep(
                &config.masses,
                &config.exponents,
                &config.arch,
                &config.params,
                config.mode,
            )?
            .into_iter()
            .map(|r| CsvRow::new(r.mass, r.exponent, config.mode, r.timing, config.seed, 0))
            .collect();
            with_output(config.output.as_deref().map(Path::new), stdout, |out| {
                Ok(write_csv_to(&rows, out)?)
            })
        }
        Command::Simulate {
            trials,
            events,
            common,
        } => {
            let mut config = load(&common)?;
            if let Some(n) = trials {
                if n == 0 {
                    return Err(CliError::Usage("--trials must be > 0".into()));
                }
                config.trials = n;
            }
            let (rows, logs) = simulate_rows(&config)?;
            with_output(config.output.as_deref().map(Path::new), stdout, |out| {
                Ok(write_csv_to(&rows, out)?)
            })?;
            if let Some(path) = events {
                let mut file = BufWriter::new(File::create(path)?);
                for (header, log) in &logs {
                    writeln!(file, "# {header}")?;
                    log.write_text(&mut file)?;
                }
                file.flush()?;
            }
            Ok(())
        }
        Command::Scenario {
            profile,
            rows,
            common,
        } => {
            let config = load(&common)?;
            let profiles: Vec<ScenarioProfile> = if profile == "all" {
                ScenarioProfile::all(config.limited_rho, config.limited_lambda)?.to_vec()
            } else {
                let p: ScenarioProfile = profile.parse()?;
                vec![p.with_coefficients(config.limited_rho, config.limited_lambda)?]
            };
            let verdicts = profiles
                .iter()
                .map(|p| {
                    evaluate_scenario(
                        p,
                        &config.masses,
                        &config.arch,
                        &config.params,
                        config.model3,
                    )
                })
                .collect::<Result<Vec<_>, _>>()?;
            with_output(config.output.as_deref().map(Path::new), stdout, |out| {
                Ok(write_verdicts(&verdicts, out)?)
            })?;
            if let Some(path) = rows {
                let mut file = BufWriter::new(File::create(path)?);
                write_csv_to(&verdict_rows(&verdicts, config.seed), &mut file)?;
                file.flush()?;
            }
            Ok(())
        }
    }
}

type TrialLogs = Vec<(String, EventLog)>;

/// Per-trial rows in trial order, then one mean row, for every mass.
pub fn simulate_rows(config: &RunConfig) -> Result<(Vec<CsvRow>, TrialLogs), ModelError> {
    let exponent = config.arch.exponent();
    let mut rows = Vec::new();
    let mut logs = Vec::new();
    for &mass in &config.masses {
        let runs: Vec<(u64, TimingBreakdown, EventLog)> = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = config.seed.wrapping_add(trial as u64);
                let (timing, log) = simulate(&config.sim_config(mass, seed))?;
                Ok((seed, timing, log))
            })
            .collect::<Result<_, ModelError>>()?;
        for (trial, (seed, timing, log)) in runs.iter().enumerate() {
            rows.push(CsvRow::new(
                mass,
                exponent,
                DetectionMode::Spatial,
                *timing,
                *seed,
                trial as i64,
            ));
            logs.push((
                format!("M={} trial={trial} seed={seed}", format_sig9(mass)),
                log.clone(),
            ));
        }
        let mean = |f: fn(&TimingBreakdown) -> f64| {
            mean_and_std_err(&runs.iter().map(|r| f(&r.1)).collect::<Vec<_>>()).0
        };
        let summary = TimingBreakdown::new(
            mean(TimingBreakdown::t_detect),
            mean(TimingBreakdown::t_recruit),
            mean(TimingBreakdown::t_expand),
        )?;
        rows.push(CsvRow::new(
            mass,
            exponent,
            DetectionMode::Spatial,
            summary,
            config.seed,
            SUMMARY_TRIAL,
        ));
    }
    Ok((rows, logs))
}

pub const VERDICT_HEADER: &str = "profile,M,winner,model1_total,model2_total,model3_total,model3_a";

/// One row per (profile, mass) and a closing `overall` row per profile.
pub fn write_verdicts<W: Write + ?Sized>(
    verdicts: &[ScenarioVerdict],
    out: &mut W,
) -> io::Result<()> {
    writeln!(out, "{VERDICT_HEADER}")?;
    for v in verdicts {
        for m in &v.per_mass {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                v.profile,
                format_sig9(m.mass),
                m.winner,
                format_sig9(m.model1.t_total()),
                format_sig9(m.model2.t_total()),
                format_sig9(m.model3.t_total()),
                format_sig9(m.model3_exponent)
            )?;
        }
        writeln!(out, "{},overall,{},,,,", v.profile, v.overall)?;
    }
    Ok(())
}

fn verdict_rows(verdicts: &[ScenarioVerdict], seed: u64) -> Vec<CsvRow> {
    use crate::scaling::ModelKind::*;
    let mut rows = Vec::new();
    for v in verdicts {
        for m in &v.per_mass {
            for kind in [FullyModular, NonModular, SubModular] {
                let mut row = CsvRow::new(
                    m.mass,
                    m.exponent(kind),
                    DetectionMode::Contention,
                    *m.timing(kind),
                    seed,
                    0,
                );
                row.model = kind;
                rows.push(row);
            }
        }
    }
    rows
}
