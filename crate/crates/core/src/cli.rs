//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::curves;
use crate::hand_model::{validate_config, HandConfig, NUM_SHAFTS};
use crate::scheduler::{self, MotionDemand};
use crate::sim::{self, PlanMode, RunOptions};
use crate::tdmm;

#[derive(Debug, Parser)]
#[command(name = "tdmm-hand", version, about = "Plan and simulate a cable-driven hand with a multiplexed drive box")]
pub struct Cli {
    /// Hand configuration (JSON). The built-in default is used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a configuration and list every violation.
    Validate,
    /// Write joint-versus-wheel curves and print their linear fits.
    Curves {
        /// Output directory for flexion.csv and roll.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan a schedule for a file of nine wheel rotations (deg, one per line).
    Plan {
        demand: PathBuf,
        #[command(flatten)]
        mode: ModeArgs,
        /// Write the schedule here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a motion script and write telemetry CSV plus an event log.
    Run {
        script: PathBuf,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = sim::DEFAULT_SEED)]
        seed: u64,
        /// Telemetry CSV; the event log goes next to it as `<stem>.events.jsonl`.
        #[arg(long)]
        out: PathBuf,
        /// Skip the encoder-based trim before releasing each phase.
        #[arg(long)]
        open_loop: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Sequential,
    Interleaved,
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    #[arg(long, value_enum, default_value_t = Mode::Sequential)]
    pub mode: Mode,
    /// Largest wheel rotation per visit, deg. Required for interleaved mode.
    #[arg(long, required_if_eq("mode", "interleaved"))]
    pub chunk: Option<f64>,
}

impl ModeArgs {
    fn plan_mode(&self) -> Result<PlanMode, String> {
        match (self.mode, self.chunk) {
            (Mode::Sequential, None) => Ok(PlanMode::Sequential),
            (Mode::Sequential, Some(_)) => Err("--chunk only applies to --mode interleaved".into()),
            (Mode::Interleaved, Some(chunk_deg)) => Ok(PlanMode::Interleaved { chunk_deg }),
            (Mode::Interleaved, None) => Err("--mode interleaved requires --chunk".into()),
        }
    }
}

/// Error carrying the message printed before a nonzero exit.
#[derive(Debug)]
pub struct CliError(pub String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn load_config(path: Option<&Path>) -> Result<HandConfig, CliError> {
    let config = match path {
        Some(p) => HandConfig::from_path(p).map_err(|e| CliError(format!("{}: {e}", p.display())))?,
        None => HandConfig::default(),
    };
    validate_config(config).map_err(|errs| CliError(errs.to_string()))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError(format!("{}: {e}", path.display())))
}

pub fn parse_demand(text: &str) -> Result<MotionDemand, String> {
    let values: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    if values.len() != NUM_SHAFTS {
        return Err(format!("demand needs {NUM_SHAFTS} values, found {}", values.len()));
    }
    let mut d = MotionDemand::zero();
    for (slot, (line, tok)) in d.0.iter_mut().zip(values) {
        *slot = tok
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("line {line}: `{tok}` is not a finite number"))?;
    }
    Ok(d)
}

/// Event log path for a telemetry file: `run.csv` -> `run.events.jsonl`.
pub fn event_log_path(out: &Path) -> PathBuf {
    out.with_extension("events.jsonl")
}

/// Runs one invocation, writing data to `stdout`.
pub fn execute<W: Write>(cli: &Cli, stdout: &mut W) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate => {
            load_config(cli.config.as_deref())?;
            writeln!(stdout, "ok")?;
        }
        Command::Curves { out } => {
            let config = load_config(cli.config.as_deref())?;
            let c = curves::compute_curves(&config.geometry)?;
            std::fs::create_dir_all(out).map_err(|e| CliError(format!("{}: {e}", out.display())))?;
            let mut f = create(&out.join("flexion.csv"))?;
            curves::write_flexion_csv(&c, &mut f)?;
            f.flush()?;
            let mut f = create(&out.join("roll.csv"))?;
            curves::write_roll_csv(&c, &mut f)?;
            f.flush()?;
            write!(stdout, "{}", curves::fit_summary(&c.fits))?;
        }
        Command::Plan { demand, mode, out } => {
            let config = load_config(cli.config.as_deref())?;
            let mode = mode.plan_mode()?;
            let d = parse_demand(&read(demand)?).map_err(|e| CliError(format!("{}: {e}", demand.display())))?;
            let schedule = match mode {
                PlanMode::Sequential => scheduler::plan_sequential(&d, &config)?,
                PlanMode::Interleaved { chunk_deg } => scheduler::plan_interleaved(&d, &config, chunk_deg)?,
            };
            let json = schedule.to_json_pretty();
            match out {
                Some(path) => {
                    let mut f = create(path)?;
                    writeln!(f, "{json}")?;
                    f.flush()?;
                }
                None => writeln!(stdout, "{json}")?,
            }
            writeln!(stdout, "makespan_s {:.6}", schedule.makespan_s)?;
        }
        Command::Run { script, mode, seed, out, open_loop } => {
            let config = load_config(cli.config.as_deref())?;
            let mode = mode.plan_mode()?;
            let parsed = sim::parse_script(&read(script)?).map_err(|e| CliError(format!("{}: {e}", script.display())))?;
            let options = RunOptions { mode, seed: *seed, closed_loop: !open_loop };
            let outcome = sim::run_script(&parsed, &config, options)
                .map_err(|e| CliError(format!("{}: {e}", script.display())))?;

            let mut f = create(out)?;
            sim::write_csv(&outcome.telemetry, &mut f)?;
            f.flush()?;
            let mut f = create(&event_log_path(out))?;
            tdmm::write_event_log(&outcome.events, &mut f)?;
            f.flush()?;

            let t = outcome.final_state.clock;
            writeln!(stdout, "t_end_s {t:.6}")?;
            for (i, p) in outcome.final_state.joint_angles.iter().enumerate() {
                writeln!(
                    stdout,
                    "f{i} th1={:.6} th2={:.6} th3={:.6} phi3={:.6}",
                    p.theta1, p.theta2, p.theta3, p.phi3
                )?;
            }
        }
    }
    Ok(())
}
