//! Command-line front end: argument parsing, config resolution, running an
//! experiment and emitting its reports.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 configuration error, 3 dimension
//! overflow, 4 failed invariant check.

pub mod config;
pub mod experiments;
pub mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::exec::{with_threads, Execution};
use config::{
    ConcentrationParams, ConfigFile, Experiment, InitialState, MeasureParams, QetParams, RunConfig, SchmidtParams,
    DEFAULT_OUT,
};

pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_OVERFLOW: u8 = 3;
pub const EXIT_INVARIANT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "qetlab", version, about = "Typicality, quantum ergodicity and macroscopic superposition at desk scale")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo check of concentration bounds for reduced density matrices.
    Concentration {
        #[command(flatten)]
        common: CommonArgs,
        /// Dimension of the observed subsystem.
        #[arg(long)]
        n1: Option<usize>,
        /// Dimension of the environment.
        #[arg(long)]
        n2: Option<usize>,
        /// Number of random states.
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
    },
    /// Ergodic time-fraction statistics for the ball-and-gas model.
    Qet {
        #[command(flatten)]
        common: CommonArgs,
        /// Lattice sites.
        #[arg(long)]
        sites: Option<usize>,
        /// Number of gas particles.
        #[arg(long)]
        n_gas: Option<usize>,
        /// Ball hopping amplitude.
        #[arg(long)]
        ball_hop: Option<f64>,
        /// Gas hopping amplitude.
        #[arg(long)]
        gas_hop: Option<f64>,
        /// Linear potential on the ball position.
        #[arg(long)]
        tilt: Option<f64>,
        /// Strength of the random diagonal perturbation.
        #[arg(long)]
        eta: Option<f64>,
        /// Lower energy of the shell (inclusive).
        #[arg(long, allow_hyphen_values = true)]
        shell_lo: Option<f64>,
        /// Upper energy of the shell (exclusive).
        #[arg(long, allow_hyphen_values = true)]
        shell_hi: Option<f64>,
        /// Number of ball-position cells.
        #[arg(long)]
        cells: Option<usize>,
        /// Final time (default: 100 / smallest occupied gap).
        #[arg(long)]
        t_max: Option<f64>,
        /// Number of time samples, including t = 0.
        #[arg(long)]
        n_times: Option<usize>,
        /// Tolerance for the ergodic fraction (default: twice the largest temporal std).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Minimum weight for a cell to count as a branch.
        #[arg(long)]
        threshold: Option<f64>,
        /// Initial state.
        #[arg(long, value_enum)]
        initial: Option<InitialState>,
        /// Cell of the localized initial state.
        #[arg(long)]
        initial_cell: Option<usize>,
    },
    /// Spin-pointer measurement model and its branch overlap.
    Measure {
        #[command(flatten)]
        common: CommonArgs,
        /// Rotation angle per pointer spin.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
        /// Number of pointer spins.
        #[arg(long)]
        n_spins: Option<usize>,
        /// Amplitude of the spin-up component: `0.6`, `0.6+0.8i` or `0.8i`.
        #[arg(long, allow_hyphen_values = true)]
        c_plus: Option<String>,
        /// Amplitude of the spin-down component.
        #[arg(long, allow_hyphen_values = true)]
        c_minus: Option<String>,
    },
    /// Schmidt decompositions of random bipartite states.
    Schmidt {
        #[command(flatten)]
        common: CommonArgs,
        /// Dimension of the first factor.
        #[arg(long)]
        n1: Option<usize>,
        /// Dimension of the second factor.
        #[arg(long)]
        n2: Option<usize>,
        /// Number of random states.
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Master seed for all random streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores). Reports do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

macro_rules! set {
    ($target:expr, $flag:expr) => {
        if let Some(v) = $flag {
            $target = v;
        }
    };
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Concentration { common, .. }
            | Command::Qet { common, .. }
            | Command::Measure { common, .. }
            | Command::Schmidt { common, .. } => common,
        }
    }

    /// Merges the config file (if any) with the flags.
    pub fn resolve(self) -> Result<RunConfig, Error> {
        let common = self.common().clone();
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let experiment = match self {
            Command::Concentration { n1, n2, trials, epsilons, .. } => {
                let mut p: ConcentrationParams = file.concentration.clone().unwrap_or_default();
                set!(p.n1, n1);
                set!(p.n2, n2);
                set!(p.trials, trials);
                set!(p.epsilons, epsilons);
                Experiment::Concentration(p)
            }
            Command::Qet {
                sites,
                n_gas,
                ball_hop,
                gas_hop,
                tilt,
                eta,
                shell_lo,
                shell_hi,
                cells,
                t_max,
                n_times,
                epsilon,
                threshold,
                initial,
                initial_cell,
                ..
            } => {
                let mut p: QetParams = file.qet.clone().unwrap_or_default();
                set!(p.sites, sites);
                set!(p.n_gas, n_gas);
                set!(p.ball_hop, ball_hop);
                set!(p.gas_hop, gas_hop);
                set!(p.tilt, tilt);
                set!(p.eta, eta);
                set!(p.shell_lo, shell_lo);
                set!(p.shell_hi, shell_hi);
                set!(p.cells, cells);
                set!(p.initial, initial);
                set!(p.initial_cell, initial_cell);
                if t_max.is_some() {
                    p.t_max = t_max;
                }
                if n_times.is_some() {
                    p.n_times = n_times;
                }
                if epsilon.is_some() {
                    p.epsilon = epsilon;
                }
                if threshold.is_some() {
                    p.threshold = threshold;
                }
                Experiment::Qet(p)
            }
            Command::Measure {
                theta,
                n_spins,
                c_plus,
                c_minus,
                ..
            } => {
                let mut p: MeasureParams = file.measure.clone().unwrap_or_default();
                set!(p.theta, theta);
                set!(p.n_spins, n_spins);
                set!(p.c_plus, c_plus);
                set!(p.c_minus, c_minus);
                Experiment::Measure(p)
            }
            Command::Schmidt { n1, n2, trials, .. } => {
                let mut p: SchmidtParams = file.schmidt.clone().unwrap_or_default();
                set!(p.n1, n1);
                set!(p.n2, n2);
                set!(p.trials, trials);
                Experiment::Schmidt(p)
            }
        };
        let threads = common.threads.or(file.threads);
        if threads == Some(0) {
            return Err(Error::Config {
                field: "threads".into(),
                reason: "must be at least 1".into(),
            });
        }
        let config = RunConfig {
            seed: common.seed.or(file.seed).unwrap_or(0),
            experiment,
            out: common.out.or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            threads,
        };
        config.experiment.validate()?;
        Ok(config)
    }
}

/// Outcome of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// One-screen human-readable summary.
    pub lines: Vec<String>,
    pub checks_passed: bool,
}

/// Runs an experiment and writes its reports into `config.out`.
pub fn run(config: &RunConfig) -> Result<RunOutcome, Error> {
    let exec = Execution::Parallel;
    let job = || -> Result<RunOutcome, Error> {
        let dir = &config.out;
        let seed = config.seed;
        let mut lines = vec![format!("experiment {} (seed {seed})", config.experiment.name())];
        let (checks, passed) = match &config.experiment {
            Experiment::Concentration(p) => {
                let report = experiments::run_concentration(p, seed, exec)?;
                let s = experiments::write_concentration(dir, p, seed, &report)?;
                lines.push(format!("n1 = {}, n2 = {}, trials = {}", p.n1, p.n2, p.trials));
                lines.push(format!("max deviation        {:.6}", report.max_deviation));
                lines.push(format!("mean rho1 distance   {:.6}", report.mean_distance));
                lines.push(format!("worst empirical/bound {:.6}", report.worst_ratio()));
                (s.checks.clone(), s.all_passed())
            }
            Experiment::Qet(p) => {
                let qet = experiments::run_qet(p, seed, exec)?;
                let s = experiments::write_qet(dir, p, seed, &qet)?;
                let part = &qet.setup.partition;
                lines.push(format!(
                    "dim {}, shell dim {}, cells {:?}",
                    qet.setup.model.dim(),
                    part.shell_dim(),
                    part.dims()
                ));
                lines.push(format!("non-degenerate shell {}", qet.setup.nondegeneracy.holds()));
                lines.push(format!("t_max {:.6e} over {} samples", qet.t_max, qet.series.len()));
                lines.push(format!(
                    "ergodic fraction     {:.4} at epsilon {:.6}",
                    qet.ergodic_fraction, qet.epsilon
                ));
                lines.push(format!("|time avg - diag|    {:.3e}", qet.time_average_error()));
                lines.push(format!(
                    "superposition (late) {:.4} at threshold {:.6}",
                    qet.late_superposition_fraction, qet.threshold
                ));
                (s.checks.clone(), s.all_passed())
            }
            Experiment::Measure(p) => {
                let m = experiments::run_measure(p)?;
                let s = experiments::write_measure(dir, p, seed, &m)?;
                lines.push(format!("theta {}, N = {}", p.theta, p.n_spins));
                lines.push(format!("branch overlap       {:.6e}", m.outcome.branch_overlap));
                lines.push(format!("|cos theta|^N        {:.6e}", m.outcome.closed_form));
                if let Some(slope) = m.log_slope {
                    lines.push(format!("log-overlap slope    {slope:.12}"));
                }
                (s.checks.clone(), s.all_passed())
            }
            Experiment::Schmidt(p) => {
                let trials = experiments::run_schmidt(p, seed, exec)?;
                let s = experiments::write_schmidt(dir, p, seed, &trials)?;
                let mean = trials.iter().map(|t| t.entropy).sum::<f64>() / trials.len() as f64;
                lines.push(format!("n1 = {}, n2 = {}, trials = {}", p.n1, p.n2, p.trials));
                lines.push(format!(
                    "mean entropy         {mean:.6} (Page {:.6})",
                    experiments::page_entropy(p.n1, p.n2)
                ));
                (s.checks.clone(), s.all_passed())
            }
        };
        for c in &checks {
            lines.push(format!(
                "check {:<34} {} ({:.3e} <= {:.1e})",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.value,
                c.tolerance
            ));
        }
        lines.push(format!("reports in {}", dir.display()));
        Ok(RunOutcome {
            lines,
            checks_passed: passed,
        })
    };
    match config.threads {
        Some(n) => with_threads(n, job),
        None => job(),
    }
}

pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::DimensionOverflow { .. } => EXIT_OVERFLOW,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let config = match cli.command.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    match run(&config) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            let workers = config
                .threads
                .map_or_else(|| "all cores".to_string(), |n| n.to_string());
            println!("workers {workers}");
            if outcome.checks_passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: invariant check failed");
                ExitCode::from(EXIT_INVARIANT)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
