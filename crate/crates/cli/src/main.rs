//! `qlss`: drive the solver laboratory from the shell.
//!
//! Exit codes are fixed for scripting: 0 success, 1 unreadable input or bad
//! flags, 2 singular or otherwise unusable system, 3 the ancilla never
//! succeeds, 4 Newton-Raphson failed to converge, 5 circuit cannot be
//! brought to the countable gate set.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use qlss_core::Error;

use config::FileConfig;

#[derive(Parser)]
#[command(name = "qlss", version, about = "HHL solver laboratory", max_term_width = 100)]
struct Cli {
    /// Seed for randomized fixtures. Reserved: every bundled command is
    /// deterministic, so this only pins future randomized inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for sweep points (heat rows, clock-width sweeps).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a linear system read from files with the quantum solver.
    ///
    /// Writes the solution report as JSON and prints the solution errors.
    Solve {
        /// Matrix Market coordinate file (complex or real, general).
        matrix: PathBuf,
        /// Right-hand side: JSON array of [re, im] pairs or re,im CSV.
        rhs: PathBuf,
        /// Clock register width (default: sized from the condition number).
        #[arg(long)]
        nc: Option<usize>,
        /// Evolution time (default: spectrum-matched).
        #[arg(long)]
        t: Option<f64>,
        /// Inversion constant (default: smallest representable eigenvalue).
        #[arg(long)]
        c_const: Option<f64>,
        /// Report destination (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Sweep the heat-diffusion solver over clock widths.
    ///
    /// Emits one CSV row per clock width with solution errors and gate
    /// counts before and after fusion.
    Heat {
        /// Grid side length (2 to 6; the system has l^2 unknowns).
        #[arg(long)]
        l: Option<usize>,
        /// Diffusion ratio alpha dt / h^2.
        #[arg(long)]
        r: Option<f64>,
        /// Inclusive clock-width range, e.g. 3..6 or a single value.
        #[arg(long)]
        nc_range: Option<String>,
        /// CSV destination (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Newton-Raphson AC power flow with a classical or quantum inner solver.
    ///
    /// Writes the iteration trace as CSV and the final voltages as JSON.
    /// Exits 0 only if the mismatch dropped below the case tolerance.
    Powerflow {
        /// Case file (JSON); defaults to the bundled 4-bus case.
        case: Option<PathBuf>,
        /// Inner linear solver.
        #[arg(long, value_enum, default_value_t = SolverKind::Classical)]
        solver: SolverKind,
        /// Clock register width for the quantum solver.
        #[arg(long)]
        nc: Option<usize>,
        /// Iteration budget.
        #[arg(long)]
        max_iter: Option<usize>,
        /// Trace CSV destination (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Voltages JSON destination (default: stdout).
        #[arg(long)]
        voltages: Option<PathBuf>,
    },

    /// Fault-tolerant resource estimate for a circuit.
    ///
    /// Reads a circuit from JSON or builds the solver circuit for one of
    /// the bundled applications. With --nc-range, emits the sweep CSV and
    /// reports the largest clock width.
    Estimate {
        #[command(flatten)]
        source: Source,
        /// Grid side length for --from-heat.
        #[arg(long)]
        l: Option<usize>,
        /// Diffusion ratio for --from-heat.
        #[arg(long)]
        r: Option<f64>,
        /// Clock register width for built circuits.
        #[arg(long, conflicts_with = "nc_range")]
        nc: Option<usize>,
        /// Inclusive clock-width range for a sweep, e.g. 3..6.
        #[arg(long)]
        nc_range: Option<String>,
        /// Hardware preset: ns-1e-4 or us-1e-4.
        #[arg(long)]
        qubits: Option<String>,
        /// Total error budget in (0, 1).
        #[arg(long)]
        budget: Option<f64>,
        /// Synthesize dense unitary blocks before counting (always done for
        /// built circuits).
        #[arg(long)]
        decompose: bool,
        /// Report JSON destination (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sweep CSV destination (default: stdout).
        #[arg(long)]
        sweep_out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Circuit JSON file, estimated as given.
    circuit: Option<PathBuf>,
    /// Build the heat-diffusion solver circuit.
    #[arg(long)]
    from_heat: bool,
    /// Build the solver circuit for the bundled 4-bus Jacobian.
    #[arg(long)]
    from_powerflow: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Classical,
    Hhl,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Io(_) => 1,
        Error::Dimension(_)
        | Error::Singular(_)
        | Error::NotHermitian(_)
        | Error::NotUnitary(_)
        | Error::Invalid(_) => 2,
        Error::ZeroSuccessProbability { .. } => 3,
        Error::Divergence { .. } => 4,
        Error::Undecomposable(_) => 5,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    let file_config = match FileConfig::from_env() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let jobs = cli.jobs.or(file_config.jobs).unwrap_or(1);

    let result = match cli.command {
        Command::Solve {
            matrix,
            rhs,
            nc,
            t,
            c_const,
            out,
        } => commands::solve(commands::SolveArgs {
            matrix,
            rhs,
            nc: nc.or(file_config.nc),
            t: t.or(file_config.t),
            c_const: c_const.or(file_config.c_const),
            out,
        }),
        Command::Heat { l, r, nc_range, out } => commands::heat(commands::HeatArgs {
            l: l.or(file_config.l).unwrap_or(3),
            r: r.or(file_config.r).unwrap_or(0.00016),
            nc_range: nc_range.or(file_config.nc_range).unwrap_or_else(|| "3..6".into()),
            out,
            jobs,
        }),
        Command::Powerflow {
            case,
            solver,
            nc,
            max_iter,
            out,
            voltages,
        } => commands::powerflow(commands::PowerflowArgs {
            case,
            quantum: matches!(solver, SolverKind::Hhl),
            nc: nc.or(file_config.nc),
            max_iter: max_iter.or(file_config.max_iter).unwrap_or(20),
            out,
            voltages,
        }),
        Command::Estimate {
            source,
            l,
            r,
            nc,
            nc_range,
            qubits,
            budget,
            decompose,
            out,
            sweep_out,
        } => commands::estimate(commands::EstimateArgs {
            circuit: source.circuit,
            from_heat: source.from_heat,
            from_powerflow: source.from_powerflow,
            l: l.or(file_config.l).unwrap_or(3),
            r: r.or(file_config.r).unwrap_or(0.00016),
            nc: nc.or(file_config.nc),
            nc_range: nc_range.or(file_config.nc_range),
            qubits: qubits
                .or(file_config.qubits)
                .unwrap_or_else(|| "ns-1e-4".into()),
            budget: budget.or(file_config.budget).unwrap_or(0.01),
            decompose,
            out,
            sweep_out,
            jobs,
        }),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
