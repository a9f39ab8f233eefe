//! Command bodies. Artifacts go to the requested path or stdout; progress
//! and summaries go to stderr so piped output stays clean.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;

use qlss_core::apps::{
    heat_matrix, nr_solve, BusKind, HeatSpec, LinearSolver, NRFailure, PowerFlowCase,
};
use qlss_core::hhl::{self, HHLConfig};
use qlss_core::io::{read_matrix_market, read_vector};
use qlss_core::resource::{
    estimate as estimate_circuit, sweep_nc, ErrorBudget, QECSpec, QubitParams, Sweep,
    TFactorySpec,
};
use qlss_core::sim::decompose::decompose;
use qlss_core::sim::{fuse, stats, Circuit};
use qlss_core::{Error, LinearSystem, Result};

fn write_artifact(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

/// Inclusive `lo..hi` range, or a single value.
fn parse_nc_range(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("clock range '{text}' is not LO..HI or a single width"));
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (
            lo.trim().parse::<usize>().map_err(|_| bad())?,
            hi.trim().parse::<usize>().map_err(|_| bad())?,
        ),
        None => {
            let v = text.trim().parse::<usize>().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo < 1 || hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

/// Order-preserving map over independent work items.
fn parallel_map<T, R, F>(jobs: usize, items: Vec<T>, f: F) -> Result<Vec<R>>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Result<R> + Sync,
{
    if jobs <= 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let mut slots: Vec<Option<Result<R>>> = Vec::new();
    slots.resize_with(items.len(), || None);
    let slots = Mutex::new(slots);
    let queue = Mutex::new(items.into_iter().enumerate().collect::<Vec<_>>());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let Some((idx, item)) = queue.lock().unwrap().pop() else {
                    break;
                };
                let outcome = f(item);
                slots.lock().unwrap()[idx] = Some(outcome);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("worker filled every slot"))
        .collect()
}

// --- solve -----------------------------------------------------------------

pub struct SolveArgs {
    pub matrix: PathBuf,
    pub rhs: PathBuf,
    pub nc: Option<usize>,
    pub t: Option<f64>,
    pub c_const: Option<f64>,
    pub out: Option<PathBuf>,
}

pub fn solve(args: SolveArgs) -> Result<()> {
    let a = read_matrix_market(&args.matrix)?;
    let b = read_vector(&args.rhs)?;
    let system = LinearSystem::new(a, b)?;
    let config = HHLConfig {
        n_c: args.nc,
        t: args.t,
        c_const: args.c_const,
    };
    let solution = hhl::solve(&system, &config)?;
    eprintln!(
        "solved {}-dim system: n_c={} state_error={:.3e} vector_error={:.3e}",
        system.original_dim, solution.n_c, solution.state_error, solution.vector_error
    );
    let json = serde_json::to_string_pretty(&solution)
        .map_err(|e| Error::Invalid(format!("cannot serialize solution: {e}")))?;
    write_artifact(args.out.as_deref(), &(json + "\n"))
}

// --- heat ------------------------------------------------------------------

pub struct HeatArgs {
    pub l: usize,
    pub r: f64,
    pub nc_range: String,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

pub fn heat(args: HeatArgs) -> Result<()> {
    if !(2..=6).contains(&args.l) {
        return Err(Error::Invalid(format!(
            "grid side {} outside the simulable range 2..=6",
            args.l
        )));
    }
    let system = heat_matrix(&HeatSpec::new(args.l, args.r))?;
    let widths = parse_nc_range(&args.nc_range)?;

    let rows = parallel_map(args.jobs, widths, |n_c| {
        let built = hhl::build(
            &system,
            &HHLConfig {
                n_c: Some(n_c),
                ..Default::default()
            },
        )?;
        let solution = hhl::execute(&system, &built)?;
        let lowered = decompose(&built.circuit)?;
        let fused = fuse(&lowered);
        let before = stats(&lowered);
        let after = stats(&fused).gates;
        let reduction = 100.0 * (1.0 - after as f64 / before.gates as f64);
        Ok(format!(
            "{},{},{},{},{},{},{},{:.4}",
            args.l,
            n_c,
            solution.state_error,
            solution.vector_error,
            before.depth,
            before.gates,
            after,
            reduction
        ))
    })?;

    let mut csv =
        String::from("l,n_c,state_error,vector_error,depth,gates,gates_after_fusion,reduction_pct\n");
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    eprintln!("heat l={} r={}: {} rows", args.l, args.r, csv.lines().count() - 1);
    write_artifact(args.out.as_deref(), &csv)
}

// --- powerflow ---------------------------------------------------------------

pub struct PowerflowArgs {
    pub case: Option<PathBuf>,
    pub quantum: bool,
    pub nc: Option<usize>,
    pub max_iter: usize,
    pub out: Option<PathBuf>,
    pub voltages: Option<PathBuf>,
}

#[derive(Serialize)]
struct VoltagesDoc {
    converged: bool,
    iterations: usize,
    buses: Vec<BusVoltage>,
}

#[derive(Serialize)]
struct BusVoltage {
    id: usize,
    kind: &'static str,
    v_mag: f64,
    theta: f64,
}

fn voltages_doc(case: &PowerFlowCase, converged: bool, iterations: usize) -> VoltagesDoc {
    VoltagesDoc {
        converged,
        iterations,
        buses: case
            .buses
            .iter()
            .map(|bus| BusVoltage {
                id: bus.id,
                kind: match bus.kind {
                    BusKind::Slack => "slack",
                    BusKind::Pv => "pv",
                    BusKind::Pq => "pq",
                },
                v_mag: bus.v_mag,
                theta: bus.theta,
            })
            .collect(),
    }
}

pub fn powerflow(args: PowerflowArgs) -> Result<()> {
    let mut case = match &args.case {
        Some(path) => PowerFlowCase::from_json(&fs::read_to_string(path)?)?,
        None => PowerFlowCase::case4(),
    };
    let solver = if args.quantum {
        LinearSolver::Hhl(HHLConfig {
            n_c: args.nc,
            ..Default::default()
        })
    } else {
        LinearSolver::Classical
    };

    let (trace, failure) = match nr_solve(&mut case, &solver, args.max_iter) {
        Ok(trace) => (trace, None),
        Err(NRFailure { source, trace }) => (trace, Some(source)),
    };

    write_artifact(args.out.as_deref(), &trace.to_csv())?;
    let doc = voltages_doc(&case, trace.converged, trace.iterations_used);
    let json = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Invalid(format!("cannot serialize voltages: {e}")))?;
    write_artifact(args.voltages.as_deref(), &(json + "\n"))?;

    let final_mismatch = trace
        .records
        .last()
        .map(|r| r.mismatch_inf_norm)
        .unwrap_or(f64::NAN);
    eprintln!(
        "power flow: converged={} iterations={} final mismatch {final_mismatch:.3e}",
        trace.converged, trace.iterations_used
    );

    if let Some(source) = failure {
        return Err(source);
    }
    if !trace.converged {
        return Err(Error::Divergence {
            iterations: trace.iterations_used,
            mismatch: final_mismatch,
        });
    }
    Ok(())
}

// --- estimate -------------------------------------------------------------------

pub struct EstimateArgs {
    pub circuit: Option<PathBuf>,
    pub from_heat: bool,
    pub from_powerflow: bool,
    pub l: usize,
    pub r: f64,
    pub nc: Option<usize>,
    pub nc_range: Option<String>,
    pub qubits: String,
    pub budget: f64,
    pub decompose: bool,
    pub out: Option<PathBuf>,
    pub sweep_out: Option<PathBuf>,
    pub jobs: usize,
}

pub fn estimate(args: EstimateArgs) -> Result<()> {
    let qubits = QubitParams::preset(&args.qubits)?;
    let qec = QECSpec::default();
    let factory = TFactorySpec::default_for(&qubits, &qec);
    let budget = ErrorBudget::new(args.budget)?;

    let system: Option<LinearSystem> = if args.from_heat {
        Some(heat_matrix(&HeatSpec::new(args.l, args.r))?)
    } else if args.from_powerflow {
        Some(PowerFlowCase::case4().jacobian()?)
    } else {
        None
    };

    let report = if let Some(range) = &args.nc_range {
        let Some(system) = &system else {
            return Err(Error::Invalid(
                "--nc-range sweeps rebuild the circuit; use --from-heat or --from-powerflow"
                    .into(),
            ));
        };
        let widths = parse_nc_range(range)?;
        let rows = parallel_map(args.jobs, widths, |n_c| {
            let sweep = sweep_nc(system, &[n_c], &qubits, &qec, &factory, &budget)?;
            Ok(sweep.rows.into_iter().next().expect("one row per width"))
        })?;
        let sweep = Sweep::from_rows(rows);
        write_artifact(args.sweep_out.as_deref(), &sweep.to_csv())?;
        if let Some(fit) = &sweep.fit {
            eprintln!(
                "sweep: {} widths, log10 slopes runtime {:.3} cycles {:.3} t-states {:.3}",
                sweep.rows.len(),
                fit.runtime.slope,
                fit.logical_cycles.slope,
                fit.t_states.slope
            );
        }
        sweep
            .rows
            .last()
            .map(|row| row.report.clone())
            .expect("range is non-empty")
    } else {
        let circuit = match (&args.circuit, &system) {
            (Some(path), _) => {
                let raw = Circuit::from_json(&fs::read_to_string(path)?)?;
                if args.decompose {
                    decompose(&raw)?
                } else {
                    raw
                }
            }
            (None, Some(system)) => {
                let built = hhl::build(
                    system,
                    &HHLConfig {
                        n_c: args.nc,
                        ..Default::default()
                    },
                )?;
                decompose(&built.circuit)?
            }
            (None, None) => unreachable!("clap enforces exactly one source"),
        };
        estimate_circuit(&circuit, &qubits, &qec, &factory, &budget)?
    };

    eprintln!(
        "estimate: {} logical qubits -> {} after layout, {} T states, runtime {:.3e} s",
        report.logical_qubits_pre_layout,
        report.logical_qubits_after_layout,
        report.t_states,
        report.runtime_s
    );
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Invalid(format!("cannot serialize report: {e}")))?;
    write_artifact(args.out.as_deref(), &(json + "\n"))
}
