//! Fault-tolerant surface-code resource estimation.
//!
//! Every quantity is derived from the gate-level counts of a decomposed
//! circuit: T-state accounting, nearest-neighbor layout overhead, logical
//! cycle counts, runtime, T-factory sizing, and the minimum error rates the
//! hardware must reach to stay inside an error budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hhl::{self, HHLConfig};
use crate::linalg::LinearSystem;
use crate::sim::decompose::decompose;
use crate::sim::{stats, Circuit, GateKind};

/// Hardware-level operation times (seconds) and error probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub t_meas: f64,
    pub t_1q: f64,
    pub t_2q: f64,
    pub t_tgate: f64,
    pub e_meas: f64,
    pub e_1q: f64,
    pub e_2q: f64,
    pub e_tgate: f64,
}

impl QubitParams {
    /// Superconducting-class preset: 100 ns measurement, 50 ns gates,
    /// uniform 1e-4 error rates.
    pub fn ns_1e4() -> Self {
        Self {
            t_meas: 100e-9,
            t_1q: 50e-9,
            t_2q: 50e-9,
            t_tgate: 50e-9,
            e_meas: 1e-4,
            e_1q: 1e-4,
            e_2q: 1e-4,
            e_tgate: 1e-4,
        }
    }

    /// Trapped-ion-class preset: 100 us everywhere, 1e-4 error rates except
    /// a 1e-6 T gate.
    pub fn us_1e4() -> Self {
        Self {
            t_meas: 100e-6,
            t_1q: 100e-6,
            t_2q: 100e-6,
            t_tgate: 100e-6,
            e_meas: 1e-4,
            e_1q: 1e-4,
            e_2q: 1e-4,
            e_tgate: 1e-6,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "ns-1e-4" => Ok(Self::ns_1e4()),
            "us-1e-4" => Ok(Self::us_1e4()),
            other => Err(Error::Invalid(format!(
                "unknown qubit preset {other:?}, expected \"ns-1e-4\" or \"us-1e-4\""
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let durations = [self.t_meas, self.t_1q, self.t_2q, self.t_tgate];
        let rates = [self.e_meas, self.e_1q, self.e_2q, self.e_tgate];
        if durations.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::Invalid("qubit durations must be positive".into()));
        }
        if rates.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(Error::Invalid("qubit error rates must be in (0, 1)".into()));
        }
        Ok(())
    }
}

impl Default for QubitParams {
    fn default() -> Self {
        Self::ns_1e4()
    }
}

/// Logical-cycle timing model: one cycle lasts
/// `(coeff_2q * t_2q + coeff_meas * t_meas) * distance`, and each counted
/// arbitrary rotation adds `rotation_cycles` cycles of synthesis latency on
/// top of the circuit depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CycleModel {
    pub coeff_2q: f64,
    pub coeff_meas: f64,
    pub rotation_cycles: u64,
}

impl Default for CycleModel {
    fn default() -> Self {
        Self {
            coeff_2q: 4.0,
            coeff_meas: 2.0,
            rotation_cycles: 1,
        }
    }
}

/// Surface-code configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QECSpec {
    pub distance: u32,
    pub phys_per_logical: u64,
    pub logical_error_rate: f64,
    pub threshold: f64,
    pub cycle: CycleModel,
}

impl Default for QECSpec {
    fn default() -> Self {
        Self::surface_code(7)
    }
}

impl QECSpec {
    /// Rotated surface code at the given distance: `2 d^2` physical qubits
    /// per logical qubit (98 at the default distance 7).
    pub fn surface_code(distance: u32) -> Self {
        Self {
            distance,
            phys_per_logical: 2 * (distance as u64) * (distance as u64),
            logical_error_rate: 3e-10,
            threshold: 0.01,
            cycle: CycleModel::default(),
        }
    }

    /// Wall-clock duration of one logical cycle in seconds.
    pub fn cycle_time(&self, qubits: &QubitParams) -> f64 {
        (self.cycle.coeff_2q * qubits.t_2q + self.cycle.coeff_meas * qubits.t_meas)
            * self.distance as f64
    }
}

/// One magic-state distillation unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TFactorySpec {
    /// Wall-clock time per distillation batch, seconds.
    pub duration: f64,
    /// Physical qubits occupied by one factory.
    pub phys_qubits: u64,
    /// T states produced per batch.
    pub states_per_batch: u64,
    /// Error rate of the distilled states.
    pub output_error: f64,
}

impl TFactorySpec {
    /// 15-to-1 distillation placeholder sized from the hardware parameters:
    /// duration of 46 single-qubit-gate times per code distance, cubic
    /// error suppression with prefactor 35.
    pub fn default_for(qubits: &QubitParams, qec: &QECSpec) -> Self {
        Self {
            duration: 46.0 * qubits.t_1q * qec.distance as f64,
            phys_qubits: 3000,
            states_per_batch: 1,
            output_error: 35.0 * qubits.e_tgate.powi(3),
        }
    }
}

/// Total failure allowance, split equally between logical errors, T-state
/// distillation, and rotation synthesis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub total: f64,
}

impl ErrorBudget {
    pub fn new(total: f64) -> Result<Self> {
        if !(total > 0.0 && total < 1.0) {
            return Err(Error::Invalid(format!(
                "error budget must be in (0, 1), got {total}"
            )));
        }
        Ok(Self { total })
    }

    pub fn logical_part(&self) -> f64 {
        self.total / 3.0
    }

    pub fn distill_part(&self) -> f64 {
        self.total / 3.0
    }

    pub fn synthesis_part(&self) -> f64 {
        self.total / 3.0
    }
}

/// Gate-level tally of a decomposed circuit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LogicalCounts {
    /// Algorithm qubits before layout.
    pub n_alg: usize,
    /// ASAP-scheduled circuit depth.
    pub depth: usize,
    pub t_gates: u64,
    pub ccz_ccix: u64,
    /// Single-qubit rotations at non-Clifford angles.
    pub rotations: u64,
    pub clifford: u64,
}

/// Distance from the nearest multiple of pi/4; angles within 1e-12 of the
/// grid are Clifford-group rotations and need no synthesis.
fn clifford_angle(angle: f64) -> bool {
    let quarter = std::f64::consts::FRAC_PI_4;
    let rem = angle.rem_euclid(quarter);
    rem.min(quarter - rem) <= 1e-12
}

/// Classifies every gate of a circuit for T accounting. Dense unitary
/// blocks are rejected; run the decomposition first.
pub fn logical_counts(circuit: &Circuit) -> Result<LogicalCounts> {
    let mut out = LogicalCounts {
        n_alg: circuit.n_qubits,
        depth: stats(circuit).depth,
        ..LogicalCounts::default()
    };
    for gate in &circuit.gates {
        match &gate.kind {
            GateKind::Unitary(_) => {
                return Err(Error::Undecomposable(
                    "circuit contains dense unitary blocks; decompose first".into(),
                ))
            }
            GateKind::T | GateKind::Tdg => out.t_gates += 1,
            GateKind::Z | GateKind::X if gate.controls.len() == 2 => out.ccz_ccix += 1,
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) | GateKind::Phase(a) => {
                if clifford_angle(*a) {
                    out.clifford += 1;
                } else {
                    out.rotations += 1;
                }
            }
            _ => out.clifford += 1,
        }
    }
    Ok(out)
}

/// One T state per T gate, four per CCZ/CCiX, 18 per arbitrary rotation.
pub fn t_state_count(counts: &LogicalCounts) -> u64 {
    counts.t_gates + 4 * counts.ccz_ccix + 18 * counts.rotations
}

/// Logical qubits after imposing 2-D nearest-neighbor connectivity:
/// `n_after = 2 n_alg + ceil(sqrt(8 n_alg)) + 1`.
pub fn layout(n_alg: usize) -> u64 {
    let n = n_alg as u64;
    2 * n + isqrt_ceil(8 * n) + 1
}

fn isqrt_ceil(x: u64) -> u64 {
    if x == 0 {
        return 0;
    }
    let mut s = (x as f64).sqrt() as u64;
    while s * s < x {
        s += 1;
    }
    while s > 1 && (s - 1) * (s - 1) >= x {
        s -= 1;
    }
    s
}

/// Full estimate for one circuit. Field names follow the factors-of-interest
/// breakdown: qubit counts pre/after layout, physical totals, T economy,
/// cycle counts, runtime, and the minimum tolerable error rates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourceReport {
    pub logical_qubits_pre_layout: usize,
    pub logical_qubits_after_layout: u64,
    pub physical_qubits_algorithm: u64,
    pub physical_qubits_t_factories: u64,
    pub physical_qubits_total: u64,
    pub t_states: u64,
    pub t_factories: u64,
    pub logical_cycles: u64,
    pub logical_cycle_time_s: f64,
    pub runtime_s: f64,
    /// Largest per-qubit-per-cycle logical error rate that still fits the
    /// logical third of the budget.
    pub min_logical_error_rate: f64,
    /// Largest distilled-state error rate that fits the distillation third;
    /// absent when the circuit consumes no T states.
    pub min_tstate_error_rate: Option<f64>,
    /// Whether the configured code and factory meet those requirements.
    pub logical_rate_feasible: bool,
    pub tstate_rate_feasible: Option<bool>,
    pub counts: LogicalCounts,
}

pub fn estimate(
    circuit: &Circuit,
    qubits: &QubitParams,
    qec: &QECSpec,
    factory: &TFactorySpec,
    budget: &ErrorBudget,
) -> Result<ResourceReport> {
    estimate_counts(&logical_counts(circuit)?, qubits, qec, factory, budget)
}

/// The formula layer of [`estimate`], reusable for synthetic inputs.
pub fn estimate_counts(
    counts: &LogicalCounts,
    qubits: &QubitParams,
    qec: &QECSpec,
    factory: &TFactorySpec,
    budget: &ErrorBudget,
) -> Result<ResourceReport> {
    qubits.validate()?;
    if counts.n_alg == 0 {
        return Err(Error::Invalid("circuit has no qubits".into()));
    }
    let logical_cycles =
        counts.depth as u64 + counts.rotations * qec.cycle.rotation_cycles;
    let cycle_time = qec.cycle_time(qubits);
    let runtime = logical_cycles as f64 * cycle_time;
    if !(runtime.is_finite() && runtime > 0.0) {
        return Err(Error::Invalid(
            "estimated runtime is zero; the circuit has no logical cycles".into(),
        ));
    }
    let n_after = layout(counts.n_alg);
    let phys_alg = n_after * qec.phys_per_logical;
    let t_states = t_state_count(counts);
    let t_factories = if t_states == 0 {
        0
    } else {
        let states = t_states as f64;
        (states * factory.duration / (factory.states_per_batch as f64 * runtime)).ceil() as u64
    };
    let phys_factories = t_factories * factory.phys_qubits;
    let min_logical = budget.logical_part() / (n_after as f64 * logical_cycles as f64);
    let min_tstate = (t_states > 0).then(|| budget.distill_part() / t_states as f64);
    Ok(ResourceReport {
        logical_qubits_pre_layout: counts.n_alg,
        logical_qubits_after_layout: n_after,
        physical_qubits_algorithm: phys_alg,
        physical_qubits_t_factories: phys_factories,
        physical_qubits_total: phys_alg + phys_factories,
        t_states,
        t_factories,
        logical_cycles,
        logical_cycle_time_s: cycle_time,
        runtime_s: runtime,
        min_logical_error_rate: min_logical,
        min_tstate_error_rate: min_tstate,
        logical_rate_feasible: qec.logical_error_rate <= min_logical,
        tstate_rate_feasible: min_tstate.map(|m| factory.output_error <= m),
        counts: *counts,
    })
}

/// Least-squares line through `(x, y)` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Log-linear growth fits of a clock-register sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepFit {
    pub runtime: LineFit,
    pub logical_cycles: LineFit,
    pub t_states: LineFit,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub n_c: usize,
    pub report: ResourceReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// `log10(quantity)` versus `n_c`; absent with fewer than two rows.
    pub fit: Option<SweepFit>,
}

impl Sweep {
    pub fn from_rows(rows: Vec<SweepRow>) -> Self {
        let xs: Vec<f64> = rows.iter().map(|r| r.n_c as f64).collect();
        let log10_of = |f: fn(&ResourceReport) -> f64| -> Vec<f64> {
            rows.iter().map(|r| f(&r.report).log10()).collect()
        };
        let fit = (|| {
            Some(SweepFit {
                runtime: fit_line(&xs, &log10_of(|r| r.runtime_s))?,
                logical_cycles: fit_line(&xs, &log10_of(|r| r.logical_cycles as f64))?,
                t_states: fit_line(&xs, &log10_of(|r| r.t_states as f64))?,
            })
        })();
        Self { rows, fit }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n_c,runtime_s,logical_cycles,t_states,t_factories,phys_alg,\
             phys_factories,phys_total,min_logical_rate,min_tstate_rate\n",
        );
        for row in &self.rows {
            let r = &row.report;
            let min_t = r
                .min_tstate_error_rate
                .map_or_else(|| "na".to_string(), |v| v.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                row.n_c,
                r.runtime_s,
                r.logical_cycles,
                r.t_states,
                r.t_factories,
                r.physical_qubits_algorithm,
                r.physical_qubits_t_factories,
                r.physical_qubits_total,
                r.min_logical_error_rate,
                min_t
            ));
        }
        out
    }
}

/// Builds, decomposes, and estimates the HHL circuit of `system` at every
/// clock width in `n_c_values`.
pub fn sweep_nc(
    system: &LinearSystem,
    n_c_values: &[usize],
    qubits: &QubitParams,
    qec: &QECSpec,
    factory: &TFactorySpec,
    budget: &ErrorBudget,
) -> Result<Sweep> {
    let mut rows = Vec::with_capacity(n_c_values.len());
    for &n_c in n_c_values {
        let config = HHLConfig {
            n_c: Some(n_c),
            ..HHLConfig::default()
        };
        let built = hhl::build(system, &config)?;
        let lowered = decompose(&built.circuit)?;
        let report = estimate(&lowered, qubits, qec, factory, budget)?;
        rows.push(SweepRow { n_c, report });
    }
    Ok(Sweep::from_rows(rows))
}
