//! AC power flow: admittance model, polar Newton-Raphson, pluggable solver.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hhl::{self, HHLConfig};
use crate::linalg::{classical_solve, condition_number, ComplexMatrix, LinearSystem};

/// Mismatch norms past this are treated as divergence of the N-R loop.
const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

impl BusKind {
    /// Generator buses hold their voltage magnitude fixed.
    pub fn is_generator(self) -> bool {
        matches!(self, BusKind::Slack | BusKind::Pv)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub kind: BusKind,
    /// Specified net real power injection, per unit. Ignored on the slack bus.
    #[serde(default)]
    pub p_spec: f64,
    /// Specified net reactive injection, per unit. Only binding on PQ buses.
    #[serde(default)]
    pub q_spec: f64,
    /// Voltage magnitude, per unit: a setpoint on slack/PV buses, an initial
    /// guess on PQ buses.
    #[serde(default = "default_vmag")]
    pub v_mag: f64,
    /// Voltage angle in radians; fixed at the slack bus.
    #[serde(default)]
    pub theta: f64,
}

fn default_vmag() -> f64 {
    1.0
}

/// A pi-model line: series impedance `r + jx` plus total line-charging
/// susceptance `b`, split half per end.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b: f64,
}

#[derive(Clone, Debug)]
pub struct PowerFlowCase {
    pub buses: Vec<Bus>,
    pub y_bus: ComplexMatrix,
    /// Convergence threshold on the mismatch infinity norm.
    pub tolerance: f64,
}

/// On-disk shape: buses plus either explicit `y_bus` entries (`[re, im]`
/// pairs, row major) or a `branches` list to assemble it from.
#[derive(Deserialize)]
struct CaseFile {
    buses: Vec<Bus>,
    #[serde(default)]
    branches: Option<Vec<Branch>>,
    #[serde(default)]
    y_bus: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    tolerance: Option<f64>,
}

/// Nodal admittance matrix of a branch list over `n` buses (indexed by
/// position in the bus list).
pub fn assemble_y_bus(
    n: usize,
    branches: &[Branch],
    index_of: impl Fn(usize) -> Option<usize>,
) -> Result<ComplexMatrix> {
    let mut y = vec![C64::new(0.0, 0.0); n * n];
    for br in branches {
        let f = index_of(br.from).ok_or_else(|| {
            Error::Parse(format!("branch references unknown bus id {}", br.from))
        })?;
        let t = index_of(br.to).ok_or_else(|| {
            Error::Parse(format!("branch references unknown bus id {}", br.to))
        })?;
        if f == t {
            return Err(Error::Parse(format!("branch {}-{} is a self-loop", br.from, br.to)));
        }
        let z = C64::new(br.r, br.x);
        if z.norm() == 0.0 {
            return Err(Error::Parse(format!(
                "branch {}-{} has zero impedance",
                br.from, br.to
            )));
        }
        let series = z.inv();
        let shunt = C64::new(0.0, br.b / 2.0);
        y[f * n + f] += series + shunt;
        y[t * n + t] += series + shunt;
        y[f * n + t] -= series;
        y[t * n + f] -= series;
    }
    Ok(ComplexMatrix::from_fn(n, |i, j| y[i * n + j]))
}

impl PowerFlowCase {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: CaseFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("case file: {e}")))?;
        let n = file.buses.len();
        let index_of = |id: usize| file.buses.iter().position(|b| b.id == id);
        let y_bus = match (&file.y_bus, &file.branches) {
            (Some(rows), _) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Parse(format!("y_bus must be {n}x{n}")));
                }
                ComplexMatrix::from_fn(n, |i, j| {
                    let [re, im] = rows[i][j];
                    C64::new(re, im)
                })
            }
            (None, Some(branches)) => assemble_y_bus(n, branches, index_of)?,
            (None, None) => {
                return Err(Error::Parse("case needs either y_bus or branches".into()))
            }
        };
        let case = Self {
            buses: file.buses,
            y_bus,
            tolerance: file.tolerance.unwrap_or(1e-8),
        };
        case.validate()?;
        Ok(case)
    }

    /// The bundled 4-bus, 2-generator test case.
    pub fn case4() -> Self {
        Self::from_json(include_str!("../../data/case4.json"))
            .expect("bundled case file is well formed")
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.buses.len();
        if n < 2 {
            return Err(Error::Invalid("need at least two buses".into()));
        }
        if self.y_bus.dim() != n {
            return Err(Error::Dimension(format!(
                "y_bus is {}x{0} but there are {n} buses",
                self.y_bus.dim()
            )));
        }
        let slacks = self.buses.iter().filter(|b| b.kind == BusKind::Slack).count();
        if slacks != 1 {
            return Err(Error::Invalid(format!(
                "expected exactly one slack bus, found {slacks}"
            )));
        }
        for (i, bus) in self.buses.iter().enumerate() {
            if self.buses[..i].iter().any(|other| other.id == bus.id) {
                return Err(Error::Invalid(format!("duplicate bus id {}", bus.id)));
            }
            if bus.v_mag <= 0.0 {
                return Err(Error::Invalid(format!(
                    "bus {} has non-positive voltage magnitude",
                    bus.id
                )));
            }
        }
        Ok(())
    }

    /// Bus indices whose angle is unknown: every non-slack bus, in order.
    pub fn theta_unknowns(&self) -> Vec<usize> {
        (0..self.buses.len())
            .filter(|&i| self.buses[i].kind != BusKind::Slack)
            .collect()
    }

    /// Bus indices whose magnitude is unknown: PQ buses, in order.
    pub fn vmag_unknowns(&self) -> Vec<usize> {
        (0..self.buses.len())
            .filter(|&i| self.buses[i].kind == BusKind::Pq)
            .collect()
    }

    /// `2(B-1) - (G-1)` where G counts slack plus PV buses.
    pub fn n_unknowns(&self) -> usize {
        self.theta_unknowns().len() + self.vmag_unknowns().len()
    }

    fn voltages(&self) -> Vec<C64> {
        self.buses
            .iter()
            .map(|b| C64::from_polar(b.v_mag, b.theta))
            .collect()
    }

    /// Net injections `(P, Q)` at every bus from `S_k = V_k (sum_j Y_kj V_j)^*`.
    pub fn power_injections(&self) -> (Vec<f64>, Vec<f64>) {
        let v = self.voltages();
        let iv = self.y_bus.mul_vec(&v);
        let mut p = Vec::with_capacity(v.len());
        let mut q = Vec::with_capacity(v.len());
        for (vk, ik) in v.iter().zip(&iv) {
            let s = vk * ik.conj();
            p.push(s.re);
            q.push(s.im);
        }
        (p, q)
    }

    /// Same injections written out as trigonometric sums over `G + jB`;
    /// retained as a cross-check of the complex-power identity.
    pub fn power_injections_trig(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.buses.len();
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for k in 0..n {
            let vk = self.buses[k].v_mag;
            for j in 0..n {
                let vj = self.buses[j].v_mag;
                let y = self.y_bus.get(k, j);
                let (g, b) = (y.re, y.im);
                let tkj = self.buses[k].theta - self.buses[j].theta;
                p[k] += vk * vj * (g * tkj.cos() + b * tkj.sin());
                q[k] += vk * vj * (g * tkj.sin() - b * tkj.cos());
            }
        }
        (p, q)
    }

    /// Mismatch vector over the unknown coordinates: `P_spec - P_calc` for
    /// every non-slack bus, then `Q_spec - Q_calc` for every PQ bus.
    pub fn mismatch(&self) -> Vec<f64> {
        let (p, q) = self.power_injections();
        let mut out = Vec::with_capacity(self.n_unknowns());
        for &i in &self.theta_unknowns() {
            out.push(self.buses[i].p_spec - p[i]);
        }
        for &i in &self.vmag_unknowns() {
            out.push(self.buses[i].q_spec - q[i]);
        }
        out
    }

    /// Analytic Jacobian of the mismatch vector with respect to the unknowns
    /// `[theta (non-slack); |V| (PQ)]`. Real entries, returned as a complex
    /// matrix for downstream embedding.
    pub fn mismatch_jacobian(&self) -> ComplexMatrix {
        let (p, q) = self.power_injections();
        let theta_u = self.theta_unknowns();
        let vmag_u = self.vmag_unknowns();
        let nt = theta_u.len();
        let dim = nt + vmag_u.len();
        let bus = &self.buses;
        let y = &self.y_bus;
        let mut m = ComplexMatrix::zeros(dim);

        // partials of the calculated injections in polar form
        let dp_dtheta = |k: usize, j: usize| -> f64 {
            let (vk, vj) = (bus[k].v_mag, bus[j].v_mag);
            let (g, b) = (y.get(k, j).re, y.get(k, j).im);
            if k == j {
                -q[k] - b * vk * vk
            } else {
                let tkj = bus[k].theta - bus[j].theta;
                vk * vj * (g * tkj.sin() - b * tkj.cos())
            }
        };
        let dp_dv = |k: usize, j: usize| -> f64 {
            let vk = bus[k].v_mag;
            let (g, b) = (y.get(k, j).re, y.get(k, j).im);
            if k == j {
                p[k] / vk + g * vk
            } else {
                let tkj = bus[k].theta - bus[j].theta;
                vk * (g * tkj.cos() + b * tkj.sin())
            }
        };
        let dq_dtheta = |k: usize, j: usize| -> f64 {
            let (vk, vj) = (bus[k].v_mag, bus[j].v_mag);
            let (g, b) = (y.get(k, j).re, y.get(k, j).im);
            if k == j {
                p[k] - g * vk * vk
            } else {
                let tkj = bus[k].theta - bus[j].theta;
                -vk * vj * (g * tkj.cos() + b * tkj.sin())
            }
        };
        let dq_dv = |k: usize, j: usize| -> f64 {
            let vk = bus[k].v_mag;
            let (g, b) = (y.get(k, j).re, y.get(k, j).im);
            if k == j {
                q[k] / vk - b * vk
            } else {
                let tkj = bus[k].theta - bus[j].theta;
                vk * (g * tkj.sin() - b * tkj.cos())
            }
        };

        // mismatch rows are spec minus calc, so each block enters negated
        for (row, &k) in theta_u.iter().enumerate() {
            for (col, &j) in theta_u.iter().enumerate() {
                m.set(row, col, C64::new(-dp_dtheta(k, j), 0.0));
            }
            for (col, &j) in vmag_u.iter().enumerate() {
                m.set(row, nt + col, C64::new(-dp_dv(k, j), 0.0));
            }
        }
        for (row, &k) in vmag_u.iter().enumerate() {
            for (col, &j) in theta_u.iter().enumerate() {
                m.set(nt + row, col, C64::new(-dq_dtheta(k, j), 0.0));
            }
            for (col, &j) in vmag_u.iter().enumerate() {
                m.set(nt + row, nt + col, C64::new(-dq_dv(k, j), 0.0));
            }
        }
        m
    }

    /// The Newton step system `(d mismatch / dx) dx = -mismatch`, embedded
    /// for solver consumption (padded, and dilated since the block Jacobian
    /// is not symmetric).
    pub fn jacobian(&self) -> Result<LinearSystem> {
        let a = self.mismatch_jacobian();
        let b: Vec<C64> = self.mismatch().iter().map(|&d| C64::new(-d, 0.0)).collect();
        LinearSystem::new(a, b)
    }

    /// Adds the update `[d theta; d |V|]` onto the unknown coordinates.
    pub fn apply_update(&mut self, dx: &[f64]) {
        let theta_u = self.theta_unknowns();
        let vmag_u = self.vmag_unknowns();
        debug_assert_eq!(dx.len(), theta_u.len() + vmag_u.len());
        for (i, &k) in theta_u.iter().enumerate() {
            self.buses[k].theta += dx[i];
        }
        for (i, &k) in vmag_u.iter().enumerate() {
            self.buses[k].v_mag += dx[theta_u.len() + i];
        }
    }
}

/// Linear-solver backend for the Newton step.
#[derive(Clone, Debug)]
pub enum LinearSolver {
    /// Dense LU, the reference oracle.
    Classical,
    /// Statevector-simulated HHL with the given configuration.
    Hhl(HHLConfig),
}

struct StepResult {
    update: Vec<f64>,
    state_error: f64,
    vector_error: f64,
}

impl LinearSolver {
    fn step(&self, system: &LinearSystem) -> Result<StepResult> {
        match self {
            LinearSolver::Classical => {
                let x = classical_solve(system)?;
                let update = system
                    .restrict(&x)
                    .iter()
                    .map(|z| z.re * system.b_norm)
                    .collect();
                Ok(StepResult {
                    update,
                    state_error: 0.0,
                    vector_error: 0.0,
                })
            }
            LinearSolver::Hhl(config) => {
                let sol = hhl::solve(system, config)?;
                // the dilated system is real, so the physical update is the
                // real part of the recovered vector
                let update = sol.recovered_vector.iter().map(|z| z.re).collect();
                Ok(StepResult {
                    update,
                    state_error: sol.state_error,
                    vector_error: sol.vector_error,
                })
            }
        }
    }
}

/// One row per N-R iteration. `state_error` and `vector_error` describe the
/// linear solve performed at that iteration (zero for the classical oracle
/// and for the final, solve-free convergence check);
/// `linear_system_condition` is the condition number of the unpadded Newton
/// matrix.
#[derive(Clone, Debug, Serialize)]
pub struct NRRecord {
    pub iteration: usize,
    pub mismatch_inf_norm: f64,
    pub state_error: f64,
    pub vector_error: f64,
    pub linear_system_condition: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct NRTrace {
    pub records: Vec<NRRecord>,
    pub converged: bool,
    /// Number of Newton updates applied.
    pub iterations_used: usize,
}

impl NRTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,mismatch_inf_norm,state_error,vector_error\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.iteration, r.mismatch_inf_norm, r.state_error, r.vector_error
            ));
        }
        out
    }
}

/// Newton-Raphson failure with the partial trace preserved.
#[derive(Debug)]
pub struct NRFailure {
    pub source: Error,
    pub trace: NRTrace,
}

impl fmt::Display for NRFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.source.fmt(f)
    }
}

impl std::error::Error for NRFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl From<NRFailure> for Error {
    fn from(f: NRFailure) -> Self {
        f.source
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Full-step Newton-Raphson on the case's own state. On success the bus
/// angles and magnitudes hold the final iterate; the trace records one row
/// per iteration, with iteration 0 evaluated at the initial guess.
pub fn nr_solve(
    case: &mut PowerFlowCase,
    solver: &LinearSolver,
    max_iter: usize,
) -> std::result::Result<NRTrace, NRFailure> {
    let mut trace = NRTrace::default();
    let fail = |source: Error, trace: &mut NRTrace| NRFailure {
        source,
        trace: std::mem::take(trace),
    };
    if let Err(e) = case.validate() {
        return Err(fail(e, &mut trace));
    }
    for iteration in 0..=max_iter {
        let norm = inf_norm(&case.mismatch());
        trace.iterations_used = iteration;
        if !norm.is_finite() || norm > DIVERGENCE_LIMIT {
            trace.records.push(NRRecord {
                iteration,
                mismatch_inf_norm: norm,
                state_error: 0.0,
                vector_error: 0.0,
                linear_system_condition: 0.0,
            });
            let source = Error::Divergence {
                iterations: iteration,
                mismatch: norm,
            };
            return Err(fail(source, &mut trace));
        }
        let done = norm < case.tolerance;
        if done || iteration == max_iter {
            trace.records.push(NRRecord {
                iteration,
                mismatch_inf_norm: norm,
                state_error: 0.0,
                vector_error: 0.0,
                linear_system_condition: 0.0,
            });
            trace.converged = done;
            return Ok(trace);
        }
        let system = match case.jacobian() {
            Ok(s) => s,
            Err(e) => return Err(fail(e, &mut trace)),
        };
        let cond = condition_number(&system.original_matrix());
        let step = match solver.step(&system) {
            Ok(s) => s,
            Err(e) => return Err(fail(e, &mut trace)),
        };
        trace.records.push(NRRecord {
            iteration,
            mismatch_inf_norm: norm,
            state_error: step.state_error,
            vector_error: step.vector_error,
            linear_system_condition: cond,
        });
        case.apply_update(&step.update);
    }
    unreachable!("loop covers 0..=max_iter");
}
