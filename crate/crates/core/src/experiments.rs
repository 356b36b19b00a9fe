// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Named experiments producing tables: fringes, traces, geometric phase
//! versus mixing angle, fidelity scans, decay scans and the small-`V33`
//! regime.
//!
//! `Base::integrator.steps` is the step count for a full `2 tau` sequence;
//! protocols of other lengths scale it by their duration in units of `tau`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::darkstates::DarkKind;
use crate::dynamics::{propagate_lindblad, propagate_schrodinger, DensityMatrix, DynamicsError, Integrator};
use crate::gates::{
    cz_fidelity, logical_basis, logical_index, logical_superposition, run_gate, GateError, GateReport,
    GateSetup, Scheme, LOGICAL_LABELS,
};
use crate::geometry::{
    closed_form_phase, geometric_phase_quadrature, sin4_estimate, unwrap_phases, ClosedForm,
    GeometryError, ParamPath, AMPLITUDE_FLOOR,
};
use crate::hamiltonian::{collapse_operators, product_index, BasisMap, PairDrive, ParamError, SystemParams};
use crate::linalg::{wrap_angle, CVector};
use crate::pulses::{tau_from_cycles, AmplitudeShape, PhaseLaw, PulseError, PulseSchedule, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("table: {0}")]
    Table(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rectangular table of finite reals with a parameter echo.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[&str], metadata: Vec<(String, String)>) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn with_columns(name: &str, columns: Vec<String>, metadata: Vec<(String, String)>) -> Self {
        Self { name: name.to_string(), columns, rows: Vec::new(), metadata }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(ExperimentError::Table(format!(
                "row has {} entries, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if let Some(x) = row.iter().find(|x| !x.is_finite()) {
            return Err(ExperimentError::Table(format!("non-finite entry {x}")));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn add_meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// First 16 hex digits of a SHA-256 over name, parameters and data.
    pub fn stamp(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.name.as_bytes());
        for (k, v) in &self.metadata {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.update(self.columns.join(",").as_bytes());
        for row in &self.rows {
            for x in row {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# experiment = {}", self.name);
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "# run = {}", self.stamp());
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let meta: Map<String, Value> =
            self.metadata.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        json!({
            "experiment": self.name,
            "run": self.stamp(),
            "parameters": meta,
            "columns": self.columns,
            "rows": self.rows,
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json()).expect("tables serialize");
        std::fs::write(path, text + "\n").map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))
    }
}

/// A scan point that failed; its row is absent from the table.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub index: usize,
    pub point: String,
    pub error: ExperimentError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutcome {
    pub table: ResultTable,
    pub failures: Vec<PointFailure>,
}

impl ScanOutcome {
    pub fn into_result(self) -> Result<ResultTable> {
        match self.failures.into_iter().next() {
            None => Ok(self.table),
            Some(f) => Err(f.error),
        }
    }
}

/// Drive, interactions and integrator shared by all experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Base {
    pub omega: f64,
    pub tau: f64,
    pub params: SystemParams,
    pub integrator: Integrator,
}

impl Default for Base {
    /// `Omega = 1`, `Omega tau / 2 pi = 6`, `V23 = 1.1`, `V33 = 0.9`, `V22 = 0`, no decay.
    fn default() -> Self {
        Self {
            omega: 1.0,
            tau: tau_from_cycles(1.0, 6.0),
            params: SystemParams::default(),
            integrator: Integrator::default(),
        }
    }
}

impl Base {
    pub fn setup(&self) -> GateSetup {
        GateSetup::new(self.omega, self.tau, self.integrator)
    }

    pub fn with_params(&self, params: SystemParams) -> Self {
        Self { params, ..*self }
    }

    /// Steps for a protocol lasting `halves * tau`.
    fn steps_for(&self, halves: usize) -> usize {
        let per_tau = (self.integrator.steps / 2).max(2);
        per_tau * halves
    }

    fn integrator_for(&self, halves: usize) -> Integrator {
        Integrator { steps: self.steps_for(halves), ..self.integrator }
    }

    pub fn echo(&self) -> Vec<(String, String)> {
        let p = &self.params;
        vec![
            ("omega".into(), fmt_f64(self.omega)),
            ("tau".into(), fmt_f64(self.tau)),
            ("v22".into(), fmt_f64(p.v22)),
            ("v23".into(), fmt_f64(p.v23)),
            ("v33".into(), fmt_f64(p.v33)),
            ("gamma2".into(), fmt_f64(p.gamma2)),
            ("gamma3".into(), fmt_f64(p.gamma3)),
            ("steps".into(), self.integrator.steps.to_string()),
            ("stride".into(), self.integrator.stride.to_string()),
        ]
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(ExperimentError::InvalidGrid(format!("{name} is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(ExperimentError::InvalidGrid(format!("{name} has non-finite entries")));
    }
    let up = grid.windows(2).all(|w| w[1] > w[0]);
    let down = grid.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(ExperimentError::InvalidGrid(format!("{name} is not strictly monotone")));
    }
    Ok(())
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// `a, a + step, ...` up to `b`, computed by index to avoid drift.
pub fn arange_inclusive(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| a + step * k as f64).collect()
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------- fringes

/// `P(EPR_s)` and `P(EPR_as)` after one half pulse from `|11>`.
pub fn fringe_point(base: &Base, phi_p: f64) -> Result<(f64, f64)> {
    let schedule = PulseSchedule::half_pulse(base.omega, base.tau, phi_p)?;
    let drive = PairDrive::new(schedule, base.params);
    let opts = Integrator { stride: usize::MAX, ..base.integrator_for(1) };
    let basis = BasisMap::new();
    let traj = propagate_schrodinger(&drive, basis.phi(1), base.tau, &opts)?;
    let psi = traj.final_state();
    let p = |v: &CVector| v.inner(psi).map(|z| z.norm_sqr()).unwrap_or(f64::NAN);
    Ok((p(&basis.epr_symmetric()), p(&basis.epr_antisymmetric())))
}

/// Least-squares `y = a cos²x + c`; returns `(a, c)`.
pub fn fit_cos2(x: &[f64], y: &[f64]) -> (f64, f64) {
    let u: Vec<f64> = x.iter().map(|v| v.cos().powi(2)).collect();
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = u.iter().zip(y).map(|(a, b)| (a - mu) * (b - my)).sum();
    let sxx: f64 = u.iter().map(|a| (a - mu).powi(2)).sum();
    let a = sxy / sxx;
    (a, my - a * mu)
}

pub fn run_fringes(base: &Base, grid: &[f64]) -> Result<ScanOutcome> {
    check_grid("phi_p grid", grid)?;
    if grid.iter().any(|&x| !(0.0..=2.0 * PI + 1e-12).contains(&x)) {
        return Err(ExperimentError::InvalidGrid("phi_p must lie in [0, 2 pi]".into()));
    }
    let mut meta = base.echo();
    meta.push(("phi_p_points".into(), grid.len().to_string()));
    let mut table = ResultTable::new("fringes", &["phi_p", "p_epr_s", "p_epr_as"], meta);
    let results: Vec<_> = grid.par_iter().map(|&x| fringe_point(base, x)).collect();
    let mut failures = Vec::new();
    for (i, (r, &x)) in results.into_iter().zip(grid).enumerate() {
        match r {
            Ok((s, a)) => table.push_row(vec![x, s, a])?,
            Err(error) => failures.push(PointFailure { index: i, point: format!("phi_p = {x}"), error }),
        }
    }
    if !table.rows.is_empty() {
        let (a, c) = fit_cos2(&table.column("phi_p").unwrap(), &table.column("p_epr_as").unwrap());
        table.add_meta("fit_amplitude", fmt_f64(a));
        table.add_meta("fit_offset", fmt_f64(c));
    }
    Ok(ScanOutcome { table, failures })
}

// ---------------------------------------------------------------- traces

/// Phases of `|phi1>` and `|phi4>` during a half pulse from `|11>` for
/// each `phi_p` in `phis`.
pub fn run_phase_traces(base: &Base, phis: &[f64]) -> Result<ResultTable> {
    check_grid("phi_p list", phis)?;
    let basis = BasisMap::new();
    let opts = base.integrator_for(1);
    let mut columns = vec!["t".to_string()];
    let mut series: Vec<Vec<f64>> = Vec::new();
    let mut times = Vec::new();
    for (j, &phi) in phis.iter().enumerate() {
        let schedule = PulseSchedule::half_pulse(base.omega, base.tau, phi)?;
        let drive = PairDrive::new(schedule, base.params);
        let traj = propagate_schrodinger(&drive, basis.phi(1), base.tau, &opts)?;
        times = traj.times.clone();
        for (label, k) in [("phi1", 1), ("phi4", 4)] {
            let amps: Vec<_> = traj.states.iter().map(|s| basis.phi(k).inner(s).unwrap()).collect();
            let ph = unwrap_phases(&amps, AMPLITUDE_FLOOR);
            columns.push(format!("phase_{label}_over_pi_{j}"));
            series.push(ph.phases.iter().map(|p| p / PI).collect());
            columns.push(format!("population_{label}_{j}"));
            series.push(amps.iter().map(|z| z.norm_sqr()).collect());
        }
    }
    let mut meta = base.echo();
    meta.push(("phi_p_values".into(), fmt_list(phis)));
    let mut table = ResultTable::with_columns("phase_traces", columns, meta);
    for (i, &t) in times.iter().enumerate() {
        let mut row = vec![t];
        row.extend(series.iter().map(|s| s[i]));
        table.push_row(row)?;
    }
    Ok(table)
}

/// Drive envelopes and, for inputs `|01>` and `|11>`, the populations and
/// phases shown during a full gate sequence.
pub fn run_scheme_traces(base: &Base, scheme: Scheme) -> Result<ResultTable> {
    let schedule = scheme.schedule(base.omega, base.tau)?;
    let drive = PairDrive::new(schedule.clone(), base.params);
    let total = schedule.total_time;
    let basis = BasisMap::new();
    let t01 = propagate_schrodinger(&drive, &logical_basis(1), total, &base.integrator)?;
    let t11 = propagate_schrodinger(&drive, &logical_basis(3), total, &base.integrator)?;

    let amp01: Vec<_> = t01.states.iter().map(|s| s[logical_index(1)]).collect();
    let amp11: Vec<_> = t11.states.iter().map(|s| s[logical_index(3)]).collect();
    let ph01 = unwrap_phases(&amp01, AMPLITUDE_FLOOR);
    let ph11 = unwrap_phases(&amp11, AMPLITUDE_FLOOR);

    let columns = [
        "t", "abs_omega_p", "abs_omega_mu", "phi_p_over_pi", "phi_mu_over_pi",
        "pop_01", "pop_03", "pop_02", "phase_01_over_pi",
        "pop_phi1", "pop_phi2", "pop_phi3", "pop_phi4", "pop_phi5", "pop_phi6", "phase_11_over_pi",
    ];
    let mut meta = base.echo();
    meta.push(("scheme".into(), scheme.label().into()));
    let name = match scheme {
        Scheme::Berry => "scheme1_traces",
        Scheme::NonBerry => "scheme2_traces",
    };
    let mut table = ResultTable::new(name, &columns, meta);
    for (i, &t) in t01.times.iter().enumerate() {
        let (ap, am) = schedule.amplitudes(t)?;
        let (pp, pm) = schedule.phase_law.phases(t, Side::Right);
        let a = &t01.states[i];
        let b = &t11.states[i];
        let mut row = vec![t, ap, am, pp / PI, pm / PI];
        row.extend([product_index(0, 1), product_index(0, 3), product_index(0, 2)].map(|k| a[k].norm_sqr()));
        row.push(ph01.phases[i] / PI);
        for j in 1..=6 {
            row.push(basis.phi(j).inner(b).unwrap().norm_sqr());
        }
        row.push(ph11.phases[i] / PI);
        table.push_row(row)?;
    }
    Ok(table)
}

pub fn run_scheme1_traces(base: &Base) -> Result<ResultTable> {
    run_scheme_traces(base, Scheme::Berry)
}

/// Initial state for [`run_evolve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolveInput {
    Superposition,
    Logical(usize),
}

impl EvolveInput {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "psi0" | "superposition" => Some(Self::Superposition),
            "00" => Some(Self::Logical(0)),
            "01" => Some(Self::Logical(1)),
            "10" => Some(Self::Logical(2)),
            "11" => Some(Self::Logical(3)),
            _ => None,
        }
    }

    pub fn label(self) -> String {
        match self {
            Self::Superposition => "psi0".into(),
            Self::Logical(k) => LOGICAL_LABELS[k].into(),
        }
    }

    pub fn state(self) -> CVector {
        match self {
            Self::Superposition => logical_superposition(),
            Self::Logical(k) => logical_basis(k),
        }
    }
}

/// Logical populations (and, without decay, phases over `pi`) along a gate
/// sequence.
pub fn run_evolve(base: &Base, scheme: Scheme, input: EvolveInput) -> Result<ResultTable> {
    let schedule = scheme.schedule(base.omega, base.tau)?;
    let total = schedule.total_time;
    let drive = PairDrive::new(schedule, base.params);
    let psi0 = input.state();
    let mut meta = base.echo();
    meta.push(("scheme".into(), scheme.label().into()));
    meta.push(("input".into(), input.label()));
    let mut columns: Vec<String> = vec!["t".into()];
    columns.extend(LOGICAL_LABELS.iter().map(|l| format!("population_{l}")));
    if base.params.is_dissipative() {
        columns.push("trace".into());
        let rho0 = DensityMatrix::from_pure(&psi0)?;
        let traj = propagate_lindblad(&drive, &collapse_operators(&base.params), &rho0, total, &base.integrator)?;
        let mut table = ResultTable::with_columns("evolve", columns, meta);
        for (t, rho) in traj.times.iter().zip(&traj.states) {
            let mut row = vec![*t];
            row.extend((0..4).map(|k| rho.population(logical_index(k))));
            row.push(rho.trace());
            table.push_row(row)?;
        }
        return Ok(table);
    }
    columns.extend(LOGICAL_LABELS.iter().map(|l| format!("phase_{l}_over_pi")));
    columns.push("norm".into());
    let traj = propagate_schrodinger(&drive, &psi0, total, &base.integrator)?;
    let phases: Vec<Vec<f64>> = (0..4)
        .map(|k| {
            let amps: Vec<_> = traj.states.iter().map(|s| s[logical_index(k)]).collect();
            unwrap_phases(&amps, AMPLITUDE_FLOOR).phases
        })
        .collect();
    let mut table = ResultTable::with_columns("evolve", columns, meta);
    for (i, (t, psi)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![*t];
        row.extend((0..4).map(|k| psi[logical_index(k)].norm_sqr()));
        row.extend((0..4).map(|k| phases[k][i] / PI));
        row.push(psi.norm());
        table.push_row(row)?;
    }
    Ok(table)
}

// ---------------------------------------------------------------- berry vs theta

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// `phi_p` and `phi_mu` together.
    BothPhases,
    MuOnly,
    POnly,
}

impl SweepMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "both" | "both_phases" => Some(Self::BothPhases),
            "mu" | "mu_only" => Some(Self::MuOnly),
            "p" | "p_only" => Some(Self::POnly),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::BothPhases => "both_phases",
            Self::MuOnly => "mu_only",
            Self::POnly => "p_only",
        }
    }

    pub fn closed_form(self) -> ClosedForm {
        match self {
            Self::BothPhases => ClosedForm::Phi2Prime,
            Self::MuOnly => ClosedForm::Phi2,
            Self::POnly => ClosedForm::Phi2DoublePrime,
        }
    }

    fn law(self, window: (f64, f64)) -> PhaseLaw {
        let (start, end) = (0.0, PI);
        match self {
            Self::BothPhases => PhaseLaw::SweepBoth { start, end, window },
            Self::MuOnly => PhaseLaw::SweepMuOnly { phi_p: 0.0, start, end, window },
            Self::POnly => PhaseLaw::SweepPOnly { phi_mu: 0.0, start, end, window },
        }
    }
}

/// Ramp `theta` to `theta_m` over `tau`, sweep the phase `0 -> pi` over
/// `tau`, ramp back over `tau`.
pub fn berry_schedule(base: &Base, theta_m: f64, mode: SweepMode) -> Result<PulseSchedule> {
    let tau = base.tau;
    let shape = AmplitudeShape::RampHoldReturn { theta_max: theta_m, ramp: tau, hold: tau };
    Ok(PulseSchedule::new(base.omega, tau, 3.0 * tau, mode.law((tau, 2.0 * tau)), shape)?)
}

/// `(quadrature, closed form, numerical)` phase of `|11>` for one `theta_m`.
pub fn berry_point(base: &Base, theta_m: f64, mode: SweepMode) -> Result<[f64; 3]> {
    let schedule = berry_schedule(base, theta_m, mode)?;
    let opts = Integrator { stride: usize::MAX, ..base.integrator_for(3) };
    let path = ParamPath::from_schedule(&schedule, opts.steps)?;
    let quad = geometric_phase_quadrature(&path, DarkKind::D2)?.unwrapped();
    let closed = closed_form_phase(mode.closed_form(), theta_m, PI).unwrapped();
    let drive = PairDrive::new(schedule, base.params);
    let traj = propagate_schrodinger(&drive, &logical_basis(3), 3.0 * base.tau, &opts)?;
    let raw = traj.final_state()[logical_index(3)].arg();
    Ok([quad, closed, quad + wrap_angle(raw - quad)])
}

pub fn default_theta_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|k| FRAC_PI_2 * k as f64 / points as f64).collect()
}

pub fn run_berry_vs_theta(base: &Base, grid: &[f64], mode: SweepMode) -> Result<ScanOutcome> {
    check_grid("theta_m grid", grid)?;
    if grid.iter().any(|&x| !(x > 0.0 && x <= FRAC_PI_2 + 1e-12)) {
        return Err(ExperimentError::InvalidGrid("theta_m must lie in (0, pi/2]".into()));
    }
    let mut meta = base.echo();
    meta.push(("sweep_mode".into(), mode.label().into()));
    meta.push(("protocol".into(), "ramp tau, sweep 0->pi over tau, ramp-out tau".into()));
    let mut table = ResultTable::new(
        "berry_vs_theta",
        &["theta_m", "phase_quadrature", "phase_closed_form", "phase_numerical"],
        meta,
    );
    let results: Vec<_> = grid.par_iter().map(|&th| berry_point(base, th, mode)).collect();
    let mut failures = Vec::new();
    for (i, (r, &th)) in results.into_iter().zip(grid).enumerate() {
        match r {
            Ok(v) => table.push_row(vec![th, v[0], v[1], v[2]])?,
            Err(error) => failures.push(PointFailure { index: i, point: format!("theta_m = {th}"), error }),
        }
    }
    Ok(ScanOutcome { table, failures })
}

// ---------------------------------------------------------------- fidelity scans

pub fn default_v33_grid() -> Vec<f64> {
    arange_inclusive(0.0, 4.0, 0.1)
}

/// Coherent controlled-Z fidelity versus `V33`, one column per `V23`.
pub fn run_fidelity_vs_v33(
    base: &Base,
    scheme: Scheme,
    v33_grid: &[f64],
    v23_set: &[f64],
    v22: f64,
) -> Result<ScanOutcome> {
    check_grid("v33 grid", v33_grid)?;
    check_grid("v23 set", v23_set)?;
    let mut meta = base.echo();
    meta.retain(|(k, _)| !matches!(k.as_str(), "v22" | "v23" | "v33"));
    meta.push(("scheme".into(), scheme.label().into()));
    meta.push(("scan_v22".into(), fmt_f64(v22)));
    meta.push(("scan_v23".into(), fmt_list(v23_set)));
    let mut columns = vec!["v33".to_string()];
    columns.extend(v23_set.iter().map(|v| format!("fidelity_v23_{v}")));
    let mut table = ResultTable::with_columns("fidelity_vs_v33", columns, meta);

    let cells: Vec<(usize, usize)> =
        (0..v33_grid.len()).flat_map(|i| (0..v23_set.len()).map(move |j| (i, j))).collect();
    let setup = base.setup();
    let values: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let p = SystemParams { v22, v23: v23_set[j], v33: v33_grid[i], ..base.params };
            Ok(cz_fidelity(scheme, &p, &setup)?)
        })
        .collect();
    let failures = assemble(&mut table, v33_grid, v23_set.len(), values, |i, j| {
        format!("v33 = {}, v23 = {}", v33_grid[i], v23_set[j])
    })?;
    for (j, v23) in v23_set.iter().enumerate() {
        if let Some(peak) = peak_of(&table, j + 1) {
            table.add_meta(&format!("peak_v33_v23_{v23}"), fmt_f64(peak));
        }
    }
    Ok(ScanOutcome { table, failures })
}

fn assemble(
    table: &mut ResultTable,
    grid: &[f64],
    width: usize,
    values: Vec<Result<f64>>,
    describe: impl Fn(usize, usize) -> String,
) -> Result<Vec<PointFailure>> {
    let mut failures = Vec::new();
    let mut it = values.into_iter();
    for (i, &x) in grid.iter().enumerate() {
        let mut row = vec![x];
        let mut ok = true;
        for j in 0..width {
            match it.next().expect("one value per cell") {
                Ok(v) => row.push(v),
                Err(error) => {
                    ok = false;
                    failures.push(PointFailure { index: i, point: describe(i, j), error });
                }
            }
        }
        if ok {
            table.push_row(row)?;
        }
    }
    Ok(failures)
}

fn peak_of(table: &ResultTable, col: usize) -> Option<f64> {
    table
        .rows
        .iter()
        .max_by(|a, b| a[col].total_cmp(&b[col]))
        .map(|r| r[0])
}

/// Location of the largest value in `column`.
pub fn argmax(table: &ResultTable, column: &str) -> Option<f64> {
    let col = table.columns.iter().position(|c| c == column)?;
    peak_of(table, col)
}

/// Interaction presets `(V22, V23)` for the decay scan.
pub const DECAY_PRESETS: [(f64, f64); 2] = [(0.005, 1.0), (0.0, 0.0)];

/// Controlled-Z fidelity versus `V33` under decay `gamma2 = gamma3 = gamma`.
pub fn run_decay_fidelity(
    base: &Base,
    scheme: Scheme,
    gammas: &[f64],
    v33_grid: &[f64],
    presets: &[(f64, f64)],
) -> Result<ScanOutcome> {
    check_grid("v33 grid", v33_grid)?;
    check_grid("gamma set", gammas)?;
    if presets.is_empty() {
        return Err(ExperimentError::InvalidGrid("no coupling presets".into()));
    }
    let mut meta = base.echo();
    meta.retain(|(k, _)| !matches!(k.as_str(), "v22" | "v23" | "v33" | "gamma2" | "gamma3"));
    meta.push(("scheme".into(), scheme.label().into()));
    meta.push(("gammas".into(), fmt_list(gammas)));
    let preset_text: Vec<String> = presets.iter().map(|(a, b)| format!("({a}, {b})")).collect();
    meta.push(("presets_v22_v23".into(), preset_text.join(" ")));
    let combos: Vec<(f64, (f64, f64))> =
        presets.iter().flat_map(|&pr| gammas.iter().map(move |&g| (g, pr))).collect();
    let mut columns = vec!["v33".to_string()];
    columns.extend(combos.iter().map(|(g, (a, b))| format!("fidelity_gamma_{g}_v22_{a}_v23_{b}")));
    let mut table = ResultTable::with_columns("decay_fidelity", columns, meta);

    let setup = base.setup();
    let cells: Vec<(usize, usize)> =
        (0..v33_grid.len()).flat_map(|i| (0..combos.len()).map(move |j| (i, j))).collect();
    let values: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let (g, (v22, v23)) = combos[j];
            let p = SystemParams::new(v22, v23, v33_grid[i], g, g)?;
            Ok(cz_fidelity(scheme, &p, &setup)?)
        })
        .collect();
    let failures = assemble(&mut table, v33_grid, combos.len(), values, |i, j| {
        let (g, (a, b)) = combos[j];
        format!("v33 = {}, gamma = {g}, v22 = {a}, v23 = {b}", v33_grid[i])
    })?;
    Ok(ScanOutcome { table, failures })
}

// ---------------------------------------------------------------- dynamical regime

/// Interactions of the small-`V33` regime.
pub const DYNAMICAL_V22: f64 = 1.0;
pub const DYNAMICAL_V23: f64 = 1.5;

/// One row of the small-`V33` comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalRow {
    pub scheme: Scheme,
    pub v33: f64,
    pub report: GateReport,
    /// `phase(11)` minus its value at `V33 = 0`, in `(-pi, pi]`.
    pub extra_phase_11: f64,
    /// `-integral sin⁴θ V33 dt`.
    pub estimate: f64,
}

pub fn dynamical_rows(base: &Base, v33_values: &[f64]) -> Result<Vec<DynamicalRow>> {
    check_grid("v33 values", v33_values)?;
    let mut all: Vec<f64> = vec![0.0];
    all.extend(v33_values.iter().copied().filter(|&v| v != 0.0));
    let setup = base.setup();
    let jobs: Vec<(Scheme, f64)> = [Scheme::Berry, Scheme::NonBerry]
        .into_iter()
        .flat_map(|s| all.iter().map(move |&v| (s, v)))
        .collect();
    let reports: Vec<GateReport> = jobs
        .par_iter()
        .map(|&(s, v33)| {
            let p = SystemParams { v22: DYNAMICAL_V22, v23: DYNAMICAL_V23, v33, ..base.params };
            run_gate(s, &p, &setup)
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut rows = Vec::new();
    for (k, &(scheme, v33)) in jobs.iter().enumerate() {
        let zero = jobs.iter().position(|&(s, v)| s == scheme && v == 0.0).expect("zero run present");
        let schedule = scheme.schedule(base.omega, base.tau)?;
        let estimate = -sin4_estimate(&schedule, v33, base.integrator.steps);
        let extra = wrap_angle(reports[k].outcomes[3].phase - reports[zero].outcomes[3].phase);
        if v33 == 0.0 && !v33_values.contains(&0.0) {
            continue;
        }
        rows.push(DynamicalRow { scheme, v33, report: reports[k].clone(), extra_phase_11: extra, estimate });
    }
    Ok(rows)
}

pub fn run_dynamical_regime(base: &Base, v33_values: &[f64]) -> Result<ResultTable> {
    let rows = dynamical_rows(base, v33_values)?;
    let mut meta = base.echo();
    meta.retain(|(k, _)| !matches!(k.as_str(), "v22" | "v23" | "v33"));
    meta.push(("v22".into(), fmt_f64(DYNAMICAL_V22)));
    meta.push(("v23".into(), fmt_f64(DYNAMICAL_V23)));
    meta.push(("scheme_codes".into(), "1 = berry, 2 = non_berry".into()));
    let mut table = ResultTable::new(
        "dynamical_regime",
        &[
            "scheme", "v33", "population_11", "phase_01", "phase_11", "conditional_phase",
            "extra_phase_11", "estimate", "fidelity",
        ],
        meta,
    );
    for r in rows {
        let code = match r.scheme {
            Scheme::Berry => 1.0,
            Scheme::NonBerry => 2.0,
        };
        let o = &r.report.outcomes;
        table.push_row(vec![
            code,
            r.v33,
            o[3].population,
            o[1].phase,
            o[3].phase,
            r.report.conditional_phase,
            r.extra_phase_11,
            r.estimate,
            r.report.fidelity,
        ])?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> Base {
        Base { integrator: Integrator::with_steps(2048), ..Base::default() }
    }

    #[test]
    fn table_rejects_ragged_and_nan() {
        let mut t = ResultTable::new("x", &["a", "b"], vec![]);
        assert!(t.push_row(vec![1.0]).is_err());
        assert!(t.push_row(vec![1.0, f64::NAN]).is_err());
        t.push_row(vec![1.0, 2.0]).unwrap();
        assert_eq!(t.column("b").unwrap(), vec![2.0]);
    }

    #[test]
    fn csv_layout_and_precision() {
        let mut t = ResultTable::new("demo", &["x", "y"], vec![("k".into(), "v".into())]);
        t.push_row(vec![0.1, 1.0 / 3.0]).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# experiment = demo");
        assert_eq!(lines[1], "# k = v");
        assert!(lines[2].starts_with("# run = "));
        assert_eq!(lines[3], "x,y");
        let y: f64 = lines[4].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(y, 1.0 / 3.0);
        assert_eq!(t.stamp(), t.clone().stamp());
    }

    #[test]
    fn grids() {
        assert!(check_grid("g", &[]).is_err());
        assert!(check_grid("g", &[0.0, 0.0]).is_err());
        assert!(check_grid("g", &[1.0, 0.5]).is_ok());
        let v = default_v33_grid();
        assert_eq!(v.len(), 41);
        assert_eq!(v[7], 0.7000000000000001);
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(default_theta_grid(32).len(), 32);
    }

    #[test]
    fn cos2_fit_recovers_parameters() {
        let x = linspace(0.0, 2.0 * PI, 40);
        let y: Vec<f64> = x.iter().map(|v| 0.97 * v.cos().powi(2) + 0.01).collect();
        let (a, c) = fit_cos2(&x, &y);
        assert!((a - 0.97).abs() < 1e-12 && (c - 0.01).abs() < 1e-12);
    }

    #[test]
    fn berry_point_small_theta_is_small() {
        let r = berry_point(&quick(), 1e-3, SweepMode::BothPhases).unwrap();
        assert!(r.iter().all(|x| x.abs() < 1e-4), "{r:?}");
    }

    #[test]
    fn scans_are_deterministic() {
        let b = quick();
        let grid = [0.5, 0.9];
        let a = run_fidelity_vs_v33(&b, Scheme::NonBerry, &grid, &[1.0], 0.005).unwrap();
        let c = run_fidelity_vs_v33(&b, Scheme::NonBerry, &grid, &[1.0], 0.005).unwrap();
        assert!(a.failures.is_empty(), "{:?}", a.failures);
        assert_eq!(a.table.to_csv(), c.table.to_csv());
    }

    #[test]
    fn failing_point_leaves_partial_table() {
        let b = Base { integrator: Integrator::with_steps(16), ..quick() };
        let out = run_fringes(&b, &[0.0, 1.0]).unwrap();
        assert_eq!(out.failures.len(), 2);
        assert!(out.table.rows.is_empty());
    }
}
