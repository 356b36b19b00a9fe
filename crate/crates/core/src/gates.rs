// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! The two gate protocols run over the logical basis.
//!
//! Per-basis populations and phases come from separate runs of `|00>`,
//! `|01>`, `|10>`, `|11>`; the fidelity comes from the equal superposition
//! `|psi0> = (|00> + |01> + |10> + |11>) / 2`, propagated as a pure state or,
//! when decay is on, as a density matrix.
//!
//! Both schemes are scored against the controlled-Z target
//! `diag(1, 1, 1, -1)` after the scheme's local correction.
//! `phase_target_fidelity` scores against the adiabatic prediction instead,
//! i.e. the phases the dark states would carry along the drive path.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::darkstates::DarkKind;
use crate::dynamics::{
    propagate_lindblad, propagate_schrodinger, DensityMatrix, DynamicsError, Integrator,
};
use crate::geometry::{geometric_phase_quadrature, GeometryError, ParamPath};
use crate::hamiltonian::{collapse_operators, product_index, PairDrive, ParamError, SystemParams, LEVELS, PAIR_DIM};
use crate::linalg::{hermitian_eig, phasor, wrap_angle, CMatrix, CVector, Complex, LinalgError};
use crate::pulses::{PulseError, PulseSchedule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid density matrix or target: {0}")]
    InvalidDensity(String),
}

pub type Result<T> = std::result::Result<T, GateError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Locked phases `phi_p = phi_mu = pi t / tau`: Berry phase on `|11>` only.
    Berry,
    /// `phi_r` steps by `pi/2` at `tau`; needs a local correction afterwards.
    NonBerry,
}

impl Scheme {
    pub fn schedule(self, omega: f64, tau: f64) -> std::result::Result<PulseSchedule, PulseError> {
        match self {
            Scheme::Berry => PulseSchedule::scheme1(omega, tau),
            Scheme::NonBerry => PulseSchedule::scheme2(omega, tau),
        }
    }

    /// Phase applied to each atom's `|1>` after the pulse sequence.
    pub fn local_correction(self) -> f64 {
        match self {
            Scheme::Berry => 0.0,
            Scheme::NonBerry => -FRAC_PI_2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Berry => "berry",
            Scheme::NonBerry => "non_berry",
        }
    }
}

/// Logical inputs in the order `00, 01, 10, 11`.
pub const LOGICAL_LABELS: [&str; 4] = ["00", "01", "10", "11"];

pub fn logical_index(k: usize) -> usize {
    product_index(k >> 1, k & 1)
}

pub fn logical_basis(k: usize) -> CVector {
    CVector::basis(PAIR_DIM, logical_index(k))
}

/// `(|00> + |01> + |10> + |11>) / 2`.
pub fn logical_superposition() -> CVector {
    let mut v = CVector::zeros(PAIR_DIM);
    for k in 0..4 {
        v[logical_index(k)] = Complex::new(0.5, 0.0);
    }
    v
}

/// `sum_k e^{i phases[k]} |k> / 2` over the logical basis.
pub fn logical_target(phases: [f64; 4]) -> CVector {
    let mut v = CVector::zeros(PAIR_DIM);
    for (k, p) in phases.iter().enumerate() {
        v[logical_index(k)] = phasor(*p) * 0.5;
    }
    v
}

/// Controlled-Z applied to `|psi0>`.
pub fn cz_target() -> CVector {
    logical_target([0.0, 0.0, 0.0, PI])
}

/// Number of atoms in `|1>` for product index `i`.
fn ones(i: usize) -> i32 {
    (i / LEVELS == 1) as i32 + (i % LEVELS == 1) as i32
}

/// Multiplies each amplitude by `e^{i phase n1}`, `n1` counting atoms in `|1>`.
pub fn apply_local_correction(state: &CVector, phase: f64) -> CVector {
    let mut out = state.clone();
    for (i, z) in out.as_mut_slice().iter_mut().enumerate() {
        *z *= phasor(phase * ones(i) as f64);
    }
    out
}

/// The diagonal unitary behind [`apply_local_correction`].
pub fn local_correction_unitary(phase: f64) -> CMatrix {
    let d: Vec<Complex> = (0..PAIR_DIM).map(|i| phasor(phase * ones(i) as f64)).collect();
    CMatrix::diag(&d)
}

pub fn apply_local_correction_rho(rho: &DensityMatrix, phase: f64) -> Result<DensityMatrix> {
    Ok(rho.conjugate_by(&local_correction_unitary(phase))?)
}

fn check_target(target: &CVector) -> Result<()> {
    let n = target.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(GateError::InvalidDensity(format!("target norm {n} != 1")));
    }
    Ok(())
}

/// `<target| rho |target>`, the Uhlmann fidelity for a pure target.
pub fn gate_fidelity(rho: &DensityMatrix, target: &CVector) -> Result<f64> {
    check_target(target)?;
    if rho.dim() != target.dim() {
        return Err(GateError::InvalidDensity("dimension mismatch".into()));
    }
    Ok(rho.expectation(target)?.clamp(0.0, 1.0))
}

/// `|<target|psi>|²`.
pub fn pure_fidelity(psi: &CVector, target: &CVector) -> Result<f64> {
    check_target(target)?;
    Ok(target.inner(psi)?.norm_sqr().min(1.0))
}

fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let e = hermitian_eig(&m.hermitian_part(), 1e-12)?;
    let n = m.rows();
    let mut out = CMatrix::zeros(n, n);
    for (lam, v) in e.values.iter().zip(&e.vectors) {
        out.axpy(Complex::new(lam.max(0.0).sqrt(), 0.0), &v.outer(v));
    }
    Ok(out)
}

/// `[Tr sqrt(sqrt(sigma) rho sqrt(sigma))]²` for two density matrices.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(GateError::InvalidDensity("dimension mismatch".into()));
    }
    let s = psd_sqrt(sigma.matrix())?;
    let m = s.matmul(rho.matrix())?.matmul(&s)?;
    let e = hermitian_eig(&m.hermitian_part(), 1e-12)?;
    let tr: f64 = e.values.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok((tr * tr).min(1.0))
}

/// Outcome for one logical input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisOutcome {
    /// `|<k|psi(T)>|²`.
    pub population: f64,
    /// `arg <k|psi(T)>` before local correction, in `(-pi, pi]`.
    pub phase: f64,
    /// The same after local correction.
    pub corrected_phase: f64,
    /// Phase predicted by adiabatic transport along the drive path.
    pub adiabatic_phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub scheme: Scheme,
    pub omega: f64,
    pub tau: f64,
    pub steps: usize,
    pub params: SystemParams,
    pub local_correction: f64,
    pub outcomes: [BasisOutcome; 4],
    /// `phase(11) - phase(10) - phase(01) + phase(00)` in `(-pi, pi]`.
    pub conditional_phase: f64,
    pub conditional_phase_winding: i64,
    /// Against controlled-Z after local correction.
    pub fidelity: f64,
    /// Against the adiabatically predicted phases after local correction.
    pub phase_target_fidelity: f64,
    /// Geometric phase of `d2` along the drive path.
    pub berry_phase: f64,
    pub max_norm_drift: f64,
    pub lindblad_trace_drift: Option<f64>,
    pub lindblad_min_eigenvalue: Option<f64>,
}

impl GateReport {
    pub fn phases(&self) -> [f64; 4] {
        self.outcomes.map(|o| o.phase)
    }

    pub fn corrected_phases(&self) -> [f64; 4] {
        self.outcomes.map(|o| o.corrected_phase)
    }

    pub fn populations(&self) -> [f64; 4] {
        self.outcomes.map(|o| o.population)
    }

    /// Flat JSON object, one key per scalar.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("scheme".into(), json!(self.scheme));
        m.insert("omega".into(), json!(self.omega));
        m.insert("tau".into(), json!(self.tau));
        m.insert("steps".into(), json!(self.steps));
        m.insert("v22".into(), json!(self.params.v22));
        m.insert("v23".into(), json!(self.params.v23));
        m.insert("v33".into(), json!(self.params.v33));
        m.insert("gamma2".into(), json!(self.params.gamma2));
        m.insert("gamma3".into(), json!(self.params.gamma3));
        m.insert("local_correction".into(), json!(self.local_correction));
        for (label, o) in LOGICAL_LABELS.iter().zip(&self.outcomes) {
            m.insert(format!("population_{label}"), json!(o.population));
            m.insert(format!("phase_{label}"), json!(o.phase));
            m.insert(format!("corrected_phase_{label}"), json!(o.corrected_phase));
            m.insert(format!("adiabatic_phase_{label}"), json!(o.adiabatic_phase));
        }
        m.insert("conditional_phase".into(), json!(self.conditional_phase));
        m.insert("conditional_phase_winding".into(), json!(self.conditional_phase_winding));
        m.insert("fidelity".into(), json!(self.fidelity));
        m.insert("phase_target_fidelity".into(), json!(self.phase_target_fidelity));
        m.insert("berry_phase".into(), json!(self.berry_phase));
        m.insert("max_norm_drift".into(), json!(self.max_norm_drift));
        m.insert("lindblad_trace_drift".into(), json!(self.lindblad_trace_drift));
        m.insert("lindblad_min_eigenvalue".into(), json!(self.lindblad_min_eigenvalue));
        Value::Object(m)
    }
}

/// `phase(11) - phase(10) - phase(01) + phase(00)`, reduced to `(-pi, pi]`
/// with the number of turns removed.
pub fn conditional_phase(phases: [f64; 4]) -> (f64, i64) {
    let raw = phases[3] - phases[2] - phases[1] + phases[0];
    let value = wrap_angle(raw);
    (value, ((raw - value) / (2.0 * PI)).round() as i64)
}

/// Drive, timing and integrator for one gate run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSetup {
    pub omega: f64,
    pub tau: f64,
    pub integrator: Integrator,
}

impl GateSetup {
    pub fn new(omega: f64, tau: f64, integrator: Integrator) -> Self {
        Self { omega, tau, integrator }
    }
}

/// Adiabatic phases `[00, 01, 10, 11]` along the drive path: `|1>` follows
/// `d1` and `|11>` follows `d2`.
pub fn adiabatic_phases(schedule: &PulseSchedule, steps: usize) -> Result<[f64; 4]> {
    let path = ParamPath::from_schedule(schedule, steps)?;
    let single = geometric_phase_quadrature(&path, DarkKind::D1)?.unwrapped();
    let pair = geometric_phase_quadrature(&path, DarkKind::D2)?.unwrapped();
    Ok([0.0, single, single, pair])
}

/// Runs one scheme over the logical basis.
pub fn run_gate(scheme: Scheme, params: &SystemParams, setup: &GateSetup) -> Result<GateReport> {
    params.validate()?;
    let schedule = scheme.schedule(setup.omega, setup.tau)?;
    let total = schedule.total_time;
    let drive = PairDrive::new(schedule.clone(), *params);
    let opts = Integrator { stride: usize::MAX, ..setup.integrator };
    let correction = scheme.local_correction();

    let runs: Vec<_> = (0..4)
        .into_par_iter()
        .map(|k| propagate_schrodinger(&drive, &logical_basis(k), total, &opts))
        .collect::<std::result::Result<_, _>>()?;

    let adiabatic = adiabatic_phases(&schedule, setup.integrator.steps)?;
    let mut max_norm_drift: f64 = 0.0;
    let mut outcomes = [BasisOutcome { population: 0.0, phase: 0.0, corrected_phase: 0.0, adiabatic_phase: 0.0 }; 4];
    for (k, traj) in runs.iter().enumerate() {
        max_norm_drift = max_norm_drift.max(traj.diagnostics.max_drift);
        let amp = traj.final_state()[logical_index(k)];
        let shift = correction * ones(logical_index(k)) as f64;
        outcomes[k] = BasisOutcome {
            population: amp.norm_sqr(),
            phase: amp.arg(),
            corrected_phase: wrap_angle(amp.arg() + shift),
            adiabatic_phase: wrap_angle(adiabatic[k] + shift),
        };
    }
    let (cond, winding) = conditional_phase(outcomes.map(|o| o.phase));

    let cz = cz_target();
    let predicted = logical_target(outcomes.map(|o| o.adiabatic_phase));
    let psi0 = logical_superposition();
    let (fidelity, phase_target_fidelity, trace_drift, min_eig) = if params.is_dissipative() {
        let collapse = collapse_operators(params);
        let rho0 = DensityMatrix::from_pure(&psi0)?;
        let traj = propagate_lindblad(&drive, &collapse, &rho0, total, &opts)?;
        let rho = apply_local_correction_rho(traj.final_state(), correction)?;
        (
            gate_fidelity(&rho, &cz)?,
            gate_fidelity(&rho, &predicted)?,
            Some(traj.diagnostics.max_drift),
            traj.diagnostics.min_eigenvalue,
        )
    } else {
        let traj = propagate_schrodinger(&drive, &psi0, total, &opts)?;
        max_norm_drift = max_norm_drift.max(traj.diagnostics.max_drift);
        let psi = apply_local_correction(traj.final_state(), correction);
        (pure_fidelity(&psi, &cz)?, pure_fidelity(&psi, &predicted)?, None, None)
    };

    Ok(GateReport {
        scheme,
        omega: setup.omega,
        tau: setup.tau,
        steps: setup.integrator.steps,
        params: *params,
        local_correction: correction,
        outcomes,
        conditional_phase: cond,
        conditional_phase_winding: winding,
        fidelity,
        phase_target_fidelity,
        berry_phase: adiabatic[3],
        max_norm_drift,
        lindblad_trace_drift: trace_drift,
        lindblad_min_eigenvalue: min_eig,
    })
}

/// Controlled-Z fidelity from the `|psi0>` run alone, as used in scans.
pub fn cz_fidelity(scheme: Scheme, params: &SystemParams, setup: &GateSetup) -> Result<f64> {
    params.validate()?;
    let schedule = scheme.schedule(setup.omega, setup.tau)?;
    let total = schedule.total_time;
    let drive = PairDrive::new(schedule, *params);
    let opts = Integrator { stride: usize::MAX, ..setup.integrator };
    let psi0 = logical_superposition();
    let correction = scheme.local_correction();
    if params.is_dissipative() {
        let rho0 = DensityMatrix::from_pure(&psi0)?;
        let traj = propagate_lindblad(&drive, &collapse_operators(params), &rho0, total, &opts)?;
        gate_fidelity(&apply_local_correction_rho(traj.final_state(), correction)?, &cz_target())
    } else {
        let traj = propagate_schrodinger(&drive, &psi0, total, &opts)?;
        pure_fidelity(&apply_local_correction(traj.final_state(), correction), &cz_target())
    }
}

pub fn run_scheme1(params: &SystemParams, setup: &GateSetup) -> Result<GateReport> {
    run_gate(Scheme::Berry, params, setup)
}

pub fn run_scheme2(params: &SystemParams, setup: &GateSetup) -> Result<GateReport> {
    run_gate(Scheme::NonBerry, params, setup)
}

/// First-order amplitude of the motion-induced error,
/// `3 lambda0 V33 / (R omega0) (1 - e^{-i omega0 tau})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionalError {
    pub amplitude: Complex,
    pub magnitude: f64,
}

pub fn motional_error_estimate(lambda0: f64, omega0: f64, r: f64, v33: f64, tau: f64) -> MotionalError {
    let prefactor = 3.0 * lambda0 * v33 / (r * omega0);
    let amplitude = (Complex::new(1.0, 0.0) - phasor(-omega0 * tau)) * prefactor;
    MotionalError { amplitude, magnitude: amplitude.norm() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logical_layout() {
        assert_eq!([0, 1, 2, 3].map(logical_index), [0, 1, 4, 5]);
        assert!((logical_superposition().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn local_correction_examples() {
        let h = FRAC_PI_2;
        let s00 = logical_basis(0);
        assert_eq!(apply_local_correction(&s00, h), s00);
        let s11 = apply_local_correction(&logical_basis(3), h);
        assert!((s11[5] - Complex::new(-1.0, 0.0)).norm() < 1e-15);
        let s01 = apply_local_correction(&logical_basis(1), h);
        assert!((s01[1] - Complex::new(0.0, 1.0)).norm() < 1e-15);
        // |13> has one atom in |1>.
        let s13 = apply_local_correction(&CVector::basis(PAIR_DIM, 7), h);
        assert!((s13[7] - Complex::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn fidelity_edge_cases() {
        let t = cz_target();
        let rho = DensityMatrix::from_pure(&t).unwrap();
        assert!((gate_fidelity(&rho, &t).unwrap() - 1.0).abs() < 1e-14);
        let orth = logical_target([0.0, PI, 0.0, 0.0]);
        assert!(gate_fidelity(&rho, &orth).unwrap() < 1e-14);
        let rotated = DensityMatrix::from_pure(&t.scale(phasor(1.3))).unwrap();
        assert!((gate_fidelity(&rotated, &t).unwrap() - 1.0).abs() < 1e-14);
        assert!(gate_fidelity(&rho, &t.scale(Complex::new(2.0, 0.0))).is_err());
    }

    #[test]
    fn uhlmann_reduces_to_pure_overlap() {
        let t = cz_target();
        let mut m = CMatrix::identity(PAIR_DIM).scale(Complex::new(0.02 / PAIR_DIM as f64, 0.0));
        let psi = logical_target([0.0, 0.2, -0.1, 2.9]);
        m.axpy(Complex::new(0.98, 0.0), &psi.outer(&psi));
        let rho = DensityMatrix::new(m).unwrap();
        let sigma = DensityMatrix::from_pure(&t).unwrap();
        let a = uhlmann_fidelity(&rho, &sigma).unwrap();
        let b = gate_fidelity(&rho, &t).unwrap();
        // sqrt of round-off eigenvalues of a rank-one product adds ~1e-8
        assert!((a - b).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn conditional_phase_ignores_local_phases() {
        let base = [0.1, 0.4, -0.7, 2.0];
        let (c0, _) = conditional_phase(base);
        for (a, b) in [(0.3, -1.2), (2.5, 0.9), (-3.0, 3.0)] {
            // |x y> picks up a*x + b*y
            let shifted = [base[0], base[1] + b, base[2] + a, base[3] + a + b];
            let (c1, _) = conditional_phase(shifted);
            assert!((wrap_angle(c1 - c0)).abs() < 1e-12);
        }
    }

    #[test]
    fn motional_error() {
        let e = motional_error_estimate(0.01, 2.0 * PI / 3.0, 5.0, 0.9, 3.0);
        assert!(e.magnitude < 1e-15);
        assert_eq!(motional_error_estimate(0.01, 1.0, 5.0, 0.0, 2.0).magnitude, 0.0);
        let bound = |w: f64| 2.0 * 3.0 * 0.01 * 0.9 / (5.0 * w);
        for w in [0.7, 1.4] {
            assert!(motional_error_estimate(0.01, w, 5.0, 0.9, 2.3).magnitude <= bound(w) + 1e-15);
        }
        assert!((bound(1.4) - bound(0.7) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn idle_input_is_untouched() {
        let setup = GateSetup::new(1.0, 6.0 * PI, Integrator::with_steps(1024));
        let p = SystemParams::default();
        let r = run_scheme2(&p, &setup).unwrap();
        assert!((r.outcomes[0].population - 1.0).abs() < 1e-12);
        assert_eq!(r.outcomes[0].phase, 0.0);
        assert!(r.fidelity <= 1.0 && r.fidelity >= 0.0);
    }
}
