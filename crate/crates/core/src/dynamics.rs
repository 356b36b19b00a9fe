// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Fixed-step RK4 propagation of pure states and density matrices.
//!
//! The time grid is uniform and every breakpoint of the Hamiltonian must fall
//! on a grid node. Within a step the first stage sees the right limit of
//! `H` and the last stage the left limit, so a phase jump or an amplitude
//! kink at a node never leaks into a neighbouring step.

use serde::Serialize;
use thiserror::Error;

use crate::hamiltonian::TimeDependent;
use crate::linalg::{hermitian_eig, CMatrix, CVector, Complex, LinalgError, I, ONE};
use crate::pulses::Side;

pub const DEFAULT_STEPS: usize = 8192;
pub const DEFAULT_STRIDE: usize = 16;
/// Norm or trace drift tolerated before a run is declared too coarse.
pub const DRIFT_TOL: f64 = 1e-8;
/// Doubling-steps difference tolerated by the convergence check.
pub const CONVERGENCE_TOL: f64 = 1e-8;
/// Most negative density-matrix eigenvalue before integration is declared broken.
pub const POSITIVITY_FLOOR: f64 = -1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("time grid: {0}")]
    Grid(String),
    #[error("step too coarse: {0}")]
    StepTooCoarse(String),
    #[error("density matrix lost positivity at t = {t}: min eigenvalue {min_eigenvalue:e}")]
    PositivityViolation { t: f64, min_eigenvalue: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("spectral gap closes at t = {t} (gap {gap:e})")]
    GapClosure { t: f64, gap: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

/// Step count, snapshot stride, and whether to verify convergence by a
/// second run at twice the step count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integrator {
    pub steps: usize,
    pub stride: usize,
    pub verify_convergence: bool,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { steps: DEFAULT_STEPS, stride: DEFAULT_STRIDE, verify_convergence: false }
    }
}

impl Integrator {
    pub fn with_steps(steps: usize) -> Self {
        Self { steps, ..Self::default() }
    }

    fn doubled(&self) -> Self {
        Self { steps: 2 * self.steps, stride: usize::MAX, verify_convergence: false }
    }
}

fn grid_step(total: f64, steps: usize, breakpoints: &[f64]) -> Result<f64> {
    if !(total.is_finite() && total > 0.0) {
        return Err(DynamicsError::Grid(format!("total time {total} must be positive")));
    }
    if steps < 2 {
        return Err(DynamicsError::Grid(format!("need at least 2 steps, got {steps}")));
    }
    let dt = total / steps as f64;
    for &b in breakpoints {
        let k = b / dt;
        if (k - k.round()).abs() > 1e-6 {
            return Err(DynamicsError::Grid(format!(
                "breakpoint t = {b} is not a grid node for {steps} steps over {total}"
            )));
        }
    }
    Ok(dt)
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const PSD_TOL: f64 = -1e-8;

    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(DynamicsError::InvalidState("density matrix must be square".into()));
        }
        let defect = m.hermiticity_defect();
        if defect >= Self::HERMITIAN_TOL {
            return Err(DynamicsError::InvalidState(format!("not Hermitian ({defect:e})")));
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > Self::TRACE_TOL {
            return Err(DynamicsError::InvalidState(format!("trace {tr} != 1")));
        }
        let rho = Self(m);
        let min = rho.min_eigenvalue()?;
        if min < Self::PSD_TOL {
            return Err(DynamicsError::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// `|psi><psi|` for a normalised `psi`.
    pub fn from_pure(psi: &CVector) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(DynamicsError::InvalidState(format!("state norm {n} != 1")));
        }
        Ok(Self(psi.outer(psi)))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn population(&self, k: usize) -> f64 {
        self.0[(k, k)].re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let e = hermitian_eig(&self.0.hermitian_part(), 1e-9)?;
        Ok(e.values[0])
    }

    /// `<psi| rho |psi>`.
    pub fn expectation(&self, psi: &CVector) -> Result<f64> {
        Ok(self.0.sandwich(psi, psi)?.re)
    }

    /// `U rho U^H`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        let m = u.matmul(&self.0)?.matmul(&u.adjoint())?;
        Ok(Self(m))
    }
}

/// Run-level integrity numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Largest `| ‖psi‖ - 1 |` or `| tr rho - 1 |` seen at a snapshot.
    pub max_drift: f64,
    /// Smallest density-matrix eigenvalue seen at a snapshot (mixed runs only).
    pub min_eigenvalue: Option<f64>,
}

/// Snapshots of a propagation, `times[k]` paired with `states[k]`.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub diagnostics: Diagnostics,
}

impl<S> Trajectory<S> {
    pub fn final_state(&self) -> &S {
        self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

impl Trajectory<CVector> {
    pub fn populations(&self, k: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[k].norm_sqr()).collect()
    }

    /// `|<target|psi(t)>|²` along the trajectory.
    pub fn overlaps(&self, target: &CVector) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| target.inner(s).map(|z| z.norm_sqr()).unwrap_or(f64::NAN))
            .collect()
    }
}

fn schrodinger_rhs(h: &CMatrix, psi: &CVector) -> CVector {
    h.matvec_unchecked(psi).scale(-I)
}

fn rk4_vector(h: &dyn TimeDependent, psi: &CVector, t: f64, dt: f64) -> CVector {
    let h0 = h.at(t, Side::Right);
    let hm = h.at(t + 0.5 * dt, Side::Right);
    let h1 = h.at(t + dt, Side::Left);
    let half = Complex::new(0.5 * dt, 0.0);
    let full = Complex::new(dt, 0.0);

    let k1 = schrodinger_rhs(&h0, psi);
    let mut y = psi.clone();
    y.axpy(half, &k1);
    let k2 = schrodinger_rhs(&hm, &y);
    let mut y = psi.clone();
    y.axpy(half, &k2);
    let k3 = schrodinger_rhs(&hm, &y);
    let mut y = psi.clone();
    y.axpy(full, &k3);
    let k4 = schrodinger_rhs(&h1, &y);

    let mut out = psi.clone();
    let w = Complex::new(dt / 6.0, 0.0);
    out.axpy(w, &k1);
    out.axpy(w * 2.0, &k2);
    out.axpy(w * 2.0, &k3);
    out.axpy(w, &k4);
    out
}

fn run_vector(h: &dyn TimeDependent, psi0: &CVector, total: f64, opts: &Integrator) -> Result<Trajectory<CVector>> {
    if psi0.dim() != h.dim() {
        return Err(LinalgError::DimMismatch(format!(
            "state dim {} vs Hamiltonian dim {}",
            psi0.dim(),
            h.dim()
        ))
        .into());
    }
    let norm0 = psi0.norm();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(DynamicsError::InvalidState(format!("initial norm {norm0} != 1")));
    }
    let dt = grid_step(total, opts.steps, &h.breakpoints())?;
    let stride = opts.stride.max(1);
    let mut psi = psi0.clone();
    let mut times = vec![0.0];
    let mut states = vec![psi.clone()];
    let mut max_drift: f64 = 0.0;
    for n in 0..opts.steps {
        let t = n as f64 * dt;
        psi = rk4_vector(h, &psi, t, dt);
        let last = n + 1 == opts.steps;
        if (n + 1) % stride == 0 || last {
            max_drift = max_drift.max((psi.norm() - 1.0).abs());
            if !psi.is_finite() {
                return Err(DynamicsError::StepTooCoarse(format!("state diverged at t = {t}")));
            }
            if stride != usize::MAX || last {
                times.push(if last { total } else { (n + 1) as f64 * dt });
                states.push(psi.clone());
            }
        }
    }
    Ok(Trajectory { times, states, diagnostics: Diagnostics { max_drift, min_eigenvalue: None } })
}

/// Integrates `i dpsi/dt = H(t) psi` over `[0, total]`.
pub fn propagate_schrodinger(
    h: &dyn TimeDependent,
    psi0: &CVector,
    total: f64,
    opts: &Integrator,
) -> Result<Trajectory<CVector>> {
    let traj = run_vector(h, psi0, total, opts)?;
    if traj.diagnostics.max_drift > DRIFT_TOL {
        return Err(DynamicsError::StepTooCoarse(format!(
            "norm drift {:e} with {} steps",
            traj.diagnostics.max_drift, opts.steps
        )));
    }
    if opts.verify_convergence {
        let fine = run_vector(h, psi0, total, &opts.doubled())?;
        let diff = fine.final_state().sub(traj.final_state())?.norm();
        if diff > CONVERGENCE_TOL {
            return Err(DynamicsError::StepTooCoarse(format!(
                "doubling {} steps moves the final state by {diff:e}",
                opts.steps
            )));
        }
    }
    Ok(traj)
}

/// `sum_k L_k rho L_k^H - 1/2 {K, rho}` plus `-i[H, rho]`, with
/// `K = sum_k L_k^H L_k`. Uses `rho H = (H rho)^H` for Hermitian arguments.
fn lindblad_rhs(h: &CMatrix, collapse: &[CMatrix], k_sum: &CMatrix, rho: &CMatrix) -> CMatrix {
    let h_rho = h.matmul_unchecked(rho);
    let mut out = h_rho.sub(&h_rho.adjoint()).expect("same shape").scale(-I);
    if !collapse.is_empty() {
        let k_rho = k_sum.matmul_unchecked(rho);
        out.axpy(Complex::new(-0.5, 0.0), &k_rho);
        out.axpy(Complex::new(-0.5, 0.0), &k_rho.adjoint());
        for l in collapse {
            let l_rho = l.matmul_unchecked(rho);
            let jump = l.matmul_unchecked(&l_rho.adjoint()).adjoint();
            out.axpy(ONE, &jump);
        }
    }
    out
}

fn rk4_matrix(
    h: &dyn TimeDependent,
    collapse: &[CMatrix],
    k_sum: &CMatrix,
    rho: &CMatrix,
    t: f64,
    dt: f64,
) -> CMatrix {
    let h0 = h.at(t, Side::Right);
    let hm = h.at(t + 0.5 * dt, Side::Right);
    let h1 = h.at(t + dt, Side::Left);
    let half = Complex::new(0.5 * dt, 0.0);

    let k1 = lindblad_rhs(&h0, collapse, k_sum, rho);
    let mut y = rho.clone();
    y.axpy(half, &k1);
    let k2 = lindblad_rhs(&hm, collapse, k_sum, &y);
    let mut y = rho.clone();
    y.axpy(half, &k2);
    let k3 = lindblad_rhs(&hm, collapse, k_sum, &y);
    let mut y = rho.clone();
    y.axpy(Complex::new(dt, 0.0), &k3);
    let k4 = lindblad_rhs(&h1, collapse, k_sum, &y);

    let mut out = rho.clone();
    let w = Complex::new(dt / 6.0, 0.0);
    out.axpy(w, &k1);
    out.axpy(w * 2.0, &k2);
    out.axpy(w * 2.0, &k3);
    out.axpy(w, &k4);
    out.hermitian_part()
}

fn run_matrix(
    h: &dyn TimeDependent,
    collapse: &[CMatrix],
    rho0: &DensityMatrix,
    total: f64,
    opts: &Integrator,
) -> Result<Trajectory<DensityMatrix>> {
    let n = h.dim();
    if rho0.dim() != n || collapse.iter().any(|l| l.rows() != n || l.cols() != n) {
        return Err(LinalgError::DimMismatch("density matrix, Hamiltonian and collapse operators differ in size".into()).into());
    }
    let dt = grid_step(total, opts.steps, &h.breakpoints())?;
    let stride = opts.stride.max(1);
    let mut k_sum = CMatrix::zeros(n, n);
    for l in collapse {
        k_sum.axpy(ONE, &l.adjoint().matmul_unchecked(l));
    }
    let mut rho = rho0.matrix().clone();
    let mut times = vec![0.0];
    let mut states = vec![rho0.clone()];
    let mut max_drift: f64 = 0.0;
    let mut min_eig = rho0.min_eigenvalue()?;
    for step in 0..opts.steps {
        let t = step as f64 * dt;
        rho = rk4_matrix(h, collapse, &k_sum, &rho, t, dt);
        let last = step + 1 == opts.steps;
        if (step + 1) % stride == 0 || last {
            if !rho.is_finite() {
                return Err(DynamicsError::StepTooCoarse(format!("density matrix diverged at t = {t}")));
            }
            let t_now = if last { total } else { (step + 1) as f64 * dt };
            max_drift = max_drift.max((rho.trace().re - 1.0).abs());
            if stride != usize::MAX || last {
                let snapshot = DensityMatrix::from_matrix_unchecked(rho.clone());
                let lo = snapshot.min_eigenvalue()?;
                min_eig = min_eig.min(lo);
                if lo < POSITIVITY_FLOOR {
                    return Err(DynamicsError::PositivityViolation { t: t_now, min_eigenvalue: lo });
                }
                times.push(t_now);
                states.push(snapshot);
            }
        }
    }
    Ok(Trajectory {
        times,
        states,
        diagnostics: Diagnostics { max_drift, min_eigenvalue: Some(min_eig) },
    })
}

/// Integrates the Lindblad master equation
/// `drho/dt = -i[H, rho] + sum_k (L_k rho L_k^H - 1/2 {L_k^H L_k, rho})`.
pub fn propagate_lindblad(
    h: &dyn TimeDependent,
    collapse: &[CMatrix],
    rho0: &DensityMatrix,
    total: f64,
    opts: &Integrator,
) -> Result<Trajectory<DensityMatrix>> {
    let traj = run_matrix(h, collapse, rho0, total, opts)?;
    if traj.diagnostics.max_drift > DRIFT_TOL {
        return Err(DynamicsError::StepTooCoarse(format!(
            "trace drift {:e} with {} steps",
            traj.diagnostics.max_drift, opts.steps
        )));
    }
    if opts.verify_convergence {
        let fine = run_matrix(h, collapse, rho0, total, &opts.doubled())?;
        let diff = fine
            .final_state()
            .matrix()
            .sub(traj.final_state().matrix())?
            .frobenius_norm();
        if diff > CONVERGENCE_TOL {
            return Err(DynamicsError::StepTooCoarse(format!(
                "doubling {} steps moves the final state by {diff:e}",
                opts.steps
            )));
        }
    }
    Ok(traj)
}

/// Outcome of the adiabaticity scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Adiabaticity {
    /// `max_t max_e |<e| dH/dt |g>| / |E_e - E_g|²`.
    pub max_ratio: f64,
    pub time_of_max: f64,
    /// Smallest gap to an excited state with nonzero coupling.
    pub min_gap: f64,
}

/// Eigenvalues closer than this form one degenerate cluster.
const CLUSTER_TOL: f64 = 1e-9;
/// Couplings below this are treated as symmetry zeros.
const COUPLING_FLOOR: f64 = 1e-12;

/// Scans `samples` interior times for the adiabaticity ratio of the
/// instantaneous eigenstate that best overlaps `tracked(t)`.
///
/// The tracked state is projected onto its degenerate cluster, so a dark
/// state sharing the zero eigenvalue with decoupled sectors is still
/// resolved. `dH/dt` is a centred difference that never straddles a
/// breakpoint.
pub fn adiabaticity_ratio(
    h: &dyn TimeDependent,
    tracked: &dyn Fn(f64) -> CVector,
    total: f64,
    samples: usize,
    min_gap: f64,
) -> Result<Adiabaticity> {
    if samples == 0 || !(total > 0.0) {
        return Err(DynamicsError::Grid("need a positive duration and at least one sample".into()));
    }
    let eps = 1e-5 * total;
    let bps = h.breakpoints();
    let mut best = Adiabaticity { max_ratio: 0.0, time_of_max: 0.0, min_gap: f64::INFINITY };
    for k in 0..samples {
        let t = (k as f64 + 0.5) * total / samples as f64;
        if bps.iter().any(|b| (b - t).abs() <= 2.0 * eps) {
            continue;
        }
        let hp = h.at(t + eps, Side::Right);
        let hm = h.at(t - eps, Side::Right);
        let dh = hp.sub(&hm)?.scale(Complex::new(0.5 / eps, 0.0));
        let ht = h.at(t, Side::Right);
        let eig = hermitian_eig(&ht, 1e-9)?;
        let target = tracked(t);

        let (g_idx, _) = eig
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.inner(&target).map(|z| z.norm_sqr()).unwrap_or(0.0)))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let e_g = eig.values[g_idx];
        let in_cluster: Vec<bool> = eig.values.iter().map(|e| (e - e_g).abs() < CLUSTER_TOL).collect();
        let mut g = CVector::zeros(ht.rows());
        for (v, &inside) in eig.vectors.iter().zip(&in_cluster) {
            if inside {
                g.axpy(v.inner(&target)?, v);
            }
        }
        let g = g.normalized();
        let dh_g = dh.matvec(&g)?;

        for ((v, e), &inside) in eig.vectors.iter().zip(&eig.values).zip(&in_cluster) {
            if inside {
                continue;
            }
            let coupling = v.inner(&dh_g)?.norm();
            if coupling < COUPLING_FLOOR {
                continue;
            }
            let gap = (e - e_g).abs();
            if gap < min_gap {
                return Err(DynamicsError::GapClosure { t, gap });
            }
            best.min_gap = best.min_gap.min(gap);
            let ratio = coupling / (gap * gap);
            if ratio > best.max_ratio {
                best.max_ratio = ratio;
                best.time_of_max = t;
            }
        }
    }
    Ok(best)
}
