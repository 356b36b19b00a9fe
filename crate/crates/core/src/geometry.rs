// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Berry connections, geometric and dynamical phase integrals, and phase
//! extraction from trajectories.
//!
//! Gauges: `d2` and `d2'` use the vectors from [`crate::darkstates`] as
//! they are. For `d1` the connection is taken in the gauge where the `|1>`
//! amplitude is real, `c |1> - s e^{-i phi_r} |3>`; there the accumulated
//! phase is directly the phase an atom starting and ending in `|1>` picks
//! up, `integral sin²θ dphi_r`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;
use thiserror::Error;

use crate::darkstates::{d2_norm_sqr, dark_d1, dark_d2, dark_d2prime, DarkKind};
use crate::linalg::{phasor, wrap_angle, CVector, Complex, LinalgError};
use crate::pulses::{PulseSchedule, Side};

/// Richardson halving tolerance for the connection quadrature.
pub const QUADRATURE_TOL: f64 = 1e-6;
/// Amplitude below which an extracted phase is not trusted.
pub const AMPLITUDE_FLOOR: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("quadrature not converged: {coarse} vs {fine} after halving")]
    NotConverged { coarse: f64, fine: f64 },
    #[error("amplitude {amplitude:e} of component {index} too small to define a phase")]
    VanishingAmplitude { index: usize, amplitude: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMethod {
    Quadrature,
    Pancharatnam,
    ClosedForm,
    Dynamical,
}

/// A phase as principal value in `(-pi, pi]` plus a whole number of turns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseResult {
    pub value: f64,
    pub winding: i64,
    pub method: PhaseMethod,
}

impl PhaseResult {
    pub fn from_unwrapped(total: f64, method: PhaseMethod) -> Self {
        let value = wrap_angle(total);
        let winding = ((total - value) / TAU).round() as i64;
        Self { value, winding, method }
    }

    pub fn unwrapped(&self) -> f64 {
        self.value + TAU * self.winding as f64
    }
}

/// `i <d|d/dt d>` for the given dark state at parameters
/// `p = (theta, phi_p, phi_r)` moving with rates `dp`.
///
/// `theta` drops out: all dark states are real in their `theta` dependence.
pub fn berry_connection(kind: DarkKind, p: [f64; 3], dp: [f64; 3]) -> f64 {
    let (s, c) = p[0].sin_cos();
    let (s2, c2) = (s * s, c * c);
    match kind {
        DarkKind::D2 => (-2.0 * s2 * s2 * dp[1] + 2.0 * s2 * c2 * dp[2]) / d2_norm_sqr(p[0]),
        DarkKind::D2Prime => -2.0 * c2 * dp[2],
        DarkKind::D1 => s2 * dp[2],
    }
}

pub fn berry_connection_d2(p: [f64; 3], dp: [f64; 3]) -> f64 {
    berry_connection(DarkKind::D2, p, dp)
}

pub fn berry_connection_d1(p: [f64; 3], dp: [f64; 3]) -> f64 {
    berry_connection(DarkKind::D1, p, dp)
}

/// The dark-state vector in the same gauge as [`berry_connection`].
pub fn gauge_vector(kind: DarkKind, p: [f64; 3]) -> CVector {
    match kind {
        DarkKind::D2 => dark_d2(p[0], p[1], p[1] + p[2]).vector,
        DarkKind::D2Prime => dark_d2prime(p[0], p[2]).vector,
        DarkKind::D1 => dark_d1(p[0], p[2]).vector.scale(phasor(-p[2])),
    }
}

/// One smooth stretch of a parameter path on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSegment {
    pub times: Vec<f64>,
    pub params: Vec<[f64; 3]>,
    pub rates: Vec<[f64; 3]>,
}

impl PathSegment {
    fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n < 2 || self.params.len() != n || self.rates.len() != n {
            return Err(GeometryError::InvalidPath("segment needs matching samples, at least 2".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(GeometryError::InvalidPath("time grid not strictly increasing".into()));
        }
        let all_finite = self.times.iter().all(|t| t.is_finite())
            && self.params.iter().chain(&self.rates).flatten().all(|x| x.is_finite());
        if !all_finite {
            return Err(GeometryError::InvalidPath("non-finite sample".into()));
        }
        Ok(())
    }
}

/// Sampled curve `t -> (theta, phi_p, phi_r)`; parameters may jump between
/// consecutive segments.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPath {
    segments: Vec<PathSegment>,
    closed: bool,
}

fn same_angle(a: f64, b: f64) -> bool {
    wrap_angle(a - b).abs() < 1e-9
}

impl ParamPath {
    pub fn new(segments: Vec<PathSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(GeometryError::InvalidPath("no segments".into()));
        }
        for s in &segments {
            s.validate()?;
        }
        for w in segments.windows(2) {
            let end = *w[0].times.last().unwrap();
            if (w[1].times[0] - end).abs() > 1e-9 * end.abs().max(1.0) {
                return Err(GeometryError::InvalidPath("segments are not contiguous".into()));
            }
        }
        let first = segments[0].params[0];
        let last = *segments.last().unwrap().params.last().unwrap();
        let closed = (first[0] - last[0]).abs() < 1e-9
            && same_angle(first[1], last[1])
            && same_angle(first[2], last[2]);
        Ok(Self { segments, closed })
    }

    /// Samples a schedule with `steps` uniform intervals. Every breakpoint
    /// must be a grid node; each side of a node takes its own one-sided limit.
    pub fn from_schedule(schedule: &PulseSchedule, steps: usize) -> Result<Self> {
        let total = schedule.total_time;
        if steps < 2 {
            return Err(GeometryError::InvalidPath("need at least 2 steps".into()));
        }
        let dt = total / steps as f64;
        let mut cuts = vec![0usize];
        for b in schedule.breakpoints() {
            let k = b / dt;
            if (k - k.round()).abs() > 1e-6 {
                return Err(GeometryError::InvalidPath(format!("breakpoint {b} is not a grid node")));
            }
            cuts.push(k.round() as usize);
        }
        cuts.push(steps);
        cuts.dedup();
        let segments = cuts
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let mut seg = PathSegment { times: vec![], params: vec![], rates: vec![] };
                for k in a..=b {
                    let t = if k == steps { total } else { k as f64 * dt };
                    let side = if k == b { Side::Left } else { Side::Right };
                    let (p, dp) = schedule.parameters(t, side);
                    seg.times.push(t);
                    seg.params.push(p);
                    seg.rates.push(dp);
                }
                seg
            })
            .collect();
        Self::new(segments)
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    /// `R(T) = R(0)`, phases compared modulo `2 pi`.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Dark-state vectors along the path; each jump contributes both limits.
    pub fn states(&self, kind: DarkKind) -> Vec<CVector> {
        self.segments
            .iter()
            .flat_map(|s| s.params.iter().map(move |&p| gauge_vector(kind, p)))
            .collect()
    }
}

/// Composite Simpson on uniform samples; the last three intervals use the
/// 3/8 rule when the interval count is odd.
pub fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (y[0] + y[1]),
        _ => {
            let (even_end, tail) = if n.is_multiple_of(2) { (n, 0.0) } else { (n - 3, 3.0 * h / 8.0 * (y[n - 3] + 3.0 * y[n - 2] + 3.0 * y[n - 1] + y[n])) };
            let mut acc = 0.0;
            let mut k = 0;
            while k < even_end {
                acc += y[k] + 4.0 * y[k + 1] + y[k + 2];
                k += 2;
            }
            acc * h / 3.0 + tail
        }
    }
}

fn segment_step(seg: &PathSegment) -> f64 {
    (seg.times.last().unwrap() - seg.times[0]) / (seg.times.len() - 1) as f64
}

/// Integrates an arbitrary connection `a(t, p, dp)` along the path and adds
/// `-arg <d(t-)|d(t+)>` for each jump, using `states` for the jump limits.
///
/// The integral is repeated on every other sample; the two must agree to
/// [`QUADRATURE_TOL`].
pub fn integrate_connection(
    path: &ParamPath,
    connection: impl Fn(f64, [f64; 3], [f64; 3]) -> f64,
    jump_vector: impl Fn([f64; 3]) -> CVector,
) -> Result<PhaseResult> {
    let mut fine = 0.0;
    let mut coarse = 0.0;
    for seg in &path.segments {
        let y: Vec<f64> = (0..seg.times.len())
            .map(|k| connection(seg.times[k], seg.params[k], seg.rates[k]))
            .collect();
        let h = segment_step(seg);
        fine += simpson(&y, h);
        if (y.len() - 1).is_multiple_of(2) && y.len() >= 5 {
            let half: Vec<f64> = y.iter().step_by(2).copied().collect();
            coarse += simpson(&half, 2.0 * h);
        } else {
            coarse += simpson(&y, h);
        }
    }
    if (fine - coarse).abs() > QUADRATURE_TOL {
        return Err(GeometryError::NotConverged { coarse, fine });
    }
    let mut jumps = 0.0;
    for w in path.segments.windows(2) {
        let before = jump_vector(*w[0].params.last().unwrap());
        let after = jump_vector(w[1].params[0]);
        jumps -= before.inner(&after)?.arg();
    }
    Ok(PhaseResult::from_unwrapped(fine + jumps, PhaseMethod::Quadrature))
}

/// Geometric phase of a dark state carried along `path`.
pub fn geometric_phase_quadrature(path: &ParamPath, kind: DarkKind) -> Result<PhaseResult> {
    integrate_connection(path, |_, p, dp| berry_connection(kind, p, dp), |p| gauge_vector(kind, p))
}

/// `-sum_k arg <d_k|d_{k+1}>`, closed with `-arg <d_N|d_0>` when `closed`.
pub fn pancharatnam_phase(states: &[CVector], closed: bool) -> Result<PhaseResult> {
    if states.len() < 2 {
        return Err(GeometryError::InvalidPath("need at least two states".into()));
    }
    let mut total = 0.0;
    for w in states.windows(2) {
        total -= w[0].inner(&w[1])?.arg();
    }
    if closed {
        total -= states.last().unwrap().inner(&states[0])?.arg();
    }
    Ok(PhaseResult::from_unwrapped(total, PhaseMethod::Pancharatnam))
}

/// Named phase formulas evaluated at a fixed mixing angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedForm {
    /// Single atom, `phi_r` swept: `sin²θ Δφ`.
    Phi1,
    /// `phi_mu` swept alone: `2 sin²θ cos²θ / N² Δφ`.
    Phi2,
    /// `phi_p` and `phi_mu` swept together: `-2 sin⁴θ / N² Δφ`.
    Phi2Prime,
    /// `phi_p` swept alone: `-2 sin²θ / N² Δφ`.
    Phi2DoublePrime,
}

impl ClosedForm {
    /// Phase per radian of sweep at mixing angle `theta`.
    pub fn integrand(self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let (s2, c2) = (s * s, c * c);
        let n2 = d2_norm_sqr(theta);
        match self {
            Self::Phi1 => s2,
            Self::Phi2 => 2.0 * s2 * c2 / n2,
            Self::Phi2Prime => -2.0 * s2 * s2 / n2,
            Self::Phi2DoublePrime => -2.0 * s2 / n2,
        }
    }
}

/// Phase picked up while the swept drive phase advances by `delta_phi` at
/// fixed `theta_m`.
pub fn closed_form_phase(kind: ClosedForm, theta_m: f64, delta_phi: f64) -> PhaseResult {
    PhaseResult::from_unwrapped(kind.integrand(theta_m) * delta_phi, PhaseMethod::ClosedForm)
}

/// Phase of a loop where `theta` rises `0 -> theta_max` and falls back while
/// the swept phase advances monotonically at `dphi/dtheta = ratio` (in
/// magnitude) on both legs, so both legs add.
pub fn closed_form_loop(kind: ClosedForm, theta_max: f64, ratio: f64) -> PhaseResult {
    let n = 4096;
    let h = theta_max / n as f64;
    let y: Vec<f64> = (0..=n).map(|k| kind.integrand(k as f64 * h)).collect();
    let one_way = ratio * simpson(&y, h);
    PhaseResult::from_unwrapped(2.0 * one_way, PhaseMethod::ClosedForm)
}

/// `-integral E(t) dt` over uniform samples.
pub fn dynamical_phase(energies: &[f64], dt: f64) -> PhaseResult {
    PhaseResult::from_unwrapped(-simpson(energies, dt), PhaseMethod::Dynamical)
}

/// `integral sin⁴θ(t) V33 dt` over the schedule, the estimate of the
/// interaction-induced phase magnitude when `d2` leaks through `V33`.
pub fn sin4_estimate(schedule: &PulseSchedule, v33: f64, steps: usize) -> f64 {
    let n = steps.max(2) + steps % 2;
    let h = schedule.total_time / n as f64;
    let y: Vec<f64> = (0..=n)
        .map(|k| {
            let t = (k as f64 * h).min(schedule.total_time);
            schedule.parameters(t, Side::Right).0[0].sin().powi(4)
        })
        .collect();
    v33 * simpson(&y, h)
}

/// Unwrapped phase of one component along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractedPhase {
    pub phases: Vec<f64>,
    /// False where the amplitude is below the floor.
    pub reliable: Vec<bool>,
}

impl ExtractedPhase {
    pub fn final_phase(&self) -> f64 {
        *self.phases.last().expect("non-empty")
    }
}

/// `arg psi_k[index]`, continued onto the branch nearest the last reliable
/// value; points with amplitude below `floor` are flagged and do not move
/// the reference.
pub fn extract_phase(states: &[CVector], index: usize, floor: f64) -> Result<ExtractedPhase> {
    if states.is_empty() {
        return Err(GeometryError::InvalidPath("empty trajectory".into()));
    }
    if let Some(bad) = states.iter().find(|s| index >= s.dim()) {
        return Err(LinalgError::DimMismatch(format!("index {index} out of range for dim {}", bad.dim())).into());
    }
    for s in [&states[0], states.last().unwrap()] {
        let amplitude = s[index].norm();
        if amplitude < floor {
            return Err(GeometryError::VanishingAmplitude { index, amplitude });
        }
    }
    let amplitudes: Vec<_> = states.iter().map(|s| s[index]).collect();
    Ok(unwrap_phases(&amplitudes, floor))
}

/// Nearest-branch continuation of `arg z_k` without the endpoint check of
/// [`extract_phase`]; leading points below `floor` take the first reliable
/// value's branch.
pub fn unwrap_phases(amplitudes: &[Complex], floor: f64) -> ExtractedPhase {
    let first = amplitudes.iter().find(|z| z.norm() >= floor).copied().unwrap_or_default();
    let mut reference = first.arg();
    let mut phases = Vec::with_capacity(amplitudes.len());
    let mut reliable = Vec::with_capacity(amplitudes.len());
    for &z in amplitudes {
        let value = reference + wrap_angle(z.arg() - reference);
        let ok = z.norm() >= floor;
        if ok {
            reference = value;
        }
        phases.push(value);
        reliable.push(ok);
    }
    ExtractedPhase { phases, reliable }
}

/// Scheme-1 Berry phase `phi2'` in closed form (`dphi_p/dtheta = 2`).
pub fn scheme1_berry_phase() -> PhaseResult {
    closed_form_loop(ClosedForm::Phi2Prime, PI / 2.0, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;
    use crate::pulses::{AmplitudeShape, PhaseLaw};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn fd_connection(kind: DarkKind, p: [f64; 3], dp: [f64; 3], eps: f64) -> f64 {
        let at = |s: f64| gauge_vector(kind, [p[0] + s * dp[0], p[1] + s * dp[1], p[2] + s * dp[2]]);
        let d = at(0.0);
        let diff = at(eps).sub(&at(-eps)).unwrap().scale((0.5 / eps).into());
        (I * d.inner(&diff).unwrap()).re
    }

    #[test]
    fn connection_matches_finite_differences() {
        let points = [
            ([0.3, 0.7, -1.1], [0.2, 1.3, -0.4]),
            ([1.2, -2.0, 0.5], [-0.7, 0.1, 2.2]),
            ([FRAC_PI_4, 0.0, 3.0], [0.0, 1.0, 1.0]),
            ([1.5, 2.5, -0.3], [1.1, -0.6, 0.9]),
        ];
        for kind in [DarkKind::D1, DarkKind::D2, DarkKind::D2Prime] {
            for (p, dp) in points {
                let a = berry_connection(kind, p, dp);
                let fd = fd_connection(kind, p, dp, 1e-5);
                assert!((a - fd).abs() < 1e-8, "{kind:?} {p:?}: {a} vs {fd}");
            }
        }
    }

    #[test]
    fn connection_special_values() {
        assert_eq!(berry_connection_d2([0.8, 0.3, 0.2], [1.0, 0.0, 0.0]), 0.0);
        let r = 0.37;
        assert!((berry_connection_d2([FRAC_PI_2, 0.0, 0.0], [0.0, r, 0.0]) + r).abs() < 1e-15);
    }

    fn sweep(law: PhaseLaw, theta_max: f64) -> PulseSchedule {
        let t = 10.0;
        let shape = AmplitudeShape::RampHoldReturn { theta_max, ramp: t, hold: t };
        PulseSchedule::new(1.0, t, 3.0 * t, law, shape).unwrap()
    }

    #[test]
    fn constant_phases_give_no_phase() {
        let s = sweep(PhaseLaw::ConstantBoth { phi_p: 0.4, phi_mu: -0.2 }, 1.0);
        let path = ParamPath::from_schedule(&s, 1200).unwrap();
        for kind in [DarkKind::D1, DarkKind::D2, DarkKind::D2Prime] {
            assert!(geometric_phase_quadrature(&path, kind).unwrap().unwrapped().abs() < 1e-14);
        }
    }

    #[test]
    fn mu_sweep_at_quarter_pi() {
        let law = PhaseLaw::SweepMuOnly { phi_p: 0.0, start: 0.0, end: PI, window: (10.0, 20.0) };
        let s = sweep(law, FRAC_PI_4);
        let path = ParamPath::from_schedule(&s, 1200).unwrap();
        let q = geometric_phase_quadrature(&path, DarkKind::D2).unwrap();
        assert!((q.unwrapped() - 2.0 * PI / 3.0).abs() < 1e-9);
        let d1 = geometric_phase_quadrature(&path, DarkKind::D1).unwrap();
        assert!((d1.unwrapped() - FRAC_PI_2).abs() < 1e-9);
        let c = closed_form_phase(ClosedForm::Phi2, FRAC_PI_4, PI);
        assert!((c.unwrapped() - 2.0 * PI / 3.0).abs() < 1e-14);
        let p = pancharatnam_phase(&path.states(DarkKind::D2), false).unwrap();
        assert!((p.unwrapped() - q.unwrapped()).abs() < 1e-4);
    }

    #[test]
    fn closed_forms() {
        assert!((closed_form_phase(ClosedForm::Phi1, FRAC_PI_4, PI).unwrapped() - FRAC_PI_2).abs() < 1e-14);
        assert!(closed_form_phase(ClosedForm::Phi2, FRAC_PI_2, 1.7).unwrapped().abs() < 1e-15);
        let dp = closed_form_phase(ClosedForm::Phi2DoublePrime, FRAC_PI_4, PI);
        assert!((dp.unwrapped() + 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((dp.value - 2.0 * PI / 3.0).abs() < 1e-14 && dp.winding == -1);
        for th in [0.1, 0.6, 1.3] {
            let ratio = ClosedForm::Phi2.integrand(th) / ClosedForm::Phi2DoublePrime.integrand(th);
            assert!((ratio + th.cos().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn scheme1_loop_agrees_with_time_domain() {
        let tau = 12.0 * PI;
        let s = PulseSchedule::scheme1(1.0, tau).unwrap();
        let path = ParamPath::from_schedule(&s, 8192).unwrap();
        assert!(path.is_closed());
        let q = geometric_phase_quadrature(&path, DarkKind::D2).unwrap();
        let c = scheme1_berry_phase();
        assert!((q.unwrapped() - c.unwrapped()).abs() < 1e-8, "{} {}", q.unwrapped(), c.unwrapped());
        let p = pancharatnam_phase(&path.states(DarkKind::D2), true).unwrap();
        assert!((p.unwrapped() - q.unwrapped()).abs() < 1e-4);
        assert!((q.unwrapped() + 3.459_289_981_120_924_6).abs() < 1e-8);
    }

    #[test]
    fn gauge_twist_leaves_loop_phase() {
        let tau = 5.0;
        let s = PulseSchedule::scheme1(1.0, tau).unwrap();
        let path = ParamPath::from_schedule(&s, 2000).unwrap();
        let chi = |t: f64| 0.8 * (PI * t / tau).sin().powi(2);
        let dchi = |t: f64| 0.8 * PI / tau * (2.0 * PI * t / tau).sin();
        let plain = geometric_phase_quadrature(&path, DarkKind::D2).unwrap().unwrapped();
        let twisted = integrate_connection(
            &path,
            |t, p, dp| berry_connection(DarkKind::D2, p, dp) - dchi(t),
            |p| gauge_vector(DarkKind::D2, p),
        )
        .unwrap()
        .unwrapped();
        assert!((plain - twisted).abs() < 1e-9);
        assert!((berry_connection(DarkKind::D2, [0.5, 0.1, 0.0], [0.1, 0.2, 0.0]) - dchi(1.0)).abs() > 1e-3);
        assert!(chi(2.0 * tau).abs() < 1e-12);
    }

    #[test]
    fn staircase_jump_on_single_atom() {
        let s = PulseSchedule::scheme2(1.0, 8.0).unwrap();
        let path = ParamPath::from_schedule(&s, 800).unwrap();
        assert_eq!(path.segments().len(), 2);
        let q = geometric_phase_quadrature(&path, DarkKind::D1).unwrap();
        assert!((q.unwrapped() - FRAC_PI_2).abs() < 1e-12);
        let d2 = geometric_phase_quadrature(&path, DarkKind::D2).unwrap();
        // At theta = pi/2 the d2 weight on phi3 vanishes, so the jump is invisible.
        assert!(d2.unwrapped().abs() < 1e-12);
    }

    #[test]
    fn unresolved_path_is_rejected() {
        let s = PulseSchedule::scheme1(1.0, 50.0).unwrap();
        let path = ParamPath::from_schedule(&s, 8).unwrap();
        assert!(matches!(
            geometric_phase_quadrature(&path, DarkKind::D2),
            Err(GeometryError::NotConverged { .. })
        ));
    }

    #[test]
    fn dynamical_phase_and_estimator() {
        assert_eq!(dynamical_phase(&[0.0; 11], 0.1).unwrapped(), 0.0);
        assert!((dynamical_phase(&[0.3; 11], 0.1).unwrapped() + 0.3).abs() < 1e-14);
        let tau = 12.0 * PI;
        let s = PulseSchedule::scheme1(1.0, tau).unwrap();
        let est = sin4_estimate(&s, 0.9, 4096);
        assert!((est - 0.75 * 0.9 * tau).abs() < 1e-9);
    }

    #[test]
    fn simpson_rules() {
        let f = |x: f64| x.powi(3) - 2.0 * x;
        for n in [2usize, 3, 7, 10] {
            let h = 2.0 / n as f64;
            let y: Vec<f64> = (0..=n).map(|k| f(k as f64 * h)).collect();
            assert!((simpson(&y, h) - 0.0).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn phase_extraction() {
        let states: Vec<CVector> = (0..50)
            .map(|k| CVector::new(vec![phasor(0.2 * k as f64) * 0.5, 0.5.into()]).unwrap())
            .collect();
        let e = extract_phase(&states, 0, AMPLITUDE_FLOOR).unwrap();
        assert!((e.final_phase() - 0.2 * 49.0).abs() < 1e-12);
        assert!(e.reliable.iter().all(|&r| r));
        let constant = vec![states[3].clone(); 5];
        let e = extract_phase(&constant, 0, AMPLITUDE_FLOOR).unwrap();
        assert!(e.phases.iter().all(|&p| (p - 0.6).abs() < 1e-15));
        let mut dying = states.clone();
        dying.push(CVector::new(vec![0.0.into(), 1.0.into()]).unwrap());
        assert!(matches!(
            extract_phase(&dying, 0, AMPLITUDE_FLOOR),
            Err(GeometryError::VanishingAmplitude { index: 0, .. })
        ));
    }

    #[test]
    fn phase_result_winding() {
        let r = PhaseResult::from_unwrapped(7.0, PhaseMethod::Quadrature);
        assert_eq!(r.winding, 1);
        assert!((r.unwrapped() - 7.0).abs() < 1e-15);
    }
}
