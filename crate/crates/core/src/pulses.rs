// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Drive schedules: Rabi amplitudes, phase-modulation laws, and the derived
//! mixing angle `theta` and relative phase `phi_r = phi_mu - phi_p`.
//!
//! Complex Rabi frequencies follow `Omega_p = |Omega_p| e^{i phi_p}` and
//! `Omega_mu = |Omega_mu| e^{-i phi_mu}` (note the conjugate on the second
//! field). Non-smooth points of a schedule are reported by
//! [`PulseSchedule::breakpoints`]; the propagators put grid nodes on them and
//! evaluate the left limit at the end of a segment, the right limit at its
//! start.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{phasor, Complex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("time {t} outside the schedule window [0, {total}]")]
    OutOfRange { t: f64, total: f64 },
    #[error("both drive amplitudes vanish at t = {0}")]
    DegenerateDrive(f64),
    #[error("invalid schedule: {0}")]
    Invalid(String),
}

/// Which one-sided limit to take at a discontinuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Time dependence of the two drive phases.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PhaseLaw {
    /// Both phases fixed.
    ConstantBoth { phi_p: f64, phi_mu: f64 },
    /// `phi_p(t) = phi_mu(t) = rate * t`, so `phi_r` stays zero.
    LinearSync { rate: f64 },
    /// `phi_p` fixed, `phi_r(t) = step * Θ(t - step_time)` with `Θ(0) = 1`.
    StaircaseRelative { phi_p: f64, step: f64, step_time: f64 },
    /// `phi_p` fixed, `phi_mu` swept linearly from `start` to `end` inside `window`.
    SweepMuOnly { phi_p: f64, start: f64, end: f64, window: (f64, f64) },
    /// `phi_mu` fixed, `phi_p` swept linearly from `start` to `end` inside `window`.
    SweepPOnly { phi_mu: f64, start: f64, end: f64, window: (f64, f64) },
    /// Both phases swept together from `start` to `end` inside `window`.
    SweepBoth { start: f64, end: f64, window: (f64, f64) },
}

fn ramp_value(t: f64, start: f64, end: f64, (t0, t1): (f64, f64)) -> (f64, f64) {
    if t <= t0 {
        (start, 0.0)
    } else if t >= t1 {
        (end, 0.0)
    } else {
        let rate = (end - start) / (t1 - t0);
        (start + rate * (t - t0), rate)
    }
}

fn ramp_rate(t: f64, start: f64, end: f64, (t0, t1): (f64, f64), side: Side) -> f64 {
    let inside = match side {
        Side::Left => t > t0 && t <= t1,
        Side::Right => t >= t0 && t < t1,
    };
    if inside {
        (end - start) / (t1 - t0)
    } else {
        0.0
    }
}

impl PhaseLaw {
    /// `(phi_p, phi_mu)` at `t`.
    pub fn phases(&self, t: f64, side: Side) -> (f64, f64) {
        match *self {
            PhaseLaw::ConstantBoth { phi_p, phi_mu } => (phi_p, phi_mu),
            PhaseLaw::LinearSync { rate } => (rate * t, rate * t),
            PhaseLaw::StaircaseRelative { phi_p, step, step_time } => {
                let on = match side {
                    Side::Right => t >= step_time,
                    Side::Left => t > step_time,
                };
                (phi_p, if on { phi_p + step } else { phi_p })
            }
            PhaseLaw::SweepMuOnly { phi_p, start, end, window } => {
                (phi_p, ramp_value(t, start, end, window).0)
            }
            PhaseLaw::SweepPOnly { phi_mu, start, end, window } => {
                (ramp_value(t, start, end, window).0, phi_mu)
            }
            PhaseLaw::SweepBoth { start, end, window } => {
                let v = ramp_value(t, start, end, window).0;
                (v, v)
            }
        }
    }

    /// `(d phi_p/dt, d phi_mu/dt)`; steps contribute no rate.
    pub fn rates(&self, t: f64, side: Side) -> (f64, f64) {
        match *self {
            PhaseLaw::ConstantBoth { .. } | PhaseLaw::StaircaseRelative { .. } => (0.0, 0.0),
            PhaseLaw::LinearSync { rate } => (rate, rate),
            PhaseLaw::SweepMuOnly { start, end, window, .. } => {
                (0.0, ramp_rate(t, start, end, window, side))
            }
            PhaseLaw::SweepPOnly { start, end, window, .. } => {
                (ramp_rate(t, start, end, window, side), 0.0)
            }
            PhaseLaw::SweepBoth { start, end, window } => {
                let r = ramp_rate(t, start, end, window, side);
                (r, r)
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            PhaseLaw::StaircaseRelative { step_time, .. } => vec![step_time],
            PhaseLaw::SweepMuOnly { window, .. }
            | PhaseLaw::SweepPOnly { window, .. }
            | PhaseLaw::SweepBoth { window, .. } => vec![window.0, window.1],
            _ => Vec::new(),
        }
    }

    fn validate(&self) -> Result<(), PulseError> {
        let window = match *self {
            PhaseLaw::SweepMuOnly { window, .. }
            | PhaseLaw::SweepPOnly { window, .. }
            | PhaseLaw::SweepBoth { window, .. } => Some(window),
            _ => None,
        };
        if let Some((t0, t1)) = window {
            if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
                return Err(PulseError::Invalid(format!("sweep window ({t0}, {t1}) is empty")));
            }
        }
        Ok(())
    }
}

/// Amplitude envelope of the two fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AmplitudeShape {
    /// `|Omega_p| = Omega sin(pi t / 2 tau)`, `|Omega_mu| = Omega |cos(pi t / 2 tau)|`.
    Sine,
    /// Mixing angle raised smoothly from 0 to `theta_max` over `ramp`, held for
    /// `hold`, and lowered back over `ramp`; amplitudes are `Omega (sin, cos) theta`.
    RampHoldReturn { theta_max: f64, ramp: f64, hold: f64 },
}

/// Complete drive description over `[0, total_time]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseSchedule {
    pub omega: f64,
    pub tau: f64,
    pub total_time: f64,
    pub phase_law: PhaseLaw,
    pub shape: AmplitudeShape,
}

/// `tau` for a given `Omega tau / 2 pi`.
pub fn tau_from_cycles(omega: f64, cycles: f64) -> f64 {
    2.0 * PI * cycles / omega
}

impl PulseSchedule {
    pub fn new(
        omega: f64,
        tau: f64,
        total_time: f64,
        phase_law: PhaseLaw,
        shape: AmplitudeShape,
    ) -> Result<Self, PulseError> {
        for (name, v) in [("omega", omega), ("tau", tau), ("total_time", total_time)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(PulseError::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        phase_law.validate()?;
        if let AmplitudeShape::RampHoldReturn { theta_max, ramp, hold } = shape {
            if !(0.0..=FRAC_PI_2).contains(&theta_max) || ramp <= 0.0 || hold < 0.0 {
                return Err(PulseError::Invalid("bad ramp-hold-return shape".into()));
            }
            if ((2.0 * ramp + hold) - total_time).abs() > 1e-9 * total_time {
                return Err(PulseError::Invalid(format!(
                    "ramp-hold-return lasts {} but total_time is {total_time}",
                    2.0 * ramp + hold
                )));
            }
        }
        Ok(Self { omega, tau, total_time, phase_law, shape })
    }

    /// Berry-phase gate: sine pulses over `2 tau`, phases locked at `pi t / tau`.
    pub fn scheme1(omega: f64, tau: f64) -> Result<Self, PulseError> {
        Self::new(
            omega,
            tau,
            2.0 * tau,
            PhaseLaw::LinearSync { rate: PI / tau },
            AmplitudeShape::Sine,
        )
    }

    /// Non-Berry gate: sine pulses over `2 tau`, `phi_r` steps by `pi/2` at `tau`.
    pub fn scheme2(omega: f64, tau: f64) -> Result<Self, PulseError> {
        Self::new(
            omega,
            tau,
            2.0 * tau,
            PhaseLaw::StaircaseRelative { phi_p: 0.0, step: FRAC_PI_2, step_time: tau },
            AmplitudeShape::Sine,
        )
    }

    /// First half of the counterintuitive sequence only (`theta: 0 -> pi/2`).
    pub fn half_pulse(omega: f64, tau: f64, phi_p: f64) -> Result<Self, PulseError> {
        Self::new(
            omega,
            tau,
            tau,
            PhaseLaw::ConstantBoth { phi_p, phi_mu: 0.0 },
            AmplitudeShape::Sine,
        )
    }

    fn check_time(&self, t: f64) -> Result<(), PulseError> {
        if t.is_finite() && t >= -1e-12 * self.total_time && t <= self.total_time * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(PulseError::OutOfRange { t, total: self.total_time })
        }
    }

    fn theta_of(&self, t: f64, side: Side) -> (f64, f64) {
        match self.shape {
            AmplitudeShape::Sine => {
                let x = PI * t / (2.0 * self.tau);
                let rising = match side {
                    Side::Left => t <= self.tau,
                    Side::Right => t < self.tau,
                };
                // theta = atan2(sin x, |cos x|) folds back after t = tau.
                let rate = PI / (2.0 * self.tau);
                let theta = x.sin().atan2(x.cos().abs());
                (theta, if rising { rate } else { -rate })
            }
            AmplitudeShape::RampHoldReturn { theta_max, ramp, hold } => {
                let up = |s: f64| theta_max * 0.5 * (1.0 - (PI * s / ramp).cos());
                let up_rate = |s: f64| theta_max * 0.5 * PI / ramp * (PI * s / ramp).sin();
                let down_start = ramp + hold;
                if t <= ramp {
                    (up(t), up_rate(t))
                } else if t <= down_start {
                    (theta_max, 0.0)
                } else {
                    let s = self.total_time - t;
                    (up(s), -up_rate(s))
                }
            }
        }
    }

    /// `(|Omega_p|, |Omega_mu|)` at `t`.
    pub fn amplitudes(&self, t: f64) -> Result<(f64, f64), PulseError> {
        self.check_time(t)?;
        Ok(self.amplitudes_unchecked(t))
    }

    fn amplitudes_unchecked(&self, t: f64) -> (f64, f64) {
        match self.shape {
            AmplitudeShape::Sine => {
                let x = PI * t / (2.0 * self.tau);
                (self.omega * x.sin(), self.omega * x.cos().abs())
            }
            AmplitudeShape::RampHoldReturn { .. } => {
                let (theta, _) = self.theta_of(t, Side::Right);
                (self.omega * theta.sin(), self.omega * theta.cos())
            }
        }
    }

    /// `(phi_p, phi_mu)` at `t`, right-continuous.
    pub fn phases(&self, t: f64) -> Result<(f64, f64), PulseError> {
        self.check_time(t)?;
        Ok(self.phase_law.phases(t, Side::Right))
    }

    pub fn relative_phase(&self, t: f64) -> Result<f64, PulseError> {
        let (p, m) = self.phases(t)?;
        Ok(m - p)
    }

    /// Mixing angle `theta = atan2(|Omega_p|, |Omega_mu|)` in `[0, pi/2]`.
    pub fn mixing_angle(&self, t: f64) -> Result<f64, PulseError> {
        let (ap, am) = self.amplitudes(t)?;
        if ap == 0.0 && am == 0.0 {
            return Err(PulseError::DegenerateDrive(t));
        }
        Ok(ap.atan2(am).clamp(0.0, FRAC_PI_2))
    }

    /// Complex `(Omega_p, Omega_mu)` at `t` with the given one-sided limit.
    pub fn rabi(&self, t: f64, side: Side) -> (Complex, Complex) {
        let (ap, am) = self.amplitudes_unchecked(t);
        let (pp, pm) = self.phase_law.phases(t, side);
        (phasor(pp) * ap, phasor(-pm) * am)
    }

    /// Parameter point `(theta, phi_p, phi_r)` and its time derivative.
    pub fn parameters(&self, t: f64, side: Side) -> ([f64; 3], [f64; 3]) {
        let (theta, dtheta) = self.theta_of(t, side);
        let (pp, pm) = self.phase_law.phases(t, side);
        let (dpp, dpm) = self.phase_law.rates(t, side);
        ([theta, pp, pm - pp], [dtheta, dpp, dpm - dpp])
    }

    /// Interior points where amplitudes or phases are not smooth, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = self.phase_law.breakpoints();
        match self.shape {
            AmplitudeShape::Sine => pts.push(self.tau),
            AmplitudeShape::RampHoldReturn { ramp, hold, .. } => {
                pts.push(ramp);
                pts.push(ramp + hold);
            }
        }
        let eps = 1e-12 * self.total_time;
        pts.retain(|&t| t > eps && t < self.total_time - eps);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= eps);
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAU: f64 = 12.0 * PI;

    #[test]
    fn sine_amplitudes_at_landmarks() {
        let s = PulseSchedule::scheme1(1.0, TAU).unwrap();
        let (p, m) = s.amplitudes(0.0).unwrap();
        assert_eq!((p, m), (0.0, 1.0));
        let (p, m) = s.amplitudes(TAU).unwrap();
        assert!((p - 1.0).abs() < 1e-15 && m.abs() < 1e-15);
        let (p, m) = s.amplitudes(TAU / 2.0).unwrap();
        let r = 0.5f64.sqrt();
        assert!((p - r).abs() < 1e-15 && (m - r).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let s = PulseSchedule::scheme2(1.0, TAU).unwrap();
        assert!(matches!(s.amplitudes(-1.0), Err(PulseError::OutOfRange { .. })));
        assert!(matches!(s.phases(2.5 * TAU), Err(PulseError::OutOfRange { .. })));
    }

    #[test]
    fn linear_sync_phases() {
        let s = PulseSchedule::scheme1(1.0, TAU).unwrap();
        let (p, m) = s.phases(TAU).unwrap();
        assert!((p - PI).abs() < 1e-14 && (m - PI).abs() < 1e-14);
    }

    #[test]
    fn staircase_phases() {
        let s = PulseSchedule::scheme2(1.0, TAU).unwrap();
        assert_eq!(s.phases(TAU / 2.0).unwrap(), (0.0, 0.0));
        assert_eq!(s.phases(1.5 * TAU).unwrap(), (0.0, FRAC_PI_2));
        // Right-continuous at the step, left limit still zero.
        assert_eq!(s.phases(TAU).unwrap(), (0.0, FRAC_PI_2));
        assert_eq!(s.phase_law.phases(TAU, Side::Left), (0.0, 0.0));
    }

    #[test]
    fn constant_law() {
        let law = PhaseLaw::ConstantBoth { phi_p: 0.0, phi_mu: 0.0 };
        for t in [0.0, 1.0, 17.0] {
            assert_eq!(law.phases(t, Side::Right), (0.0, 0.0));
        }
    }

    #[test]
    fn mixing_angle_landmarks() {
        let s = PulseSchedule::scheme1(1.0, TAU).unwrap();
        assert_eq!(s.mixing_angle(0.0).unwrap(), 0.0);
        assert!((s.mixing_angle(TAU).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((s.mixing_angle(TAU / 2.0).unwrap() - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_drive() {
        let s = PulseSchedule::scheme1(1.0, TAU).unwrap();
        let mut z = s.clone();
        z.omega = 0.0;
        assert!(matches!(z.mixing_angle(1.0), Err(PulseError::DegenerateDrive(_))));
    }

    #[test]
    fn sine_breakpoint_is_tau() {
        let s = PulseSchedule::scheme2(1.0, TAU).unwrap();
        assert_eq!(s.breakpoints(), vec![TAU]);
        let h = PulseSchedule::half_pulse(1.0, TAU, 0.3).unwrap();
        assert!(h.breakpoints().is_empty());
    }

    #[test]
    fn ramp_hold_return_shape() {
        let law = PhaseLaw::SweepMuOnly { phi_p: 0.0, start: 0.0, end: PI, window: (TAU, 2.0 * TAU) };
        let shape = AmplitudeShape::RampHoldReturn { theta_max: 0.6, ramp: TAU, hold: TAU };
        let s = PulseSchedule::new(1.0, TAU, 3.0 * TAU, law, shape).unwrap();
        assert_eq!(s.breakpoints(), vec![TAU, 2.0 * TAU]);
        assert!((s.mixing_angle(1.5 * TAU).unwrap() - 0.6).abs() < 1e-15);
        assert!(s.mixing_angle(3.0 * TAU).unwrap().abs() < 1e-15);
        let (_, m) = s.phases(1.5 * TAU).unwrap();
        assert!((m - FRAC_PI_2).abs() < 1e-14);
        let ([_, _, r], [_, _, dr]) = s.parameters(1.5 * TAU, Side::Right);
        assert!((r - FRAC_PI_2).abs() < 1e-14);
        assert!((dr - PI / TAU).abs() < 1e-15);
    }

    #[test]
    fn rejects_inconsistent_ramp() {
        let law = PhaseLaw::ConstantBoth { phi_p: 0.0, phi_mu: 0.0 };
        let shape = AmplitudeShape::RampHoldReturn { theta_max: 0.6, ramp: 1.0, hold: 1.0 };
        assert!(PulseSchedule::new(1.0, 1.0, 5.0, law, shape).is_err());
    }
}
