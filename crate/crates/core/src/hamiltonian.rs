// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Single- and two-atom Hamiltonians.
//!
//! Each atom has levels `|0>, |1>, |2>, |3>`: `|0>` is the idle qubit level,
//! `|1> <-> |2>` is driven by `Omega_p` and `|2> <-> |3>` by `Omega_mu`.
//! Product states `|a>|b>` sit at index `4a + b`. Energies are in units of the
//! peak Rabi frequency.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{CMatrix, CVector, Complex, LinalgError, ONE, ZERO};
use crate::pulses::{PulseSchedule, Side};

pub const LEVELS: usize = 4;
pub const PAIR_DIM: usize = LEVELS * LEVELS;

#[inline]
pub const fn product_index(a: usize, b: usize) -> usize {
    LEVELS * a + b
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("decay rate {name} must be non-negative and finite, got {value}")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("interaction {name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
}

/// Rydberg interaction shifts and decay rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    pub v22: f64,
    pub v23: f64,
    pub v33: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl Default for SystemParams {
    /// Coherent reference point: `V23 = 1.1`, `V33 = 0.9`, everything else zero.
    fn default() -> Self {
        Self { v22: 0.0, v23: 1.1, v33: 0.9, gamma2: 0.0, gamma3: 0.0 }
    }
}

impl SystemParams {
    pub fn new(v22: f64, v23: f64, v33: f64, gamma2: f64, gamma3: f64) -> Result<Self, ParamError> {
        let p = Self { v22, v23, v33, gamma2, gamma3 };
        p.validate()?;
        Ok(p)
    }

    pub fn coherent(v22: f64, v23: f64, v33: f64) -> Result<Self, ParamError> {
        Self::new(v22, v23, v33, 0.0, 0.0)
    }

    pub fn with_decay(mut self, gamma: f64) -> Result<Self, ParamError> {
        self.gamma2 = gamma;
        self.gamma3 = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in [("v22", self.v22), ("v23", self.v23), ("v33", self.v33)] {
            if !value.is_finite() {
                return Err(ParamError::NonFinite { name, value });
            }
        }
        for (name, value) in [("gamma2", self.gamma2), ("gamma3", self.gamma3)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ParamError::NegativeRate { name, value });
            }
        }
        Ok(())
    }

    pub fn is_dissipative(&self) -> bool {
        self.gamma2 > 0.0 || self.gamma3 > 0.0
    }
}

/// `H_i = Omega_p |2><1| + Omega_mu |3><2| + h.c.` on `{|0>,..,|3>}`.
pub fn single_atom_h(omega_p: Complex, omega_mu: Complex) -> CMatrix {
    let mut h = CMatrix::zeros(LEVELS, LEVELS);
    h[(2, 1)] = omega_p;
    h[(1, 2)] = omega_p.conj();
    h[(3, 2)] = omega_mu;
    h[(2, 3)] = omega_mu.conj();
    h
}

/// Two-atom Hamiltonian on the 16-dimensional product space: the kron sum
/// of identical single-atom drives plus `V22 |22><22|`, `V33 |33><33|`, and
/// the exchange term `V23 (|23><32| + |32><23|)`.
pub fn two_atom_h(omega_p: Complex, omega_mu: Complex, p: &SystemParams) -> CMatrix {
    let h1 = single_atom_h(omega_p, omega_mu);
    let id = CMatrix::identity(LEVELS);
    let mut h = h1.kron(&id);
    h.axpy(ONE, &id.kron(&h1));
    let (i22, i23, i32, i33) =
        (product_index(2, 2), product_index(2, 3), product_index(3, 2), product_index(3, 3));
    h[(i22, i22)] += p.v22;
    h[(i33, i33)] += p.v33;
    h[(i23, i32)] += p.v23;
    h[(i32, i23)] += p.v23;
    h
}

/// Atom-exchange operator `|a>|b> -> |b>|a>`.
pub fn swap_operator() -> CMatrix {
    let mut s = CMatrix::zeros(PAIR_DIM, PAIR_DIM);
    for a in 0..LEVELS {
        for b in 0..LEVELS {
            s[(product_index(b, a), product_index(a, b))] = ONE;
        }
    }
    s
}

/// Labels of the product basis and the six symmetric states
/// `phi1 = |11>`, `phi2 = (|12>+|21>)/√2`, `phi3 = (|13>+|31>)/√2`,
/// `phi4 = |22>`, `phi5 = (|23>+|32>)/√2`, `phi6 = |33>`.
#[derive(Debug, Clone)]
pub struct BasisMap {
    pub labels: Vec<String>,
    pub symmetric: [CVector; 6],
}

impl Default for BasisMap {
    fn default() -> Self {
        Self::new()
    }
}

impl BasisMap {
    pub fn new() -> Self {
        let labels = (0..LEVELS)
            .flat_map(|a| (0..LEVELS).map(move |b| format!("{a}{b}")))
            .collect();
        let single = |a, b| CVector::basis(PAIR_DIM, product_index(a, b));
        let pair = |a, b| {
            let mut v = CVector::zeros(PAIR_DIM);
            v[product_index(a, b)] = Complex::new(FRAC_1_SQRT_2, 0.0);
            v[product_index(b, a)] = Complex::new(FRAC_1_SQRT_2, 0.0);
            v
        };
        Self {
            labels,
            symmetric: [single(1, 1), pair(1, 2), pair(1, 3), single(2, 2), pair(2, 3), single(3, 3)],
        }
    }

    /// Symmetric state `phi_j` for `j` in `1..=6`.
    pub fn phi(&self, j: usize) -> &CVector {
        &self.symmetric[j - 1]
    }

    /// 16×6 isometry whose columns are the symmetric states.
    pub fn isometry(&self) -> CMatrix {
        CMatrix::from_columns(&self.symmetric).expect("six columns of length 16")
    }

    /// `(phi1 + phi4)/√2`.
    pub fn epr_symmetric(&self) -> CVector {
        self.phi(1).add(self.phi(4)).unwrap().scale(Complex::new(FRAC_1_SQRT_2, 0.0))
    }

    /// `(phi1 - phi4)/√2`.
    pub fn epr_antisymmetric(&self) -> CVector {
        self.phi(1).sub(self.phi(4)).unwrap().scale(Complex::new(FRAC_1_SQRT_2, 0.0))
    }

    /// Product-basis index for a label such as `"13"`.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// `P^H H P` restricted to the symmetric subspace.
pub fn project_symmetric(h16: &CMatrix, basis: &BasisMap) -> Result<CMatrix, LinalgError> {
    if h16.rows() != PAIR_DIM || h16.cols() != PAIR_DIM {
        return Err(LinalgError::DimMismatch(format!(
            "expected {PAIR_DIM}x{PAIR_DIM}, got {}x{}",
            h16.rows(),
            h16.cols()
        )));
    }
    let p = basis.isometry();
    p.adjoint().matmul(&h16.matmul(&p)?)
}

/// A time-dependent Hamiltonian the propagators can integrate.
pub trait TimeDependent: Sync {
    fn dim(&self) -> usize;
    fn at(&self, t: f64, side: Side) -> CMatrix;
    /// Interior times where `H(t)` is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Two-atom Hamiltonian driven by a pulse schedule.
#[derive(Debug, Clone)]
pub struct PairDrive {
    pub schedule: PulseSchedule,
    pub params: SystemParams,
}

impl PairDrive {
    pub fn new(schedule: PulseSchedule, params: SystemParams) -> Self {
        Self { schedule, params }
    }
}

impl TimeDependent for PairDrive {
    fn dim(&self) -> usize {
        PAIR_DIM
    }

    fn at(&self, t: f64, side: Side) -> CMatrix {
        let (op, om) = self.schedule.rabi(t, side);
        two_atom_h(op, om, &self.params)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.schedule.breakpoints()
    }
}

/// One atom under the same drive.
#[derive(Debug, Clone)]
pub struct SingleDrive {
    pub schedule: PulseSchedule,
}

impl TimeDependent for SingleDrive {
    fn dim(&self) -> usize {
        LEVELS
    }

    fn at(&self, t: f64, side: Side) -> CMatrix {
        let (op, om) = self.schedule.rabi(t, side);
        single_atom_h(op, om)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.schedule.breakpoints()
    }
}

/// Wraps a plain closure `t -> H(t)` of fixed dimension.
pub struct FnHamiltonian<F> {
    dim: usize,
    f: F,
    breakpoints: Vec<f64>,
}

impl<F: Fn(f64) -> CMatrix + Sync> FnHamiltonian<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f, breakpoints: Vec::new() }
    }

    pub fn with_breakpoints(mut self, pts: Vec<f64>) -> Self {
        self.breakpoints = pts;
        self
    }
}

impl<F: Fn(f64) -> CMatrix + Sync> TimeDependent for FnHamiltonian<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, t: f64, _side: Side) -> CMatrix {
        (self.f)(t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
}

/// Per-atom collapse operators `sqrt(gamma2)|1><2|` and `sqrt(gamma3)|2><3|`,
/// embedded on both atoms. Zero-rate channels are omitted.
pub fn collapse_operators(p: &SystemParams) -> Vec<CMatrix> {
    let id = CMatrix::identity(LEVELS);
    let mut ops = Vec::new();
    for (rate, lower, upper) in [(p.gamma2, 1, 2), (p.gamma3, 2, 3)] {
        if rate <= 0.0 {
            continue;
        }
        let mut a = CMatrix::zeros(LEVELS, LEVELS);
        a[(lower, upper)] = Complex::new(rate.sqrt(), 0.0);
        ops.push(a.kron(&id));
        ops.push(id.kron(&a));
    }
    ops
}

/// Zero-padding helper: is every entry of `h` coupling `|0 b>` to `|a b'>`
/// with `a != 0` exactly zero (and likewise for the second atom)?
pub fn idle_level_decoupled(h: &CMatrix) -> bool {
    for r in 0..PAIR_DIM {
        for c in 0..PAIR_DIM {
            let (ra, rb) = (r / LEVELS, r % LEVELS);
            let (ca, cb) = (c / LEVELS, c % LEVELS);
            let crosses = ((ra == 0) != (ca == 0)) || ((rb == 0) != (cb == 0));
            if crosses && h[(r, c)] != ZERO {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, phasor};
    use std::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn single_atom_zero_and_single_coupling() {
        assert_eq!(single_atom_h(ZERO, ZERO), CMatrix::zeros(4, 4));
        let h = single_atom_h(ONE, ZERO);
        for i in 0..4 {
            for j in 0..4 {
                let want = if (i, j) == (2, 1) || (i, j) == (1, 2) { ONE } else { ZERO };
                assert_eq!(h[(i, j)], want);
            }
        }
    }

    #[test]
    fn single_atom_spectrum_at_equal_amplitudes() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let h = single_atom_h(c(a, 0.0), c(a, 0.0));
        let e = hermitian_eig(&h, 1e-12).unwrap();
        let want = [-1.0, 0.0, 0.0, 1.0];
        for (got, want) in e.values.iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{:?}", e.values);
        }
    }

    #[test]
    fn two_atom_interaction_entries() {
        let p = SystemParams::coherent(0.3, 1.1, 0.9).unwrap();
        let h = two_atom_h(ZERO, ZERO, &p);
        assert_eq!(h[(product_index(3, 3), product_index(3, 3))], c(0.9, 0.0));
        assert_eq!(h[(product_index(2, 3), product_index(3, 2))], c(1.1, 0.0));
        assert_eq!(h[(product_index(2, 2), product_index(2, 2))], c(0.3, 0.0));
        let zero = SystemParams::coherent(0.0, 0.0, 0.0).unwrap();
        assert_eq!(two_atom_h(ZERO, ZERO, &zero), CMatrix::zeros(16, 16));
    }

    /// Symmetric-sector 6×6 matrix written out by hand for V22 = V23 = 0.
    fn hand_built_symmetric(op: Complex, om: Complex, v33: f64) -> CMatrix {
        let r2 = c(SQRT_2, 0.0);
        let mut m = CMatrix::zeros(6, 6);
        m[(1, 0)] = r2 * op;
        m[(2, 1)] = om;
        m[(3, 1)] = r2 * op;
        m[(4, 2)] = op;
        m[(4, 3)] = r2 * om;
        m[(5, 4)] = r2 * om;
        let mut full = m.add(&m.adjoint()).unwrap();
        full[(5, 5)] = c(v33, 0.0);
        full
    }

    #[test]
    fn symmetric_projection_matches_hand_built_matrix() {
        let basis = BasisMap::new();
        let op = phasor(0.7) * 0.6;
        let om = phasor(-1.3) * 0.8;
        let p = SystemParams::coherent(0.0, 0.0, 0.9).unwrap();
        let h6 = project_symmetric(&two_atom_h(op, om, &p), &basis).unwrap();
        let want = hand_built_symmetric(op, om, 0.9);
        assert!(h6.sub(&want).unwrap().max_abs() < 1e-14);
        // <phi2|H|phi1> = √2 Omega_p
        assert!((h6[(1, 0)] - op * SQRT_2).norm() < 1e-14);
    }

    #[test]
    fn kron_sum_restricted_equals_drive_part() {
        let basis = BasisMap::new();
        let op = phasor(0.2) * 0.9;
        let om = phasor(0.5) * 0.4;
        let h1 = single_atom_h(op, om);
        let id = CMatrix::identity(4);
        let ks = h1.kron(&id).add(&id.kron(&h1)).unwrap();
        let got = project_symmetric(&ks, &basis).unwrap();
        assert!(got.sub(&hand_built_symmetric(op, om, 0.0)).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn projection_of_identity() {
        let basis = BasisMap::new();
        let p = project_symmetric(&CMatrix::identity(16), &basis).unwrap();
        assert!(p.sub(&CMatrix::identity(6)).unwrap().max_abs() < 1e-15);
        assert!(project_symmetric(&CMatrix::identity(6), &basis).is_err());
    }

    #[test]
    fn antisymmetric_sector_decoupled() {
        let basis = BasisMap::new();
        let mut asym = CVector::zeros(16);
        asym[product_index(1, 3)] = c(FRAC_1_SQRT_2, 0.0);
        asym[product_index(3, 1)] = c(-FRAC_1_SQRT_2, 0.0);
        let p = SystemParams::coherent(0.4, 1.3, 0.2).unwrap();
        let h = two_atom_h(phasor(0.3) * 0.7, phasor(1.1) * 0.5, &p);
        for phi in &basis.symmetric {
            assert!(h.sandwich(phi, &asym).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn symmetric_states_orthonormal() {
        let basis = BasisMap::new();
        for (i, a) in basis.symmetric.iter().enumerate() {
            for (j, b) in basis.symmetric.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b).unwrap() - c(want, 0.0)).norm() < 1e-15);
            }
        }
        assert_eq!(basis.index_of("13"), Some(7));
    }

    #[test]
    fn collapse_operators_skip_zero_rates() {
        let p = SystemParams::new(0.0, 0.0, 0.0, 1e-3, 0.0).unwrap();
        assert_eq!(collapse_operators(&p).len(), 2);
        let p = p.with_decay(1e-4).unwrap();
        assert_eq!(collapse_operators(&p).len(), 4);
        assert!(SystemParams::new(0.0, 0.0, 0.0, -1.0, 0.0).is_err());
    }
}
