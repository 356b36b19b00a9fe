// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Analytic dark states and their checks against the Hamiltonians.
//!
//! Vectors are stored exactly as the closed-form expressions read, with no
//! extra global phase:
//!
//! * `d1 = cos(theta) e^{i phi_r} |1> - sin(theta) |3>` (4-dim),
//! * `d2 = [ (cos²θ - sin²θ) phi1 + sin²θ e^{2i phi_p} phi4
//!          - √2 sinθ cosθ e^{-i phi_r} phi3 ] / N`, `N² = cos⁴θ + 2 sin⁴θ`,
//! * `d2' = cos²θ e^{2i phi_r} phi1 + sin²θ phi6 - √2 sinθ cosθ e^{i phi_r} phi3`.
//!
//! `d2` is annihilated by the two-atom Hamiltonian whenever `V22 = 0`, for
//! any `V23` and `V33`. `d2' = d1 ⊗ d1` has no weight on `|22>`, `|23>`,
//! `|32>`, so it is annihilated whenever `V33 = 0`, for any `V22` and `V23`.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::hamiltonian::{BasisMap, LEVELS, PAIR_DIM};
use crate::linalg::{hermitian_eig, phasor, CMatrix, CVector, Complex, LinalgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DarkKind {
    D1,
    D2,
    D2Prime,
}

#[derive(Debug, Clone)]
pub struct DarkState {
    pub kind: DarkKind,
    pub theta: f64,
    pub phi_p: f64,
    pub phi_mu: f64,
    pub vector: CVector,
}

impl DarkState {
    pub fn relative_phase(&self) -> f64 {
        self.phi_mu - self.phi_p
    }
}

/// `N² = cos⁴θ + 2 sin⁴θ`, bounded in `[2/3, 2]`.
pub fn d2_norm_sqr(theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    c.powi(4) + 2.0 * s.powi(4)
}

/// Components of `d2` on `(phi1, phi3, phi4)`.
pub fn d2_components(theta: f64, phi_p: f64, phi_mu: f64) -> [Complex; 3] {
    let (s, c) = theta.sin_cos();
    let n = d2_norm_sqr(theta).sqrt();
    let phi_r = phi_mu - phi_p;
    [
        Complex::new((c * c - s * s) / n, 0.0),
        phasor(-phi_r) * (-SQRT_2 * s * c / n),
        phasor(2.0 * phi_p) * (s * s / n),
    ]
}

fn symmetric_combination(basis: &BasisMap, coeffs: &[(usize, Complex)]) -> CVector {
    let mut v = CVector::zeros(PAIR_DIM);
    for &(j, a) in coeffs {
        v.axpy(a, basis.phi(j));
    }
    v
}

/// Two-atom dark state for `V22 = 0`.
pub fn dark_d2(theta: f64, phi_p: f64, phi_mu: f64) -> DarkState {
    let [a1, a3, a4] = d2_components(theta, phi_p, phi_mu);
    let vector = symmetric_combination(&BasisMap::new(), &[(1, a1), (3, a3), (4, a4)]);
    DarkState { kind: DarkKind::D2, theta, phi_p, phi_mu, vector }
}

/// Two-atom dark state for `V33 = 0`; depends on the drive phases only via `phi_r`.
pub fn dark_d2prime(theta: f64, phi_r: f64) -> DarkState {
    let (s, c) = theta.sin_cos();
    let coeffs = [
        (1, phasor(2.0 * phi_r) * (c * c)),
        (3, phasor(phi_r) * (-SQRT_2 * s * c)),
        (6, Complex::new(s * s, 0.0)),
    ];
    let vector = symmetric_combination(&BasisMap::new(), &coeffs);
    DarkState { kind: DarkKind::D2Prime, theta, phi_p: 0.0, phi_mu: phi_r, vector }
}

/// Single-atom dark state on `{|0>,..,|3>}`.
pub fn dark_d1(theta: f64, phi_r: f64) -> DarkState {
    let (s, c) = theta.sin_cos();
    let mut vector = CVector::zeros(LEVELS);
    vector[1] = phasor(phi_r) * c;
    vector[3] = Complex::new(-s, 0.0);
    DarkState { kind: DarkKind::D1, theta, phi_p: 0.0, phi_mu: phi_r, vector }
}

/// `‖H d‖`.
pub fn dark_residual(d: &DarkState, h: &CMatrix) -> Result<f64, LinalgError> {
    Ok(h.matvec(&d.vector)?.norm())
}

/// Number of eigenvalues of `h` with `|λ| < tol`.
pub fn dark_space_dim(h: &CMatrix, tol: f64) -> Result<usize, LinalgError> {
    let e = hermitian_eig(h, 1e-10)?;
    Ok(e.values.iter().filter(|l| l.abs() < tol).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{product_index, project_symmetric, single_atom_h, two_atom_h, SystemParams};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn close(a: &CVector, b: &CVector, tol: f64) -> bool {
        a.sub(b).unwrap().norm() < tol
    }

    #[test]
    fn d2_limits() {
        let basis = BasisMap::new();
        assert!(close(&dark_d2(0.0, 0.3, 1.2).vector, basis.phi(1), 1e-15));
        // theta = pi/2, phi_p = 0 -> -|EPR_as>
        let d = dark_d2(FRAC_PI_2, 0.0, 0.0);
        assert!(close(&d.vector, &basis.epr_antisymmetric().scale(Complex::new(-1.0, 0.0)), 1e-15));
        // phi_p = pi/2 -> -|EPR_s>
        let d = dark_d2(FRAC_PI_2, FRAC_PI_2, 0.0);
        assert!(close(&d.vector, &basis.epr_symmetric().scale(Complex::new(-1.0, 0.0)), 1e-15));
    }

    #[test]
    fn d2prime_limits_and_factorisation() {
        let basis = BasisMap::new();
        assert!(close(&dark_d2prime(0.0, 0.0).vector, basis.phi(1), 1e-15));
        assert!(close(&dark_d2prime(FRAC_PI_2, 0.8).vector, basis.phi(6), 1e-15));
        for &(theta, phi_r) in &[(0.3, 0.1), (1.1, -2.0), (0.77, 3.0)] {
            let d1 = dark_d1(theta, phi_r).vector;
            let prod = d1.kron(&d1);
            assert!(close(&dark_d2prime(theta, phi_r).vector, &prod, 1e-12));
            assert!((dark_d2prime(theta, phi_r).vector.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn d1_limits() {
        assert!(close(&dark_d1(0.0, 0.0).vector, &CVector::basis(4, 1), 1e-15));
        let minus3 = CVector::basis(4, 3).scale(Complex::new(-1.0, 0.0));
        assert!(close(&dark_d1(FRAC_PI_2, 0.4).vector, &minus3, 1e-15));
        let want = CVector::basis(4, 1).scale(phasor(FRAC_PI_2));
        assert!(close(&dark_d1(0.0, FRAC_PI_2).vector, &want, 1e-15));
    }

    #[test]
    fn residuals() {
        let params = SystemParams::coherent(0.0, 1.7, -0.4).unwrap();
        let (theta, pp, pm): (f64, f64, f64) = (0.9, 0.4, -1.1);
        let (s, c) = theta.sin_cos();
        let op = phasor(pp) * s;
        let om = phasor(-pm) * c;
        let h = two_atom_h(op, om, &params);
        assert!(dark_residual(&dark_d2(theta, pp, pm), &h).unwrap() < 1e-12);

        // d2' with V33 = 0 stays dark even for V22 != 0.
        for v22 in [0.0, 1.0, -2.5] {
            let p = SystemParams::coherent(v22, 1.5, 0.0).unwrap();
            let h = two_atom_h(op, om, &p);
            assert!(dark_residual(&dark_d2prime(theta, pm - pp), &h).unwrap() < 1e-12);
        }
        // but not for V33 != 0
        let p = SystemParams::coherent(0.0, 1.5, 0.5).unwrap();
        let h = two_atom_h(op, om, &p);
        assert!(dark_residual(&dark_d2prime(theta, pm - pp), &h).unwrap() > 1e-3);

        let h1 = single_atom_h(op, om);
        assert!(dark_residual(&dark_d1(theta, pm - pp), &h1).unwrap() < 1e-12);
        assert!(dark_residual(&dark_d1(theta, 0.0), &CMatrix::identity(2)).is_err());
    }

    #[test]
    fn normalisation_never_vanishes() {
        let mut min = f64::INFINITY;
        for k in 0..=2000 {
            let th = FRAC_PI_2 * k as f64 / 2000.0;
            let n2 = d2_norm_sqr(th);
            assert!((2.0 / 3.0 - 1e-12..=2.0 + 1e-12).contains(&n2));
            min = min.min(n2);
            assert!((dark_d2(th, 0.0, 0.0).vector.norm() - 1.0).abs() < 1e-12);
        }
        // Minimum 2/3 at sin²θ = 1/3, i.e. tan²θ = 1/2.
        assert!((min - 2.0 / 3.0).abs() < 1e-6);
        let th_min = FRAC_1_SQRT_2.atan();
        assert!((d2_norm_sqr(th_min) - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn real_gauge_at_zero_phases() {
        for k in 0..50 {
            let th = PI / 2.0 * k as f64 / 49.0;
            assert!(dark_d2(th, 0.0, 0.0).vector.iter().all(|z| z.im == 0.0));
        }
    }

    #[test]
    fn unnormalised_direction() {
        // (|Ωμ|²-|Ωp|², -√2 Ωμ Ωp, Ωp²) ∝ d2 components on (phi1, phi3, phi4)
        let (ap, am, pp, pm) = (0.37, 0.81, 0.6, -0.9);
        let op = phasor(pp) * ap;
        let om = phasor(-pm) * am;
        let raw = [Complex::new(am * am - ap * ap, 0.0), om * op * (-SQRT_2), op * op];
        let theta = ap.atan2(am);
        let d = d2_components(theta, pp, pm);
        let ratio = raw[0] / d[0];
        for (r, x) in raw.iter().zip(d) {
            assert!((r / x - ratio).norm() < 1e-12);
        }
    }

    #[test]
    fn dark_space_dimensions() {
        let basis = BasisMap::new();
        let (s, c) = 0.6f64.sin_cos();
        let (op, om) = (Complex::new(s, 0.0), Complex::new(c, 0.0));
        // V22 = V33 = 0, V23 != 0: d2 and d2' are both dark in the symmetric sector.
        let h = two_atom_h(op, om, &SystemParams::coherent(0.0, 1.3, 0.0).unwrap());
        let h6 = project_symmetric(&h, &basis).unwrap();
        assert!(dark_space_dim(&h6, 1e-9).unwrap() >= 2);
        // V33 != 0, V22 = 0: unique dark state.
        let h = two_atom_h(op, om, &SystemParams::coherent(0.0, 1.3, 0.9).unwrap());
        let h6 = project_symmetric(&h, &basis).unwrap();
        assert_eq!(dark_space_dim(&h6, 1e-9).unwrap(), 1);
        // No drive: the count equals the number of zero diagonal entries.
        let p = SystemParams::coherent(0.2, 0.0, 0.9).unwrap();
        let h = two_atom_h(Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), &p);
        let zeros = (0..16).filter(|&i| h[(i, i)].norm() == 0.0).count();
        assert_eq!(dark_space_dim(&h, 1e-9).unwrap(), zeros);
        assert_eq!(product_index(3, 3), 15);
    }
}
