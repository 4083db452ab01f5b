//! Harmonic-oscillator eigenfunctions of the relative coordinate.
//!
//! psi_n(x) = (a^2/pi)^(1/4) (2^n n!)^(-1/2) H_n(a x) exp(-(a x)^2 / 2)
//! with inverse length a = sqrt(mu * omega / hbar).  Everything is evaluated
//! through the normalized-function three-term recurrence, which stays in f64
//! range for any n supported here (the raw Hermite recurrence would not).

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::Error;
use crate::fp;

/// Reduced-mass oscillator defining the internal channel basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub mu: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl OscillatorParams {
    pub fn new(mu: f64, omega: f64, hbar: f64) -> Result<Self, Error> {
        if mu <= 0.0 || !mu.is_finite() {
            return Err(Error::InvalidParameter("reduced mass must be positive"));
        }
        if omega <= 0.0 || !omega.is_finite() {
            return Err(Error::InvalidParameter("omega must be positive"));
        }
        if hbar <= 0.0 || !hbar.is_finite() {
            return Err(Error::InvalidParameter("hbar must be positive"));
        }
        Ok(OscillatorParams { mu, omega, hbar })
    }

    /// Inverse oscillator length a = sqrt(mu omega / hbar).
    pub fn inv_length(&self) -> f64 {
        fp::sqrt(self.mu * self.omega / self.hbar)
    }
}

/// Normalized eigenfunction psi_n(x).
pub fn eval_psi(n: usize, x: f64, p: &OscillatorParams) -> f64 {
    let a = p.inv_length();
    fp::sqrt(a) * phi_scaled(n, a * x)
}

/// Derivative psi_n'(x) from the ladder identity
/// psi_n' = a (sqrt(n/2) psi_{n-1} - sqrt((n+1)/2) psi_{n+1}).
pub fn eval_psi_prime(n: usize, x: f64, p: &OscillatorParams) -> f64 {
    let a = p.inv_length();
    let lower = if n == 0 {
        0.0
    } else {
        fp::sqrt(n as f64 / 2.0) * eval_psi(n - 1, x, p)
    };
    let upper = fp::sqrt((n as f64 + 1.0) / 2.0) * eval_psi(n + 1, x, p);
    a * (lower - upper)
}

/// Dimensionless normalized function phi_n(u) = pi^(-1/4) (2^n n!)^(-1/2)
/// H_n(u) exp(-u^2/2), via the stable recurrence
/// phi_{k+1} = sqrt(2/(k+1)) u phi_k - sqrt(k/(k+1)) phi_{k-1}.
fn phi_scaled(n: usize, u: f64) -> f64 {
    let phi0 = fp::exp(-0.5 * u * u) / quarter_root(PI);
    if n == 0 {
        return phi0;
    }
    let mut prev = phi0;
    let mut cur = fp::sqrt(2.0) * u * phi0;
    for k in 1..n {
        let kf = k as f64;
        let next = fp::sqrt(2.0 / (kf + 1.0)) * u * cur - fp::sqrt(kf / (kf + 1.0)) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Polynomial parts p_n(u) = pi^(-1/4) (2^n n!)^(-1/2) H_n(u) for n = 0..=n_max,
/// so that phi_n(u) = p_n(u) exp(-u^2/2).  The quadrature keeps the Gaussian
/// (and any extra exponential weight) in a single exp() call, which is what
/// lets strongly shifted integrands stay inside f64 range.
pub(crate) fn poly_parts(n_max: usize, u: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0 / quarter_root(PI));
    if n_max == 0 {
        return;
    }
    out.push(fp::sqrt(2.0) * u * out[0]);
    for k in 1..n_max {
        let kf = k as f64;
        let next = fp::sqrt(2.0 / (kf + 1.0)) * u * out[k] - fp::sqrt(kf / (kf + 1.0)) * out[k - 1];
        out.push(next);
    }
}

/// Fourth root, avoiding a general powf for no_std builds.
fn quarter_root(x: f64) -> f64 {
    fp::sqrt(fp::sqrt(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit_params() -> OscillatorParams {
        OscillatorParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn ground_state_peak_value() {
        // psi_0(0) = pi^(-1/4) for a = 1.
        let p = unit_params();
        assert_abs_diff_eq!(eval_psi(0, 0.0, &p), 0.7511255444649425, epsilon = 1e-14);
    }

    #[test]
    fn odd_states_vanish_at_origin() {
        let p = unit_params();
        for n in [1, 3, 5, 7] {
            assert_abs_diff_eq!(eval_psi(n, 0.0, &p), 0.0, epsilon = 1e-300);
        }
    }

    #[test]
    fn third_state_matches_explicit_hermite_formula() {
        // Independent reference: H_3(u) = 8u^3 - 12u evaluated directly.
        let p = unit_params();
        let x = 0.7_f64;
        let h3 = 8.0 * x.powi(3) - 12.0 * x;
        let norm = (2.0_f64.powi(3) * 6.0).sqrt() * PI.powf(0.25);
        let reference = h3 * (-0.5 * x * x).exp() / norm;
        assert_abs_diff_eq!(eval_psi(3, x, &p), reference, epsilon = 1e-14);
    }

    #[test]
    fn scaling_with_inverse_length() {
        // psi_n(x; a) = sqrt(a) phi_n(a x): check against a stretched unit case.
        let p = OscillatorParams::new(2.0, 3.0, 1.0).unwrap();
        let a = p.inv_length();
        let unit = unit_params();
        for n in [0, 2, 5] {
            for x in [-1.3, 0.2, 0.9] {
                let expect = a.sqrt() * eval_psi(n, a * x, &unit);
                assert_abs_diff_eq!(eval_psi(n, x, &p), expect, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn first_state_derivative_at_origin() {
        // Closed form psi_1'(0) = sqrt(2) pi^(-1/4) for a = 1 (the ladder's
        // psi_0 and psi_2 terms contribute equally there).
        let p = unit_params();
        let expected = 2.0_f64.sqrt() * PI.powf(-0.25);
        assert_abs_diff_eq!(eval_psi_prime(1, 0.0, &p), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(
            eval_psi_prime(1, 0.0, &p),
            1.0622519320271969,
            epsilon = 1e-13
        );
    }

    #[test]
    fn derivative_matches_central_differences() {
        let p = OscillatorParams::new(0.5, 2.0, 1.0).unwrap();
        let h = 1e-5;
        for n in 0..12 {
            for x in [-2.1, -0.4, 0.0, 0.33, 1.7] {
                let fd = (eval_psi(n, x + h, &p) - eval_psi(n, x - h, &p)) / (2.0 * h);
                let ladder = eval_psi_prime(n, x, &p);
                assert_abs_diff_eq!(ladder, fd, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn normalization_by_quadrature() {
        use crate::quadrature::GaussLegendre;
        let p = OscillatorParams::new(0.5, 3.0, 1.0).unwrap();
        let rule = GaussLegendre::new(200);
        let lim = 14.0 / p.inv_length();
        for n in [0, 1, 4, 9, 16] {
            let norm = rule.integrate(-lim, lim, |x| eval_psi(n, x, &p).powi(2));
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn poly_parts_agree_with_full_function() {
        let mut buf = Vec::new();
        for u in [-3.3_f64, -0.5, 0.0, 1.1, 4.2] {
            poly_parts(10, u, &mut buf);
            for (n, pn) in buf.iter().enumerate() {
                let full = phi_scaled(n, u);
                assert_abs_diff_eq!(pn * (-0.5 * u * u).exp(), full, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(OscillatorParams::new(0.0, 1.0, 1.0).is_err());
        assert!(OscillatorParams::new(1.0, -2.0, 1.0).is_err());
        assert!(OscillatorParams::new(1.0, 1.0, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn recurrence_stays_finite_and_bounded(n in 0usize..=64, u in -40.0f64..40.0) {
            // Normalized oscillator functions are bounded by ~0.8 everywhere.
            let v = phi_scaled(n, u);
            prop_assert!(v.is_finite());
            prop_assert!(v.abs() <= 1.0);
        }

        #[test]
        fn parity_alternates(n in 0usize..20, x in 0.01f64..5.0) {
            let p = OscillatorParams::new(1.0, 2.0, 1.0).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let left = eval_psi(n, -x, &p);
            let right = sign * eval_psi(n, x, &p);
            prop_assert!((left - right).abs() <= 1e-12 * (1.0 + right.abs()));
        }
    }
}
