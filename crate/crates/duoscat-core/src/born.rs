//! First-order (weak-coupling) reference for ground-state incidence, and the
//! single-particle delta-barrier reference.
//!
//! Both delta couplings collapse to Gaussian-type integrals over the internal
//! coordinate, so every transition element has a closed form.  The elastic
//! transmission keeps the second-order forward correction that restores flux
//! conservation, making the coefficient total exactly one at this order.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::Error;
use crate::fp;
use crate::kinematics::{channel_momenta, critical_momentum, IncidentSpec, SystemParams};

const TWO_PI: f64 = core::f64::consts::TAU;

/// Default half-width of the momentum band around each channel threshold in
/// which first-order results are marked unreliable (the 1/K_n factors blow
/// up there).
pub const DEFAULT_THRESHOLD_GUARD: f64 = 0.1;

/// Sign of the momentum transferred to the center of mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transfer {
    /// Outgoing wave keeps moving right: transfer K0 - K_n.
    Forward,
    /// Outgoing wave is reflected: transfer K0 + K_n.
    Backward,
}

/// First-order reflection/transmission coefficients for the open channels.
#[derive(Debug, Clone, PartialEq)]
pub struct BornTable {
    pub j_re: Vec<f64>,
    /// `j_tr[0]` includes the flux-restoring forward correction.
    pub j_tr: Vec<f64>,
    /// Exactly 1 by construction; kept as a numerical cross-check.
    pub j_total: f64,
    pub n_cutoff: usize,
    /// Channels whose momentum lies within the guard band of a threshold;
    /// their entries are returned but not trustworthy.
    pub near_threshold: Vec<bool>,
}

/// Transition element between the incident ground-state wave and channel `n`
/// at center-of-mass momentum transfer `t`:
///
///   gamma1/(2 pi) * <psi_n | e^{i t r2 x} | psi_0>
/// + gamma2/(2 pi) * <psi_n | e^{-i t r1 x} | psi_0>,
///
/// evaluated in closed form.
pub fn transition_element(p: &SystemParams, n: usize, t: f64) -> Complex64 {
    let a = p.oscillator().inv_length();
    let (r1, r2) = (p.fraction1(), p.fraction2());
    // sqrt(2^n / n!)
    let mut weight = 1.0_f64;
    for k in 1..=n {
        weight *= 2.0 / k as f64;
    }
    let weight = fp::sqrt(weight);

    let gauss = |gamma: f64, r: f64, phase: Complex64| -> Complex64 {
        let b = t * r / (2.0 * a);
        let radial = weight * powi(b, n) * fp::exp(-b * b);
        phase * (gamma / TWO_PI * radial)
    };
    // i^n and (-i)^n
    let i_pow = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    gauss(p.gamma1, r2, i_pow[n % 4]) + gauss(p.gamma2, r1, i_pow[(4 - n % 4) % 4])
}

fn powi(base: f64, n: usize) -> f64 {
    let mut out = 1.0;
    for _ in 0..n {
        out *= base;
    }
    out
}

/// Momentum transferred to the center of mass for an outgoing channel wave.
pub fn momentum_transfer(k0: f64, k_n: f64, dir: Transfer) -> f64 {
    match dir {
        Transfer::Forward => k0 - k_n,
        Transfer::Backward => k0 + k_n,
    }
}

/// First-order coefficients for every open channel.  Only ground-state
/// incidence is covered by this expansion.
///
/// Channels within `guard` of their threshold are flagged; at an exact
/// threshold the 1/K_n factors make the affected entries non-finite.
pub fn born_coefficients(
    p: &SystemParams,
    inc: &IncidentSpec,
    guard: f64,
) -> Result<BornTable, Error> {
    if inc.l != 0 {
        return Err(Error::BornRequiresGroundState { l: inc.l });
    }
    let ch = channel_momenta(p, inc, ch_count(p, inc))?;
    let n_c = ch.n_cutoff();
    let k0 = inc.k0;
    let prefactor = {
        let hb2 = p.hbar * p.hbar;
        let c = TWO_PI * p.total_mass() / hb2;
        c * c
    };

    let mut j_re = Vec::with_capacity(n_c + 1);
    let mut j_tr = Vec::with_capacity(n_c + 1);
    let mut near = Vec::with_capacity(n_c + 1);
    let mut forward_loss = 0.0_f64;
    for n in 0..=n_c {
        let k_n = ch.channel(n).momentum.re;
        let e_back = transition_element(p, n, momentum_transfer(k0, k_n, Transfer::Backward));
        let e_fwd = transition_element(p, n, momentum_transfer(k0, k_n, Transfer::Forward));
        let re = prefactor / (k0 * k_n) * e_back.norm_sqr();
        let tr = prefactor / (k0 * k_n) * e_fwd.norm_sqr();
        forward_loss += (e_back.norm_sqr() + e_fwd.norm_sqr()) / k_n;
        j_re.push(re);
        j_tr.push(tr);
        let distance = if n == 0 {
            f64::INFINITY
        } else {
            k0 - critical_momentum(p, inc.l, n)?
        };
        near.push(distance < guard);
    }
    // Elastic transmission: 1 + first-order forward term - the flux carried
    // away by all first-order waves (the second-order forward correction).
    let e0_fwd = transition_element(p, 0, 0.0);
    j_tr[0] = 1.0 + prefactor / (k0 * k0) * e0_fwd.norm_sqr() - prefactor / k0 * forward_loss;

    let j_total = j_re.iter().sum::<f64>() + j_tr.iter().sum::<f64>();
    Ok(BornTable {
        j_re,
        j_tr,
        j_total,
        n_cutoff: n_c,
        near_threshold: near,
    })
}

/// Smallest valid truncation: all open channels plus one.
fn ch_count(p: &SystemParams, inc: &IncidentSpec) -> usize {
    // cutoff_index is cheap; channel_momenta validates the rest.
    crate::kinematics::cutoff_index(p, inc) + 1
}

/// Exact reflection and transmission, in that order, of a structureless
/// particle of the given mass on a single delta barrier of strength `gamma`.
pub fn single_particle_rt(mass: f64, gamma: f64, k0: f64, hbar: f64) -> (f64, f64) {
    let hb2 = hbar * hbar;
    let kinetic = hb2 * hb2 * k0 * k0;
    let coupling = mass * mass * gamma * gamma;
    let denom = kinetic + coupling;
    (coupling / denom, kinetic / denom)
}
