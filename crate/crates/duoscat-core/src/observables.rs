//! Probability currents and per-channel reflection/transmission coefficients.
//!
//! Only propagating channels carry current.  The incident wave brings a
//! center-of-mass flux hbar K0 / (2 pi M); channel n reflects
//! |alpha_n|^2 hbar K_n / (2 pi M) and transmits |beta_n|^2 hbar K_n / (2 pi M).
//! Dividing by the incident flux gives the dimensionless coefficients
//! j_n = |amplitude|^2 K_n / K0, which must sum to one.

use alloc::vec::Vec;

use crate::error::Error;
use crate::kinematics::{ChannelSet, IncidentSpec, SystemParams};
use crate::matching::AmplitudeSet;

const TWO_PI: f64 = core::f64::consts::TAU;

/// Dimensionless reflection/transmission coefficients for the energetically
/// open channels, indexed by oscillator level 0..=n_cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    /// Fraction of incident flux reflected into each open channel.
    pub j_re: Vec<f64>,
    /// Fraction of incident flux transmitted into each open channel.
    pub j_tr: Vec<f64>,
    /// Sum of all entries; exactly 1 for a fully converged solution.
    pub j_total: f64,
    /// Highest energetically allowed level.
    pub n_cutoff: usize,
}

/// Outcome of a flux-conservation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    pub deviation: f64,
    pub passed: bool,
}

/// Incident center-of-mass probability current, hbar K0 / (2 pi M).
pub fn incident_current(p: &SystemParams, inc: &IncidentSpec) -> f64 {
    p.hbar * inc.k0 / (TWO_PI * p.total_mass())
}

/// Signed current carried away by the reflected wave in channel `n`
/// (negative: it moves toward X = -infinity).  Closed channels carry none and
/// are rejected.
pub fn reflected_current(
    p: &SystemParams,
    ch: &ChannelSet,
    amps: &AmplitudeSet,
    n: usize,
) -> Result<f64, Error> {
    let k = open_momentum(ch, n)?;
    Ok(-amps.alpha[n].norm_sqr() * p.hbar * k / (TWO_PI * p.total_mass()))
}

/// Signed current carried by the transmitted wave in channel `n` (positive).
pub fn transmitted_current(
    p: &SystemParams,
    ch: &ChannelSet,
    amps: &AmplitudeSet,
    n: usize,
) -> Result<f64, Error> {
    let k = open_momentum(ch, n)?;
    Ok(amps.beta[n].norm_sqr() * p.hbar * k / (TWO_PI * p.total_mass()))
}

fn open_momentum(ch: &ChannelSet, n: usize) -> Result<f64, Error> {
    let c = ch.channel(n);
    if !c.is_open() {
        return Err(Error::EvanescentChannel { n });
    }
    Ok(c.momentum.re)
}

/// Reflection/transmission coefficients relative to the incident flux.
///
/// Entries exist for every level up to the cutoff; a channel sitting exactly
/// at threshold has zero momentum and contributes zeros.
pub fn coefficients(
    ch: &ChannelSet,
    amps: &AmplitudeSet,
    inc: &IncidentSpec,
) -> Result<CoefficientTable, Error> {
    if ch.n_modes() != amps.n_modes() {
        return Err(Error::SizeMismatch {
            left: ch.n_modes(),
            right: amps.n_modes(),
        });
    }
    let n_c = ch.n_cutoff();
    let mut j_re = Vec::with_capacity(n_c + 1);
    let mut j_tr = Vec::with_capacity(n_c + 1);
    let mut total = 0.0;
    for n in 0..=n_c {
        let c = ch.channel(n);
        let (re, tr) = if c.is_open() {
            let ratio = c.momentum.re / inc.k0;
            (
                amps.alpha[n].norm_sqr() * ratio,
                amps.beta[n].norm_sqr() * ratio,
            )
        } else {
            (0.0, 0.0)
        };
        total += re + tr;
        j_re.push(re);
        j_tr.push(tr);
    }
    Ok(CoefficientTable {
        j_re,
        j_tr,
        j_total: total,
        n_cutoff: n_c,
    })
}

/// Checks how far the coefficient sum strays from unity.
pub fn conservation_check(table: &CoefficientTable, tol: f64) -> ConservationReport {
    let deviation = abs(table.j_total - 1.0);
    ConservationReport {
        deviation,
        passed: deviation <= tol,
    }
}

fn abs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}
