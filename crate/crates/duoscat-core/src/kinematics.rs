//! Channel energies and momenta.
//!
//! Total energy splits between center-of-mass motion and the internal
//! oscillator level: E = hbar^2 K0^2 / (2M) + (l + 1/2) hbar omega.  A channel
//! with internal level n then carries center-of-mass momentum
//! K_n = sqrt(K0^2 - 2 M omega (n - l) / hbar), real (propagating) while the
//! level spacing fits into the collision energy and positive imaginary
//! (evanescent) beyond.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::Error;
use crate::fp;
use crate::oscillator::OscillatorParams;

/// Physical parameters of the bound pair and the two delta potentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub m1: f64,
    pub m2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl SystemParams {
    pub fn new(
        m1: f64,
        m2: f64,
        gamma1: f64,
        gamma2: f64,
        omega: f64,
        hbar: f64,
    ) -> Result<Self, Error> {
        let p = SystemParams {
            m1,
            m2,
            gamma1,
            gamma2,
            omega,
            hbar,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), Error> {
        let positive = [
            (self.m1, "m1 must be positive and finite"),
            (self.m2, "m2 must be positive and finite"),
            (self.omega, "omega must be positive and finite"),
            (self.hbar, "hbar must be positive and finite"),
        ];
        for (v, msg) in positive {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidParameter(msg));
            }
        }
        if !self.gamma1.is_finite() || !self.gamma2.is_finite() {
            return Err(Error::InvalidParameter(
                "potential strengths must be finite",
            ));
        }
        Ok(())
    }

    /// Compound mass M = m1 + m2.
    pub fn total_mass(&self) -> f64 {
        self.m1 + self.m2
    }

    /// Reduced mass mu = m1 m2 / M.
    pub fn reduced_mass(&self) -> f64 {
        self.m1 * self.m2 / self.total_mass()
    }

    /// Mass fraction r1 = m1 / M (position of the x2 = 0 line in relative
    /// coordinates).
    pub fn fraction1(&self) -> f64 {
        self.m1 / self.total_mass()
    }

    /// Mass fraction r2 = m2 / M.
    pub fn fraction2(&self) -> f64 {
        self.m2 / self.total_mass()
    }

    /// The internal oscillator seen by the relative coordinate.
    pub fn oscillator(&self) -> OscillatorParams {
        OscillatorParams {
            mu: self.reduced_mass(),
            omega: self.omega,
            hbar: self.hbar,
        }
    }
}

/// Incident center-of-mass momentum and internal level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentSpec {
    pub k0: f64,
    pub l: usize,
}

impl IncidentSpec {
    pub fn new(k0: f64, l: usize) -> Result<Self, Error> {
        if k0 <= 0.0 || !k0.is_finite() {
            return Err(Error::InvalidParameter(
                "incident momentum k0 must be positive",
            ));
        }
        Ok(IncidentSpec { k0, l })
    }
}

/// Open versus closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Propagating,
    Evanescent,
}

/// One channel of the coupled set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub n: usize,
    /// K_n: positive real when propagating, positive imaginary when
    /// evanescent, zero exactly at a threshold (classified evanescent).
    pub momentum: Complex64,
    pub kind: ChannelKind,
}

impl Channel {
    pub fn is_open(&self) -> bool {
        self.kind == ChannelKind::Propagating
    }

    /// True exactly at a channel-opening threshold (K_n = 0).
    pub fn at_threshold(&self) -> bool {
        self.momentum.re == 0.0 && self.momentum.im == 0.0
    }
}

/// All channels up to the basis truncation, with the shared invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    channels: Vec<Channel>,
    e_total: f64,
    n_cutoff: usize,
}

impl ChannelSet {
    pub fn n_modes(&self) -> usize {
        self.channels.len()
    }

    /// Index of the last channel that fits energetically (floor formula);
    /// every channel above it is evanescent.
    pub fn n_cutoff(&self) -> usize {
        self.n_cutoff
    }

    pub fn total_energy(&self) -> f64 {
        self.e_total
    }

    pub fn channel(&self, n: usize) -> &Channel {
        &self.channels[n]
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Channel> {
        self.channels.iter()
    }

    pub fn open_channels(&self) -> impl Iterator<Item = &Channel> {
        self.channels.iter().filter(|c| c.is_open())
    }

    /// True if any channel sits exactly on its opening threshold, where the
    /// matching problem is singular and results should be treated with care.
    pub fn has_threshold_channel(&self) -> bool {
        self.channels.iter().any(|c| c.at_threshold())
    }
}

/// E = hbar^2 K0^2 / (2 M) + (l + 1/2) hbar omega.
pub fn total_energy(p: &SystemParams, inc: &IncidentSpec) -> f64 {
    let kinetic = p.hbar * p.hbar * inc.k0 * inc.k0 / (2.0 * p.total_mass());
    kinetic + (inc.l as f64 + 0.5) * p.hbar * p.omega
}

/// Largest n with a real channel momentum: floor(hbar K0^2 / (2 M omega)) + l.
pub fn cutoff_index(p: &SystemParams, inc: &IncidentSpec) -> usize {
    let ratio = p.hbar * inc.k0 * inc.k0 / (2.0 * p.total_mass() * p.omega);
    fp::floor(ratio) as usize + inc.l
}

/// Channel momenta for levels 0..n_modes.
///
/// Requires n_modes > cutoff so at least one closed channel backs the open
/// set, and n_modes within the supported cap.
pub fn channel_momenta(
    p: &SystemParams,
    inc: &IncidentSpec,
    n_modes: usize,
) -> Result<ChannelSet, Error> {
    p.validate()?;
    let n_cutoff = cutoff_index(p, inc);
    if n_modes <= n_cutoff {
        return Err(Error::TruncationTooSmall { n_modes, n_cutoff });
    }
    if n_modes > crate::MAX_MODES {
        return Err(Error::TruncationTooLarge {
            n_modes,
            max: crate::MAX_MODES,
        });
    }
    let scale = 2.0 * p.total_mass() * p.omega / p.hbar;
    let mut channels = Vec::with_capacity(n_modes);
    for n in 0..n_modes {
        let gap = n as f64 - inc.l as f64;
        let radicand = inc.k0 * inc.k0 - scale * gap;
        let channel = if radicand > 0.0 {
            Channel {
                n,
                momentum: Complex64::new(fp::sqrt(radicand), 0.0),
                kind: ChannelKind::Propagating,
            }
        } else {
            // radicand == 0 lands here: a threshold channel carries no flux.
            Channel {
                n,
                momentum: Complex64::new(0.0, fp::sqrt(-radicand)),
                kind: ChannelKind::Evanescent,
            }
        };
        channels.push(channel);
    }
    Ok(ChannelSet {
        channels,
        e_total: total_energy(p, inc),
        n_cutoff,
    })
}

/// Incident momentum at which channel n opens: K0c(n) = sqrt(2 (n-l) M omega / hbar).
pub fn critical_momentum(p: &SystemParams, l: usize, n: usize) -> Result<f64, Error> {
    if n <= l {
        return Err(Error::InvalidParameter(
            "threshold momentum is defined for levels above the incident one",
        ));
    }
    let gap = (n - l) as f64;
    Ok(fp::sqrt(2.0 * gap * p.total_mass() * p.omega / p.hbar))
}

/// Binding frequency at which channel n closes: omega_c(n) = hbar K0^2 / (2 (n-l) M).
pub fn critical_omega(p: &SystemParams, inc: &IncidentSpec, n: usize) -> Result<f64, Error> {
    if n <= inc.l {
        return Err(Error::InvalidParameter(
            "threshold frequency is defined for levels above the incident one",
        ));
    }
    let gap = (n - inc.l) as f64;
    Ok(p.hbar * inc.k0 * inc.k0 / (2.0 * gap * p.total_mass()))
}
