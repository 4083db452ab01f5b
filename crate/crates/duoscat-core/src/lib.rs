//! Coupled-channel solver for one-dimensional scattering of a harmonically
//! bound two-particle system on two delta-function potentials.
//!
//! A pair of distinguishable particles with masses `m1`, `m2`, bound to each
//! other by a harmonic interaction of frequency `omega`, impinges on the
//! potentials `gamma1*delta(x1) + gamma2*delta(x2)`.  In center-of-mass /
//! relative coordinates the asymptotic states factor into a plane wave and an
//! oscillator level, so the collision couples a ladder of channels labelled by
//! the oscillator quantum number.  This crate computes the full multi-channel
//! solution by mode matching across the two potential lines and reports
//! per-channel reflection/transmission coefficients, together with a
//! first-order (Born) reference and the analytic single-particle limit.
//!
//! The crate is `no_std`-compatible (disable default features and enable
//! `libm`); all heavy lifting is `Vec`-based linear algebra and quadrature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod born;
pub mod dense;
pub mod error;
pub mod kinematics;
pub mod lstsq;
pub mod matching;
pub mod moments;
pub mod observables;
pub mod oscillator;
pub mod quadrature;

mod fp;

pub use error::Error;
pub use kinematics::{
    channel_momenta, critical_momentum, critical_omega, cutoff_index, Channel, ChannelKind,
    ChannelSet, IncidentSpec, SystemParams,
};
pub use matching::{scattering_solution, AmplitudeSet, MatchSystem};
pub use moments::{HalfLine, MomentKey, MomentKind, MomentTable, MomentValue};
pub use observables::{coefficients, conservation_check, CoefficientTable};
pub use oscillator::OscillatorParams;

/// Largest supported channel-basis truncation.
pub const MAX_MODES: usize = 64;
