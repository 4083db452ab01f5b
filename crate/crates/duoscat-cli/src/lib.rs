//! Command-line front end for the duoscat coupled-channel solver: single
//! solves, parameter sweeps, convergence studies, a first-order-reference
//! comparison, and threshold tables, with CSV and SVG emission.
//!
//! The binary in `main.rs` is a thin wrapper over these modules so the whole
//! pipeline stays testable as a library.

pub mod config;
pub mod csv;
pub mod error;
pub mod run;
pub mod svg;

pub use config::{FileConfig, RunConfig, Scale, SweepParameter, SweepSpec};
pub use error::CliError;
pub use run::{
    run_born, run_convergence, run_single, run_sweep, successive_changes, sweep_markers, BornRow,
    Status, SweepRow,
};
