//! Cycle-accurate simulator and analytic scheduler for multiplexed inkjet
//! printhead driver ICs.
//!
//! Large nozzle arrays cannot afford one bond pad per heater. This crate
//! models the three classic addressing schemes (1D direct drive, 2D
//! row/column multiplexing, and 3D power/address/selection registration)
//! and everything needed to compare them at desk scale:
//!
//! * [`topology`]: pad-count formulas, axis factorization, and the
//!   bijection between linear nozzle indices and (P, A, S) coordinates.
//! * [`driver`]: bit-accurate digital data path: shift register, latch,
//!   level shifter, gray-scale DAC, and the pass-gate firing condition.
//! * [`scheduler`]: analytic scan schedules, frame times, and scheme
//!   comparisons under a parameterized timing model.
//! * [`engine`]: tick-level frame execution through the driver state
//!   machine; the independent route that the analytic schedule is checked
//!   against, in tests *and* in production runs.
//! * [`firing`]: lumped thermal model deciding whether an electrical
//!   pulse actually ejects a droplet.
//! * [`raster`]: PBM/PGM print jobs, column-to-frame conversion, and
//!   throughput estimates.
//! * [`trace`]: change-only signal traces, VCD export, and
//!   machine-readable JSON reports.
//!
//! All simulation times are integer picoseconds ([`time::Picos`]), so the
//! analytic and tick-level routes can be compared for exact equality.

// Validation guards are written `!(a > b)` on purpose: a NaN parameter
// must fail the check rather than slip through a rearranged comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod driver;
pub mod engine;
pub mod error;
pub mod firing;
pub mod raster;
pub mod scheduler;
pub mod time;
pub mod topology;
pub mod trace;

pub use error::{Error, Result};
pub use time::Picos;
