//! Numerical laboratory for de Broglie's double-solution constructs.
//!
//! The crate is organised by subsystem:
//!
//! * [`field`]: periodic grids, complex fields, spectral derivatives and the
//!   conserved quantities of the 1D nonlinear Schrödinger equation.
//! * [`nls`]: split-step integration of the focusing NLS in two conventions,
//!   exact soliton and Peregrine solutions, PDE residuals.
//! * [`derrick`]: dilation families, energy curves and virial identities.
//! * [`sn`]: spherically symmetric Schrödinger-Newton solver.
//! * [`pilotwave`]: guidance velocities, quantum potential, trajectory
//!   ensembles, coarse-grained H-function and branch trapping.
//! * [`born`]: bipartite states, partial traces and signaling under
//!   non-Born collapse rules.
//! * [`resonance`]: the resonant solitary wave and hump extraction.
//! * [`runner`]: declarative experiment configs and reproducible outputs.

pub mod born;
pub mod derrick;
pub mod error;
pub mod field;
pub mod numfmt;
pub mod nls;
pub mod pilotwave;
pub mod resonance;
pub mod runner;
pub mod sn;

pub use error::{Error, Result};
pub use num_complex::Complex64;
