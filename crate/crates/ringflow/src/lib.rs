//! Dissipative single-excitation dynamics of a driven spin ring coupled to a
//! structured bosonic bath, with trace-distance information-flow analysis.
//!
//! The library models a closed ring of `N` spins whose traveling-wave modes
//! exchange one excitation with a finite set of bath modes sampled from a
//! Lorentzian spectral density.  It provides:
//!
//! * [`model`]: ring dispersion, eigenfrequencies and mode wavefunctions,
//! * [`bath`]: spectral density and reproducible bath-mode sampling,
//! * [`propagator`]: exact evolution of the coupled amplitude equations, by
//!   adaptive Runge-Kutta integration or by eigendecomposition,
//! * [`kernel`]: the approximate closed memory-kernel equation for the ring
//!   amplitudes, its Volterra integrator, and for `N = 3` an analytic
//!   Laplace-domain solution by residues,
//! * [`observables`]: reduced density matrices, trace distance, the flow
//!   rate `R(t)` and its segmentation into inflow/backflow periods,
//! * [`config`] / [`engine`] / [`report`]: JSON-configured runs, parameter
//!   sweeps, engine cross-checks and deterministic CSV/JSON/SVG output.

pub mod bath;
pub mod config;
pub mod engine;
mod error;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod ode;
pub mod poly;
pub mod propagator;
pub mod report;
pub mod svg;

pub use error::{Error, Result};

/// Shorthand used throughout for complex amplitudes.
pub type C64 = num_complex::Complex64;
