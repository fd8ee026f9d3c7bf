//! Numerical engine for designing a single laser field that flips a torsional
//! photoswitch in both directions (a population NOT gate) and for probing the
//! robustness of that field against an Ohmic environment.
//!
//! The machinery is organized bottom-up:
//!
//! * [`grid`] / [`units`] — periodic angular grid, spectral wavenumbers and
//!   conversions between lab units and internal atomic units.
//! * [`model`] — two-surface diabatic Hamiltonian (cosine-series potentials,
//!   constant electronic coupling, constant transition dipole) and wavepackets.
//! * [`eigen`] — Fourier-grid diagonalization of the single-surface wells and
//!   of the coupled Hamiltonian in the well-product basis.
//! * [`propagator`] — norm-preserving split-operator stepping under a sampled
//!   control field, forwards and backwards.
//! * [`pulses`] — chirped Gaussian trial fields and the switching envelope.
//! * [`oct`] — multi-target monotonic field optimization producing the gate
//!   field, per-transformation indices and the gate fidelity.
//! * [`dissipation`] — secular Lindblad dynamics in the coupled eigenbasis
//!   with Ohmic rates, density-matrix propagation and dissipative fidelity.
//! * [`analysis`] — populations, windowed time-frequency maps (Blackman
//!   window) of control fields.
//! * [`fileio`] — the plain-text formats shared by the command-line driver.
//!
//! All heavy loops are data-parallel over independent tasks when the
//! `parallel` feature (default) is enabled; disabling it yields a fully
//! sequential build with identical numerics.

pub mod analysis;
pub mod dissipation;
pub mod eigen;
pub mod error;
pub mod exec;
pub mod fileio;
pub mod grid;
pub mod model;
pub mod oct;
pub mod propagator;
pub mod pulses;
pub mod units;

pub use error::{Error, Result};

/// Shorthand used throughout for complex amplitudes.
pub type C64 = num_complex::Complex64;
