//! Simulation and compilation of hybrid analog-digital trapped-ion circuits
//! for two lattice field theories: a 1+1D Yukawa theory (staggered fermions
//! coupled to a scalar field carried by collective phonon modes) and the
//! Schwinger model in the highly-occupied boson approximation (gauge links
//! carried by local phonon modes).
//!
//! The crate covers the full pipeline: truncated bosonic algebra, composite
//! spin-phonon registers, the native gate set, model Hamiltonians, Trotter
//! circuit compilation, exact and Trotterized time evolution, translation of
//! gate angles into trap and laser parameters, and gate-count estimates.

pub mod circuits;
pub mod config;
pub mod cost;
pub mod error;
pub mod evolve;
pub mod fock;
pub mod fusion;
pub mod gates;
pub mod hardware;
pub mod models;
pub mod operator;
pub mod runner;
pub mod statespace;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
