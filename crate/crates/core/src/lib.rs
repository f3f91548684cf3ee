//! Finite-size criticality of the Dicke model by exact diagonalization.
//!
//! The production path builds the Hamiltonian in the extended coherent-state
//! basis ([`ecs`]), finds its ground state with [`eigen`], and evaluates
//! fidelity, susceptibility and truncation diagnostics ([`observables`]) along
//! coupling sweeps ([`sweep`]). [`scaling`] turns per-size critical points
//! into exponents and a collapse dataset. [`fock`] is a brute-force reference
//! in the plain photon-number basis used to validate the production path.

pub mod ecs;
pub mod eigen;
pub mod error;
pub mod fock;
pub mod io;
pub mod model;
pub mod observables;
pub mod scaling;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{critical_coupling, ModelParams, WaveFunction};
