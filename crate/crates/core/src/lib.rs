//! Device models for gap-engineered transmon qubits.
//!
//! The crate is `no_std` (it needs `alloc`) and has no IO. It covers:
//!
//! - [`physcore`]: unit system, BCS gap, thermal occupations.
//! - [`numeric`]: adaptive quadrature, bracketed roots, simplex search and a
//!   symmetric tridiagonal eigensolver.
//! - [`transmon`]: charge-basis spectra, charge dispersion, parity-split
//!   frequencies, dispersive shifts and (E_J, E_C) inversion.
//! - [`quasiparticle`]: gap profiles, QP densities and decay rates, diffusion
//!   lengths and barrier/trap adequacy rules.
//! - [`dynamics`]: parity telegraph and offset-charge jump simulation,
//!   synthetic two-tone scans, peak detection and parity-lifetime estimation.
//! - [`fitting`]: Levenberg-Marquardt engine and the T1(T) / T2*(T) models.
//!
//! Energies are carried as plain `f64` in the unit named by the argument
//! (`_ghz`, `_k`, `_ev`, ...). [`physcore::EnergyValue`] is available where a
//! tagged value is more convenient.
#![no_std]
// `!(x > 0.0)` is the NaN-rejecting form used for argument checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod numeric;
pub mod physcore;
pub mod quasiparticle;
pub mod rng;
pub mod transmon;

pub use error::{Error, Result};
