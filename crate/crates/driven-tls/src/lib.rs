//! Floquet, rotating-wave and Van Vleck treatments of a strongly driven
//! two-level system, closed or weakly coupled to an Ohmic bath.
//!
//! Energies are measured in units of the bare tunneling splitting, times in
//! its inverse; the drive enters through the bias channel.  The crate covers
//! the quasienergy spectrum of the dressed ladder, closed-form resonance
//! doublets at first and second order in the tunneling, nondissipative
//! survival dynamics in several approximation tiers, Floquet-basis
//! Bloch-Redfield dissipative dynamics with an analytic moderate-rotating-wave
//! companion solution, and spectral / deviation-map diagnostics on top.

pub mod analysis;
pub mod bath;
pub mod bessel;
pub mod error;
pub mod floquet;
pub mod ode;
pub mod params;
pub mod redfield;
pub mod scenario;
pub mod vanvleck;
pub mod xcoeffs;

pub use error::{Error, Result};
pub use params::{BathParams, SystemParams, TruncationConfig};
