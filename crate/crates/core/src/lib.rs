//! Spectra of an alkali vapor coupled to noble-gas nuclear spins through
//! coherent spin exchange.
//!
//! The crate solves the linearized three-coherence model (optical, alkali
//! spin, noble-gas spin) for its steady state, splits the susceptibility
//! into background, EIT and spin-exchange terms, averages over a thermal
//! velocity distribution, integrates the equations of motion in time, and
//! extracts spectral features from sampled spectra.

pub mod analysis;
pub mod decomposition;
pub mod doppler;
pub mod dynamics;
pub mod error;
pub mod params;
pub mod steady;

pub use decomposition::{decompose, decompose_at, nsit_center, nsit_width, SusceptibilityDecomposition};
pub use doppler::{doppler_detunings, doppler_susceptibility, doppler_width, DopplerEnv};
pub use dynamics::{effective_params, integrate_to_steady_state, PolarizationState, TrajectoryConfig};
pub use error::{NsitError, Result};
pub use params::{make_detunings, Detunings, SystemParams};
pub use steady::{steady_state, susceptibility, SteadyState};
