//! Spectra, feature extraction, interference phase and dispersion slopes.

pub mod feature;
pub mod grid;
pub mod phase;
pub mod slope;
pub mod spectrum;
pub mod sweep;

pub use feature::{extract_feature, FeatureKind, SignalFeature};
pub use grid::{GridConfig, GridSpec};
pub use phase::relative_phase;
pub use slope::{dispersion_slope, group_velocity_ratio, slopes, SlopeReport};
pub use spectrum::{scan_spectrum, scan_spectrum_with, ScanOptions, Mode, Normalization, Spectrum, SpectrumPoint};
pub use sweep::{measure_feature, sweep_feature, FeatureScan, SweepPoint, SweepVariable};
