//! Feature measurements across a parameter sweep.

use num_complex::Complex64;
use rayon::prelude::*;

use super::feature::{extract_feature, FeatureKind, SignalFeature};
use super::grid::GridConfig;
use super::spectrum::{reference_absorption, scan_spectrum_with, Mode, Normalization, ScanOptions};
use crate::error::Result;
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    /// Exchange rate J.
    J,
    /// Field offset B̃.
    BTilde,
    /// Control Rabi magnitude |Ω| (phase kept).
    Omega,
}

impl SweepVariable {
    pub fn label(self) -> &'static str {
        match self {
            SweepVariable::J => "j",
            SweepVariable::BTilde => "b_tilde",
            SweepVariable::Omega => "omega",
        }
    }

    pub fn apply(self, params: &SystemParams, value: f64) -> SystemParams {
        let mut p = *params;
        match self {
            SweepVariable::J => p.j_exchange = value,
            SweepVariable::BTilde => p.b_tilde = value,
            SweepVariable::Omega => {
                p.omega_c_rabi = Complex64::from_polar(value, params.omega_c_rabi.arg());
            }
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureScan {
    pub mode: Mode,
    /// Half-extent of the scanned window, in predicted widths.
    pub window_widths: f64,
    pub grid: GridConfig,
}

impl Default for FeatureScan {
    fn default() -> Self {
        Self {
            mode: Mode::Exact,
            window_widths: 40.0,
            grid: GridConfig::default(),
        }
    }
}

/// Scans a window sized to the predicted feature and extracts it.
///
/// The spectrum is normalized to the full-line maximum absorption, so
/// amplitudes share one scale across parameter values.
pub fn measure_feature(params: &SystemParams, kind: FeatureKind, scan: &FeatureScan) -> Result<SignalFeature> {
    let center = kind.predicted_center(params);
    let half = scan.window_widths * kind.predicted_width(params);
    let opts = ScanOptions {
        grid: scan.grid,
        normalization: Normalization::Reference(reference_absorption(params, &scan.mode)?),
    };
    let spec = scan_spectrum_with(params, (center - half, center + half), &scan.mode, &opts)?;
    extract_feature(&spec, kind, center)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub params: SystemParams,
    pub feature: Result<SignalFeature>,
}

/// Measures `kind` for each value of `var`. Failures are kept per point.
pub fn sweep_feature(
    params: &SystemParams,
    var: SweepVariable,
    values: &[f64],
    kind: FeatureKind,
    scan: &FeatureScan,
) -> Vec<SweepPoint> {
    values
        .par_iter()
        .map(|&v| {
            let p = var.apply(params, v);
            SweepPoint {
                value: v,
                params: p,
                feature: measure_feature(&p, kind, scan),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::nsit_width;

    #[test]
    fn apply_keeps_control_phase() {
        let p = SystemParams {
            omega_c_rabi: Complex64::from_polar(0.1, 0.7),
            ..SystemParams::reference()
        };
        let q = SweepVariable::Omega.apply(&p, 0.3);
        assert!((q.omega_c_rabi.norm() - 0.3).abs() < 1e-15);
        assert!((q.omega_c_rabi.arg() - 0.7).abs() < 1e-14);
        assert_eq!(SweepVariable::J.apply(&p, 2e-6).j_exchange, 2e-6);
    }

    #[test]
    fn nsia_width_follows_prediction_across_j() {
        let p = SystemParams::reference();
        let pts = sweep_feature(&p, SweepVariable::J, &[1e-7, 1e-6], FeatureKind::Nsia, &FeatureScan::default());
        for pt in pts {
            let f = pt.feature.unwrap();
            assert_eq!(f.kind, FeatureKind::Nsia);
            let w = nsit_width(&pt.params);
            assert!((f.fwhm / w - 1.0).abs() < 0.05, "J = {}: {} vs {w}", pt.value, f.fwhm);
        }
    }

    #[test]
    fn failures_are_kept_per_point() {
        let p = SystemParams::reference();
        let pts = sweep_feature(&p, SweepVariable::J, &[0.0, 1e-6], FeatureKind::Nsia, &FeatureScan::default());
        assert!(pts[0].feature.is_err());
        assert!(pts[1].feature.is_ok());
    }
}
