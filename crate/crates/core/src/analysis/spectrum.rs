//! Sampled absorption/dispersion spectra.

use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::{composite_grid, feature_anchors, GridConfig, GridSpec};
use crate::decomposition::{background_width, DecompositionTerms};
use crate::doppler::{doppler_susceptibility, DopplerEnv};
use crate::error::{NsitError, Result};
use crate::params::SystemParams;
use crate::steady::susceptibility;

/// How χ is evaluated at each detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Exact,
    /// χ₁ + χ₂ + χ₃ from the closed-form decomposition.
    Decomposed,
    /// Exact χ averaged over the thermal velocity distribution.
    Doppler { env: DopplerEnv, quad_order: usize },
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Decomposed => "decomposed",
            Mode::Doppler { .. } => "doppler",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    None,
    /// Divide by the largest absorption in the scanned window.
    WindowMax,
    /// Divide by a fixed value.
    Reference(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub delta_e: f64,
    /// −Im χ divided by the normalization.
    pub absorption: f64,
    /// Re χ divided by the normalization.
    pub dispersion: f64,
    /// (χ₁, χ₂, χ₃), normalized, in decomposed mode.
    pub terms: Option<[Complex64; 3]>,
}

impl SpectrumPoint {
    /// Normalized χ.
    pub fn chi(&self) -> Complex64 {
        Complex64::new(self.dispersion, -self.absorption)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub points: Vec<SpectrumPoint>,
    /// Divisor applied to χ (1 when not normalized).
    pub normalization: f64,
    pub normalized: bool,
    pub grid: GridSpec,
    pub params: SystemParams,
    pub mode: Mode,
}

impl Spectrum {
    pub fn max_absorption(&self) -> f64 {
        self.points.iter().map(|p| p.absorption).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// χ and, in decomposed mode, its three terms at one detuning.
pub fn evaluate(params: &SystemParams, mode: &Mode, delta_e: f64) -> Result<(Complex64, Option<[Complex64; 3]>)> {
    match mode {
        Mode::Exact => Ok((susceptibility(params, delta_e)?, None)),
        Mode::Decomposed => {
            let t = DecompositionTerms::new(params)?;
            let terms = [t.background.eval(delta_e), t.eit.eval(delta_e), t.nsit.eval(delta_e)];
            Ok((terms.iter().sum(), Some(terms)))
        }
        Mode::Doppler { env, quad_order } => Ok((doppler_susceptibility(params, env, delta_e, *quad_order)?, None)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub grid: GridConfig,
    pub normalization: Normalization,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            normalization: Normalization::WindowMax,
        }
    }
}

fn check_window(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo < hi {
        Ok(())
    } else {
        Err(NsitError::InvalidWindow { lo, hi })
    }
}

/// Evaluates χ on an explicit grid, in parallel with ordered assembly.
pub fn sample(params: &SystemParams, mode: &Mode, grid: &[f64]) -> Result<Vec<(f64, Complex64, Option<[Complex64; 3]>)>> {
    grid.par_iter()
        .map(|&d| evaluate(params, mode, d).map(|(chi, terms)| (d, chi, terms)))
        .collect()
}

/// Samples χ on the composite grid over `window`.
pub fn scan_spectrum_with(params: &SystemParams, window: (f64, f64), mode: &Mode, opts: &ScanOptions) -> Result<Spectrum> {
    let (lo, hi) = window;
    check_window(lo, hi)?;
    let (grid, spec) = composite_grid(lo, hi, &feature_anchors(params), &opts.grid);
    let raw = sample(params, mode, &grid)?;
    let norm = match opts.normalization {
        Normalization::None => 1.0,
        Normalization::Reference(r) => r,
        Normalization::WindowMax => raw.iter().map(|(_, c, _)| -c.im).fold(f64::NEG_INFINITY, f64::max),
    };
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(NsitError::FeatureNotFound(format!(
            "cannot normalize: maximum absorption in window is {norm}"
        )));
    }
    let points = raw
        .into_iter()
        .map(|(d, chi, terms)| SpectrumPoint {
            delta_e: d,
            absorption: -chi.im / norm,
            dispersion: chi.re / norm,
            terms: terms.map(|t| t.map(|z| z / norm)),
        })
        .collect();
    Ok(Spectrum {
        points,
        normalization: norm,
        normalized: opts.normalization != Normalization::None,
        grid: spec,
        params: *params,
        mode: *mode,
    })
}

/// Samples χ over `window` on the default composite grid, optionally
/// normalized to the window's maximum absorption.
pub fn scan_spectrum(params: &SystemParams, window: (f64, f64), mode: &Mode, normalized: bool) -> Result<Spectrum> {
    let opts = ScanOptions {
        normalization: if normalized {
            Normalization::WindowMax
        } else {
            Normalization::None
        },
        ..ScanOptions::default()
    };
    scan_spectrum_with(params, window, mode, &opts)
}

/// Largest absorption over the full line (±10 Γ̃ₑ), used to normalize
/// narrow-window scans on a common scale.
pub fn reference_absorption(params: &SystemParams, mode: &Mode) -> Result<f64> {
    let w = 10.0 * background_width(params);
    let opts = ScanOptions {
        grid: GridConfig {
            coarse_points: 401,
            feature_points: 201,
            ..GridConfig::default()
        },
        normalization: Normalization::None,
    };
    Ok(scan_spectrum_with(params, (-w, w), mode, &opts)?.max_absorption())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_peak_is_one() {
        let p = SystemParams::reference();
        let s = scan_spectrum(&p, (-3e3, 3e3), &Mode::Exact, true).unwrap();
        assert_eq!(s.max_absorption(), 1.0);
        assert!(s.points.windows(2).all(|w| w[0].delta_e < w[1].delta_e));
        assert!(s.points.iter().all(|p| p.absorption >= 0.0));
    }

    #[test]
    fn broad_line_has_central_dip_with_narrow_peak() {
        let p = SystemParams::reference();
        let s = scan_spectrum(&p, (-3e3, 3e3), &Mode::Exact, true).unwrap();
        let at = |x: f64| {
            s.points
                .iter()
                .min_by(|a, b| (a.delta_e - x).abs().total_cmp(&(b.delta_e - x).abs()))
                .unwrap()
                .absorption
        };
        // Background half-maximum near ±Γ̃ₑ/2.
        assert!((at(500.0) - 0.5).abs() < 0.01);
        // EIT dip and NSIA peak at line center.
        assert!(at(3e-6) < 0.05);
        assert!(at(0.0) > 0.9);
    }

    #[test]
    fn decomposed_mode_reports_terms() {
        let p = SystemParams::reference();
        let s = scan_spectrum(&p, (-1e-6, 1e-6), &Mode::Decomposed, false).unwrap();
        for pt in &s.points {
            let t = pt.terms.unwrap();
            assert!((t.iter().sum::<Complex64>() - pt.chi()).norm() <= 1e-15 * pt.chi().norm());
        }
    }

    #[test]
    fn reversed_window_rejected() {
        let p = SystemParams::reference();
        assert_eq!(
            scan_spectrum(&p, (1.0, -1.0), &Mode::Exact, true),
            Err(NsitError::InvalidWindow { lo: 1.0, hi: -1.0 })
        );
    }
}
