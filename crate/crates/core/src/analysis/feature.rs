//! Locating spectral features and measuring their width and height.
//!
//! A feature is measured against a baseline taken from the decomposition:
//! nothing for the background line, χ₁ for the EIT window, χ₁ + χ₂ for the
//! spin-exchange feature. The deviation of the absorption from that baseline
//! decides the kind (peak → NSIA, dip → NSIT), the amplitude, and the
//! half-level crossings whose separation is the FWHM. Crossings are found on
//! a monotone cubic (Fritsch–Carlson) interpolant of the samples, so no line
//! shape is assumed.

use num_complex::Complex64;
use rayon::prelude::*;

use super::spectrum::{Mode, Spectrum, SpectrumPoint};
use crate::decomposition::{background_center, background_width, eit_width, nsit_center, nsit_width, DecompositionTerms};
use crate::doppler::doppler_decomposition;
use crate::error::{NsitError, Result};
use crate::params::{make_detunings, SystemParams};

/// Samples required within ±w/2 of the expected center.
pub const MIN_SAMPLES_PER_WIDTH: usize = 20;
/// Half-extent of the search window, in expected widths.
pub const SEARCH_WIDTHS: f64 = 5.0;
/// Smallest accepted feature height, relative to the spectrum maximum.
pub const MIN_PROMINENCE: f64 = 1e-4;
/// Opposite-lobe fraction above which a feature is flagged as mixed.
pub const MIXED_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Background,
    Eit,
    Nsia,
    Nsit,
}

impl FeatureKind {
    pub fn label(self) -> &'static str {
        match self {
            FeatureKind::Background => "background",
            FeatureKind::Eit => "eit",
            FeatureKind::Nsia => "nsia",
            FeatureKind::Nsit => "nsit",
        }
    }

    pub fn is_spin_exchange(self) -> bool {
        matches!(self, FeatureKind::Nsia | FeatureKind::Nsit)
    }

    /// Predicted center from the decomposition.
    pub fn predicted_center(self, params: &SystemParams) -> f64 {
        match self {
            FeatureKind::Background => background_center(params),
            FeatureKind::Eit => -params.alkali_splitting(),
            FeatureKind::Nsia | FeatureKind::Nsit => nsit_center(params),
        }
    }

    /// Predicted FWHM from the decomposition.
    pub fn predicted_width(self, params: &SystemParams) -> f64 {
        match self {
            FeatureKind::Background => background_width(params),
            FeatureKind::Eit => eit_width(params),
            FeatureKind::Nsia | FeatureKind::Nsit => nsit_width(params),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalFeature {
    pub kind: FeatureKind,
    pub center: f64,
    pub fwhm: f64,
    /// Height (peaks) or depth (dips) relative to the baseline, in the
    /// spectrum's absorption units.
    pub amplitude: f64,
    /// Baseline absorption at the extremum.
    pub baseline: f64,
    /// Position of the largest deviation from the baseline.
    pub extremum: f64,
    /// The opposite lobe exceeds [`MIXED_FRACTION`] of the dominant one.
    pub mixed: bool,
}

impl SignalFeature {
    pub fn fwhm_hz(&self, gamma0_hz: f64) -> f64 {
        self.fwhm * gamma0_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureSearch {
    pub kind: FeatureKind,
    pub expected_center: f64,
    pub expected_width: f64,
}

/// Baseline χ (unnormalized) for `kind` at one detuning.
pub fn baseline_chi(params: &SystemParams, mode: &Mode, kind: FeatureKind, delta_e: f64) -> Result<Complex64> {
    if kind == FeatureKind::Background {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let [c1, c2, _] = match mode {
        Mode::Doppler { env, quad_order } => doppler_decomposition(params, env, delta_e, *quad_order)?,
        _ => DecompositionTerms::new(params)?.eval_at(params, &make_detunings(params, delta_e)),
    };
    Ok(if kind == FeatureKind::Eit { c1 } else { c1 + c2 })
}

/// Extracts the feature of `kind` nearest `expected_center` from a spectrum
/// produced by [`super::spectrum::scan_spectrum`].
pub fn extract_feature(spec: &Spectrum, kind: FeatureKind, expected_center: f64) -> Result<SignalFeature> {
    let search = FeatureSearch {
        kind,
        expected_center,
        expected_width: kind.predicted_width(&spec.params),
    };
    let (lo, hi) = search_range(&spec.points, &search);
    let base: Vec<Complex64> = spec.points[lo..hi]
        .par_iter()
        .map(|p| baseline_chi(&spec.params, &spec.mode, kind, p.delta_e).map(|b| b / spec.normalization))
        .collect::<Result<_>>()?;
    measure(&spec.points, &search, spec.max_absorption(), lo, &base)
}

/// Extraction against an arbitrary baseline (normalized units).
pub fn extract_from_samples(
    points: &[SpectrumPoint],
    search: &FeatureSearch,
    reference_max: f64,
    baseline: impl Fn(f64) -> Complex64,
) -> Result<SignalFeature> {
    let (lo, hi) = search_range(points, search);
    let base: Vec<Complex64> = points[lo..hi].iter().map(|p| baseline(p.delta_e)).collect();
    measure(points, search, reference_max, lo, &base)
}

fn search_range(points: &[SpectrumPoint], s: &FeatureSearch) -> (usize, usize) {
    let reach = SEARCH_WIDTHS * s.expected_width;
    let lo = points.partition_point(|p| p.delta_e < s.expected_center - reach);
    let hi = points.partition_point(|p| p.delta_e <= s.expected_center + reach);
    (lo, hi.max(lo))
}

fn measure(
    points: &[SpectrumPoint],
    s: &FeatureSearch,
    reference_max: f64,
    offset: usize,
    base: &[Complex64],
) -> Result<SignalFeature> {
    let w = s.expected_width;
    if !(w > 0.0 && w.is_finite()) {
        return Err(NsitError::FeatureNotFound(format!(
            "{} has no finite positive expected width (got {w})",
            s.kind.label()
        )));
    }
    let win = &points[offset..offset + base.len()];
    let resolved = win
        .iter()
        .filter(|p| (p.delta_e - s.expected_center).abs() <= 0.5 * w)
        .count();
    if resolved < MIN_SAMPLES_PER_WIDTH {
        return Err(NsitError::UnderResolved(format!(
            "{} samples within one expected width {w:e} of {}, need {MIN_SAMPLES_PER_WIDTH}",
            resolved, s.expected_center
        )));
    }
    let xs: Vec<f64> = win.iter().map(|p| p.delta_e).collect();
    let dev: Vec<f64> = win.iter().zip(base).map(|(p, b)| p.absorption + b.im).collect();
    let n = xs.len();

    let idx = match s.kind {
        FeatureKind::Background => argmax(&dev),
        FeatureKind::Eit => argmax(&dev.iter().map(|d| -d).collect::<Vec<_>>()),
        FeatureKind::Nsia | FeatureKind::Nsit => argmax(&dev.iter().map(|d| d.abs()).collect::<Vec<_>>()),
    };
    let peak = dev[idx];
    let sign = peak.signum();
    let not_found = |why: &str| Err(NsitError::FeatureNotFound(format!("{} near {}: {why}", s.kind.label(), s.expected_center)));
    if idx == 0 || idx == n - 1 {
        return not_found("no interior extremum within the search window");
    }
    if !(peak.abs() >= MIN_PROMINENCE * reference_max) || peak == 0.0 {
        return not_found("deviation from baseline below detection threshold");
    }
    let kind = match s.kind {
        FeatureKind::Background | FeatureKind::Eit if (s.kind == FeatureKind::Eit) != (sign < 0.0) => {
            return not_found("extremum has the wrong sign");
        }
        FeatureKind::Nsia | FeatureKind::Nsit => {
            if sign > 0.0 {
                FeatureKind::Nsia
            } else {
                FeatureKind::Nsit
            }
        }
        k => k,
    };

    let center = if kind == FeatureKind::Background {
        refine_peak(&xs, &dev, idx)
    } else {
        let mag: Vec<f64> = win.iter().zip(base).map(|(p, b)| (p.chi() - b).norm()).collect();
        refine_peak(&xs, &mag, argmax(&mag))
    };

    let level = 0.5 * peak;
    let interp = Pchip::new(&xs, &dev);
    let above = |j: usize| sign * (dev[j] - level) > 0.0;
    let (left, right) = if kind == FeatureKind::Background {
        // Outermost crossings: inner structure may dip below half height.
        let l = (1..=idx).find(|&j| above(j));
        let r = (idx..n - 1).rev().find(|&j| above(j));
        match (l, r) {
            (Some(l), Some(r)) if !above(0) && !above(n - 1) => (interp.crossing(l - 1, level), interp.crossing(r, level)),
            _ => return not_found("half-level crossing outside the search window"),
        }
    } else {
        let l = (0..idx).rev().find(|&j| !above(j));
        let r = (idx + 1..n).find(|&j| !above(j));
        match (l, r) {
            (Some(l), Some(r)) => (interp.crossing(l, level), interp.crossing(r - 1, level)),
            _ => return not_found("half-level crossing outside the search window"),
        }
    };
    let fwhm = right - left;
    if !(fwhm > 0.0) {
        return not_found("degenerate half-level crossings");
    }
    let opposite = dev.iter().map(|d| -sign * d).fold(0.0, f64::max);
    Ok(SignalFeature {
        kind,
        center,
        fwhm,
        amplitude: peak.abs(),
        baseline: -base[idx].im,
        extremum: xs[idx],
        mixed: kind != FeatureKind::Background && opposite > MIXED_FRACTION * peak.abs(),
    })
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}

/// Vertex of the parabola through the maximum and its neighbors. A
/// neighbor much closer than the one on the other side (where two grids
/// nearly coincide) is skipped in favor of the next one out.
fn refine_peak(xs: &[f64], ys: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= xs.len() {
        return xs[i];
    }
    let (mut l, mut r) = (i - 1, i + 1);
    loop {
        let (gl, gr) = (xs[i] - xs[l], xs[r] - xs[i]);
        if gl < 0.1 * gr && l > 0 {
            l -= 1;
        } else if gr < 0.1 * gl && r + 1 < xs.len() {
            r += 1;
        } else {
            break;
        }
    }
    let (x0, x1, x2) = (xs[l], xs[i], xs[r]);
    let (y0, y1, y2) = (ys[l], ys[i], ys[r]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return x1;
    }
    (x1 - 0.5 * num / den).clamp(x0, x2)
}

/// Monotone piecewise-cubic Hermite interpolant.
struct Pchip<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
}

impl<'a> Pchip<'a> {
    fn new(xs: &'a [f64], ys: &'a [f64]) -> Self {
        Self { xs, ys }
    }

    fn secant(&self, j: usize) -> f64 {
        (self.ys[j + 1] - self.ys[j]) / (self.xs[j + 1] - self.xs[j])
    }

    fn slope(&self, k: usize) -> f64 {
        let n = self.xs.len();
        if k == 0 {
            return self.secant(0);
        }
        if k == n - 1 {
            return self.secant(n - 2);
        }
        let (d0, d1) = (self.secant(k - 1), self.secant(k));
        if d0 == 0.0 || d1 == 0.0 || d0.signum() != d1.signum() {
            return 0.0;
        }
        let h0 = self.xs[k] - self.xs[k - 1];
        let h1 = self.xs[k + 1] - self.xs[k];
        let w1 = 2.0 * h1 + h0;
        let w2 = h1 + 2.0 * h0;
        (w1 + w2) / (w1 / d0 + w2 / d1)
    }

    fn eval_in(&self, j: usize, x: f64) -> f64 {
        let h = self.xs[j + 1] - self.xs[j];
        let t = (x - self.xs[j]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[j] + h10 * h * self.slope(j) + h01 * self.ys[j + 1] + h11 * h * self.slope(j + 1)
    }

    /// Root of interpolant − level in [x_j, x_{j+1}], which must bracket it.
    fn crossing(&self, j: usize, level: f64) -> f64 {
        let (mut a, mut b) = (self.xs[j], self.xs[j + 1]);
        let fa = self.ys[j] - level;
        if fa == 0.0 {
            return a;
        }
        if self.ys[j + 1] == level {
            return b;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self.eval_in(j, m) - level;
            if fm == 0.0 {
                return m;
            }
            if fm.signum() == fa.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}
