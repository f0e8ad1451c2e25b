//! Dispersion slopes and the slow-light ratio.

use super::spectrum::{evaluate, Mode};
use crate::decomposition::{eit_width, nsit_center, nsit_width};
use crate::error::{NsitError, Result};
use crate::params::SystemParams;

/// d(Re χ)/dΔₑ at `center` by a central difference with step width/100,
/// improved by one Richardson extrapolation.
pub fn dispersion_slope(params: &SystemParams, center: f64, width: f64, mode: &Mode) -> Result<f64> {
    central_slope(|x| evaluate(params, mode, x).map(|(chi, _)| chi.re), center, width)
}

/// Richardson-improved central difference of `f` at `center`, step width/100.
pub fn central_slope(f: impl Fn(f64) -> Result<f64>, center: f64, width: f64) -> Result<f64> {
    let h = width / 100.0;
    let half = 0.5 * h;
    if !(h > 0.0) || center + half == center || center - half == center {
        return Err(NsitError::UnderResolved(format!(
            "finite-difference step {h:e} vanishes at detuning {center:e}"
        )));
    }
    let diff = |h: f64| -> Result<f64> {
        let (a, b) = (center + h, center - h);
        Ok((f(a)? - f(b)?) / (a - b))
    };
    let coarse = diff(h)?;
    let fine = diff(half)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Slope at the EIT center −γₛB̃ of the system without spin exchange.
pub fn eit_slope(params: &SystemParams, mode: &Mode) -> Result<f64> {
    let bare = params.with_exchange(0.0);
    dispersion_slope(&bare, -bare.alkali_splitting(), eit_width(&bare), mode)
}

/// Slope of the full χ at the spin-exchange feature center ω̄.
pub fn nsit_slope(params: &SystemParams, mode: &Mode) -> Result<f64> {
    dispersion_slope(params, nsit_center(params), nsit_width(params), mode)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeReport {
    pub eit_center: f64,
    pub eit_slope: f64,
    pub nsit_center: f64,
    pub nsit_slope: f64,
}

impl SlopeReport {
    /// v_g(NSIT)/v_g(EIT).
    pub fn ratio(&self) -> f64 {
        self.eit_slope / self.nsit_slope
    }
}

pub fn slopes(params: &SystemParams, mode: &Mode) -> Result<SlopeReport> {
    Ok(SlopeReport {
        eit_center: -params.alkali_splitting(),
        eit_slope: eit_slope(params, mode)?,
        nsit_center: nsit_center(params),
        nsit_slope: nsit_slope(params, mode)?,
    })
}

/// Ratio of the dispersion slopes at the EIT and NSIT centers, equal to
/// v_g(NSIT)/v_g(EIT). Needs J > 0 and B̃ ≠ 0 so that both features exist
/// separately.
pub fn group_velocity_ratio(params: &SystemParams) -> Result<f64> {
    if !(params.j_exchange > 0.0) {
        return Err(NsitError::FeatureNotFound("no spin-exchange feature without exchange coupling".into()));
    }
    if params.b_tilde == 0.0 {
        return Err(NsitError::FeatureNotFound(
            "spin-exchange feature overlaps the EIT center at the compensation field".into(),
        ));
    }
    Ok(slopes(params, &Mode::Exact)?.ratio())
}
