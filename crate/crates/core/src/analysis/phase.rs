//! Relative phase of the direct and spin-exchange excitation channels.

use num_complex::Complex64;

use crate::decomposition::nsit_center;
use crate::error::{NsitError, Result};
use crate::params::{make_detunings, SystemParams};
use crate::steady::steady_state_at;

/// φ = arg[JΩ·x_nk / (iΩ_p(Γₛ/2 + iΔₛ))] at Δₑ = ω̄, in (−π, π].
///
/// The numerator is the alkali-spin drive routed through the noble gas, the
/// denominator the drive the probe delivers directly (unit source).
pub fn relative_phase(params: &SystemParams) -> Result<f64> {
    if !(params.j_exchange > 0.0) || params.control_power() == 0.0 || params.omega_p_rabi == 0.0 {
        return Err(NsitError::InvalidParams(vec![
            "relative phase needs j_exchange > 0, a nonzero control field and a nonzero probe".to_string(),
        ]));
    }
    let unit = SystemParams {
        source_scale: 1.0,
        ..*params
    };
    let det = make_detunings(&unit, nsit_center(&unit));
    let s = steady_state_at(&unit, &det)?;
    let a_s = Complex64::new(0.5 * unit.gamma_s, det.delta_s);
    let exchange = unit.j_exchange * unit.omega_c_rabi * s.x_nk;
    let direct = Complex64::new(0.0, unit.omega_p_rabi) * a_s;
    let phi = (exchange / direct).arg();
    // arg returns [−π, π]; map −π onto π.
    Ok(if phi == -std::f64::consts::PI { std::f64::consts::PI } else { phi })
}
