//! Steady state of the linearized coherence equations and the exact
//! complex susceptibility.
//!
//! The three normalized coherences obey
//!
//! ```text
//! dx_dp/dt = -(Γe/2 + iΔe) x_dp - iΩp·s - iΩ  x_ds
//! dx_ds/dt = -(Γs/2 + iΔs) x_ds - iΩ* x_dp  - iJ x_nk
//! dx_nk/dt = -(Γk/2 + iΔk) x_nk - iJ  x_ds
//! ```
//!
//! where `s` is the ground-state source (1 for perfect polarization).
//! Rates span more than ten decades, so the steady state is evaluated as a
//! continued fraction rather than as a ratio of expanded products.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{NsitError, Result};
use crate::params::{make_detunings, Detunings, SystemParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Complex amplitudes of the three normalized coherences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// Optical coherence ⟨X̄↓p⟩.
    pub x_dp: Complex64,
    /// Alkali-spin coherence ⟨X̄↓↑⟩.
    pub x_ds: Complex64,
    /// Noble-gas spin coherence ⟨X̄⇓⇑⟩.
    pub x_nk: Complex64,
}

impl SteadyState {
    pub fn as_array(&self) -> [Complex64; 3] {
        [self.x_dp, self.x_ds, self.x_nk]
    }

    pub fn from_array(a: [Complex64; 3]) -> Self {
        Self {
            x_dp: a[0],
            x_ds: a[1],
            x_nk: a[2],
        }
    }

    /// Time derivatives obtained by substituting this state into the
    /// equations of motion. Zero for an exact steady state.
    pub fn residual(&self, params: &SystemParams, det: &Detunings) -> [Complex64; 3] {
        let (m, b) = system_matrix(params, det);
        let x = Vector3::new(self.x_dp, self.x_ds, self.x_nk);
        let r = m * x + b;
        [r[0], r[1], r[2]]
    }
}

/// Complex half-widths (Γ/2 + iΔ) of the optical, alkali-spin and
/// noble-gas-spin coherences.
pub(crate) fn damping_terms(params: &SystemParams, det: &Detunings) -> Result<[Complex64; 3]> {
    let terms = [
        ("optical coherence", params.gamma_e, det.delta_e),
        ("alkali spin coherence", params.gamma_s, det.delta_s),
        ("noble-gas spin coherence", params.gamma_k, det.delta_k),
    ];
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (slot, (name, gamma, delta)) in out.iter_mut().zip(terms) {
        if gamma == 0.0 && delta == 0.0 {
            return Err(NsitError::DegenerateSystem(name));
        }
        *slot = Complex64::new(0.5 * gamma, delta);
    }
    Ok(out)
}

/// Generator `M` and drive `b` of the equations of motion, dx/dt = M x + b.
pub fn system_matrix(params: &SystemParams, det: &Detunings) -> (Matrix3<Complex64>, Vector3<Complex64>) {
    let a_e = Complex64::new(0.5 * params.gamma_e, det.delta_e);
    let a_s = Complex64::new(0.5 * params.gamma_s, det.delta_s);
    let a_k = Complex64::new(0.5 * params.gamma_k, det.delta_k);
    let omega = params.omega_c_rabi;
    let j = Complex64::new(params.j_exchange, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    #[rustfmt::skip]
    let m = Matrix3::new(
        -a_e,              -I * omega, zero,
        -I * omega.conj(), -a_s,       -I * j,
        zero,              -I * j,     -a_k,
    );
    let b = Vector3::new(-I * params.omega_p_rabi * params.source_scale, zero, zero);
    (m, b)
}

/// Steady state at explicit detunings (used directly by the Doppler module).
pub fn steady_state_at(params: &SystemParams, det: &Detunings) -> Result<SteadyState> {
    let [a_e, a_s, a_k] = damping_terms(params, det)?;
    let j2 = params.j_exchange * params.j_exchange;
    let omega = params.omega_c_rabi;
    let drive = -I * params.omega_p_rabi * params.source_scale;

    // Nested continued fraction: spin branch dressed by the noble gas,
    // then the optical coherence dressed by the spin branch.
    let spin = if j2 == 0.0 { a_s } else { a_s + j2 / a_k };
    if spin.norm_sqr() == 0.0 && params.control_power() != 0.0 {
        // Only reachable with Γs = Γk = 0: an undamped spin normal mode.
        return Err(NsitError::DegenerateSystem("dressed spin coherence"));
    }
    let x_dp = if params.control_power() == 0.0 {
        drive / a_e
    } else {
        drive / (a_e + params.control_power() / spin)
    };
    let x_ds = if params.control_power() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        -I * omega.conj() * x_dp / spin
    };
    let x_nk = if j2 == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        -I * params.j_exchange * x_ds / a_k
    };
    Ok(SteadyState { x_dp, x_ds, x_nk })
}

/// Steady state of the coherences at probe detuning Δₑ.
pub fn steady_state(params: &SystemParams, delta_e: f64) -> Result<SteadyState> {
    steady_state_at(params, &make_detunings(params, delta_e))
}

/// Steady state from a partially pivoted LU solve of `M x = -b`.
///
/// Independent of the continued-fraction route; used as a cross-check.
pub fn steady_state_linear_solve(params: &SystemParams, det: &Detunings) -> Result<SteadyState> {
    damping_terms(params, det)?;
    let (m, b) = system_matrix(params, det);
    let x = m
        .lu()
        .solve(&(-b))
        .ok_or(NsitError::DegenerateSystem("linear system"))?;
    Ok(SteadyState {
        x_dp: x[0],
        x_ds: x[1],
        x_nk: x[2],
    })
}

/// χ at explicit detunings. Computed with a unit probe, so it does not
/// depend on Ω_p.
pub fn susceptibility_at(params: &SystemParams, det: &Detunings) -> Result<Complex64> {
    let unit = SystemParams {
        omega_p_rabi: 1.0,
        ..*params
    };
    Ok(params.eta * steady_state_at(&unit, det)?.x_dp)
}

/// Complex susceptibility χ = η⟨X̄↓p⟩/Ω_p.
///
/// Absorption is −Im χ and dispersion is Re χ.
pub fn susceptibility(params: &SystemParams, delta_e: f64) -> Result<Complex64> {
    susceptibility_at(params, &make_detunings(params, delta_e))
}

/// χ from the LU route.
pub fn susceptibility_linear_solve(params: &SystemParams, delta_e: f64) -> Result<Complex64> {
    let unit = SystemParams {
        omega_p_rabi: 1.0,
        ..*params
    };
    let det = make_detunings(params, delta_e);
    Ok(params.eta * steady_state_linear_solve(&unit, &det)?.x_dp)
}
