//! Model parameters and detunings.
//!
//! All rates and detunings are dimensionless, measured in units of the
//! alkali natural linewidth Γ₀. `gamma0_hz` is only used when reporting
//! widths in Hz.

use num_complex::Complex64;

use crate::error::{NsitError, Result};

/// Parameters of the linearized three-oscillator model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Excited-state relaxation rate Γₑ.
    pub gamma_e: f64,
    /// Alkali-spin relaxation rate Γₛ.
    pub gamma_s: f64,
    /// Noble-gas spin relaxation rate Γₖ.
    pub gamma_k: f64,
    /// Control Rabi frequency Ω. Only |Ω|² enters the susceptibility.
    pub omega_c_rabi: Complex64,
    /// Probe Rabi frequency Ω_p.
    pub omega_p_rabi: f64,
    /// Coherent spin-exchange rate J.
    pub j_exchange: f64,
    /// Alkali gyromagnetic ratio γₛ (relative units).
    pub gyro_s: f64,
    /// Noble-gas gyromagnetic ratio γₖ (relative units).
    pub gyro_k: f64,
    /// Field offset B̃ from the compensation point.
    pub b_tilde: f64,
    /// Susceptibility normalization η.
    pub eta: f64,
    /// Γ₀ in Hz, used for reporting only.
    pub gamma0_hz: f64,
    /// Population of the probed ground state relative to perfect polarization.
    /// 1 for a fully polarized alkali ensemble; see [`crate::dynamics::effective_params`].
    pub source_scale: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl SystemParams {
    /// The reference parameter set: Γₑ = 10³, Γₛ = 10⁻⁶, Γₖ = 10⁻¹⁰, Ω = 0.1,
    /// J = 10⁻⁶, γₛ = 100γₖ, B̃ = 0, with Γ₀ = 10⁷ Hz.
    pub fn reference() -> Self {
        Self {
            gamma_e: 1e3,
            gamma_s: 1e-6,
            gamma_k: 1e-10,
            omega_c_rabi: Complex64::new(0.1, 0.0),
            omega_p_rabi: 1.0,
            j_exchange: 1e-6,
            gyro_s: 100.0,
            gyro_k: 1.0,
            b_tilde: 0.0,
            eta: 1.0,
            gamma0_hz: 1e7,
            source_scale: 1.0,
        }
    }

    /// Sets B̃ so that the noble-gas Zeeman offset γₖB̃ equals `splitting`.
    pub fn with_noble_splitting(mut self, splitting: f64) -> Self {
        self.b_tilde = splitting / self.gyro_k;
        self
    }

    pub fn with_exchange(mut self, j: f64) -> Self {
        self.j_exchange = j;
        self
    }

    pub fn with_control(mut self, omega: f64) -> Self {
        self.omega_c_rabi = Complex64::new(omega, 0.0);
        self
    }

    /// |Ω|².
    pub fn control_power(&self) -> f64 {
        self.omega_c_rabi.norm_sqr()
    }

    /// Alkali Zeeman offset γₛB̃.
    pub fn alkali_splitting(&self) -> f64 {
        self.gyro_s * self.b_tilde
    }

    /// Noble-gas Zeeman offset γₖB̃.
    pub fn noble_splitting(&self) -> f64 {
        self.gyro_k * self.b_tilde
    }

    /// Checks every invariant and returns all violations at once.
    ///
    /// On success, returns non-fatal warnings (currently only the
    /// weak-excitation condition |Ω| < Γₑ).
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut errs = Vec::new();
        let finite = [
            ("gamma_e", self.gamma_e),
            ("gamma_s", self.gamma_s),
            ("gamma_k", self.gamma_k),
            ("omega_c_rabi.re", self.omega_c_rabi.re),
            ("omega_c_rabi.im", self.omega_c_rabi.im),
            ("omega_p_rabi", self.omega_p_rabi),
            ("j_exchange", self.j_exchange),
            ("gyro_s", self.gyro_s),
            ("gyro_k", self.gyro_k),
            ("b_tilde", self.b_tilde),
            ("eta", self.eta),
            ("gamma0_hz", self.gamma0_hz),
            ("source_scale", self.source_scale),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                errs.push(format!("{name} must be finite (got {v})"));
            }
        }
        if !(self.gamma_e > 0.0) {
            errs.push(format!("gamma_e must be > 0 (got {})", self.gamma_e));
        }
        if !(self.gamma_s >= 0.0) {
            errs.push(format!("gamma_s must be >= 0 (got {})", self.gamma_s));
        }
        if !(self.gamma_k >= 0.0) {
            errs.push(format!("gamma_k must be >= 0 (got {})", self.gamma_k));
        }
        if !(self.j_exchange >= 0.0) {
            errs.push(format!("j_exchange must be >= 0 (got {})", self.j_exchange));
        }
        if !(self.gyro_k > 0.0) {
            errs.push(format!("gyro_k must be > 0 (got {})", self.gyro_k));
        }
        if !(self.gyro_s > self.gyro_k) {
            errs.push(format!(
                "gyro_s must exceed gyro_k (got gyro_s = {}, gyro_k = {})",
                self.gyro_s, self.gyro_k
            ));
        }
        if !(self.gamma0_hz > 0.0) {
            errs.push(format!("gamma0_hz must be > 0 (got {})", self.gamma0_hz));
        }
        if !(0.0..=1.0).contains(&self.source_scale) {
            errs.push(format!("source_scale must lie in [0, 1] (got {})", self.source_scale));
        }
        if !errs.is_empty() {
            return Err(NsitError::InvalidParams(errs));
        }
        let mut warnings = Vec::new();
        if self.omega_c_rabi.norm() >= self.gamma_e {
            warnings.push(format!(
                "weak-excitation condition violated: |omega_c_rabi| = {} >= gamma_e = {}",
                self.omega_c_rabi.norm(),
                self.gamma_e
            ));
        }
        Ok(warnings)
    }
}

/// Single-photon and two-photon detunings seen by the atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detunings {
    /// Single-photon detuning Δₑ.
    pub delta_e: f64,
    /// Alkali two-photon detuning Δₛ.
    pub delta_s: f64,
    /// Noble-gas two-photon detuning Δₖ.
    pub delta_k: f64,
}

/// Detunings for probe detuning Δₑ at field offset B̃:
/// Δₛ = Δₑ + γₛB̃ and Δₖ = Δₑ + γₖB̃.
pub fn make_detunings(params: &SystemParams, delta_e: f64) -> Detunings {
    Detunings {
        delta_e,
        delta_s: delta_e + params.alkali_splitting(),
        delta_k: delta_e + params.noble_splitting(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonance_condition_at_compensation_field() {
        let p = SystemParams::reference();
        let d = make_detunings(&p, 0.5);
        assert_eq!((d.delta_e, d.delta_s, d.delta_k), (0.5, 0.5, 0.5));
    }

    #[test]
    fn zeeman_offsets_for_fig3_field() {
        let p = SystemParams::reference().with_noble_splitting(1e-6);
        let d = make_detunings(&p, 0.0);
        assert_eq!(d.delta_e, 0.0);
        assert!((d.delta_s - 1e-4).abs() < 1e-18);
        assert!((d.delta_k - 1e-6).abs() < 1e-20);
    }

    #[test]
    fn field_reversal_flips_offsets() {
        let p = SystemParams::reference().with_noble_splitting(3e-7);
        let mut q = p;
        q.b_tilde = -p.b_tilde;
        let d = make_detunings(&p, 0.25);
        let e = make_detunings(&q, 0.25);
        assert!(((d.delta_s - d.delta_e) + (e.delta_s - e.delta_e)).abs() < 1e-16);
        assert!(((d.delta_k - d.delta_e) + (e.delta_k - e.delta_e)).abs() < 1e-16);
        assert!(d.delta_s > d.delta_e && e.delta_s < e.delta_e);
    }

    #[test]
    fn offsets_are_exact_by_construction() {
        // Binary-exact values; in general the offsets hold to rounding of one addition.
        let p = SystemParams {
            b_tilde: 0.25,
            ..SystemParams::reference()
        };
        let d = make_detunings(&p, -3.0);
        assert_eq!(d.delta_s - d.delta_e, p.gyro_s * p.b_tilde);
        assert_eq!(d.delta_k - d.delta_e, p.gyro_k * p.b_tilde);
    }

    #[test]
    fn validation_lists_every_violation() {
        let p = SystemParams {
            gamma_k: -1.0,
            gamma_e: 0.0,
            gyro_k: 200.0,
            ..SystemParams::reference()
        };
        match p.validate() {
            Err(NsitError::InvalidParams(v)) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn strong_control_only_warns() {
        let p = SystemParams::reference().with_control(2e3);
        let w = p.validate().unwrap();
        assert_eq!(w.len(), 1);
    }
}
