//! Three-term decomposition of the susceptibility.
//!
//! In the weak-probe limit χ splits into a power-broadened background line
//! χ₁ (width Γ̃ₑ), the EIT window χ₂ (width Γ̃ₛ) and the spin-exchange term χ₃
//! (width Γ̃ₖ, centered at ω̄). Each term is a single complex pole
//! `A / (i(Δ − c) + w/2)`, represented here by [`LorentzTerm`].
//!
//! χ₁ follows the single-photon detuning Δₑ, χ₂ the alkali two-photon
//! detuning Δₛ and χ₃ the noble-gas two-photon detuning Δₖ. With detunings
//! from [`make_detunings`] all three reduce to functions of Δₑ.

use num_complex::Complex64;

use crate::error::{NsitError, Result};
use crate::params::{make_detunings, Detunings, SystemParams};
use crate::steady::susceptibility_at;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// One complex pole `amplitude / (i(Δ − center) + width/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzTerm {
    pub amplitude: Complex64,
    pub center: f64,
    pub width: f64,
}

impl LorentzTerm {
    pub fn eval(&self, delta: f64) -> Complex64 {
        self.amplitude / Complex64::new(0.5 * self.width, delta - self.center)
    }

    /// dχ/dΔ.
    pub fn derivative(&self, delta: f64) -> Complex64 {
        let d = Complex64::new(0.5 * self.width, delta - self.center);
        -I * self.amplitude / (d * d)
    }
}

/// The three pole terms of the decomposition, in Δₑ coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionTerms {
    pub background: LorentzTerm,
    pub eit: LorentzTerm,
    pub nsit: LorentzTerm,
}

impl DecompositionTerms {
    pub fn new(params: &SystemParams) -> Result<Self> {
        let ge = params.gamma_e;
        if !(ge > 0.0) {
            return Err(NsitError::DegenerateSystem("optical coherence"));
        }
        let w2 = params.control_power();
        let r = params.alkali_splitting() * ge;
        let q = 0.5 * ge * params.gamma_s + 2.0 * w2;
        if q == 0.0 && r == 0.0 && params.j_exchange != 0.0 {
            return Err(NsitError::DegenerateSystem("dressed spin coherence"));
        }
        let scale = params.eta * params.source_scale;
        let j2 = params.j_exchange * params.j_exchange;

        let background = LorentzTerm {
            amplitude: -I * scale,
            center: background_center(params),
            width: background_width(params),
        };
        let eit = LorentzTerm {
            amplitude: -scale * 8.0 * Complex64::new(2.0 * params.alkali_splitting(), -0.5 * ge) * w2
                / (ge * ge * ge),
            center: -params.alkali_splitting(),
            width: eit_width(params),
        };
        let nsit = if j2 == 0.0 {
            LorentzTerm {
                amplitude: Complex64::new(0.0, 0.0),
                center: nsit_center(params),
                width: nsit_width(params),
            }
        } else {
            let d = Complex64::new(q, r);
            LorentzTerm {
                amplitude: -I * scale * 4.0 * j2 * w2 / (d * d),
                center: nsit_center(params),
                width: nsit_width(params),
            }
        };
        Ok(Self { background, eit, nsit })
    }

    /// Evaluates (χ₁, χ₂, χ₃) at explicit detunings.
    pub fn eval_at(&self, params: &SystemParams, det: &Detunings) -> [Complex64; 3] {
        [
            self.background.eval(det.delta_e),
            self.eit.eval(det.delta_s - params.alkali_splitting()),
            self.nsit.eval(det.delta_k - params.noble_splitting()),
        ]
    }
}

/// Exact χ together with the three analytic terms and derived scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityDecomposition {
    /// Exact susceptibility from the steady-state solver.
    pub chi: Complex64,
    pub chi1: Complex64,
    pub chi2: Complex64,
    pub chi3: Complex64,
    /// Γ̃ₑ.
    pub width_e_tilde: f64,
    /// Γ̃ₛ.
    pub width_s_tilde: f64,
    /// Γ̃ₖ.
    pub width_k_tilde: f64,
    /// ω̄.
    pub shift_bar_omega: f64,
    /// J²/(Γ̃ₛΓ̃ₖ). The χ₁, χ₂ terms neglect spin exchange, which is
    /// reasonable only while this stays moderate.
    pub regime_ratio: f64,
}

impl SusceptibilityDecomposition {
    pub fn sum(&self) -> Complex64 {
        self.chi1 + self.chi2 + self.chi3
    }
}

/// Decomposition at probe detuning Δₑ.
pub fn decompose(params: &SystemParams, delta_e: f64) -> Result<SusceptibilityDecomposition> {
    decompose_at(params, &make_detunings(params, delta_e))
}

/// Decomposition at explicit (possibly Doppler-shifted) detunings.
pub fn decompose_at(params: &SystemParams, det: &Detunings) -> Result<SusceptibilityDecomposition> {
    let terms = DecompositionTerms::new(params)?;
    let [chi1, chi2, chi3] = terms.eval_at(params, det);
    Ok(SusceptibilityDecomposition {
        chi: susceptibility_at(params, det)?,
        chi1,
        chi2,
        chi3,
        width_e_tilde: terms.background.width,
        width_s_tilde: terms.eit.width,
        width_k_tilde: terms.nsit.width,
        shift_bar_omega: terms.nsit.center,
        regime_ratio: regime_ratio(params),
    })
}

/// Γ̃ₑ = Γₑ − 4|Ω|²/Γₑ.
pub fn background_width(params: &SystemParams) -> f64 {
    params.gamma_e - 4.0 * params.control_power() / params.gamma_e
}

/// Center of χ₁: 4γₛB̃|Ω|²/Γₑ².
pub fn background_center(params: &SystemParams) -> f64 {
    4.0 * params.alkali_splitting() * params.control_power() / (params.gamma_e * params.gamma_e)
}

/// Γ̃ₛ = Γₛ + 4|Ω|²/Γₑ.
pub fn eit_width(params: &SystemParams) -> f64 {
    params.gamma_s + 4.0 * params.control_power() / params.gamma_e
}

/// Denominator γₛ²B̃²Γₑ² + (ΓₑΓₛ/2 + 2|Ω|²)² shared by ω̄ and Γ̃ₖ.
fn spin_denominator(params: &SystemParams) -> f64 {
    let r = params.alkali_splitting() * params.gamma_e;
    let q = 0.5 * params.gamma_e * params.gamma_s + 2.0 * params.control_power();
    r * r + q * q
}

/// NSIT/NSIA center ω̄ = −γₖB̃ + γₛB̃·J²Γₑ²/(γₛ²B̃²Γₑ² + (ΓₑΓₛ/2 + 2|Ω|²)²).
pub fn nsit_center(params: &SystemParams) -> f64 {
    let j2 = params.j_exchange * params.j_exchange;
    let pull = if j2 == 0.0 {
        0.0
    } else {
        params.alkali_splitting() * j2 * params.gamma_e * params.gamma_e / spin_denominator(params)
    };
    -params.noble_splitting() + pull
}

/// NSIT/NSIA width Γ̃ₖ = Γₖ + J²Γₑ(ΓₑΓₛ + 4|Ω|²)/(γₛ²B̃²Γₑ² + (ΓₑΓₛ/2 + 2|Ω|²)²).
pub fn nsit_width(params: &SystemParams) -> f64 {
    let j2 = params.j_exchange * params.j_exchange;
    if j2 == 0.0 {
        return params.gamma_k;
    }
    let ge = params.gamma_e;
    params.gamma_k + j2 * ge * (ge * params.gamma_s + 4.0 * params.control_power()) / spin_denominator(params)
}

/// J²/(Γ̃ₛΓ̃ₖ).
pub fn regime_ratio(params: &SystemParams) -> f64 {
    let j2 = params.j_exchange * params.j_exchange;
    j2 / (eit_width(params) * nsit_width(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derived_widths_for_reference_set() {
        let p = SystemParams::reference();
        let d = decompose(&p, 0.0).unwrap();
        assert_relative_eq!(d.width_s_tilde, 4.1e-5, max_relative = 1e-12);
        assert_relative_eq!(d.width_k_tilde, 9.7660975609756e-8, max_relative = 1e-12);
        assert_relative_eq!(d.width_e_tilde, 1e3 - 4e-5, max_relative = 1e-15);
        assert_eq!(d.shift_bar_omega, 0.0);
    }

    #[test]
    fn widths_sum_to_bare_rates() {
        for omega in [0.0, 0.01, 0.1, 0.3, 7.0] {
            let p = SystemParams::reference().with_control(omega);
            let sum = background_width(&p) + eit_width(&p);
            assert_relative_eq!(sum, p.gamma_e + p.gamma_s, max_relative = 1e-15);
        }
    }

    #[test]
    fn shifted_center_for_field_offset() {
        let p = SystemParams::reference().with_noble_splitting(1e-6);
        assert_relative_eq!(nsit_center(&p), -9.9040330126436506e-7, max_relative = 1e-12);
        assert_relative_eq!(nsit_width(&p), 4.0346464816e-9, max_relative = 1e-9);
        let mut q = p;
        q.b_tilde = -p.b_tilde;
        assert_eq!(nsit_center(&q), -nsit_center(&p));
    }

    #[test]
    fn exchange_free_limit() {
        let p = SystemParams::reference().with_exchange(0.0).with_noble_splitting(3e-7);
        let d = decompose(&p, 1e-5).unwrap();
        assert_eq!(d.chi3, Complex64::new(0.0, 0.0));
        assert_eq!(d.width_k_tilde, p.gamma_k);
    }

    #[test]
    fn term_derivative_matches_difference_quotient() {
        let p = SystemParams::reference().with_noble_splitting(5e-7);
        let t = DecompositionTerms::new(&p).unwrap().nsit;
        let x = t.center + 0.3 * t.width;
        let h = 1e-4 * t.width;
        let fd = (t.eval(x + h) - t.eval(x - h)) / (2.0 * h);
        assert!((fd - t.derivative(x)).norm() < 1e-6 * t.derivative(x).norm());
    }

    #[test]
    fn background_slope_at_line_center() {
        let p = SystemParams::reference();
        let t = DecompositionTerms::new(&p).unwrap().background;
        let w = background_width(&p);
        assert_relative_eq!(t.derivative(t.center).re, -4.0 * p.eta / (w * w), max_relative = 1e-14);
    }

    #[test]
    fn zero_optical_rate_is_degenerate() {
        let p = SystemParams {
            gamma_e: 0.0,
            ..SystemParams::reference()
        };
        assert!(matches!(decompose(&p, 0.0), Err(NsitError::DegenerateSystem(_))));
    }
}
