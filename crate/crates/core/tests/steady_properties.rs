use num_complex::Complex64;
use nsit_core::decomposition::{background_width, eit_width};
use nsit_core::steady::susceptibility_linear_solve;
use nsit_core::{make_detunings, steady_state, susceptibility, SystemParams};
use proptest::prelude::*;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Log-uniform factor in [0.1, 10].
fn decade() -> impl Strategy<Value = f64> {
    (-1.0f64..1.0).prop_map(|e| 10f64.powf(e))
}

/// A detuning drawn on a log scale across every feature of the reference set.
fn detuning() -> impl Strategy<Value = f64> {
    (-12.0f64..4.0, any::<bool>()).prop_map(|(e, neg)| if neg { -(10f64.powf(e)) } else { 10f64.powf(e) })
}

fn perturbed() -> impl Strategy<Value = SystemParams> {
    (decade(), decade(), decade(), decade(), decade(), -2e-6f64..2e-6).prop_map(|(fe, fs, fk, fo, fj, b)| {
        let r = SystemParams::reference();
        SystemParams {
            gamma_e: r.gamma_e * fe,
            gamma_s: r.gamma_s * fs,
            gamma_k: r.gamma_k * fk,
            omega_c_rabi: r.omega_c_rabi * fo,
            j_exchange: r.j_exchange * fj,
            b_tilde: b,
            ..r
        }
    })
}

/// χ of the bare Λ system in closed form.
fn eit_closed_form(p: &SystemParams, delta: f64) -> Complex64 {
    let det = make_detunings(p, delta);
    let a_e = Complex64::new(0.5 * p.gamma_e, det.delta_e);
    let a_s = Complex64::new(0.5 * p.gamma_s, det.delta_s);
    -I * p.eta * a_s / (a_e * a_s + p.control_power())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn coherences_scale_linearly_with_probe(p in perturbed(), d in detuning(), k in 0.01f64..100.0) {
        let one = steady_state(&p, d).unwrap();
        let scaled = steady_state(&SystemParams { omega_p_rabi: p.omega_p_rabi * k, ..p }, d).unwrap();
        for (a, b) in one.as_array().iter().zip(scaled.as_array()) {
            if a.norm() > 0.0 {
                prop_assert!(rel(b, a * k) < 1e-14, "{a} {b}");
            }
        }
    }

    #[test]
    fn continued_fraction_matches_lu(p in perturbed(), d in detuning()) {
        let a = susceptibility(&p, d).unwrap();
        let b = susceptibility_linear_solve(&p, d).unwrap();
        prop_assert!(rel(a, b) < 1e-11, "{a} vs {b}");
    }

    #[test]
    fn steady_state_has_vanishing_residual(p in perturbed(), d in detuning()) {
        let x = steady_state(&p, d).unwrap();
        let det = make_detunings(&p, d);
        let scale = p.omega_p_rabi;
        for r in x.residual(&p, &det) {
            prop_assert!(r.norm() <= 1e-12 * scale, "{r}");
        }
    }

    #[test]
    fn absorption_is_non_negative(p in perturbed(), d in detuning()) {
        let chi = susceptibility(&p, d).unwrap();
        prop_assert!(-chi.im >= 0.0, "{chi}");
    }

    #[test]
    fn dispersion_is_odd_and_absorption_even_at_compensation(p in perturbed(), d in detuning()) {
        let p = SystemParams { b_tilde: 0.0, ..p };
        let plus = susceptibility(&p, d).unwrap();
        let minus = susceptibility(&p, -d).unwrap();
        prop_assert!(rel(minus, -plus.conj()) < 1e-13, "{plus} {minus}");
    }
}

#[test]
fn zero_exchange_reduces_to_lambda_system() {
    let p = SystemParams::reference().with_exchange(0.0);
    let mut grid = vec![0.0];
    for k in 0..=300 {
        let x = 10f64.powf(-10.0 + 14.0 * k as f64 / 300.0);
        if x <= 10.0 * p.gamma_e {
            grid.push(x);
            grid.push(-x);
        }
    }
    for d in grid {
        let chi = susceptibility(&p, d).unwrap();
        let want = eit_closed_form(&p, d);
        assert!(rel(chi, want) < 1e-13, "Δ = {d}: {chi} vs {want}");
    }
}

#[test]
fn zero_exchange_reduces_to_lambda_system_off_compensation() {
    let p = SystemParams::reference().with_exchange(0.0).with_noble_splitting(1e-6);
    for k in -200..=200 {
        let d = -p.alkali_splitting() + 1e-6 * k as f64;
        let chi = susceptibility(&p, d).unwrap();
        assert!(rel(chi, eit_closed_form(&p, d)) < 1e-13);
    }
}

#[test]
fn reference_widths() {
    let p = SystemParams::reference();
    assert!((background_width(&p) - (1e3 - 4e-5)).abs() < 1e-12);
    assert!((eit_width(&p) / 4.1e-5 - 1.0).abs() < 1e-12);
}
