use nsit_core::decomposition::{background_width, eit_width, DecompositionTerms};
use nsit_core::{decompose, nsit_center, nsit_width, SystemParams};
use proptest::prelude::*;

fn decade() -> impl Strategy<Value = f64> {
    (-1.0f64..1.0).prop_map(|e| 10f64.powf(e))
}

fn perturbed() -> impl Strategy<Value = SystemParams> {
    (decade(), decade(), decade(), decade(), decade(), -5e-6f64..5e-6).prop_map(|(fe, fs, fk, fo, fj, b)| {
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn exchange_only_broadens(p in perturbed()) {
        prop_assert!(nsit_width(&p) >= p.gamma_k);
    }

    #[test]
    fn dressing_moves_width_between_lines(p in perturbed()) {
        let sum = background_width(&p) + eit_width(&p);
        let bare = p.gamma_e + p.gamma_s;
        prop_assert!((sum - bare).abs() <= 1e-12 * bare);
    }

    #[test]
    fn exchange_width_narrows_with_field(p in perturbed(), k in 1.01f64..10.0) {
        let far = SystemParams { b_tilde: p.b_tilde * k, ..p };
        prop_assert!(nsit_width(&far) <= nsit_width(&p));
    }

    #[test]
    fn exchange_term_is_lorentzian(p in perturbed(), x in -20.0f64..20.0) {
        // |χ₃|² is a Lorentzian in Δₑ with FWHM Γ̃ₖ.
        let t = DecompositionTerms::new(&p).unwrap().nsit;
        let w = t.width;
        let d = t.center + x * w;
        let peak = t.eval(t.center).norm_sqr();
        let want = peak / (1.0 + (2.0 * (d - t.center) / w).powi(2));
        prop_assert!((t.eval(d).norm_sqr() / want - 1.0).abs() < 1e-9);
    }
}

#[test]
fn broadening_grows_as_square_of_exchange() {
    let base = SystemParams::reference();
    let excess = |j: f64| nsit_width(&base.with_exchange(j)) - base.gamma_k;
    let (j1, j2) = (1e-9, 1e-8);
    let slope = (excess(j2) / excess(j1)).log10() / (j2 / j1).log10();
    assert!((slope - 2.0).abs() < 0.02, "{slope}");
}

#[test]
fn narrowest_width_is_relaxation_floor() {
    let p = SystemParams::reference().with_exchange(1e-9);
    assert!((nsit_width(&p) / p.gamma_k - 1.0).abs() < 0.01);
}

#[test]
fn center_is_pulled_toward_alkali_resonance() {
    // ω̄ lies between −γₖB̃ and zero, and the pull fades as the field grows.
    let mut last = f64::INFINITY;
    for b in [2e-7, 5e-7, 1e-6, 2e-6, 5e-6] {
        let c = nsit_center(&SystemParams::reference().with_noble_splitting(b));
        let pull = (c + b) / b;
        assert!(c < 0.0 && pull > 0.0 && pull < last, "{b}: {c}");
        last = pull;
    }
    assert!(last < 0.01);
}

/// Largest |χ − (χ₁+χ₂+χ₃)| over ±20Γ̃ₖ around ω̄, relative to the largest |χ|.
fn fidelity(p: &SystemParams) -> f64 {
    let (c, w) = (nsit_center(p), nsit_width(p));
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in -400..=400 {
        let d = decompose(p, c + 0.05 * w * k as f64).unwrap();
        err = err.max((d.chi - d.sum()).norm());
        scale = scale.max(d.chi.norm());
    }
    err / scale
}

#[test]
fn decomposition_tracks_exact_line_near_compensation() {
    for b in [0.0, 5e-7, 1e-6] {
        let p = SystemParams::reference().with_noble_splitting(b);
        let f = fidelity(&p);
        assert!(f < 0.05, "γₖB̃ = {b}: {f}");
    }
}

#[test]
fn decomposition_degrades_far_from_compensation() {
    let near = fidelity(&SystemParams::reference().with_noble_splitting(2e-7));
    let far = fidelity(&SystemParams::reference().with_noble_splitting(5e-6));
    assert!(far > near);
}

#[test]
fn lambda_limit_width_matches_closed_form_over_control_range() {
    use nsit_core::analysis::{extract_feature, scan_spectrum, FeatureKind, Mode};
    for omega in [0.01, 0.03, 0.1, 0.3] {
        let p = SystemParams::reference().with_exchange(0.0).with_control(omega);
        let w = eit_width(&p);
        let spec = scan_spectrum(&p, (-40.0 * w, 40.0 * w), &Mode::Exact, false).unwrap();
        let f = extract_feature(&spec, FeatureKind::Eit, 0.0).unwrap();
        assert!((f.fwhm / w - 1.0).abs() < 0.1, "Ω = {omega}: {} vs {w}", f.fwhm);
    }
}
