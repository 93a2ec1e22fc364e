//! Engine output against values obtained independently: closed forms and an
//! exact symbolic evaluation of the ambient Laplacian.

use neutralgeom::acceptance::{corrupt_f_ss, negative_control_spec};
use neutralgeom::families::{builtin, generate, GeneratedSurface, JetMode, ValidationOptions};
use neutralgeom::residuals::{evaluate, AmbientCurvature};

fn i3(jets: JetMode) -> GeneratedSurface {
    generate(
        "iii-I3",
        &builtin("iii-I3").unwrap(),
        &ValidationOptions::with_jets(jets),
    )
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn generic_surface_matches_symbolic_laplacian() {
    // tangent part of −2 ΔH, H = Δf / 2, evaluated exactly at 25 digits
    let expected = [
        ((0.6, 0.0), 5_057.319_202_185_36),
        ((0.8, 0.8), 9.651_938_314_467_693e-4),
    ];
    let g = generate(
        "control",
        &negative_control_spec(),
        &ValidationOptions::default(),
    )
    .unwrap();
    for ((s, t), value) in expected {
        let p = g
            .validation
            .points
            .iter()
            .find(|p| (p.s - s).abs() < 1e-12 && (p.t - t).abs() < 1e-12)
            .unwrap();
        assert!(
            rel(p.biconservative, value) < 1e-9,
            "({s}, {t}): {}",
            p.biconservative
        );
    }
}

#[test]
fn flat_exponential_bitension_closed_form() {
    // H = −ψ_st (1,0,0,1), ΔH = 2 ψ_sstt (1,0,0,1) for g = [[0,−1],[−1,0]]
    let g = generate(
        "i-exp",
        &builtin("i-exp").unwrap(),
        &ValidationOptions::default(),
    )
    .unwrap();
    for p in &g.validation.points {
        let expected = 2.0 * std::f64::consts::SQRT_2 * (p.s + p.t).exp();
        assert!(rel(p.biharmonic.unwrap(), expected) < 1e-12);
        assert!(
            rel(
                p.quasiminimal_nonzero,
                (p.s + p.t).exp() * std::f64::consts::SQRT_2
            ) < 1e-12
        );
    }
}

#[test]
fn i3_curvature_and_invariant_closed_forms() {
    let g = i3(JetMode::Analytic);
    for p in &g.validation.points {
        let k = (-p.t).exp() * (p.s * p.s + 1.0).powf(-1.5);
        assert!(rel(p.k, k) < 1e-12);
        assert!(rel(p.k_extrinsic.unwrap(), k) < 1e-10);
        assert!((p.l.unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn frame_readback_returns_the_rescaled_curve() {
    // e3 = B α with B = −e^{t/2}(5/4 + e^{−2t}); extraction returns a/B
    let g = i3(JetMode::Analytic);
    for (t, b) in g.e3_alpha_factor().unwrap() {
        let expected = -(t / 2.0).exp() * (1.25 + (-2.0 * t).exp());
        assert!(rel(b, expected) < 1e-12, "B({t}) = {b}");
    }
    let l4 = g.lemma4(1e-7).unwrap();
    for (i, &t) in l4.t.iter().enumerate() {
        let c = 1.25 + (-2.0 * t).exp();
        assert!(rel(l4.a[i], -1.0 / c) < 1e-12);
        let interior = i >= 2 && i + 2 < l4.t.len();
        if interior {
            // b + a′/a = L = 1 with a′/a = 2e^{−2t}/c
            assert!((l4.b[i] - (1.0 - 2.0 * (-2.0 * t).exp() / c)).abs() < 1e-6);
        }
    }
    assert!(l4.s_independence < 1e-12);
    assert!(l4.bpl < 1e-6);
}

#[test]
fn frame_readback_survives_finite_difference_jets() {
    let g = i3(JetMode::fd_default());
    let l4 = g.lemma4(1e-4).unwrap();
    for (t, a) in l4.t.iter().zip(&l4.a) {
        assert!((a + 1.0 / (1.25 + (-2.0 * t).exp())).abs() < 1e-7);
    }
}

#[test]
fn corrupted_second_derivative_breaks_integrability() {
    for name in ["i-st", "iii-I3"] {
        let g = generate(name, &builtin(name).unwrap(), &ValidationOptions::default()).unwrap();
        let metric = g.immersion.metric().unwrap();
        let f = g.immersion.jet(0.1, 0.6).unwrap();
        let clean = evaluate(&f, Some(&metric), AmbientCurvature::FLAT, 1e-7)
            .unwrap()
            .residuals;
        let bad = evaluate(
            &corrupt_f_ss(&f, 1e-3),
            Some(&metric),
            AmbientCurvature::FLAT,
            1e-7,
        )
        .unwrap()
        .residuals;
        assert!(clean.gauss.max(clean.codazzi).max(clean.ricci) < 1e-7);
        assert!(bad.gauss.max(bad.codazzi).max(bad.ricci) > 1e-4, "{name}");
    }
}
