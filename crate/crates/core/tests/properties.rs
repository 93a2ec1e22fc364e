use neutralgeom::expr::Expr;
use neutralgeom::families::{generate, FamilyIIISpec, FamilyISpec, FamilySpec, ValidationOptions};
use neutralgeom::geometry::SurfacePoint;
use neutralgeom::grid::Rect;
use neutralgeom::jet::{fd_jet, FdOrder, FdStep, ScalarJet, Taylor};
use neutralgeom::linalg::{inner4, LinearMap4, Vec4};
use neutralgeom::residuals::{evaluate, AmbientCurvature};
use proptest::prelude::*;

fn vec4() -> impl Strategy<Value = Vec4> {
    prop::array::uniform4(-10.0..10.0f64).prop_map(Vec4)
}

fn ex(s: &str) -> Expr {
    Expr::parse(s).unwrap()
}

fn small_grid() -> ValidationOptions {
    ValidationOptions {
        size: (7, 7),
        ..Default::default()
    }
}

proptest! {
    #[test]
    fn inner_product_is_symmetric_and_bilinear(x in vec4(), y in vec4(), z in vec4(), k in -5.0..5.0f64) {
        prop_assert_eq!(inner4(&x, &y), inner4(&y, &x));
        let lhs = inner4(&(x * k + y), &z);
        let rhs = k * inner4(&x, &z) + inner4(&y, &z);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn isometries_preserve_the_inner_product(
        x in vec4(), y in vec4(),
        a in -3.0..3.0f64, b in -3.0..3.0f64, r in -1.5..1.5f64,
    ) {
        let m = LinearMap4::rotation(0, 1, a)
            .compose(&LinearMap4::rotation(2, 3, b))
            .compose(&LinearMap4::boost(1, 2, r));
        prop_assert!(m.isometry_defect() < 1e-9);
        let before = inner4(&x, &y);
        let after = inner4(&m.apply(&x), &m.apply(&y));
        prop_assert!((before - after).abs() <= 1e-8 * (1.0 + before.abs() * r.cosh().powi(2)));
    }

    #[test]
    fn jets_agree_with_finite_differences(s in -0.8..0.8f64, t in -0.8..0.8f64) {
        let e = ex("exp(s*t) + sin(s - 2*t)");
        let jet = e.jet(s, t).unwrap();
        let fd = fd_jet(
            |s, t| Ok(Vec4::new(e.eval(s, t)?, 0.0, 0.0, 0.0)),
            (s, t),
            FdStep::Auto,
            FdOrder::Fourth,
        )
        .unwrap();
        for n in 0..=4 {
            for j in 0..=n {
                let a = jet.partial(n - j, j).unwrap();
                let b = fd.0[0].partial(n - j, j).unwrap();
                prop_assert!((a - b).abs() <= 1e-4 * (1.0 + a.abs()), "d({},{}) {} vs {}", n - j, j, a, b);
            }
        }
    }

    #[test]
    fn product_and_quotient_rules(a in 0.5..2.0f64, b in -1.0..1.0f64) {
        let base = (0.3, -0.2);
        let s = ScalarJet::var_s(base);
        let t = ScalarJet::var_t(base);
        let u = s * a + t * b + 3.0;
        let q = u.recip().unwrap() * u;
        prop_assert!((q.value() - 1.0).abs() < 1e-14);
        for n in 1..=4 {
            for j in 0..=n {
                prop_assert!(q.partial(n - j, j).unwrap().abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Flat family (i) is quasi-minimal, biconservative and flat for any `ψ` with `ψ_st ≠ 0`.
    #[test]
    fn family_i_is_flat_quasi_minimal_biconservative(
        c in 0.6..2.0f64, p in -1.0..1.0f64, q in -0.5..0.5f64,
    ) {
        let psi = format!("{c}*s*t + {p}*s^3 + {q}*exp(t) + {q}*s^2*t^2");
        let spec = FamilySpec::I(FamilyISpec { psi: ex(&psi), domain: Rect::new([-0.5, 0.5], [-0.5, 0.5]).unwrap() });
        let v = generate("prop", &spec, &small_grid()).unwrap().validation.verdicts.unwrap();
        prop_assert!(v.is_quasi_minimal && v.is_biconservative && v.is_flat);
    }

    /// `ψ_sstt = 0` makes family (i) biharmonic.
    #[test]
    fn family_i_with_vanishing_f_sstt_is_biharmonic(
        c in 0.5..2.0f64, p in -1.0..1.0f64, q in -1.0..1.0f64,
    ) {
        let psi = format!("{c}*s*t + {p}*s^2*t + {q}*t^3 + sin(s)");
        let spec = FamilySpec::I(FamilyISpec { psi: ex(&psi), domain: Rect::new([-0.5, 0.5], [-0.5, 0.5]).unwrap() });
        let g = generate("prop", &spec, &small_grid()).unwrap();
        prop_assert!(g.validation.max("biharmonic").unwrap() < 1e-9);
    }

    /// Every admissible instance built from the circle on the light cone is
    /// proper biconservative, and with `K ≠ 0` it is biharmonic.
    #[test]
    fn nonflat_instances_are_biharmonic(
        scale in 0.3..3.0f64, mu0 in -1.0..1.0f64, mu1 in -1.0..1.0f64,
        eta in prop::array::uniform4(-1.0..1.0f64),
    ) {
        let spec = FamilySpec::III(FamilyIIISpec {
            m: ex("exp(-t)*sqrt(s^2+1)"),
            alpha: [ex("cos(t)"), ex("sin(t)"), ex("cos(t)"), ex("sin(t)")],
            a: ex(&format!("{scale}*exp(t/2)")),
            mu: ex(&format!("{mu0} + {mu1}*t")),
            eta0: Vec4(eta),
            steps: 512,
            domain: Rect::new([-1.0, 1.0], [0.0, 1.0]).unwrap(),
        });
        let g = generate("prop", &spec, &small_grid()).unwrap();
        let v = g.validation.verdicts.unwrap();
        prop_assert!(v.is_quasi_minimal && v.is_proper && v.is_biharmonic && !v.is_flat);
        prop_assert!(g.validation.max("isometry").unwrap() < 1e-7);
    }

    /// Residuals are unchanged by rotations within the spacelike and timelike planes and by translations.
    #[test]
    fn residuals_are_invariant_under_ambient_rotations(
        a in -3.0..3.0f64, b in -3.0..3.0f64, shift in prop::array::uniform4(-5.0..5.0f64),
        s in -0.9..0.9f64, t in -0.9..0.9f64,
    ) {
        let f = ex_surface().jet_at(s, t);
        let m = LinearMap4::rotation(0, 1, a).compose(&LinearMap4::rotation(2, 3, b));
        let mut g = SurfacePoint::map_immersion(&f, |v| m.apply(v));
        for k in 0..4 {
            g.0[k] = g.0[k] + shift[k];
        }
        let r0 = evaluate(&f, None, AmbientCurvature::FLAT, 1e-7).unwrap().residuals;
        let r1 = evaluate(&g, None, AmbientCurvature::FLAT, 1e-7).unwrap().residuals;
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs());
        prop_assert!(close(r0.hh, r1.hh));
        prop_assert!(close(r0.k, r1.k));
        prop_assert!(close(r0.biconservative, r1.biconservative));
        prop_assert!(close(r0.biharmonic.unwrap(), r1.biharmonic.unwrap()));
        prop_assert!(close(r0.quasiminimal_nonzero, r1.quasiminimal_nonzero));
    }

    /// Boosts preserve scalar invariants and keep vanishing residuals at zero.
    #[test]
    fn boosts_preserve_invariants(r in -1.0..1.0f64, s in -0.9..0.9f64, t in -0.9..0.9f64) {
        let m = LinearMap4::boost(0, 3, r).compose(&LinearMap4::boost(1, 2, 0.5 * r));
        let generic = ex_surface().jet_at(s, t);
        let boosted = SurfacePoint::map_immersion(&generic, |v| m.apply(v));
        let r0 = evaluate(&generic, None, AmbientCurvature::FLAT, 1e-7).unwrap().residuals;
        let r1 = evaluate(&boosted, None, AmbientCurvature::FLAT, 1e-7).unwrap().residuals;
        prop_assert!((r0.hh - r1.hh).abs() <= 1e-9 * (1.0 + r0.hh.abs()));
        prop_assert!((r0.k - r1.k).abs() <= 1e-9 * (1.0 + r0.k.abs()));

        let st = FamilySpec::I(FamilyISpec { psi: ex("s*t + s^3"), domain: Rect::unit() });
        let imm = generate("st", &st, &small_grid()).unwrap().immersion;
        let f = SurfacePoint::map_immersion(&imm.jet(s, t).unwrap(), |v| m.apply(v));
        let e = evaluate(&f, None, AmbientCurvature::FLAT, 1e-7).unwrap().residuals;
        prop_assert!(e.biconservative < 1e-8 * r.cosh().powi(4));
        prop_assert!(e.hh.abs() < 1e-10);
    }
}

/// `(s + t²/10, t, 2t + 3s²/10, st/5)`: Lorentzian on `[-0.9, 0.9]²`, not biconservative.
struct GenericSurface([Expr; 4]);

fn ex_surface() -> GenericSurface {
    GenericSurface([
        ex("s + 0.1*t^2"),
        ex("t"),
        ex("2*t + 0.3*s^2"),
        ex("0.2*s*t"),
    ])
}

impl GenericSurface {
    fn jet_at(&self, s: f64, t: f64) -> neutralgeom::jet::Vec4Jet {
        neutralgeom::jet::JetVec(std::array::from_fn(|k| self.0[k].jet(s, t).unwrap()))
    }
}
