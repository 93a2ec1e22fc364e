//! The acceptance suite behind `neutralgeom selftest`.
//!
//! Each criterion yields one [`Outcome`]: a verdict plus the measured values
//! next to the bounds they were held to.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::expr::Expr;
use crate::families::{
    builtin, generate, FamilyIII, FamilySpec, GeneratedSurface, JetMode, SurfaceSpec,
    ValidationOptions, BUILTINS,
};
use crate::geometry::{
    framed, gaussian_curvature_intrinsic, invariant_l, FirstFundamentalForm, SemiGeodesicMetric,
    SurfacePoint,
};
use crate::grid::{Grid, Rect, DEFAULT_GRID};
use crate::residuals::{
    biconservative_frame_vector, biconservative_vector, evaluate, AmbientCurvature, PointResiduals,
    FD_SLACK,
};

/// Number of criteria in the suite.
pub const CRITERIA: usize = 11;

/// Biharmonic residual of `ψ = e^{s+t}` at the origin, recorded at first build.
pub const I_EXP_BIHARMONIC_AT_ORIGIN: f64 = 2.828_427_124_746_19;

/// Point of the negative control `(s, t, s² + t², st)`.
pub const NEGATIVE_CONTROL_POINT: (f64, f64) = (0.6, 0.0);

/// Biconservative residual of the negative control at [`NEGATIVE_CONTROL_POINT`].
pub const NEGATIVE_CONTROL_BICONS: f64 = 5_057.319_202_185_36;

/// Size of the perturbation added to `f_ss` in the corrupted-jet check.
pub const CORRUPTION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteOptions {
    pub jets: JetMode,
    /// Factor applied to every upper bound.
    pub tol_scale: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            jets: JetMode::Analytic,
            tol_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{verdict}] {:>2} {}: {}",
            self.id, self.title, self.detail
        )
    }
}

struct Check {
    passed: bool,
    parts: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check {
            passed: true,
            parts: Vec::new(),
        }
    }

    fn at_most(&mut self, label: &str, value: f64, bound: f64) {
        let ok = value <= bound;
        self.passed &= ok;
        self.parts
            .push(format!("{label} {value:.3e} <= {bound:.1e}"));
    }

    fn at_least(&mut self, label: &str, value: f64, bound: f64) {
        let ok = value >= bound;
        self.passed &= ok;
        self.parts
            .push(format!("{label} {value:.3e} >= {bound:.1e}"));
    }

    fn note(&mut self, label: &str, value: f64) {
        self.parts.push(format!("{label} {value:.3e} (not gated)"));
    }

    fn holds(&mut self, label: &str, ok: bool) {
        self.passed &= ok;
        self.parts
            .push(format!("{label} {}", if ok { "yes" } else { "no" }));
    }

    fn error(&mut self, label: &str, err: impl fmt::Display) {
        self.passed = false;
        self.parts.push(format!("{label} error: {err}"));
    }

    fn finish(self, id: usize, title: &'static str) -> Outcome {
        Outcome {
            id,
            title,
            passed: self.passed,
            detail: self.parts.join("; "),
        }
    }
}

struct Suite {
    opts: SuiteOptions,
    surfaces: HashMap<(&'static str, bool), Result<GeneratedSurface, String>>,
}

impl Suite {
    fn upper(&self, bound: f64) -> f64 {
        let slack = if self.opts.jets.is_analytic() {
            0.0
        } else {
            FD_SLACK
        };
        bound * self.opts.tol_scale + slack
    }

    fn surface_in(
        &mut self,
        name: &'static str,
        jets: JetMode,
    ) -> Result<&GeneratedSurface, String> {
        self.surfaces
            .entry((name, jets.is_analytic()))
            .or_insert_with(|| {
                let spec = builtin(name).map_err(|e| e.to_string())?;
                generate(name, &spec, &ValidationOptions::with_jets(jets))
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn surface(&mut self, name: &'static str) -> Result<&GeneratedSurface, String> {
        self.surface_in(name, self.opts.jets)
    }
}

fn max_of(points: &[PointResiduals], f: impl Fn(&PointResiduals) -> Option<f64>) -> f64 {
    points.iter().filter_map(f).fold(0.0, |acc, v| {
        if v.is_nan() {
            f64::INFINITY
        } else {
            acc.max(v)
        }
    })
}

fn min_of(points: &[PointResiduals], f: impl Fn(&PointResiduals) -> Option<f64>) -> f64 {
    points.iter().filter_map(f).fold(f64::INFINITY, f64::min)
}

/// Runs all criteria in order.
pub fn run(opts: SuiteOptions) -> Vec<Outcome> {
    let mut suite = Suite {
        opts,
        surfaces: HashMap::new(),
    };
    vec![
        flat_families(&mut suite),
        biharmonic_discrimination(&mut suite),
        construction_pipeline(&mut suite),
        curvature_forces_biharmonic(&mut suite),
        curvature_identities(&mut suite),
        invariant_l_check(&mut suite),
        lemma4_closure(&mut suite),
        integrability_check(&mut suite),
        negative_control(&mut suite),
        fd_cross_check(&mut suite),
        equivalent_assembly(&mut suite),
    ]
}

fn flat_families(suite: &mut Suite) -> Outcome {
    let mut c = Check::new();
    let (b, k) = (suite.upper(1e-8), suite.upper(1e-9));
    for name in ["i-st", "i-exp", "ii-trig"] {
        match suite.surface(name) {
            Ok(g) => {
                let p = &g.validation.points;
                c.at_most(&format!("{name} isometry"), max_of(p, |r| r.isometry), b);
                c.at_most(
                    &format!("{name} <H,H>"),
                    max_of(p, |r| Some(r.quasiminimal_null)),
                    b,
                );
                c.at_most(
                    &format!("{name} bicons"),
                    max_of(p, |r| Some(r.biconservative)),
                    b,
                );
                c.at_most(&format!("{name} |K|"), max_of(p, |r| Some(r.k.abs())), k);
            }
            Err(e) => c.error(name, e),
        }
    }
    c.finish(1, "flat families")
}

fn biharmonic_discrimination(suite: &mut Suite) -> Outcome {
    let mut c = Check::new();
    let bound = suite.upper(1e-7);
    let regression = suite.upper(1e-6);
    match suite.surface("i-st") {
        Ok(g) => c.at_most(
            "i-st biharm",
            max_of(&g.validation.points, |r| r.biharmonic),
            bound,
        ),
        Err(e) => c.error("i-st", e),
    }
    let jets = suite.opts.jets;
    let at_origin = suite.surface("i-exp").and_then(|g| {
        let f = g
            .immersion
            .jet_with(jets, 0.0, 0.0)
            .map_err(|e| e.to_string())?;
        let metric = g.immersion.metric();
        let e = evaluate(
            &f,
            metric.as_ref(),
            AmbientCurvature::FLAT,
            g.validation.tolerances.isometry,
        )
        .map_err(|e| e.to_string())?;
        e.residuals
            .biharmonic
            .ok_or_else(|| "no biharmonic residual".to_string())
    });
    match at_origin {
        Ok(v) => {
            c.at_least("i-exp biharm(0,0)", v, 1e-3);
            c.at_most(
                "regression gap",
                (v - I_EXP_BIHARMONIC_AT_ORIGIN).abs(),
                regression,
            );
        }
        Err(e) => c.error("i-exp", e),
    }
    c.finish(2, "biharmonic discrimination")
}

fn construction_pipeline(suite: &mut Suite) -> Outcome {
    let mut c = Check::new();
    let (iso, null, bic, ker) = (
        suite.upper(1e-7),
        suite.upper(1e-8),
        suite.upper(1e-8),
        suite.upper(1e-7),
    );
    match suite.surface("iii-I3") {
        Ok(g) => {
            let p = &g.validation.points;
            c.at_most("isometry", max_of(p, |r| r.isometry), iso);
            c.at_most("<H,H>", max_of(p, |r| Some(r.quasiminimal_null)), null);
            c.at_least(
                "scale(H)",
                min_of(p, |r| Some(r.quasiminimal_nonzero)),
                1e-3,
            );
            c.at_most("bicons", max_of(p, |r| Some(r.biconservative)), bic);
            c.at_most("h3_11", max_of(p, |r| r.h3_11.map(f64::abs)), ker);
            c.at_most("xi1", max_of(p, |r| r.xi1.map(f64::abs)), ker);
        }
        Err(e) => c.error("iii-I3", e),
    }
    c.finish(3, "construction pipeline")
}

fn curvature_forces_biharmonic(suite: &mut Suite) -> Outcome {
    let mut c = Check::new();
    let bound = suite.upper(1e-6);
    match suite.surface("iii-I3") {
        Ok(g) => {
            let p = &g.validation.points;
            c.at_least("min|K|", min_of(p, |r| Some(r.k.abs())), 0.1);
            c.at_most("biharm", max_of(p, |r| r.biharmonic), bound);
        }
        Err(e) => c.error("iii-I3", e),
    }
    c.finish(4, "nonvanishing curvature forces biharmonic")
}

fn curvature_identities(suite: &mut Suite) -> Outcome {
    let mut c = Check::new();
    let bound = 1e-8 * suite.opts.tol_scale;
    let ext = suite.upper(1e-7);
    let grid = Grid::new(Rect::unit(), DEFAULT_GRID, DEFAULT_GRID).expect("valid grid");
    for m in ["0", "s^2/2", "exp(-t)*sqrt(s^2+1)"] {
        let metric = SemiGeodesicMetric::new(Expr::parse(m).expect("valid expression"));
        let gap = grid.points().into_iter().try_fold(0.0f64, |acc, (s, t)| {
            let mj = metric.m_jet(s, t)?;
            let k = gaussian_curvature_intrinsic(&FirstFundamentalForm::semi_geodesic(&mj))?;
            Ok::<_, Error>(acc.max((k - mj.partial(2, 0)?).abs()))
        });
        match gap {
            Ok(v) => c.at_most(&format!("m = {m}"), v, bound),
            Err(e) => c.error(m, e),
        }
    }
    match suite.surface("iii-I3") {
        Ok(g) => c.at_most(
            "I3 extrinsic",
            max_of(&g.validation.points, |r| {
                r.k_extrinsic.map(|ke| (ke - r.k).abs())
            }),
            ext,
        ),
        Err(e) => c.error("iii-I3", e),
    }
    c.finish(5, "curvature identities")
}

fn invariant_l_check(suite: &mut Suite) -> Outcome {
    let mut c = Check::new();
    let bound = 1e-8 * suite.opts.tol_scale;
    let Ok(FamilySpec::III(i3)) = builtin("iii-I3") else {
        unreachable!("iii-I3 is a family (iii) preset")
    };
    let grid = Grid::new(i3.domain, DEFAULT_GRID, DEFAULT_GRID).expect("valid grid");
    let metric = SemiGeodesicMetric::new(i3.m.clone());
    let gap = grid.points().into_iter().try_fold(0.0f64, |acc, (s, t)| {
        Ok::<_, Error>(acc.max((metric.invariant_l(s, t)?.value - 1.0).abs()))
    });
    match gap {
        Ok(v) => c.at_most("|L - 1|", v, bound),
        Err(e) => c.error("L", e),
    }
    let half_square = Expr::parse("s^2/2").expect("valid expression");
    match half_square.jet(1.0, 0.0).and_then(|m| invariant_l(&m)) {
        Ok(l) => c.at_most("|L(1,0) + 3|", (l.value + 3.0).abs(), bound),
        Err(e) => c.error("L(1,0)", e),
    }
    let mut rejected = i3;
    rejected.m = half_square;
    let gate = FamilyIII::new(rejected, &grid);
    c.holds(
        "s^2/2 rejected",
        matches!(gate, Err(Error::LNotFunctionOfT { .. })),
    );
    c.finish(6, "invariant L")
}

fn lemma4_closure(suite: &mut Suite) -> Outcome {
    let mut c = Check::new();
    let (a_tol, s_tol, bpl_tol, ker) = (
        suite.upper(1e-6),
        suite.upper(1e-7),
        suite.upper(1e-6),
        suite.upper(1e-7),
    );
    let extracted = suite
        .surface("iii-I3")
        .and_then(|g| g.lemma4(ker).map_err(|e| e.to_string()));
    match extracted {
        Ok(l4) => {
            let a_gap =
                l4.t.iter()
                    .zip(&l4.a)
                    .map(|(t, a)| (a - (t / 2.0).exp()).abs())
                    .fold(0.0, f64::max);
            c.at_most("|a - e^(t/2)|", a_gap, a_tol);
            c.at_most("s-independence", l4.s_independence, s_tol);
            c.at_most("|b + a'/a - L|", l4.bpl, bpl_tol);
        }
        Err(e) => c.error("extraction", e),
    }
    c.finish(7, "frame read-back")
}

/// `f` with `f_ss` shifted by `amount` in the first coordinate.
pub fn corrupt_f_ss(f: &crate::jet::Vec4Jet, amount: f64) -> crate::jet::Vec4Jet {
    let mut out = *f;
    let c = out.0[0].coeff(2, 0);
    out.0[0].set_coeff(2, 0, c + amount / 2.0);
    out
}

fn integrability_check(suite: &mut Suite) -> Outcome {
    let mut c = Check::new();
    let bound = suite.upper(1e-7);
    let jets = suite.opts.jets;
    for name in BUILTINS {
        match suite.surface(name) {
            Ok(g) => {
                let p = &g.validation.points;
                let worst = max_of(p, |r| Some(r.gauss.max(r.codazzi).max(r.ricci)));
                c.at_most(name, worst, bound);
                let rect = g.grid.rect;
                let (s, t) = (
                    0.5 * (rect.s[0] + rect.s[1]) + 0.1,
                    0.5 * (rect.t[0] + rect.t[1]) + 0.1,
                );
                let corrupted = g
                    .immersion
                    .jet_with(jets, s, t)
                    .and_then(|f| {
                        let metric = g.immersion.metric();
                        evaluate(
                            &corrupt_f_ss(&f, CORRUPTION),
                            metric.as_ref(),
                            AmbientCurvature::FLAT,
                            g.validation.tolerances.isometry,
                        )
                    })
                    .map(|e| {
                        e.residuals
                            .gauss
                            .max(e.residuals.codazzi)
                            .max(e.residuals.ricci)
                    });
                match corrupted {
                    Ok(v) => c.at_least(&format!("{name} corrupted"), v, 1e-4),
                    Err(e) => c.error(&format!("{name} corrupted"), e),
                }
            }
            Err(e) => c.error(name, e),
        }
    }
    c.finish(8, "integrability")
}

/// The generic surface `(s, t, s² + t², st)` over the unit square.
pub fn negative_control_spec() -> FamilySpec {
    let ex = |s: &str| Expr::parse(s).expect("valid expression");
    FamilySpec::Surface(SurfaceSpec {
        f: [ex("s"), ex("t"), ex("s^2+t^2"), ex("s*t")],
        m: None,
        domain: Rect::unit(),
    })
}

fn negative_control(suite: &mut Suite) -> Outcome {
    let mut c = Check::new();
    let regression = suite.upper(1e-8);
    let spec = negative_control_spec();
    let opts = ValidationOptions::with_jets(suite.opts.jets);
    match generate("negative-control", &spec, &opts) {
        Ok(g) => {
            let (s0, t0) = NEGATIVE_CONTROL_POINT;
            let p = &g.validation.points;
            let at = p
                .iter()
                .find(|r| (r.s - s0).abs() < 1e-12 && (r.t - t0).abs() < 1e-12)
                .map(|r| r.biconservative);
            match at {
                Some(v) => {
                    c.at_least("bicons(0.6,0)", v, 1e-3);
                    c.at_most(
                        "relative regression gap",
                        (v / NEGATIVE_CONTROL_BICONS - 1.0).abs(),
                        regression,
                    );
                }
                None => c.error("bicons(0.6,0)", "not a Lorentzian grid node"),
            }
            c.note(
                "min over Lorentzian nodes",
                min_of(p, |r| Some(r.biconservative)),
            );
        }
        Err(e) => c.error("negative control", e),
    }
    c.finish(9, "negative control")
}

/// The residual quantities compared between jet modes.
pub fn compared_fields(r: &PointResiduals) -> [(&'static str, Option<f64>); 14] {
    [
        ("isometry", r.isometry),
        ("<H,H>", Some(r.hh)),
        ("scale(H)", Some(r.quasiminimal_nonzero)),
        ("bicons", Some(r.biconservative)),
        ("bicons_frame", r.biconservative_frame),
        ("biharm", r.biharmonic),
        ("gauss", Some(r.gauss)),
        ("codazzi", Some(r.codazzi)),
        ("ricci", Some(r.ricci)),
        ("h3_11", r.h3_11),
        ("xi1", r.xi1),
        ("K", Some(r.k)),
        ("L", r.l),
        ("K_ext", r.k_extrinsic),
    ]
}

/// Largest gap between matching residuals of two sweeps, with the field it occurs in.
pub fn largest_gap(
    a: &[PointResiduals],
    b: &[PointResiduals],
) -> Result<(f64, &'static str), String> {
    if a.len() != b.len() {
        return Err(format!("{} vs {} points", a.len(), b.len()));
    }
    let mut worst = (0.0, "none");
    for (x, y) in a.iter().zip(b) {
        for ((name, u), (_, v)) in compared_fields(x).into_iter().zip(compared_fields(y)) {
            let gap = match (u, v) {
                (Some(u), Some(v)) => (u - v).abs(),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            };
            if !(gap <= worst.0) {
                worst = (gap, name);
            }
        }
    }
    Ok(worst)
}

fn fd_cross_check(suite: &mut Suite) -> Outcome {
    let mut c = Check::new();
    let bound = 1e-4 * suite.opts.tol_scale;
    for name in BUILTINS {
        let analytic = suite
            .surface_in(name, JetMode::Analytic)
            .map(|g| g.validation.points.clone());
        let fd = suite
            .surface_in(name, JetMode::fd_default())
            .map(|g| g.validation.points.clone());
        match analytic.and_then(|a| fd.and_then(|f| largest_gap(&a, &f))) {
            Ok((gap, field)) => c.at_most(&format!("{name} ({field})"), gap, bound),
            Err(e) => c.error(name, e),
        }
    }
    c.finish(10, "finite-difference cross-check")
}

fn equivalent_assembly(suite: &mut Suite) -> Outcome {
    let mut c = Check::new();
    let bound = suite.upper(1e-8);
    let jets = suite.opts.jets;
    for name in BUILTINS {
        let gap = suite.surface(name).and_then(|g| {
            let metric = g.immersion.metric().ok_or("no declared metric")?;
            let tau = g.validation.tolerances.isometry;
            g.grid
                .points()
                .into_par_iter()
                .map(|(s, t)| {
                    let f = g.immersion.jet_with(jets, s, t)?;
                    let sp = SurfacePoint::new(&f)?;
                    let full = biconservative_vector(&sp, AmbientCurvature::FLAT);
                    let fp = framed(sp, metric.m_jet(s, t)?, tau)?;
                    Ok::<_, Error>((full - biconservative_frame_vector(&fp)).scale())
                })
                .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
                .map_err(|e| e.to_string())
        });
        match gap {
            Ok(v) => c.at_most(name, v, bound),
            Err(e) => c.error(name, e),
        }
    }
    c.finish(11, "equivalent biconservative assemblies")
}
