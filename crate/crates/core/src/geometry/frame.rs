use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{ScalarJet, Taylor, Vec4Jet};
use crate::linalg::{inner4, solve_normal_frame, Vec4};

use super::metric::{invariant_l, SemiGeodesicMetric};
use super::surface::SurfacePoint;

/// Default isometry tolerance for analytic jets.
pub const TAU_ISO: f64 = 1e-7;

/// Frame, second fundamental form and connection data at one point, in the
/// null frame `e1 = f_s`, `e2 = m f_s + f_t`, `e3 = −H`, `e4`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointGeometry {
    pub p: (f64, f64),
    pub f: Vec4,
    pub f_s: Vec4,
    pub f_t: Vec4,
    pub f_ss: Vec4,
    pub f_st: Vec4,
    pub f_tt: Vec4,
    pub e1: Vec4,
    pub e2: Vec4,
    pub e3: Vec4,
    pub e4: Vec4,
    pub h3_11: f64,
    pub h3_12: f64,
    pub h3_22: f64,
    pub h4_11: f64,
    pub h4_12: f64,
    pub h4_22: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub phi1: f64,
    pub phi2: f64,
    #[serde(rename = "H")]
    pub h: Vec4,
    /// `m` and `m_s` at the point.
    pub m: f64,
    pub m_s: f64,
    /// `K = m_ss`.
    pub k: f64,
    /// `h4_11 h3_22 + h3_11 h4_22`, the Gauss-equation value of `K`.
    pub k_extrinsic: f64,
    pub l: Option<f64>,
    /// Largest relative deviation of the induced metric from `g_m`.
    pub isometry: f64,
}

/// Result of [`point_geometry`]: the values plus the jets later stages differentiate.
#[derive(Clone, Debug)]
pub struct FramedPoint {
    pub geometry: PointGeometry,
    pub surface: SurfacePoint,
    pub m: ScalarJet,
    pub e3: Vec4Jet,
    pub e4: Vec4Jet,
}

/// Induced metric against `g_m`: `max(|g11|, |g12 + 1|, |g22 − 2m|) / max(1, |2m|)`.
pub fn isometry_residual(sp: &SurfacePoint, m: f64) -> f64 {
    let g = &sp.metric;
    let d = [g.g11.value(), g.g12.value() + 1.0, g.g22.value() - 2.0 * m];
    d.iter().fold(0.0_f64, |a, x| a.max(x.abs())) / (2.0 * m).abs().max(1.0)
}

/// The first fundamental form of an immersion jet.
pub fn first_form(f: &Vec4Jet) -> Result<super::FirstFundamentalForm> {
    Ok(SurfacePoint::new(f)?.metric)
}

/// Frame data at the base point of `f`, checked against `metric`.
pub fn point_geometry(
    f: &Vec4Jet,
    metric: &SemiGeodesicMetric,
    tau_iso: f64,
) -> Result<FramedPoint> {
    let (s, t) = f.base();
    let m = metric.m_jet(s, t)?;
    let sp = SurfacePoint::new(f)?;
    framed(sp, m, tau_iso)
}

/// As [`point_geometry`], from a prepared surface point and the jet of `m`.
pub fn framed(sp: SurfacePoint, m: ScalarJet, tau_iso: f64) -> Result<FramedPoint> {
    let (s, t) = sp.base();
    let iso = isometry_residual(&sp, m.value());
    if !(iso <= tau_iso) {
        return Err(Error::IsometryViolation {
            s,
            t,
            residual: iso,
            tolerance: tau_iso,
        });
    }
    let f = &sp.f;
    let d = |i: usize, k: usize| f.extract(i, k);
    let (f_s, f_t) = (d(1, 0)?, d(0, 1)?);
    let h_val = sp.h.value();
    let h_floor = 1e-12 * f_s.scale().max(f_t.scale()).max(1.0);
    if h_val.scale() <= h_floor {
        return Err(Error::ZeroMeanCurvature {
            scale: h_val.scale(),
        });
    }
    let (e3v, e4v) = solve_normal_frame(&f_s, &f_t, &h_val, 0.0)?;

    let e3 = -sp.h;
    let e4 = null_partner(&sp, &e3)?;
    let e1 = sp.tangent[0];
    let e2 = sp.tangent[0].scaled(&m) + sp.tangent[1];

    // directional derivative along e2 = m ∂s + ∂t
    let along = |v: &Vec4Jet, i: usize| {
        if i == 0 {
            v.ds()
        } else {
            v.ds().scaled(&m) + v.dt()
        }
    };

    let mv = m.value();
    let al = |i: usize, j: usize| sp.alpha[i][j].value();
    let a11 = al(0, 0);
    let a12 = al(0, 0) * mv + al(0, 1);
    let a22 = al(0, 0) * (mv * mv) + al(0, 1) * (2.0 * mv) + al(1, 1);
    let h = |a: &Vec4, e: &Vec4| inner4(a, e);

    let xi = |i: usize| -inner4(&along(&e3, i).value(), &e4v);
    let phi = |i: usize| -inner4(&along(&e1, i).value(), &e2.value());

    let k = m.partial(2, 0)?;
    let l = if m.degree() >= 3 {
        invariant_l(&m).ok().map(|l| l.value)
    } else {
        None
    };
    let geometry = PointGeometry {
        p: (s, t),
        f: f.value(),
        f_s,
        f_t,
        f_ss: d(2, 0)?,
        f_st: d(1, 1)?,
        f_tt: d(0, 2)?,
        e1: e1.value(),
        e2: e2.value(),
        e3: e3v,
        e4: e4v,
        h3_11: h(&a11, &e3v),
        h3_12: h(&a12, &e3v),
        h3_22: h(&a22, &e3v),
        h4_11: h(&a11, &e4v),
        h4_12: h(&a12, &e4v),
        h4_22: h(&a22, &e4v),
        xi1: xi(0),
        xi2: xi(1),
        phi1: phi(0),
        phi2: phi(1),
        h: h_val,
        m: mv,
        m_s: m.partial(1, 0)?,
        k,
        k_extrinsic: h(&a11, &e4v) * h(&a22, &e3v) + h(&a11, &e3v) * h(&a22, &e4v),
        l,
        isometry: iso,
    };
    Ok(FramedPoint {
        geometry,
        surface: sp,
        m,
        e3,
        e4,
    })
}

/// Jet of the null normal field `e4` with `<e3, e4> = −1`.
fn null_partner(sp: &SurfacePoint, e3: &Vec4Jet) -> Result<Vec4Jet> {
    let v = e3.value();
    let r = v.lower() * (1.0 / v.euclid_dot(&v));
    let n = sp.normal_part(&e3.constant_like(&r));
    let ne = n.inner(e3);
    let a = -ne.recip()?;
    let b = -(a * n.inner(&n)).checked_div(&(ne * 2.0))?;
    Ok(n.scaled(&a) + e3.scaled(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::jet::JetVec;
    use approx::assert_abs_diff_eq;

    fn jet_of(exprs: [&str; 4], s: f64, t: f64) -> Vec4Jet {
        JetVec(exprs.map(|e| Expr::parse(e).unwrap().jet(s, t).unwrap()))
    }

    fn family_i(psi: &str, s: f64, t: f64) -> Vec4Jet {
        jet_of([psi, "(s-t)/sqrt(2)", "(s+t)/sqrt(2)", psi], s, t)
    }

    #[test]
    fn family_i_metric_is_g0() {
        let f = family_i("exp(s+t)", 0.4, -0.3);
        let g = first_form(&f).unwrap();
        assert_abs_diff_eq!(g.g11.value(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.g12.value(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.g22.value(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn family_i_st_frame() {
        let f = family_i("s*t", 0.0, 0.0);
        let fp = point_geometry(&f, &SemiGeodesicMetric::flat(), TAU_ISO).unwrap();
        let pg = &fp.geometry;
        for (a, b) in pg.h.0.iter().zip([-1.0, 0.0, 0.0, -1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(inner4(&pg.h, &pg.h), 0.0, epsilon = 1e-12);
        assert_eq!(pg.k, 0.0);
        assert_eq!(pg.phi1, 0.0);
        let e = [pg.e1, pg.e2, pg.e3, pg.e4];
        let table = [
            [0.0, -1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, -1.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(inner4(&e[i], &e[j]), table[i][j], epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(fp.e4.value().0[0], pg.e4.0[0], epsilon = 1e-12);
    }

    #[test]
    fn non_isometric_jet_is_rejected() {
        let f = jet_of(["s", "t", "s*s", "0"], 0.1, 0.1);
        let r = point_geometry(&f, &SemiGeodesicMetric::flat(), TAU_ISO);
        assert!(matches!(
            r,
            Err(Error::NotLorentzian { .. }) | Err(Error::IsometryViolation { .. })
        ));
        let f = family_i("s*t", 0.2, 0.1);
        let r = point_geometry(
            &f,
            &SemiGeodesicMetric::new(Expr::parse("s").unwrap()),
            TAU_ISO,
        );
        assert!(matches!(r, Err(Error::IsometryViolation { .. })));
    }

    #[test]
    fn planar_piece_has_no_mean_curvature() {
        let f = family_i("s+t", 0.0, 0.0);
        let r = point_geometry(&f, &SemiGeodesicMetric::flat(), TAU_ISO);
        assert!(matches!(r, Err(Error::ZeroMeanCurvature { .. })));
    }
}
