//! The defining equations of the surface classes as numerical residuals.
//!
//! Vector-valued defects are measured with the auxiliary Euclidean norm, so a
//! null but nonzero defect still counts.

mod integrability;
mod lemma4;
mod report;
mod tension;

pub use integrability::{integrability, Integrability};
pub use lemma4::{lemma4_extract, Lemma4};
pub use report::{
    classify, Aggregate, PointFailure, ReportHeader, ResidualReport, Tolerances, Verdicts, FD_SLACK,
};
pub use tension::{
    biconservative, biconservative_frame, biconservative_frame_vector, biconservative_vector,
    biharmonic, biharmonic_vector, mean_curvature_norm,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    framed, gaussian_curvature_intrinsic, FirstFundamentalForm, PointGeometry, SemiGeodesicMetric,
    SurfacePoint,
};
use crate::grid::Grid;
use crate::jet::{Vec4Jet, JET_DEGREE};
use crate::linalg::{inner4, Vec4};

/// Curvature `c ∈ {−1, 0, 1}` of the ambient space form, entering only through
/// `R̃(X,Y)Z = c(<Y,Z>X − <X,Z>Y)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AmbientCurvature(i8);

impl AmbientCurvature {
    pub const FLAT: AmbientCurvature = AmbientCurvature(0);

    pub fn new(c: f64) -> Result<Self> {
        [-1i8, 0, 1]
            .into_iter()
            .find(|&k| f64::from(k) == c)
            .map(AmbientCurvature)
            .ok_or(Error::InvalidCurvature(c))
    }

    pub fn value(self) -> f64 {
        self.0 as f64
    }

    /// `R̃(x, y) z`.
    pub fn apply(self, x: &Vec4, y: &Vec4, z: &Vec4) -> Vec4 {
        (*x * inner4(y, z) - *y * inner4(x, z)) * self.value()
    }
}

impl TryFrom<f64> for AmbientCurvature {
    type Error = Error;
    fn try_from(c: f64) -> Result<Self> {
        AmbientCurvature::new(c)
    }
}

impl From<AmbientCurvature> for f64 {
    fn from(c: AmbientCurvature) -> f64 {
        c.value()
    }
}

/// All residual magnitudes and scalar invariants at one grid point.
///
/// Frame quantities are present only when a semi-geodesic metric is declared.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResiduals {
    pub s: f64,
    pub t: f64,
    pub position: Vec4,
    /// `max(1, |f_s|, |f_t|)` in the auxiliary norm.
    pub jet_scale: f64,
    pub isometry: Option<f64>,
    /// `|<H,H>|`.
    pub quasiminimal_null: f64,
    /// Auxiliary norm of `H`.
    pub quasiminimal_nonzero: f64,
    /// Signed `<H,H>`.
    pub hh: f64,
    pub biconservative: f64,
    pub biconservative_frame: Option<f64>,
    pub biharmonic: Option<f64>,
    pub gauss: f64,
    pub codazzi: f64,
    pub ricci: f64,
    pub h3_11: Option<f64>,
    pub xi1: Option<f64>,
    /// Largest auxiliary norm of `∇⊥_s H`, `∇⊥_t H`.
    pub normal_derivative: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub k_extrinsic: Option<f64>,
}

/// Residuals of an immersion jet plus, when a metric is declared, its frame data.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub residuals: PointResiduals,
    pub geometry: Option<PointGeometry>,
}

/// Evaluates every residual at the base point of `f`.
///
/// With `metric`, the frame is built, isometry against `g_m` is enforced with
/// `tau_iso`, and integrability uses `g_m`; without it the induced metric is used.
pub fn evaluate(
    f: &Vec4Jet,
    metric: Option<&SemiGeodesicMetric>,
    c: AmbientCurvature,
    tau_iso: f64,
) -> Result<Evaluation> {
    let (s, t) = f.base();
    let sp = SurfacePoint::new(f)?;
    let jet_scale = 1f64
        .max(sp.tangent[0].value().scale())
        .max(sp.tangent[1].value().scale());
    let hh = mean_curvature_norm(&sp);
    let bicons = biconservative(&sp, c);
    let biharm = (f.degree() >= JET_DEGREE).then(|| biharmonic(&sp, c));
    let normal_derivative = sp.normal_derivative_scale();
    let position = f.value();
    let quasiminimal_nonzero = sp.h.value().scale();

    let (geometry, frame_bicons, integr, k, l, iso) = match metric {
        Some(metric) => {
            let fp = framed(sp.clone(), metric.m_jet(s, t)?, tau_iso)?;
            let g_form = FirstFundamentalForm::semi_geodesic(&fp.m);
            let integr = integrability(&sp, &g_form, &[fp.e3, fp.e4], c)?;
            let frame_b = biconservative_frame(&fp);
            let g = fp.geometry;
            (
                Some(g.clone()),
                Some(frame_b),
                integr,
                g.k,
                g.l,
                Some(g.isometry),
            )
        }
        None => {
            let normals: Vec<Vec4Jet> = (0..4)
                .map(|k| sp.normal_part(&f.constant_like(&Vec4::basis(k))))
                .collect();
            let integr = integrability(&sp, &sp.metric, &normals, c)?;
            let k = gaussian_curvature_intrinsic(&sp.metric)?;
            (None, None, integr, k, None, None)
        }
    };
    let residuals = PointResiduals {
        s,
        t,
        position,
        jet_scale,
        isometry: iso,
        quasiminimal_null: hh.abs(),
        quasiminimal_nonzero,
        hh,
        biconservative: bicons,
        biconservative_frame: frame_bicons,
        biharmonic: biharm,
        gauss: integr.gauss,
        codazzi: integr.codazzi,
        ricci: integr.ricci,
        h3_11: geometry.as_ref().map(|g| g.h3_11),
        xi1: geometry.as_ref().map(|g| g.xi1),
        normal_derivative,
        k,
        l,
        k_extrinsic: geometry.as_ref().map(|g| g.k_extrinsic),
    };
    Ok(Evaluation {
        residuals,
        geometry,
    })
}

/// Evaluates `jets` at every grid node in parallel; failures are collected, not fatal.
pub fn sweep<F>(
    grid: &Grid,
    jets: F,
    metric: Option<&SemiGeodesicMetric>,
    c: AmbientCurvature,
    tau_iso: f64,
) -> (Vec<Evaluation>, Vec<PointFailure>)
where
    F: Fn(f64, f64) -> Result<Vec4Jet> + Sync,
{
    let results: Vec<_> = grid
        .points()
        .into_par_iter()
        .map(|(s, t)| {
            jets(s, t)
                .and_then(|f| evaluate(&f, metric, c, tau_iso))
                .map_err(|e| PointFailure {
                    s,
                    t,
                    error: e.to_string(),
                })
        })
        .collect();
    let mut ok = Vec::with_capacity(results.len());
    let mut failed = Vec::new();
    for r in results {
        match r {
            Ok(e) => ok.push(e),
            Err(f) => failed.push(f),
        }
    }
    (ok, failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curvature_values() {
        assert!(AmbientCurvature::new(0.5).is_err());
        let c = AmbientCurvature::new(1.0).unwrap();
        let x = Vec4::basis(0);
        let y = Vec4::basis(2);
        // <y,y> = −1, <x,y> = 0
        assert_eq!(c.apply(&x, &y, &y), Vec4::new(-1.0, 0.0, 0.0, 0.0));
        assert_eq!(AmbientCurvature::FLAT.apply(&x, &y, &y), Vec4::ZERO);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, "1.0");
        assert!(serde_json::from_str::<AmbientCurvature>("2").is_err());
    }
}
