use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PointResiduals;
use crate::error::{Error, Result};

/// Thresholds behind the verdicts. `delta` is relative to the grid jet scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub isometry: f64,
    pub null: f64,
    pub delta: f64,
    pub biconservative: f64,
    pub biharmonic: f64,
    pub integrability: f64,
    pub flat: f64,
    pub kernel: f64,
}

/// Extra slack added to residual tolerances for finite-difference jets.
pub const FD_SLACK: f64 = 1e-4;

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::analytic()
    }
}

impl Tolerances {
    pub fn analytic() -> Self {
        Tolerances {
            isometry: 1e-7,
            null: 1e-8,
            delta: 1e-6,
            biconservative: 1e-8,
            biharmonic: 1e-6,
            integrability: 1e-7,
            flat: 1e-9,
            kernel: 1e-7,
        }
    }

    /// Analytic thresholds plus [`FD_SLACK`] on every quantity read off derivative jets.
    pub fn finite_difference() -> Self {
        let a = Tolerances::analytic();
        Tolerances {
            isometry: a.isometry + FD_SLACK,
            null: a.null + FD_SLACK,
            biconservative: a.biconservative + FD_SLACK,
            biharmonic: a.biharmonic + FD_SLACK,
            integrability: a.integrability + FD_SLACK,
            kernel: a.kernel + FD_SLACK,
            ..a
        }
    }

    /// Multiplies every threshold except `delta` (a floor, not a ceiling) by `k`.
    pub fn scaled(self, k: f64) -> Self {
        Tolerances {
            isometry: self.isometry * k,
            null: self.null * k,
            delta: self.delta,
            biconservative: self.biconservative * k,
            biharmonic: self.biharmonic * k,
            integrability: self.integrability * k,
            flat: self.flat * k,
            kernel: self.kernel * k,
        }
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "isometry" => &mut self.isometry,
            "null" => &mut self.null,
            "delta" => &mut self.delta,
            "biconservative" => &mut self.biconservative,
            "biharmonic" => &mut self.biharmonic,
            "integrability" => &mut self.integrability,
            "flat" => &mut self.flat,
            "kernel" => &mut self.kernel,
            other => return Err(Error::UnknownTolerance(other.to_string())),
        };
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::NonFinite(format!("tolerance {name} = {value}")));
        }
        *slot = value;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub max: f64,
    pub mean: f64,
    pub min: f64,
}

impl Aggregate {
    fn of(values: impl Iterator<Item = f64>) -> Option<Aggregate> {
        let (mut max, mut min, mut sum, mut n) = (f64::NEG_INFINITY, f64::INFINITY, 0.0, 0usize);
        for v in values {
            max = max.max(v);
            min = min.min(v);
            sum += v;
            n += 1;
        }
        (n > 0).then(|| Aggregate {
            max,
            mean: sum / n as f64,
            min,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub is_quasi_minimal: bool,
    pub is_biconservative: bool,
    pub is_proper: bool,
    pub is_biharmonic: bool,
    pub is_flat: bool,
}

impl Verdicts {
    /// Looks a verdict up by its short name (`quasi_minimal`, `biconservative`, ...).
    pub fn get(&self, name: &str) -> Option<bool> {
        Some(match name.trim_start_matches("is_") {
            "quasi_minimal" => self.is_quasi_minimal,
            "biconservative" => self.is_biconservative,
            "proper" => self.is_proper,
            "biharmonic" => self.is_biharmonic,
            "flat" => self.is_flat,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub s: f64,
    pub t: f64,
    pub error: String,
}

/// Run metadata, kept apart from the data so identical runs give identical data.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub tool: String,
    pub version: String,
    pub instance: String,
    pub spec_hash: String,
    pub jets: String,
    pub grid: String,
    pub curvature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub header: ReportHeader,
    pub tolerances: Tolerances,
    pub points: Vec<PointResiduals>,
    pub failures: Vec<PointFailure>,
    pub aggregates: BTreeMap<String, Aggregate>,
    pub verdicts: Option<Verdicts>,
}

/// Names of the aggregated quantities.
pub const AGGREGATED: [&str; 14] = [
    "isometry",
    "quasiminimal_null",
    "quasiminimal_nonzero",
    "biconservative",
    "biconservative_frame",
    "biharmonic",
    "gauss",
    "codazzi",
    "ricci",
    "h3_11",
    "xi1",
    "normal_derivative",
    "K",
    "jet_scale",
];

fn magnitude(p: &PointResiduals, name: &str) -> Option<f64> {
    match name {
        "isometry" => p.isometry,
        "quasiminimal_null" => Some(p.quasiminimal_null),
        "quasiminimal_nonzero" => Some(p.quasiminimal_nonzero),
        "biconservative" => Some(p.biconservative),
        "biconservative_frame" => p.biconservative_frame,
        "biharmonic" => p.biharmonic,
        "gauss" => Some(p.gauss),
        "codazzi" => Some(p.codazzi),
        "ricci" => Some(p.ricci),
        "h3_11" => p.h3_11.map(f64::abs),
        "xi1" => p.xi1.map(f64::abs),
        "normal_derivative" => Some(p.normal_derivative),
        "K" => Some(p.k.abs()),
        "jet_scale" => Some(p.jet_scale),
        _ => None,
    }
}

impl ResidualReport {
    /// Aggregates `points` and derives verdicts when no point failed.
    pub fn new(
        header: ReportHeader,
        tolerances: Tolerances,
        points: Vec<PointResiduals>,
        failures: Vec<PointFailure>,
    ) -> ResidualReport {
        let mut report = ResidualReport {
            header,
            tolerances,
            points,
            failures,
            aggregates: BTreeMap::new(),
            verdicts: None,
        };
        report.reaggregate();
        report
    }

    /// Recomputes aggregates and verdicts from the per-point table.
    pub fn reaggregate(&mut self) {
        self.aggregates = AGGREGATED
            .iter()
            .filter_map(|name| {
                Aggregate::of(self.points.iter().filter_map(|p| magnitude(p, name)))
                    .map(|a| (name.to_string(), a))
            })
            .collect();
        self.verdicts = classify(self, &self.tolerances).ok();
    }

    pub fn max(&self, name: &str) -> Option<f64> {
        self.aggregates.get(name).map(|a| a.max)
    }

    pub fn min(&self, name: &str) -> Option<f64> {
        self.aggregates.get(name).map(|a| a.min)
    }
}

/// Verdicts from the aggregates of a complete report.
pub fn classify(report: &ResidualReport, tol: &Tolerances) -> Result<Verdicts> {
    if !report.failures.is_empty() || report.points.is_empty() {
        let first = report.failures.first().map_or_else(
            || "no points".to_string(),
            |f| format!("({}, {}): {}", f.s, f.t, f.error),
        );
        return Err(Error::IncompleteGrid {
            failed: report.failures.len(),
            total: report.failures.len() + report.points.len(),
            first,
        });
    }
    let max = |n: &str| report.max(n).unwrap_or(f64::INFINITY);
    let min = |n: &str| report.min(n).unwrap_or(0.0);
    let delta = tol.delta * max("jet_scale");
    let is_quasi_minimal =
        max("quasiminimal_null") <= tol.null && min("quasiminimal_nonzero") >= delta;
    let is_biconservative = max("biconservative") <= tol.biconservative;
    let is_proper = is_biconservative && min("normal_derivative") >= delta;
    let is_biharmonic = is_biconservative && max("biharmonic") <= tol.biharmonic;
    let is_flat = max("K") <= tol.flat;
    Ok(Verdicts {
        is_quasi_minimal,
        is_biconservative,
        is_proper,
        is_biharmonic,
        is_flat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec4;

    fn point(bicons: f64, k: f64) -> PointResiduals {
        PointResiduals {
            s: 0.0,
            t: 0.0,
            position: Vec4::ZERO,
            jet_scale: 1.0,
            isometry: Some(0.0),
            quasiminimal_null: 0.0,
            quasiminimal_nonzero: 1.0,
            hh: 0.0,
            biconservative: bicons,
            biconservative_frame: None,
            biharmonic: Some(0.0),
            gauss: 0.0,
            codazzi: 0.0,
            ricci: 0.0,
            h3_11: None,
            xi1: None,
            normal_derivative: 0.5,
            k,
            l: None,
            k_extrinsic: None,
        }
    }

    #[test]
    fn verdicts_follow_thresholds() {
        let r = ResidualReport::new(
            ReportHeader::default(),
            Tolerances::analytic(),
            vec![point(1e-9, 0.0), point(5e-9, -1.0)],
            vec![],
        );
        let v = r.verdicts.unwrap();
        assert!(v.is_quasi_minimal && v.is_biconservative && v.is_proper && v.is_biharmonic);
        assert!(!v.is_flat);
        assert_eq!(r.max("K"), Some(1.0));
        let strict = classify(&r, &Tolerances::analytic().scaled(0.0)).unwrap();
        assert!(!strict.is_biconservative);
        assert_eq!(v.get("proper"), Some(true));
        assert_eq!(v.get("nonsense"), None);
    }

    #[test]
    fn failures_block_classification() {
        let f = PointFailure {
            s: 1.0,
            t: 0.0,
            error: "boom".into(),
        };
        let r = ResidualReport::new(
            ReportHeader::default(),
            Tolerances::analytic(),
            vec![point(0.0, 0.0)],
            vec![f],
        );
        assert!(r.verdicts.is_none());
        assert!(matches!(
            classify(&r, &r.tolerances),
            Err(Error::IncompleteGrid {
                failed: 1,
                total: 2,
                ..
            })
        ));
    }

    #[test]
    fn report_roundtrips_through_json() {
        let r = ResidualReport::new(
            ReportHeader::default(),
            Tolerances::analytic(),
            vec![point(2e-9, 0.0)],
            vec![],
        );
        let json = serde_json::to_string(&r).unwrap();
        let mut back: ResidualReport = serde_json::from_str(&json).unwrap();
        back.reaggregate();
        assert_eq!(back.verdicts, r.verdicts);
        assert_eq!(back, r);
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::analytic();
        t.set("biharmonic", 0.5).unwrap();
        assert_eq!(t.biharmonic, 0.5);
        assert!(t.set("bogus", 1.0).is_err());
        assert!(t.set("flat", -1.0).is_err());
    }
}
