//! The two flat families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{Grid, Rect};
use crate::jet::{JetVec, ScalarJet, Series, Taylor, Vec4Jet, Vec4Series};
use crate::linalg::Vec4;

/// Tolerance on the curve conditions of the second family.
pub const TAU_CURVE: f64 = 1e-9;

fn default_domain() -> Rect {
    Rect::unit()
}

/// `f = (ψ, (s − t)/√2, (s + t)/√2, ψ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyISpec {
    pub psi: Expr,
    #[serde(default = "default_domain")]
    pub domain: Rect,
}

#[derive(Clone, Debug)]
pub struct FamilyI {
    pub spec: FamilyISpec,
}

impl FamilyI {
    /// Rejects `ψ` whose mixed derivative drops to `delta` on the grid, where `H` would vanish.
    pub fn new(spec: FamilyISpec, grid: &Grid, delta: f64) -> Result<FamilyI> {
        for (s, t) in grid.points() {
            let psi_st = spec.psi.jet(s, t)?.partial(1, 1)?;
            if psi_st.abs() <= delta {
                return Err(Error::DegenerateH {
                    s,
                    t,
                    value: psi_st.abs(),
                });
            }
        }
        Ok(FamilyI { spec })
    }

    pub fn jet(&self, s: f64, t: f64) -> Result<Vec4Jet> {
        let base = (s, t);
        let psi = self.spec.psi.jet(s, t)?;
        let (sv, tv) = (ScalarJet::var_s(base), ScalarJet::var_t(base));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Ok(JetVec([psi, (sv - tv) * r, (sv + tv) * r, psi]))
    }

    pub fn position(&self, s: f64, t: f64) -> Result<Vec4> {
        let psi = self.spec.psi.eval(s, t)?;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Ok(Vec4::new(psi, (s - t) * r, (s + t) * r, psi))
    }
}

/// `f = z(s) t + w(s)` for a null curve `z` on the light cone and a null curve
/// `w` with `<z′, w′> = 0`, `<z, w′> = −1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyIISpec {
    pub z: [Expr; 4],
    pub w: [Expr; 4],
    #[serde(default = "default_domain")]
    pub domain: Rect,
}

#[derive(Clone, Debug)]
pub struct FamilyII {
    pub spec: FamilyIISpec,
}

fn series_in_s(exprs: &[Expr; 4], s: f64) -> Result<Vec4Series> {
    let c: Vec<Series> = exprs
        .iter()
        .map(|e| e.series_in_s(s))
        .collect::<Result<_>>()?;
    Ok(JetVec([c[0], c[1], c[2], c[3]]))
}

impl FamilyII {
    /// Checks the five curve conditions at the `s`-values of `grid`.
    pub fn new(spec: FamilyIISpec, grid: &Grid) -> Result<FamilyII> {
        for s in grid.s_values() {
            let z = series_in_s(&spec.z, s)?;
            let w = series_in_s(&spec.w, s)?;
            // derivatives of series in s use the same operator as in t
            let (zp, wp) = (z.dt(), w.dt());
            let scale = [&z, &zp, &wp]
                .iter()
                .map(|v| v.value().scale())
                .fold(1.0, f64::max)
                .powi(2);
            let conditions = [
                ("<z,z> = 0", z.inner(&z).value()),
                ("<z',z'> = 0", zp.inner(&zp).value()),
                ("<w',w'> = 0", wp.inner(&wp).value()),
                ("<z',w'> = 0", zp.inner(&wp).value()),
                ("<z,w'> = -1", z.inner(&wp).value() + 1.0),
            ];
            for (condition, residual) in conditions {
                if !(residual.abs() <= TAU_CURVE * scale) {
                    return Err(Error::CurveConstraintViolation {
                        condition,
                        s,
                        residual: residual.abs(),
                    });
                }
            }
        }
        Ok(FamilyII { spec })
    }

    pub fn jet(&self, s: f64, t: f64) -> Result<Vec4Jet> {
        let tv = ScalarJet::var_t((s, t));
        let c: Vec<ScalarJet> = (0..4)
            .map(|i| Ok(self.spec.z[i].jet(s, t)? * tv + self.spec.w[i].jet(s, t)?))
            .collect::<Result<_>>()?;
        Ok(JetVec([c[0], c[1], c[2], c[3]]))
    }

    pub fn position(&self, s: f64, t: f64) -> Result<Vec4> {
        let mut out = Vec4::ZERO;
        for i in 0..4 {
            out[i] = self.spec.z[i].eval(s, t)? * t + self.spec.w[i].eval(s, t)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(e: &str) -> Expr {
        Expr::parse(e).unwrap()
    }

    fn grid() -> Grid {
        Grid::new(Rect::unit(), 9, 9).unwrap()
    }

    #[test]
    fn degenerate_psi_is_rejected() {
        let r = FamilyI::new(
            FamilyISpec {
                psi: p("s + t"),
                domain: Rect::unit(),
            },
            &grid(),
            1e-6,
        );
        assert!(matches!(r, Err(Error::DegenerateH { .. })));
        assert!(FamilyI::new(
            FamilyISpec {
                psi: p("s*t"),
                domain: Rect::unit()
            },
            &grid(),
            1e-6
        )
        .is_ok());
    }

    #[test]
    fn curve_conditions_are_checked() {
        let z = [p("cos(s)"), p("sin(s)"), p("cos(s)"), p("sin(s)")];
        let w = [
            p("-0.5*sin(s)"),
            p("0.5*cos(s)"),
            p("0.5*sin(s)"),
            p("-0.5*cos(s)"),
        ];
        let good = FamilyIISpec {
            z: z.clone(),
            w,
            domain: Rect::unit(),
        };
        assert!(FamilyII::new(good, &grid()).is_ok());
        let zero = [p("0"), p("0"), p("0"), p("0")];
        let bad = FamilyIISpec {
            z,
            w: zero,
            domain: Rect::unit(),
        };
        match FamilyII::new(bad, &grid()) {
            Err(Error::CurveConstraintViolation { condition, .. }) => {
                assert_eq!(condition, "<z,w'> = -1")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rescaled_pair_stays_valid() {
        let z = [p("2*cos(s)"), p("2*sin(s)"), p("2*cos(s)"), p("2*sin(s)")];
        let w = [
            p("-0.25*sin(s)"),
            p("0.25*cos(s)"),
            p("0.25*sin(s)"),
            p("-0.25*cos(s)"),
        ];
        assert!(FamilyII::new(
            FamilyIISpec {
                z: z.clone(),
                w,
                domain: Rect::unit()
            },
            &grid()
        )
        .is_ok());
        let w_unscaled = [
            p("-0.5*sin(s)"),
            p("0.5*cos(s)"),
            p("0.5*sin(s)"),
            p("-0.5*cos(s)"),
        ];
        assert!(FamilyII::new(
            FamilyIISpec {
                z,
                w: w_unscaled,
                domain: Rect::unit()
            },
            &grid()
        )
        .is_err());
    }
}
