//! Non-flat proper biconservative surfaces built from a null curve on the light cone.

use std::collections::HashMap;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{invariant_l, SemiGeodesicMetric};
use crate::grid::{Grid, Rect};
use crate::jet::{JetVec, ScalarJet, Series, Taylor, Vec4Jet, Vec4Series};
use crate::linalg::{inner4, Vec4};

/// Default number of quadrature steps across the `t`-range.
pub const DEFAULT_STEPS: usize = 2048;
/// Relative tolerance on curve conditions and on `L` consistency.
pub const TAU_CONSTRAINT: f64 = 1e-8;

fn default_branch() -> Expr {
    Expr::constant(0.0)
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_domain() -> Rect {
    Rect::unit()
}

/// Input of the construction: metric function `m`, light-cone curve `alpha`,
/// positive scale `a(t)`, branch function `mu(t)` and initial point `eta0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyIIISpec {
    pub m: Expr,
    pub alpha: [Expr; 4],
    pub a: Expr,
    #[serde(default = "default_branch")]
    pub mu: Expr,
    #[serde(default)]
    pub eta0: Vec4,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_domain")]
    pub domain: Rect,
}

/// Curve data at one `t`, as series in `t`.
#[derive(Clone, Debug)]
pub struct CurveData {
    pub alpha: Vec4Series,
    pub alpha_prime: Vec4Series,
    pub a: Series,
    pub a_prime: Series,
    /// `L` as forced by the curve: `B + 2a′/a`, with `α″ = A α + B α′`.
    pub l: Series,
    /// Coefficients `A`, `B` of `α″` in the span of `α`, `α′`.
    pub coefficients: (Series, Series),
    /// Auxiliary norm of the part of `α″` outside the span.
    pub span_residual: f64,
    pub eta_prime: Vec4Series,
}

fn series_vec(exprs: &[Expr; 4], t: f64) -> Result<Vec4Series> {
    Ok(JetVec([
        exprs[0].series(t)?,
        exprs[1].series(t)?,
        exprs[2].series(t)?,
        exprs[3].series(t)?,
    ]))
}

fn lower(v: &Vec4Series) -> Vec4Series {
    let [a, b, c, d] = v.0;
    JetVec([a, b, -c, -d])
}

/// Solves `<η′,η′> = 0`, `<α,η′> = 0`, `<η′,α′> = −1/a` for `η′` as a series in `t`.
///
/// The linear conditions leave `η′ = p + μ α + ν α′` with `p` the minimum-norm
/// particular solution; nullity fixes `ν = a<p,p>/2` and `μ` is the branch.
/// The remaining condition `<η′,α″> = (2a′ − aL)/a²` holds exactly when `L`
/// equals the returned [`CurveData::l`].
pub fn solve_eta_prime(alpha: &Vec4Series, a: &Series, mu: &Series) -> Result<CurveData> {
    let t = alpha.0[0].t0();
    let scale = alpha
        .value()
        .euclid_dot(&alpha.value())
        .max(f64::MIN_POSITIVE);
    let d1 = alpha.dt();
    let d2 = d1.dt();
    let (av, dv) = (alpha.value(), d1.value());
    for (name, q) in [
        ("<alpha,alpha>", inner4(&av, &av)),
        ("<alpha',alpha'>", inner4(&dv, &dv)),
    ] {
        if q.abs() > TAU_CONSTRAINT * scale.max(dv.euclid_dot(&dv)) {
            return Err(Error::CurveNotOnLightCone {
                t,
                detail: format!("{name} = {q:.3e}"),
            });
        }
    }
    if a.value() <= 0.0 {
        return Err(Error::NonPositiveScale {
            t,
            value: a.value(),
        });
    }
    let g11 = alpha.euclid_dot(alpha);
    let g12 = alpha.euclid_dot(&d1);
    let g22 = d1.euclid_dot(&d1);
    let det = g11 * g22 - g12 * g12;
    if det.value() <= 1e-12 * g11.value() * g22.value() {
        return Err(Error::RankDeficiency {
            t,
            gram: det.value(),
        });
    }
    let inv_det = det.recip()?;

    // α″ = A α + B α′ by Euclidean projection onto span{α, α′}
    let r1 = alpha.euclid_dot(&d2);
    let r2 = d1.euclid_dot(&d2);
    let coef_a = (g22 * r1 - g12 * r2) * inv_det;
    let coef_b = (g11 * r2 - g12 * r1) * inv_det;
    let span_residual = (d2.value() - av * coef_a.value() - dv * coef_b.value()).scale();

    let a_prime = a.dt();
    let inv_a = a.recip()?;
    let l = coef_b + a_prime * inv_a * 2.0;

    // G [x; y] = [0; −1/a],  p = x ᾱ + y ᾱ′  with ᾱ the lowered vector
    let rhs = -inv_a;
    let x = -(g12 * rhs) * inv_det;
    let y = g11 * rhs * inv_det;
    let p = lower(alpha).scaled(&x) + lower(&d1).scaled(&y);
    let nu = *a * p.inner(&p) * 0.5;
    let eta_prime = p + alpha.scaled(mu) + d1.scaled(&nu);

    Ok(CurveData {
        alpha: *alpha,
        alpha_prime: d1,
        a: *a,
        a_prime,
        l,
        coefficients: (coef_a, coef_b),
        span_residual,
        eta_prime,
    })
}

/// The generator: curve data on demand and a tabulated `η`.
#[derive(Debug)]
pub struct FamilyIII {
    pub spec: FamilyIIISpec,
    pub metric: SemiGeodesicMetric,
    t0: f64,
    h: f64,
    eta: Vec<Vec4>,
    /// Position data per `t` (bit pattern): `η`, `α`, `α′`, and `(a, a′, L)`.
    positions: RwLock<HashMap<u64, PositionData>>,
}

#[derive(Clone, Copy, Debug)]
struct PositionData {
    eta: Vec4,
    alpha: Vec4,
    alpha_prime: Vec4,
    a: f64,
    a_prime: f64,
    l: f64,
}

impl Clone for FamilyIII {
    fn clone(&self) -> Self {
        FamilyIII {
            spec: self.spec.clone(),
            metric: self.metric.clone(),
            t0: self.t0,
            h: self.h,
            eta: self.eta.clone(),
            positions: RwLock::default(),
        }
    }
}

impl FamilyIII {
    /// Validates the curve conditions on the `t`-values of `grid`, checks that
    /// `L` depends on `t` alone and agrees with the curve, and integrates `η`.
    pub fn new(spec: FamilyIIISpec, grid: &Grid) -> Result<FamilyIII> {
        for (name, e) in [("a", &spec.a), ("mu", &spec.mu)] {
            if e.uses_s() {
                return Err(Error::ForbiddenVariable {
                    expr: format!("{name} = {e}"),
                    allowed: "t",
                });
            }
        }
        if spec.steps == 0 {
            return Err(Error::InvalidGrid(
                "quadrature needs at least one step".into(),
            ));
        }
        let metric = SemiGeodesicMetric::new(spec.m.clone());
        let [t0, t1] = spec.domain.t;
        let h = (t1 - t0) / spec.steps as f64;
        let mut gen = FamilyIII {
            spec,
            metric,
            t0,
            h,
            eta: Vec::new(),
            positions: RwLock::default(),
        };

        for &t in &grid.t_values() {
            let cd = gen.curve(t)?;
            let l_curve = cd.l.value();
            for &s in &grid.s_values() {
                let l = invariant_l(&gen.metric.m_jet(s, t)?)?;
                let tol = TAU_CONSTRAINT * l.value.abs().max(1.0);
                if l.ds.abs() > tol {
                    return Err(Error::LNotFunctionOfT { s, t, ds_l: l.ds });
                }
                if (l.value - l_curve).abs() > tol {
                    return Err(Error::InconsistentConstraints {
                        t,
                        detail: format!(
                            "<eta',alpha''> = (2a' - aL)/a^2 needs L = {l_curve:.6}, metric gives L = {:.6}",
                            l.value
                        ),
                    });
                }
            }
        }

        let mut eta = Vec::with_capacity(gen.spec.steps + 1);
        eta.push(gen.spec.eta0);
        for k in 0..gen.spec.steps {
            let t = t0 + k as f64 * h;
            let next = gen.rk4(t, eta[k], h)?;
            eta.push(next);
        }
        gen.eta = eta;
        Ok(gen)
    }

    pub fn curve(&self, t: f64) -> Result<CurveData> {
        let alpha = series_vec(&self.spec.alpha, t)?;
        solve_eta_prime(&alpha, &self.spec.a.series(t)?, &self.spec.mu.series(t)?)
    }

    fn eta_prime_value(&self, t: f64) -> Result<Vec4> {
        Ok(self.curve(t)?.eta_prime.value())
    }

    fn rk4(&self, t: f64, y: Vec4, h: f64) -> Result<Vec4> {
        let k1 = self.eta_prime_value(t)?;
        let k2 = self.eta_prime_value(t + h / 2.0)?;
        let k4 = self.eta_prime_value(t + h)?;
        // η′ does not depend on η, so k3 = k2
        Ok(y + (k1 + k2 * 4.0 + k4) * (h / 6.0))
    }

    /// `η(t)`: tabulated nodes plus one partial step, extrapolating past the range.
    pub fn eta(&self, t: f64) -> Result<Vec4> {
        let n = self.eta.len() - 1;
        let x = (t - self.t0) / self.h;
        let k = if x.is_finite() {
            x.floor().clamp(0.0, n as f64) as usize
        } else {
            0
        };
        let tk = self.t0 + k as f64 * self.h;
        let dt = t - tk;
        if dt == 0.0 {
            return Ok(self.eta[k]);
        }
        // long excursions outside the table are split into table-sized steps
        let pieces = (dt.abs() / self.h).ceil().max(1.0) as usize;
        let step = dt / pieces as f64;
        let mut y = self.eta[k];
        for i in 0..pieces {
            y = self.rk4(tk + i as f64 * step, y, step)?;
        }
        Ok(y)
    }

    /// `f = η + (s a′ − a(m + sL)) α + s a α′` with analytic jets.
    pub fn jet(&self, s: f64, t: f64) -> Result<Vec4Jet> {
        let base = (s, t);
        let cd = self.curve(t)?;
        let eta = self.eta(t)?;
        let eta_series = JetVec(std::array::from_fn(|i| cd.eta_prime.0[i].integrate(eta[i])));
        let embed = |x: &Series| ScalarJet::from_series(base, x);
        let m = self.metric.m_jet(s, t)?;
        let sv = ScalarJet::var_s(base);
        let (a, a_prime, l) = (embed(&cd.a), embed(&cd.a_prime), embed(&cd.l));
        let coef = sv * a_prime - a * (m + sv * l);
        let alpha = Vec4Jet::embed(base, &cd.alpha);
        let alpha_prime = Vec4Jet::embed(base, &cd.alpha_prime);
        Ok(Vec4Jet::embed(base, &eta_series) + alpha.scaled(&coef) + alpha_prime.scaled(&(sv * a)))
    }

    pub fn position(&self, s: f64, t: f64) -> Result<Vec4> {
        let d = self.position_data(t)?;
        let m = self.spec.m.eval(s, t)?;
        let coef = s * d.a_prime - d.a * (m + s * d.l);
        Ok(d.eta + d.alpha * coef + d.alpha_prime * (s * d.a))
    }

    fn position_data(&self, t: f64) -> Result<PositionData> {
        let key = t.to_bits();
        if let Some(d) = self
            .positions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(&key)
        {
            return Ok(*d);
        }
        let cd = self.curve(t)?;
        let d = PositionData {
            eta: self.eta(t)?,
            alpha: cd.alpha.value(),
            alpha_prime: cd.alpha_prime.value(),
            a: cd.a.value(),
            a_prime: cd.a_prime.value(),
            l: cd.l.value(),
        };
        self.positions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, d);
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(e: &str) -> Expr {
        Expr::parse(e).unwrap()
    }

    fn circle() -> [Expr; 4] {
        [p("cos(t)"), p("sin(t)"), p("cos(t)"), p("sin(t)")]
    }

    #[test]
    fn eta_prime_for_the_circle() {
        for &t in &[0.0, 0.4, 1.0] {
            let alpha = series_vec(&circle(), t).unwrap();
            let cd = solve_eta_prime(
                &alpha,
                &p("exp(t/2)").series(t).unwrap(),
                &Series::constant(t, 0.0),
            )
            .unwrap();
            let k = (-t / 2.0).exp() / 2.0;
            let expect = Vec4::new(t.sin(), -t.cos(), -t.sin(), t.cos()) * k;
            let got = cd.eta_prime.value();
            for i in 0..4 {
                assert_abs_diff_eq!(got[i], expect[i], epsilon = 1e-14);
            }
            assert_abs_diff_eq!(cd.l.value(), 1.0, epsilon = 1e-13);
            let a = (t / 2.0).exp();
            let a2 = cd.alpha_prime.dt().value();
            assert_abs_diff_eq!(inner4(&got, &got), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(inner4(&got, &cd.alpha.value()), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(
                inner4(&got, &cd.alpha_prime.value()),
                -1.0 / a,
                epsilon = 1e-14
            );
            assert_abs_diff_eq!(
                inner4(&got, &a2),
                (2.0 * a / 2.0 - a) / (a * a),
                epsilon = 1e-14
            );
            assert!(cd.span_residual < 1e-12);
        }
    }

    #[test]
    fn doubling_a_halves_the_pairing() {
        let t = 0.3;
        let alpha = series_vec(&circle(), t).unwrap();
        let zero = Series::constant(t, 0.0);
        let one = solve_eta_prime(&alpha, &p("exp(t/2)").series(t).unwrap(), &zero).unwrap();
        let two = solve_eta_prime(&alpha, &p("2*exp(t/2)").series(t).unwrap(), &zero).unwrap();
        let pair = |cd: &CurveData| inner4(&cd.eta_prime.value(), &cd.alpha_prime.value());
        assert_abs_diff_eq!(pair(&two), pair(&one) / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn curve_errors() {
        let t = 0.0;
        let off_cone = series_vec(&[p("cos(t)"), p("sin(t)"), p("0"), p("1")], t).unwrap();
        let a = p("1").series(t).unwrap();
        let zero = Series::constant(t, 0.0);
        assert!(matches!(
            solve_eta_prime(&off_cone, &a, &zero),
            Err(Error::CurveNotOnLightCone { .. })
        ));
        let line = series_vec(&[p("1"), p("0"), p("1"), p("0")], t).unwrap();
        assert!(matches!(
            solve_eta_prime(&line, &a, &zero),
            Err(Error::RankDeficiency { .. })
        ));
        let alpha = series_vec(&circle(), t).unwrap();
        let neg = p("-1").series(t).unwrap();
        assert!(matches!(
            solve_eta_prime(&alpha, &neg, &zero),
            Err(Error::NonPositiveScale { .. })
        ));
    }
}
