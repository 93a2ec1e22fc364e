//! Intrinsic data of a Lorentzian surface metric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{ScalarJet, Taylor};

/// Lorentzian floor: `det g < -TAU_LORENTZ * (scale)`.
pub const TAU_LORENTZ: f64 = 1e-10;
/// Relative floor on `|K|` below which `L` is reported as absent.
pub const TAU_K: f64 = 1e-8;

/// `g11 = g(∂s,∂s)`, `g12 = g(∂s,∂t)`, `g22 = g(∂t,∂t)` as jets, so their
/// derivatives come along.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstFundamentalForm {
    pub g11: ScalarJet,
    pub g12: ScalarJet,
    pub g22: ScalarJet,
}

/// Christoffel symbols `gamma[k][i][j] = Γ^k_ij` as jets.
pub type Christoffel = [[[ScalarJet; 2]; 2]; 2];

impl FirstFundamentalForm {
    /// The metric `g_m = -(ds⊗dt + dt⊗ds) + 2m dt⊗dt`.
    pub fn semi_geodesic(m: &ScalarJet) -> Self {
        FirstFundamentalForm {
            g11: m.constant_like(0.0),
            g12: m.constant_like(-1.0),
            g22: *m * 2.0,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarJet {
        match (i, j) {
            (0, 0) => &self.g11,
            (1, 1) => &self.g22,
            _ => &self.g12,
        }
    }

    pub fn det(&self) -> ScalarJet {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn check_lorentzian(&self, scale: f64) -> Result<()> {
        let det = self.det().value();
        if det >= -TAU_LORENTZ * scale.max(1e-300) {
            Err(Error::NotLorentzian { det })
        } else {
            Ok(())
        }
    }

    /// Inverse metric `g^{ij}` as jets.
    pub fn inverse(&self) -> Result<[[ScalarJet; 2]; 2]> {
        let inv_det = self.det().recip()?;
        let a = self.g22 * inv_det;
        let b = -(self.g12 * inv_det);
        let d = self.g11 * inv_det;
        Ok([[a, b], [b, d]])
    }

    /// `Γ^k_ij = ½ g^{kl} (∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.
    pub fn christoffel(&self) -> Result<Christoffel> {
        let inv = self.inverse()?;
        // lowered symbols Γ_{l,ij}
        let lowered = |l: usize, i: usize, j: usize| {
            (self.entry(j, l).d(i) + self.entry(i, l).d(j) - self.entry(i, j).d(l)) * 0.5
        };
        Ok(std::array::from_fn(|k| {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| inv[k][0] * lowered(0, i, j) + inv[k][1] * lowered(1, i, j))
            })
        }))
    }

    /// Components `R^l_{ijk}` of `R(∂_i,∂_j)∂_k = ∇_i∇_j∂_k − ∇_j∇_i∂_k`.
    pub fn riemann(&self) -> Result<[[[[f64; 2]; 2]; 2]; 2]> {
        let g = self.christoffel()?;
        Ok(std::array::from_fn(|l| {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    std::array::from_fn(|k| {
                        let mut r = g[l][j][k].d(i).value() - g[l][i][k].d(j).value();
                        for m in 0..2 {
                            r += g[l][i][m].value() * g[m][j][k].value()
                                - g[l][j][m].value() * g[m][i][k].value();
                        }
                        r
                    })
                })
            })
        }))
    }

    /// `K = <R(∂s,∂t)∂t, ∂s> / det g` from the curvature tensor.
    pub fn gaussian_curvature_riemann(&self) -> Result<f64> {
        let r = self.riemann()?;
        let num: f64 = (0..2)
            .map(|l| r[l][0][1][1] * self.entry(l, 0).value())
            .sum();
        Ok(num / self.det().value())
    }
}

/// Gaussian curvature from the metric and its first two derivatives only
/// (Brioschi's formula; valid for any nondegenerate signature).
pub fn gaussian_curvature_intrinsic(g: &FirstFundamentalForm) -> Result<f64> {
    if g.g11.degree() < 2 || g.g12.degree() < 2 || g.g22.degree() < 2 {
        return Err(Error::OrderOutOfRange {
            order: 2,
            degree: g.g11.degree().min(g.g22.degree()),
        });
    }
    let det = g.det().value();
    if det >= 0.0 {
        return Err(Error::NotLorentzian { det });
    }
    let p = |j: &ScalarJet, i: usize, k: usize| j.partial(i, k).unwrap();
    let (e, f, gg) = (g.g11.value(), g.g12.value(), g.g22.value());
    let (e_u, e_v, e_vv) = (p(&g.g11, 1, 0), p(&g.g11, 0, 1), p(&g.g11, 0, 2));
    let (f_u, f_v, f_uv) = (p(&g.g12, 1, 0), p(&g.g12, 0, 1), p(&g.g12, 1, 1));
    let (g_u, g_v, g_uu) = (p(&g.g22, 1, 0), p(&g.g22, 0, 1), p(&g.g22, 2, 0));
    let m1 = [
        [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
        [f_v - 0.5 * g_u, e, f],
        [0.5 * g_v, f, gg],
    ];
    let m2 = [
        [0.0, 0.5 * e_v, 0.5 * g_u],
        [0.5 * e_v, e, f],
        [0.5 * g_u, f, gg],
    ];
    Ok((det3(&m1) - det3(&m2)) / (det * det))
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Levi-Civita connection of `g_m` on coordinate fields, as `(∂s, ∂t)` components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionTable {
    /// `∇_{∂s}∂s`
    pub ss: [f64; 2],
    /// `∇_{∂s}∂t = ∇_{∂t}∂s`
    pub st: [f64; 2],
    /// `∇_{∂t}∂t`
    pub tt: [f64; 2],
}

/// Closed-form connection of `g_m` from the jet of `m`.
pub fn connection_table_gm(m: &ScalarJet) -> ConnectionTable {
    let (mv, ms, mt) = (m.value(), m.ds().value(), m.dt().value());
    ConnectionTable {
        ss: [0.0, 0.0],
        st: [-ms, 0.0],
        tt: [2.0 * mv * ms - mt, ms],
    }
}

/// Value of the intrinsic invariant `L = −(K_t + m K_s + 3 m_s K)/K` with its first partials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantL {
    pub value: f64,
    pub ds: f64,
    pub dt: f64,
}

/// Curvature floor used for `m` expanded as `m`.
pub fn tau_k(m: &ScalarJet) -> f64 {
    TAU_K * m.magnitude().max(1.0)
}

/// `L` at the base point of `m`; fails when `|K|` is below [`tau_k`].
pub fn invariant_l(m: &ScalarJet) -> Result<InvariantL> {
    let k = m.ds().ds();
    let (s, t) = m.base();
    if k.value().abs() <= tau_k(m) {
        return Err(Error::VanishingCurvature { s, t, k: k.value() });
    }
    let num = k.dt() + *m * k.ds() + m.ds() * k * 3.0;
    let l = -(num.checked_div(&k)?);
    Ok(InvariantL {
        value: l.value(),
        ds: l.ds().value(),
        dt: l.dt().value(),
    })
}

/// A Lorentzian metric in semi-geodesic coordinates, given by the function `m(s, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SemiGeodesicMetric {
    pub m: Expr,
}

impl SemiGeodesicMetric {
    pub fn new(m: Expr) -> Self {
        SemiGeodesicMetric { m }
    }

    pub fn flat() -> Self {
        SemiGeodesicMetric {
            m: Expr::constant(0.0),
        }
    }

    pub fn m_jet(&self, s: f64, t: f64) -> Result<ScalarJet> {
        self.m.jet(s, t)
    }

    pub fn first_form(&self, s: f64, t: f64) -> Result<FirstFundamentalForm> {
        Ok(FirstFundamentalForm::semi_geodesic(&self.m_jet(s, t)?))
    }

    /// `K = m_ss`.
    pub fn gaussian_curvature(&self, s: f64, t: f64) -> Result<f64> {
        self.m_jet(s, t)?.partial(2, 0)
    }

    pub fn invariant_l(&self, s: f64, t: f64) -> Result<InvariantL> {
        invariant_l(&self.m_jet(s, t)?)
    }

    pub fn connection_table(&self, s: f64, t: f64) -> Result<ConnectionTable> {
        Ok(connection_table_gm(&self.m_jet(s, t)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn metric(src: &str) -> SemiGeodesicMetric {
        SemiGeodesicMetric::new(Expr::parse(src).unwrap())
    }

    #[test]
    fn brioschi_reproduces_m_ss() {
        let g = metric("exp(-t)*sqrt(s^2+1)");
        let k = gaussian_curvature_intrinsic(&g.first_form(0.5, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(k, (-1.0_f64).exp() * 1.25_f64.powf(-1.5), epsilon = 1e-14);
        assert_abs_diff_eq!(
            gaussian_curvature_intrinsic(&metric("0").first_form(0.2, 0.3).unwrap()).unwrap(),
            0.0
        );
        let k2 =
            gaussian_curvature_intrinsic(&metric("s^2/2").first_form(-0.7, 0.4).unwrap()).unwrap();
        assert_abs_diff_eq!(k2, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn curvature_tensor_agrees_with_brioschi() {
        for src in ["exp(-t)*sqrt(s^2+1)", "s^2/2", "sin(s*t) + t^3"] {
            let g = metric(src).first_form(0.3, -0.6).unwrap();
            let a = gaussian_curvature_intrinsic(&g).unwrap();
            let b = g.gaussian_curvature_riemann().unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn invariant_l_examples() {
        let g = metric("exp(-t)*sqrt(s^2+1)");
        for (s, t) in [(0.0, 0.0), (0.7, -0.3), (-1.0, 1.0)] {
            assert_abs_diff_eq!(g.invariant_l(s, t).unwrap().value, 1.0, epsilon = 1e-12);
        }
        let g3 = metric("2*exp(-3*t)*sqrt(s^2+1)");
        assert_abs_diff_eq!(
            g3.invariant_l(0.4, 0.2).unwrap().value,
            3.0,
            epsilon = 1e-12
        );
        let q = metric("s^2/2").invariant_l(1.0, 0.0).unwrap();
        assert_abs_diff_eq!(q.value, -3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q.ds, -3.0, epsilon = 1e-14);
        assert!(matches!(
            metric("t*s").invariant_l(0.0, 0.0),
            Err(Error::VanishingCurvature { .. })
        ));
    }

    #[test]
    fn connection_table_examples() {
        assert_eq!(
            metric("0").connection_table(0.3, 0.1).unwrap(),
            ConnectionTable {
                ss: [0.0; 2],
                st: [-0.0, 0.0],
                tt: [0.0, 0.0]
            }
        );
        let c = metric("exp(-t)*sqrt(s^2+1)")
            .connection_table(0.0, 0.0)
            .unwrap();
        assert_abs_diff_eq!(c.st[0], 0.0);
        let q = metric("s^2/2").connection_table(1.0, 0.0).unwrap();
        assert_abs_diff_eq!(q.tt[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.tt[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn christoffel_matches_connection_table() {
        let g = metric("exp(-t)*sqrt(s^2+1) + s*t^2");
        let (s, t) = (0.35, 0.8);
        let gam = g.first_form(s, t).unwrap().christoffel().unwrap();
        let table = g.connection_table(s, t).unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(gam[k][0][0].value(), table.ss[k], epsilon = 1e-13);
            assert_abs_diff_eq!(gam[k][0][1].value(), table.st[k], epsilon = 1e-13);
            assert_abs_diff_eq!(gam[k][1][0].value(), table.st[k], epsilon = 1e-13);
            assert_abs_diff_eq!(gam[k][1][1].value(), table.tt[k], epsilon = 1e-13);
        }
    }
}
