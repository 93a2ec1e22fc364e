use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{FirstFundamentalForm, SurfacePoint};
use crate::jet::{Taylor, Vec4Jet};
use crate::linalg::{inner4, Vec4};

use super::AmbientCurvature;

/// Largest defects of the Gauss, Codazzi and Ricci equations over coordinate index choices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Integrability {
    pub gauss: f64,
    pub codazzi: f64,
    pub ricci: f64,
}

/// Evaluates the structure equations of `sp` with the intrinsic side taken from `g`
/// (usually the declared metric `g_m`) and the extrinsic side from the jets of `f`.
/// `normals` are the normal fields used in the Ricci equation.
pub fn integrability(
    sp: &SurfacePoint,
    g: &FirstFundamentalForm,
    normals: &[Vec4Jet],
    c: AmbientCurvature,
) -> Result<Integrability> {
    let inv_jet = g.inverse()?;
    let inv: [[f64; 2]; 2] =
        std::array::from_fn(|i| std::array::from_fn(|j| inv_jet[i][j].value()));
    let gv = |i: usize, j: usize| g.entry(i, j).value();
    let gamma = g.christoffel()?;
    let riemann = g.riemann()?;
    let alpha = |i: usize, j: usize| sp.alpha[i][j].value();
    let tangent = [sp.tangent[0].value(), sp.tangent[1].value()];
    let push = |v: [f64; 2]| tangent[0] * v[0] + tangent[1] * v[1];
    // A_ξ ∂_i in coordinates, lifted with g
    let shape = |xi: &Vec4, i: usize| -> [f64; 2] {
        let pair: [f64; 2] = std::array::from_fn(|k| inner4(&alpha(i, k), xi));
        std::array::from_fn(|l| inv[l][0] * pair[0] + inv[l][1] * pair[1])
    };

    let mut out = Integrability::default();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                // R(∂i,∂j)∂k = c(g_jk ∂i − g_ik ∂j) + A_{α(∂j,∂k)} ∂i − A_{α(∂i,∂k)} ∂j
                let lhs = push([riemann[0][i][j][k], riemann[1][i][j][k]]);
                let mut rhs = push(shape(&alpha(j, k), i)) - push(shape(&alpha(i, k), j));
                let mut space_form = [0.0; 2];
                space_form[i] += c.value() * gv(j, k);
                space_form[j] -= c.value() * gv(i, k);
                rhs += push(space_form);
                out.gauss = out.gauss.max((lhs - rhs).scale());

                // (∇̄_i α)(∂j,∂k) − (∇̄_j α)(∂i,∂k) = (R̃(∂i,∂j)∂k)^⊥ = 0
                let cov = |a: usize, b: usize| -> Vec4 {
                    let mut v = sp.normal_derivative(&sp.alpha[b][k], a).value();
                    for l in 0..2 {
                        v -= alpha(l, k) * gamma[l][a][b].value();
                        v -= alpha(b, l) * gamma[l][a][k].value();
                    }
                    v
                };
                out.codazzi = out.codazzi.max((cov(i, j) - cov(j, i)).scale());
            }
        }
    }

    for xi in normals {
        // R⊥(∂s,∂t)ξ = α(∂s, A_ξ ∂t) − α(A_ξ ∂s, ∂t) + (R̃(∂s,∂t)ξ)^⊥
        let d = [sp.normal_derivative(xi, 0), sp.normal_derivative(xi, 1)];
        let lhs = sp.normal_derivative(&d[1], 0).value() - sp.normal_derivative(&d[0], 1).value();
        let x = xi.value();
        let (a_s, a_t) = (shape(&x, 0), shape(&x, 1));
        let rhs = alpha(0, 0) * a_t[0] + alpha(0, 1) * a_t[1]
            - (alpha(0, 1) * a_s[0] + alpha(1, 1) * a_s[1])
            + sp.normal_part_value(&c.apply(&tangent[0], &tangent[1], &x));
        out.ricci = out.ricci.max((lhs - rhs).scale());
    }
    Ok(out)
}
