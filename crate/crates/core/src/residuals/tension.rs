use crate::geometry::{FramedPoint, SurfacePoint};
use crate::jet::Taylor;
use crate::linalg::{inner4, Vec4};

use super::AmbientCurvature;

/// `Σ g^{ij} R̃(∂_i, H) ∂_j` for the space form of curvature `c`.
fn curvature_trace(sp: &SurfacePoint, c: AmbientCurvature) -> Vec4 {
    let inv = sp.inverse_value();
    let h = sp.h.value();
    let tangent = [sp.tangent[0].value(), sp.tangent[1].value()];
    let mut acc = Vec4::ZERO;
    for i in 0..2 {
        for j in 0..2 {
            acc += c.apply(&tangent[i], &h, &tangent[j]) * inv[i][j];
        }
    }
    acc
}

/// Tangential part of the bitension field, up to the factor −1:
/// `2 grad<H,H> + 4 trace A_{∇⊥H} + 4 (trace R̃(·,H)·)^T`.
pub fn biconservative_vector(sp: &SurfacePoint, c: AmbientCurvature) -> Vec4 {
    let inv = sp.inverse_value();
    let hh = sp.h.inner(&sp.h);
    let dhh = [hh.ds().value(), hh.dt().value()];
    let grad: [f64; 2] = std::array::from_fn(|i| inv[i][0] * dhh[0] + inv[i][1] * dhh[1]);

    let mut trace_a = [0.0; 2];
    for i in 0..2 {
        let nabla_h = sp.normal_derivative(&sp.h, i).value();
        for j in 0..2 {
            let a = sp.shape_operator(&nabla_h, j, &inv);
            for l in 0..2 {
                trace_a[l] += inv[i][j] * a[l];
            }
        }
    }
    let coords = [
        2.0 * grad[0] + 4.0 * trace_a[0],
        2.0 * grad[1] + 4.0 * trace_a[1],
    ];
    sp.push_forward(coords) + sp.tangent_part_value(&curvature_trace(sp, c)) * 4.0
}

pub fn biconservative(sp: &SurfacePoint, c: AmbientCurvature) -> f64 {
    biconservative_vector(sp, c).scale()
}

/// The same condition in the null frame: `4 (ξ1 h3_22 e1 + ξ2 h3_11 e2)`.
pub fn biconservative_frame_vector(fp: &FramedPoint) -> Vec4 {
    let g = &fp.geometry;
    (g.e1 * (g.xi1 * g.h3_22) + g.e2 * (g.xi2 * g.h3_11)) * 4.0
}

pub fn biconservative_frame(fp: &FramedPoint) -> f64 {
    biconservative_frame_vector(fp).scale()
}

/// Normal part of the bitension field:
/// `trace α(A_H ·, ·) − Δ⊥H + 2 (trace R̃(·,H)·)^⊥`, with
/// `Δ⊥H = g^{ij} (∇⊥_i ∇⊥_j H − Γ^k_ij ∇⊥_k H)`.
pub fn biharmonic_vector(sp: &SurfacePoint, c: AmbientCurvature) -> Vec4 {
    let inv = sp.inverse_value();
    let h = sp.h.value();
    let alpha = |i: usize, j: usize| sp.alpha[i][j].value();

    let mut trace_alpha = Vec4::ZERO;
    for i in 0..2 {
        let a = sp.shape_operator(&h, i, &inv);
        for j in 0..2 {
            let v = alpha(0, j) * a[0] + alpha(1, j) * a[1];
            trace_alpha += v * inv[i][j];
        }
    }

    let first = [
        sp.normal_derivative(&sp.h, 0),
        sp.normal_derivative(&sp.h, 1),
    ];
    let mut laplacian = Vec4::ZERO;
    for i in 0..2 {
        for j in 0..2 {
            let mut term = sp.normal_derivative(&first[j], i).value();
            for k in 0..2 {
                term -= first[k].value() * sp.gamma[k][i][j];
            }
            laplacian += term * inv[i][j];
        }
    }
    trace_alpha - laplacian + sp.normal_part_value(&curvature_trace(sp, c)) * 2.0
}

pub fn biharmonic(sp: &SurfacePoint, c: AmbientCurvature) -> f64 {
    biharmonic_vector(sp, c).scale()
}

/// `<H, H>` at the base point.
pub fn mean_curvature_norm(sp: &SurfacePoint) -> f64 {
    let h = sp.h.value();
    inner4(&h, &h)
}
