use crate::error::{Error, Result};
use crate::jet::{JetVec, ScalarJet, Taylor, Vec4Jet};
use crate::linalg::{inner4, Vec4};

use super::metric::FirstFundamentalForm;

/// Extrinsic jets of an immersion at one point: tangent frame, induced metric,
/// second fundamental form and mean curvature vector, each as a local field.
#[derive(Clone, Debug)]
pub struct SurfacePoint {
    pub f: Vec4Jet,
    /// `f_s`, `f_t`.
    pub tangent: [Vec4Jet; 2],
    /// Induced metric.
    pub metric: FirstFundamentalForm,
    pub inverse: [[ScalarJet; 2]; 2],
    /// `α(∂_i, ∂_j)`, the normal parts of `f_ij`.
    pub alpha: [[Vec4Jet; 2]; 2],
    /// `Γ^k_ij` of the induced metric, read off the tangential parts of `f_ij`.
    pub gamma: [[[f64; 2]; 2]; 2],
    /// Mean curvature vector `H = ½ g^{ij} α_ij`.
    pub h: Vec4Jet,
}

impl SurfacePoint {
    /// Requires a jet of degree ≥ 2; biharmonic quantities need degree 4.
    pub fn new(f: &Vec4Jet) -> Result<SurfacePoint> {
        if f.degree() < 2 {
            return Err(Error::OrderOutOfRange {
                order: 2,
                degree: f.degree(),
            });
        }
        let tangent = [f.ds(), f.dt()];
        let metric = FirstFundamentalForm {
            g11: tangent[0].inner(&tangent[0]),
            g12: tangent[0].inner(&tangent[1]),
            g22: tangent[1].inner(&tangent[1]),
        };
        let scale = tangent[0].value().euclid_dot(&tangent[0].value())
            * tangent[1].value().euclid_dot(&tangent[1].value());
        metric.check_lorentzian(scale)?;
        let inverse = metric.inverse()?;
        let mut sp = SurfacePoint {
            f: *f,
            tangent,
            metric,
            inverse,
            alpha: [[*f; 2]; 2],
            gamma: [[[0.0; 2]; 2]; 2],
            h: *f,
        };
        let mut alpha = [[*f; 2]; 2];
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for i in 0..2 {
            for j in i..2 {
                let fij = tangent[i].d(j);
                let (coords, normal) = sp.split(&fij);
                alpha[i][j] = normal;
                alpha[j][i] = normal;
                for k in 0..2 {
                    gamma[k][i][j] = coords[k].value();
                    gamma[k][j][i] = coords[k].value();
                }
            }
        }
        let mut h = alpha[0][0].scaled(&inverse[0][0]);
        h = h + alpha[0][1].scaled(&(inverse[0][1] * 2.0));
        h = h + alpha[1][1].scaled(&inverse[1][1]);
        sp.alpha = alpha;
        sp.gamma = gamma;
        sp.h = h * 0.5;
        Ok(sp)
    }

    pub fn base(&self) -> (f64, f64) {
        self.f.base()
    }

    /// Splits a vector field into tangential coordinates and normal part.
    pub fn split(&self, v: &Vec4Jet) -> ([ScalarJet; 2], Vec4Jet) {
        let r = [v.inner(&self.tangent[0]), v.inner(&self.tangent[1])];
        let coords: [ScalarJet; 2] =
            std::array::from_fn(|k| self.inverse[k][0] * r[0] + self.inverse[k][1] * r[1]);
        let tangential = self.tangent[0].scaled(&coords[0]) + self.tangent[1].scaled(&coords[1]);
        (coords, *v - tangential)
    }

    pub fn normal_part(&self, v: &Vec4Jet) -> Vec4Jet {
        self.split(v).1
    }

    /// Tangential coordinates of a plain vector at the base point.
    pub fn tangent_coords(&self, v: &Vec4) -> [f64; 2] {
        let r = [
            inner4(v, &self.tangent[0].value()),
            inner4(v, &self.tangent[1].value()),
        ];
        std::array::from_fn(|k| {
            self.inverse[k][0].value() * r[0] + self.inverse[k][1].value() * r[1]
        })
    }

    /// `c^0 f_s + c^1 f_t` at the base point.
    pub fn push_forward(&self, c: [f64; 2]) -> Vec4 {
        self.tangent[0].value() * c[0] + self.tangent[1].value() * c[1]
    }

    pub fn tangent_part_value(&self, v: &Vec4) -> Vec4 {
        self.push_forward(self.tangent_coords(v))
    }

    pub fn normal_part_value(&self, v: &Vec4) -> Vec4 {
        *v - self.tangent_part_value(v)
    }

    /// Inverse metric at the base point.
    pub fn inverse_value(&self) -> [[f64; 2]; 2] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.inverse[i][j].value()))
    }

    /// `∇⊥_i ξ` as a jet, for a normal field `ξ`.
    pub fn normal_derivative(&self, xi: &Vec4Jet, i: usize) -> Vec4Jet {
        self.normal_part(&xi.d(i))
    }

    /// Coordinates of `A_ξ ∂_i`: `(A_ξ ∂_i)^l = g^{lk} <α_ik, ξ>`, using the inverse metric `inv`.
    pub fn shape_operator(&self, xi: &Vec4, i: usize, inv: &[[f64; 2]; 2]) -> [f64; 2] {
        let pair: [f64; 2] = std::array::from_fn(|k| inner4(&self.alpha[i][k].value(), xi));
        std::array::from_fn(|l| inv[l][0] * pair[0] + inv[l][1] * pair[1])
    }

    /// Largest auxiliary norm of `∇⊥_s H`, `∇⊥_t H`.
    pub fn normal_derivative_scale(&self) -> f64 {
        (0..2)
            .map(|i| self.normal_derivative(&self.h, i).value().scale())
            .fold(0.0, f64::max)
    }

    /// Applies a map to every jet component of the immersion (for invariance checks).
    pub fn map_immersion(f: &Vec4Jet, map: impl Fn(&Vec4) -> Vec4) -> Vec4Jet {
        // linear maps act coefficient-wise
        let base = f.base();
        let mut out = [ScalarJet::zero(base); 4];
        for n in 0..=crate::jet::JET_DEGREE {
            for j in 0..=n {
                let v = Vec4(std::array::from_fn(|c| f.0[c].coeff(n - j, j)));
                let w = map(&v);
                for c in 0..4 {
                    out[c].set_coeff(n - j, j, w[c]);
                }
            }
        }
        JetVec(out)
    }
}
