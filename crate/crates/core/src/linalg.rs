//! Arithmetic of the neutral inner-product space of signature `(+,+,-,-)`.
//!
//! Everything in the crate that pairs two ambient vectors goes through
//! [`inner4`]. Magnitudes of defect vectors use the auxiliary Euclidean norm
//! [`Vec4::scale`], since a nonzero null vector has zero neutral length.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for causal classification.
pub const TAU_CAUSAL: f64 = 1e-9;

/// Diagonal of the ambient metric.
pub const SIGNATURE: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

/// A point or vector of the neutral 4-space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vec4(pub [f64; 4]);

impl Vec4 {
    pub const ZERO: Vec4 = Vec4([0.0; 4]);

    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Vec4([x1, x2, x3, x4])
    }

    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        Vec4(v)
    }

    /// Auxiliary Euclidean norm `sqrt(x1² + x2² + x3² + x4²)`.
    pub fn scale(&self) -> f64 {
        self.euclid_dot(self).sqrt()
    }

    pub fn euclid_dot(&self, other: &Vec4) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    /// The metric-lowered vector `diag(1,1,-1,-1) x`, so that
    /// `inner4(x, y) == x.lower().euclid_dot(&y)`.
    pub fn lower(&self) -> Vec4 {
        Vec4(std::array::from_fn(|i| SIGNATURE[i] * self.0[i]))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Rejects NaN or infinite components.
    pub fn checked(self) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(format!("{self}")))
        }
    }
}

impl fmt::Display for Vec4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.0[0], self.0[1], self.0[2], self.0[3]
        )
    }
}

impl Index<usize> for Vec4 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec4 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec4 {
    type Output = Vec4;
    fn add(self, rhs: Vec4) -> Vec4 {
        Vec4(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl AddAssign for Vec4 {
    fn add_assign(&mut self, rhs: Vec4) {
        *self = *self + rhs;
    }
}

impl Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, rhs: Vec4) -> Vec4 {
        Vec4(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl SubAssign for Vec4 {
    fn sub_assign(&mut self, rhs: Vec4) {
        *self = *self - rhs;
    }
}

impl Neg for Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        Vec4(self.0.map(|x| -x))
    }
}

impl Mul<f64> for Vec4 {
    type Output = Vec4;
    fn mul(self, k: f64) -> Vec4 {
        Vec4(self.0.map(|x| x * k))
    }
}

impl Mul<Vec4> for f64 {
    type Output = Vec4;
    fn mul(self, v: Vec4) -> Vec4 {
        v * self
    }
}

/// The neutral inner product `x1 y1 + x2 y2 - x3 y3 - x4 y4`.
pub fn inner4(x: &Vec4, y: &Vec4) -> f64 {
    x.0[0] * y.0[0] + x.0[1] * y.0[1] - x.0[2] * y.0[2] - x.0[3] * y.0[3]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalCharacter {
    Spacelike,
    Timelike,
    Lightlike,
    Zero,
}

/// Classifies `x` with a tolerance relative to its auxiliary norm squared.
pub fn causal_character(x: &Vec4, tau: f64) -> CausalCharacter {
    debug_assert!(tau > 0.0);
    if x.0.iter().all(|c| c.abs() <= tau) {
        return CausalCharacter::Zero;
    }
    let q = inner4(x, x);
    let s2 = x.euclid_dot(x);
    if q.abs() <= tau * s2 {
        CausalCharacter::Lightlike
    } else if q > 0.0 {
        CausalCharacter::Spacelike
    } else {
        CausalCharacter::Timelike
    }
}

/// Membership in the light cone through the origin; the origin itself is excluded.
pub fn lightcone_member(p: &Vec4, tau: f64) -> bool {
    let s2 = p.euclid_dot(p);
    s2 > 0.0 && inner4(p, p).abs() <= tau * s2
}

/// Solves the square system `a x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `1e-14` times the largest entry of `a`.
pub fn solve_linear<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    let amax = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    if amax == 0.0 {
        return None;
    }
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() <= 1e-14 * amax {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..N {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut acc = b[row];
        for k in row + 1..N {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Builds the null normal pair `(e3, e4)` of a quasi-minimal surface point.
///
/// `e3 = -H`; `e4` is the unique null normal vector with `<e3, e4> = -1`.
/// The three linear conditions leave `e4` free along `e3` only, so the
/// null condition fixes the remaining coefficient in closed form.
pub fn solve_normal_frame(fs: &Vec4, ft: &Vec4, h: &Vec4, tau: f64) -> Result<(Vec4, Vec4)> {
    let gram = inner4(fs, fs) * inner4(ft, ft) - inner4(fs, ft).powi(2);
    if gram >= -tau {
        return Err(Error::DegenerateTangentPlane { gram });
    }
    if h.scale() <= tau {
        return Err(Error::ZeroMeanCurvature { scale: h.scale() });
    }
    let e3 = -*h;
    // Rows 1-3 are the linear conditions; row 4 (Euclidean e3-orthogonality)
    // removes the e3 freedom so the system is square and regular.
    let rows = [fs.lower(), ft.lower(), e3.lower(), e3];
    let a = rows.map(|r| r.0);
    let p = solve_linear(a, [0.0, 0.0, -1.0, 0.0])
        .map(Vec4)
        .ok_or(Error::DegenerateTangentPlane { gram })?;
    // <p + l e3, p + l e3> = <p,p> - 2 l  (since <p,e3> = -1, <e3,e3> = 0)
    let e4 = p + e3 * (inner4(&p, &p) / 2.0);
    Ok((e3, e4))
}

/// A linear map of the ambient space, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearMap4(pub [[f64; 4]; 4]);

impl LinearMap4 {
    pub fn identity() -> Self {
        LinearMap4(std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 })
        }))
    }

    pub fn apply(&self, v: &Vec4) -> Vec4 {
        Vec4(std::array::from_fn(|i| {
            (0..4).map(|j| self.0[i][j] * v.0[j]).sum()
        }))
    }

    pub fn compose(&self, other: &LinearMap4) -> LinearMap4 {
        LinearMap4(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..4).map(|k| self.0[i][k] * other.0[k][j]).sum())
        }))
    }

    /// Euclidean rotation in the coordinate plane `(i, j)`.
    pub fn rotation(i: usize, j: usize, angle: f64) -> Self {
        let mut m = Self::identity();
        let (s, c) = angle.sin_cos();
        m.0[i][i] = c;
        m.0[j][j] = c;
        m.0[i][j] = -s;
        m.0[j][i] = s;
        m
    }

    /// Hyperbolic rotation mixing a spacelike axis `i` with a timelike axis `j`.
    pub fn boost(i: usize, j: usize, rapidity: f64) -> Self {
        let mut m = Self::identity();
        let (sh, ch) = (rapidity.sinh(), rapidity.cosh());
        m.0[i][i] = ch;
        m.0[j][j] = ch;
        m.0[i][j] = sh;
        m.0[j][i] = sh;
        m
    }

    /// Largest deviation of `M^T diag(1,1,-1,-1) M` from the signature matrix.
    pub fn isometry_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                let col_i = Vec4(std::array::from_fn(|k| self.0[k][i]));
                let col_j = Vec4(std::array::from_fn(|k| self.0[k][j]));
                let target = if i == j { SIGNATURE[i] } else { 0.0 };
                worst = worst.max((inner4(&col_i, &col_j) - target).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn inner_product_on_basis() {
        let e = |i| Vec4::basis(i);
        assert_eq!(inner4(&e(0), &e(0)), 1.0);
        assert_eq!(inner4(&e(2), &e(2)), -1.0);
        let n = Vec4::new(1.0, 0.0, 1.0, 0.0);
        assert_eq!(inner4(&n, &n), 0.0);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { SIGNATURE[i] } else { 0.0 };
                assert_eq!(inner4(&e(i), &e(j)), expect);
            }
        }
    }

    #[test]
    fn causal_classification() {
        let tau = 1e-10;
        assert_eq!(
            causal_character(&Vec4::new(1.0, 0.0, 1.0, 0.0), tau),
            CausalCharacter::Lightlike
        );
        assert_eq!(causal_character(&Vec4::ZERO, tau), CausalCharacter::Zero);
        assert_eq!(
            causal_character(&Vec4::new(2.0, 0.0, 1.0, 0.0), tau),
            CausalCharacter::Spacelike
        );
        assert_eq!(
            causal_character(&Vec4::new(0.0, 0.0, 1.0, 0.5), tau),
            CausalCharacter::Timelike
        );
        // relative tolerance: a big null vector stays null
        let big = Vec4::new(1e8, 0.0, 1e8, 1e-3);
        assert_eq!(
            causal_character(&big, TAU_CAUSAL),
            CausalCharacter::Lightlike
        );
    }

    #[test]
    fn light_cone() {
        let t: f64 = 0.7;
        let p = Vec4::new(t.cos(), t.sin(), t.cos(), t.sin());
        assert!(lightcone_member(&p, 1e-12));
        assert!(!lightcone_member(&Vec4::basis(0), 1e-12));
        assert!(!lightcone_member(&Vec4::ZERO, 1e-12));
    }

    #[test]
    fn normal_frame_family_i_origin() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let fs = Vec4::new(0.0, r, r, 0.0);
        let ft = Vec4::new(0.0, -r, r, 0.0);
        let h = Vec4::new(-1.0, 0.0, 0.0, -1.0);
        let (e3, e4) = solve_normal_frame(&fs, &ft, &h, 1e-12).unwrap();
        assert_eq!(e3, Vec4::new(1.0, 0.0, 0.0, 1.0));
        // hand solve: e4 = (-1/2, 0, 0, 1/2)
        for i in 0..4 {
            assert_abs_diff_eq!(e4[i], [-0.5, 0.0, 0.0, 0.5][i], epsilon = 1e-14);
        }
        assert_abs_diff_eq!(inner4(&e3, &e4), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(inner4(&e4, &e4), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(inner4(&e4, &fs), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(inner4(&e4, &ft), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn normal_frame_errors() {
        let fs = Vec4::basis(0);
        let ft = Vec4::basis(1);
        let h = Vec4::new(0.0, 0.0, 1.0, 1.0);
        assert!(matches!(
            solve_normal_frame(&fs, &ft, &h, 1e-12),
            Err(Error::DegenerateTangentPlane { .. })
        ));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let fs = Vec4::new(0.0, r, r, 0.0);
        let ft = Vec4::new(0.0, -r, r, 0.0);
        assert!(matches!(
            solve_normal_frame(&fs, &ft, &Vec4::ZERO, 1e-12),
            Err(Error::ZeroMeanCurvature { .. })
        ));
    }

    #[test]
    fn isometry_generators() {
        let m = LinearMap4::boost(0, 2, 0.4)
            .compose(&LinearMap4::rotation(0, 1, 1.1))
            .compose(&LinearMap4::boost(1, 3, -0.3))
            .compose(&LinearMap4::rotation(2, 3, 0.2));
        assert!(m.isometry_defect() < 1e-14);
        assert!(LinearMap4::rotation(0, 2, 0.3).isometry_defect() > 0.1);
    }

    #[test]
    fn pivoting_solver() {
        let a = [[0.0, 2.0], [3.0, 1.0]];
        let x = solve_linear(a, [4.0, 5.0]).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 2.0, epsilon = 1e-15);
        assert!(solve_linear([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_none());
    }
}
