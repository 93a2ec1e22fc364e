use std::ops::{Add, Mul, Neg, Sub};

use super::{ScalarJet, Series, Taylor};
use crate::error::{Error, Result};
use crate::linalg::{Vec4, SIGNATURE};

/// Four jets sharing one base point: the local expansion of an ambient-valued map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetVec<T>(pub [T; 4]);

pub type Vec4Jet = JetVec<ScalarJet>;
pub type Vec4Series = JetVec<Series>;

impl<T: Taylor> JetVec<T> {
    pub fn value(&self) -> Vec4 {
        Vec4(std::array::from_fn(|i| self.0[i].value()))
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|c| c.degree()).min().unwrap()
    }

    /// A constant vector with the base point and degree of `self`.
    pub fn constant_like(&self, v: &Vec4) -> Self {
        JetVec(std::array::from_fn(|i| self.0[i].constant_like(v[i])))
    }

    /// Neutral inner product, jet-valued.
    pub fn inner(&self, other: &Self) -> T {
        let mut acc = self.0[0].clone() * other.0[0].clone();
        for i in 1..4 {
            acc = acc + self.0[i].clone() * other.0[i].clone() * SIGNATURE[i];
        }
        acc
    }

    /// Auxiliary Euclidean dot product, jet-valued.
    pub fn euclid_dot(&self, other: &Self) -> T {
        let mut acc = self.0[0].clone() * other.0[0].clone();
        for i in 1..4 {
            acc = acc + self.0[i].clone() * other.0[i].clone();
        }
        acc
    }

    pub fn scaled(&self, k: &T) -> Self {
        JetVec(std::array::from_fn(|i| self.0[i].clone() * k.clone()))
    }
}

impl Vec4Jet {
    pub fn constant(base: (f64, f64), v: &Vec4) -> Self {
        JetVec(std::array::from_fn(|i| ScalarJet::constant(base, v[i])))
    }

    pub fn base(&self) -> (f64, f64) {
        self.0[0].base()
    }

    pub fn ds(&self) -> Self {
        JetVec(self.0.map(|c| c.ds()))
    }

    pub fn dt(&self) -> Self {
        JetVec(self.0.map(|c| c.dt()))
    }

    /// Partial derivative along coordinate `k` (0 = s, 1 = t).
    pub fn d(&self, k: usize) -> Self {
        JetVec(self.0.map(|c| c.d(k)))
    }

    /// The partial derivative `∂^{i+k} f / ∂s^i ∂t^k` at the base point.
    pub fn extract(&self, i: usize, k: usize) -> Result<Vec4> {
        if i + k > super::JET_DEGREE {
            return Err(Error::OrderOutOfRange {
                order: i + k,
                degree: super::JET_DEGREE,
            });
        }
        let mut out = Vec4::ZERO;
        for c in 0..4 {
            out[c] = self.0[c].partial(i, k)?;
        }
        Ok(out)
    }

    pub fn embed(base: (f64, f64), v: &Vec4Series) -> Self {
        JetVec(std::array::from_fn(|i| {
            ScalarJet::from_series(base, &v.0[i])
        }))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Vec4Series {
    pub fn dt(&self) -> Self {
        JetVec(self.0.map(|c| c.dt()))
    }
}

impl<T: Taylor> Add for JetVec<T> {
    type Output = JetVec<T>;
    fn add(self, rhs: Self) -> Self {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = rhs.0;
        JetVec([a0 + b0, a1 + b1, a2 + b2, a3 + b3])
    }
}

impl<T: Taylor> Sub for JetVec<T> {
    type Output = JetVec<T>;
    fn sub(self, rhs: Self) -> Self {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = rhs.0;
        JetVec([a0 - b0, a1 - b1, a2 - b2, a3 - b3])
    }
}

impl<T: Taylor> Neg for JetVec<T> {
    type Output = JetVec<T>;
    fn neg(self) -> Self {
        JetVec(self.0.map(|c| -c))
    }
}

impl<T: Taylor> Mul<f64> for JetVec<T> {
    type Output = JetVec<T>;
    fn mul(self, k: f64) -> Self {
        JetVec(self.0.map(|c| c * k))
    }
}
