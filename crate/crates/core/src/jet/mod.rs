//! Truncated Taylor arithmetic.
//!
//! A [`ScalarJet`] is the degree-4 Taylor polynomial of a function of
//! `(s, t)` around a base point; a [`Series`] is the degree-8 Taylor
//! polynomial of a function of `t` alone. Both implement [`Taylor`], which
//! supplies the elementary functions through composition with the
//! univariate Taylor coefficients of the outer function.
//!
//! Coefficients are stored in Taylor normalization: the entry for
//! `s^i t^j` is `∂^{i+j}u / ∂s^i ∂t^j` divided by `i! j!`.
//!
//! Each jet carries a *valid degree*. Differentiating drops it by one and
//! binary operations keep the minimum, so a quantity derived through a chain
//! of derivatives knows how many of its coefficients are still exact.

mod fd;
mod vector;

pub use fd::{fd_jet, fornberg_weights, FdOrder, FdStep};
pub use vector::{JetVec, Vec4Jet, Vec4Series};

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Maximum total degree of bivariate jets.
pub const JET_DEGREE: usize = 4;
/// Maximum degree of univariate series.
pub const SERIES_DEGREE: usize = 8;

const NC: usize = (JET_DEGREE + 1) * (JET_DEGREE + 2) / 2;

#[inline]
const fn idx(i: usize, j: usize) -> usize {
    let n = i + j;
    n * (n + 1) / 2 + j
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Common interface of truncated Taylor types.
pub trait Taylor:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn value(&self) -> f64;

    /// A constant with the same base point and valid degree as `self`.
    fn constant_like(&self, v: f64) -> Self;

    fn degree(&self) -> usize;

    /// `Σ_k d[k] (self - self.value())^k`, where `d[k]` are the Taylor
    /// coefficients `F^(k)(u0)/k!` of an outer function `F`.
    fn compose(&self, d: &[f64]) -> Self {
        let n = self.degree().min(d.len().saturating_sub(1));
        let delta = self.clone() + (-self.value());
        let mut acc = self.constant_like(d[n]);
        for k in (0..n).rev() {
            acc = acc * delta.clone() + d[k];
        }
        acc
    }

    fn recip(&self) -> Result<Self> {
        let u0 = self.value();
        if u0 == 0.0 {
            return Err(Error::DivisionByZeroConstantTerm);
        }
        // d^k/du^k (1/u) / k! = (-1)^k / u^(k+1)
        let d: Vec<f64> = (0..=self.degree())
            .map(|k| (-1.0_f64).powi(k as i32) / u0.powi(k as i32 + 1))
            .collect();
        Ok(self.compose(&d))
    }

    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.clone() * rhs.recip()?)
    }

    fn sqrt(&self) -> Result<Self> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(Error::NegativeSqrtConstantTerm(u0));
        }
        Ok(self.compose(&binomial_series(0.5, u0, self.degree())))
    }

    /// Real power with positive base.
    fn powf(&self, p: f64) -> Result<Self> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(Error::JetDomain {
                op: "pow",
                value: u0,
            });
        }
        Ok(self.compose(&binomial_series(p, u0, self.degree())))
    }

    /// Integer power by repeated multiplication; valid for any sign of the base.
    fn powi(&self, n: i32) -> Result<Self> {
        let mut base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.constant_like(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        Ok(acc)
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        let d: Vec<f64> = (0..=self.degree()).map(|k| e / factorial(k)).collect();
        self.compose(&d)
    }

    fn ln(&self) -> Result<Self> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(Error::JetDomain {
                op: "ln",
                value: u0,
            });
        }
        let d: Vec<f64> = (0..=self.degree())
            .map(|k| match k {
                0 => u0.ln(),
                _ => (-1.0_f64).powi(k as i32 + 1) / (k as f64 * u0.powi(k as i32)),
            })
            .collect();
        Ok(self.compose(&d))
    }

    fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..=self.degree())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose(&d)
    }

    fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..=self.degree())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose(&d)
    }
}

/// Taylor coefficients of `u^p` around `u0`: `C(p, k) u0^(p-k)`.
fn binomial_series(p: f64, u0: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut binom = 1.0;
    for k in 0..=n {
        out.push(binom * u0.powf(p - k as f64));
        binom *= (p - k as f64) / (k as f64 + 1.0);
    }
    out
}

/// Degree-4 truncated Taylor expansion of a scalar function of `(s, t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarJet {
    base: (f64, f64),
    degree: usize,
    c: [f64; NC],
}

impl ScalarJet {
    pub fn constant(base: (f64, f64), v: f64) -> Self {
        let mut c = [0.0; NC];
        c[0] = v;
        ScalarJet {
            base,
            degree: JET_DEGREE,
            c,
        }
    }

    pub fn zero(base: (f64, f64)) -> Self {
        Self::constant(base, 0.0)
    }

    /// The coordinate function `s` expanded at `base`.
    pub fn var_s(base: (f64, f64)) -> Self {
        let mut j = Self::constant(base, base.0);
        j.c[idx(1, 0)] = 1.0;
        j
    }

    /// The coordinate function `t` expanded at `base`.
    pub fn var_t(base: (f64, f64)) -> Self {
        let mut j = Self::constant(base, base.1);
        j.c[idx(0, 1)] = 1.0;
        j
    }

    /// Builds a jet from a coefficient table; `coeffs(i, j)` is queried for `i + j <= degree`.
    pub fn from_coeffs(
        base: (f64, f64),
        degree: usize,
        coeffs: impl Fn(usize, usize) -> f64,
    ) -> Self {
        let degree = degree.min(JET_DEGREE);
        let mut c = [0.0; NC];
        for n in 0..=degree {
            for j in 0..=n {
                c[idx(n - j, j)] = coeffs(n - j, j);
            }
        }
        ScalarJet { base, degree, c }
    }

    /// Embeds a function of `t` alone.
    pub fn from_series(base: (f64, f64), series: &Series) -> Self {
        debug_assert!((series.t0 - base.1).abs() <= 1e-12 * (1.0 + base.1.abs()));
        Self::from_coeffs(
            base,
            series.degree,
            |i, j| if i == 0 { series.c[j] } else { 0.0 },
        )
    }

    pub fn base(&self) -> (f64, f64) {
        self.base
    }

    /// Taylor coefficient of `s^i t^j` (zero beyond the stored table).
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > JET_DEGREE {
            0.0
        } else {
            self.c[idx(i, j)]
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            i + j <= JET_DEGREE,
            "coefficient ({i}, {j}) beyond jet degree"
        );
        self.c[idx(i, j)] = v;
    }

    /// The partial derivative `∂^{i+j} u / ∂s^i ∂t^j` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> Result<f64> {
        if i + j > self.degree {
            return Err(Error::OrderOutOfRange {
                order: i + j,
                degree: self.degree,
            });
        }
        Ok(self.c[idx(i, j)] * factorial(i) * factorial(j))
    }

    /// Jet of `∂u/∂s`; valid degree drops by one.
    pub fn ds(&self) -> Self {
        self.derivative(true)
    }

    /// Jet of `∂u/∂t`; valid degree drops by one.
    pub fn dt(&self) -> Self {
        self.derivative(false)
    }

    /// Partial derivative along coordinate `k` (0 = s, 1 = t).
    pub fn d(&self, k: usize) -> Self {
        self.derivative(k == 0)
    }

    fn derivative(&self, along_s: bool) -> Self {
        let mut c = [0.0; NC];
        if self.degree == 0 {
            // No derivative information survives; poison the result.
            c[0] = f64::NAN;
            return ScalarJet {
                base: self.base,
                degree: 0,
                c,
            };
        }
        for n in 0..self.degree {
            for j in 0..=n {
                let i = n - j;
                c[idx(i, j)] = if along_s {
                    (i + 1) as f64 * self.c[idx(i + 1, j)]
                } else {
                    (j + 1) as f64 * self.c[idx(i, j + 1)]
                };
            }
        }
        ScalarJet {
            base: self.base,
            degree: self.degree - 1,
            c,
        }
    }

    /// Evaluates the truncated polynomial at a displacement from the base point.
    pub fn eval_offset(&self, ds: f64, dt: f64) -> f64 {
        let mut acc = 0.0;
        for n in 0..=self.degree {
            for j in 0..=n {
                acc += self.c[idx(n - j, j)] * ds.powi((n - j) as i32) * dt.powi(j as i32);
            }
        }
        acc
    }

    /// Largest absolute coefficient.
    pub fn magnitude(&self) -> f64 {
        self.c
            .iter()
            .take(idx(0, self.degree) + 1)
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }

    fn binary(&self, rhs: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(
            self.base, rhs.base,
            "jets expanded at different base points"
        );
        let degree = self.degree.min(rhs.degree);
        let mut c = [0.0; NC];
        for (k, ck) in c.iter_mut().enumerate().take(idx(0, degree) + 1) {
            *ck = f(self.c[k], rhs.c[k]);
        }
        ScalarJet {
            base: self.base,
            degree,
            c,
        }
    }
}

impl Taylor for ScalarJet {
    fn value(&self) -> f64 {
        self.c[0]
    }

    fn constant_like(&self, v: f64) -> Self {
        let mut j = Self::constant(self.base, v);
        j.degree = self.degree;
        j
    }

    fn degree(&self) -> usize {
        self.degree
    }
}

impl Add for ScalarJet {
    type Output = ScalarJet;
    fn add(self, rhs: ScalarJet) -> ScalarJet {
        self.binary(&rhs, |a, b| a + b)
    }
}

impl Sub for ScalarJet {
    type Output = ScalarJet;
    fn sub(self, rhs: ScalarJet) -> ScalarJet {
        self.binary(&rhs, |a, b| a - b)
    }
}

impl Mul for ScalarJet {
    type Output = ScalarJet;
    fn mul(self, rhs: ScalarJet) -> ScalarJet {
        debug_assert_eq!(
            self.base, rhs.base,
            "jets expanded at different base points"
        );
        let d = self.degree.min(rhs.degree);
        let mut c = [0.0; NC];
        for n1 in 0..=d {
            for j1 in 0..=n1 {
                let a = self.c[idx(n1 - j1, j1)];
                if a == 0.0 {
                    continue;
                }
                for n2 in 0..=d - n1 {
                    for j2 in 0..=n2 {
                        c[idx(n1 - j1 + n2 - j2, j1 + j2)] += a * rhs.c[idx(n2 - j2, j2)];
                    }
                }
            }
        }
        ScalarJet {
            base: self.base,
            degree: d,
            c,
        }
    }
}

impl Neg for ScalarJet {
    type Output = ScalarJet;
    fn neg(mut self) -> ScalarJet {
        self.c = self.c.map(|x| -x);
        self
    }
}

impl Add<f64> for ScalarJet {
    type Output = ScalarJet;
    fn add(mut self, rhs: f64) -> ScalarJet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for ScalarJet {
    type Output = ScalarJet;
    fn sub(mut self, rhs: f64) -> ScalarJet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for ScalarJet {
    type Output = ScalarJet;
    fn mul(mut self, rhs: f64) -> ScalarJet {
        self.c = self.c.map(|x| x * rhs);
        self
    }
}

impl Mul<ScalarJet> for f64 {
    type Output = ScalarJet;
    fn mul(self, rhs: ScalarJet) -> ScalarJet {
        rhs * self
    }
}

/// Degree-8 truncated Taylor series of a function of `t` alone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Series {
    t0: f64,
    degree: usize,
    c: [f64; SERIES_DEGREE + 1],
}

impl Series {
    pub fn constant(t0: f64, v: f64) -> Self {
        let mut c = [0.0; SERIES_DEGREE + 1];
        c[0] = v;
        Series {
            t0,
            degree: SERIES_DEGREE,
            c,
        }
    }

    pub fn var(t0: f64) -> Self {
        let mut s = Self::constant(t0, t0);
        s.c[1] = 1.0;
        s
    }

    pub fn from_coeffs(t0: f64, coeffs: &[f64]) -> Self {
        let mut c = [0.0; SERIES_DEGREE + 1];
        let n = coeffs.len().min(SERIES_DEGREE + 1);
        c[..n].copy_from_slice(&coeffs[..n]);
        Series {
            t0,
            degree: n.saturating_sub(1),
            c,
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.c.get(k).copied().unwrap_or(0.0)
    }

    /// `d^k u / dt^k` at `t0`.
    pub fn derivative_at(&self, k: usize) -> Result<f64> {
        if k > self.degree {
            return Err(Error::OrderOutOfRange {
                order: k,
                degree: self.degree,
            });
        }
        Ok(self.c[k] * factorial(k))
    }

    /// Series of `du/dt`.
    pub fn dt(&self) -> Self {
        let mut c = [0.0; SERIES_DEGREE + 1];
        if self.degree == 0 {
            c[0] = f64::NAN;
            return Series {
                t0: self.t0,
                degree: 0,
                c,
            };
        }
        for k in 0..self.degree {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Series {
            t0: self.t0,
            degree: self.degree - 1,
            c,
        }
    }

    /// Antiderivative with constant term `v0`; valid degree rises by one (capped).
    pub fn integrate(&self, v0: f64) -> Self {
        let mut c = [0.0; SERIES_DEGREE + 1];
        c[0] = v0;
        for k in 1..=SERIES_DEGREE.min(self.degree + 1) {
            c[k] = self.c[k - 1] / k as f64;
        }
        Series {
            t0: self.t0,
            degree: (self.degree + 1).min(SERIES_DEGREE),
            c,
        }
    }

    pub fn eval_offset(&self, dt: f64) -> f64 {
        self.c[..=self.degree]
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * dt + c)
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }

    fn binary(&self, rhs: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.t0, rhs.t0, "series expanded at different points");
        let degree = self.degree.min(rhs.degree);
        let mut c = [0.0; SERIES_DEGREE + 1];
        for k in 0..=degree {
            c[k] = f(self.c[k], rhs.c[k]);
        }
        Series {
            t0: self.t0,
            degree,
            c,
        }
    }
}

impl Taylor for Series {
    fn value(&self) -> f64 {
        self.c[0]
    }

    fn constant_like(&self, v: f64) -> Self {
        let mut s = Self::constant(self.t0, v);
        s.degree = self.degree;
        s
    }

    fn degree(&self) -> usize {
        self.degree
    }
}

impl Add for Series {
    type Output = Series;
    fn add(self, rhs: Series) -> Series {
        self.binary(&rhs, |a, b| a + b)
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(self, rhs: Series) -> Series {
        self.binary(&rhs, |a, b| a - b)
    }
}

impl Mul for Series {
    type Output = Series;
    fn mul(self, rhs: Series) -> Series {
        let d = self.degree.min(rhs.degree);
        let mut c = [0.0; SERIES_DEGREE + 1];
        for i in 0..=d {
            for j in 0..=d - i {
                c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Series {
            t0: self.t0,
            degree: d,
            c,
        }
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(mut self) -> Series {
        self.c = self.c.map(|x| -x);
        self
    }
}

impl Add<f64> for Series {
    type Output = Series;
    fn add(mut self, rhs: f64) -> Series {
        self.c[0] += rhs;
        self
    }
}

impl Mul<f64> for Series {
    type Output = Series;
    fn mul(mut self, rhs: f64) -> Series {
        self.c = self.c.map(|x| x * rhs);
        self
    }
}
