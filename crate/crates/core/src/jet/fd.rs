//! Finite-difference jets from point samplers.
//!
//! Mixed partials use tensor products of one-dimensional central stencils;
//! stencil weights come from Fornberg's recursion.

use serde::{Deserialize, Serialize};

use super::{factorial, JetVec, ScalarJet, Vec4Jet, JET_DEGREE};
use crate::error::{Error, Result};
use crate::linalg::Vec4;

/// Accuracy order of the central stencils.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FdOrder {
    #[serde(rename = "2")]
    Second,
    #[default]
    #[serde(rename = "4")]
    Fourth,
}

impl FdOrder {
    pub fn accuracy(self) -> usize {
        match self {
            FdOrder::Second => 2,
            FdOrder::Fourth => 4,
        }
    }

    /// Half-width of the central stencil for derivative order `d`.
    fn half_width(self, d: usize) -> usize {
        if d == 0 {
            0
        } else {
            d.div_ceil(2) - 1 + self.accuracy() / 2
        }
    }
}

/// Step selection for [`fd_jet`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum FdStep {
    /// `eps^(1/8) * max(1, |s|, |t|)` on both axes.
    #[default]
    Auto,
    Fixed(f64),
}

impl FdStep {
    pub fn resolve(self, s: f64, t: f64) -> f64 {
        match self {
            FdStep::Auto => f64::EPSILON.powf(1.0 / 8.0) * 1.0_f64.max(s.abs()).max(t.abs()),
            FdStep::Fixed(h) => h,
        }
    }
}

/// Weights `w[k][i]` approximating the `k`-th derivative at `x0` from values at `nodes[i]`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_derivative: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let m = max_derivative;
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Central weights for derivative `d` on integer offsets `-r..=r` (unit spacing).
fn central_weights(d: usize, order: FdOrder) -> Vec<f64> {
    let r = order.half_width(d) as i64;
    let nodes: Vec<f64> = (-r..=r).map(|k| k as f64).collect();
    fornberg_weights(0.0, &nodes, d).swap_remove(d)
}

/// Finite-difference jet of `sampler` at `p`, for all partials of total order ≤ 4.
pub fn fd_jet<F>(sampler: F, p: (f64, f64), step: FdStep, order: FdOrder) -> Result<Vec4Jet>
where
    F: Fn(f64, f64) -> Result<Vec4>,
{
    let h = step.resolve(p.0, p.1);
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidStencil(format!("step {h} must be positive")));
    }
    let weights: Vec<Vec<f64>> = (0..=JET_DEGREE)
        .map(|d| central_weights(d, order))
        .collect();
    let rmax = order.half_width(JET_DEGREE);
    let width = 2 * rmax + 1;
    let mut cache: Vec<Option<Vec4>> = vec![None; width * width];

    let mut sample = |a: i64, b: i64| -> Result<Vec4> {
        let key = (a + rmax as i64) as usize * width + (b + rmax as i64) as usize;
        if let Some(v) = cache[key] {
            return Ok(v);
        }
        let (s, t) = (p.0 + a as f64 * h, p.1 + b as f64 * h);
        let v = sampler(s, t).map_err(|e| Error::SamplerDomainError {
            s,
            t,
            reason: e.to_string(),
        })?;
        if !v.is_finite() {
            return Err(Error::SamplerDomainError {
                s,
                t,
                reason: format!("non-finite sample {v}"),
            });
        }
        cache[key] = Some(v);
        Ok(v)
    };

    let centre = sample(0, 0)?;
    let mut table = [[Vec4::ZERO; JET_DEGREE + 1]; JET_DEGREE + 1];
    table[0][0] = centre;
    for n in 1..=JET_DEGREE {
        for j in 0..=n {
            let i = n - j;
            let (wi, wj) = (&weights[i], &weights[j]);
            let (ri, rj) = ((wi.len() / 2) as i64, (wj.len() / 2) as i64);
            let mut acc = Vec4::ZERO;
            for (ka, wa) in wi.iter().enumerate() {
                if *wa == 0.0 {
                    continue;
                }
                for (kb, wb) in wj.iter().enumerate() {
                    if *wb == 0.0 {
                        continue;
                    }
                    // stencils of derivative order >= 1 annihilate constants
                    acc += (sample(ka as i64 - ri, kb as i64 - rj)? - centre) * (wa * wb);
                }
            }
            let norm = h.powi(n as i32) * factorial(i) * factorial(j);
            table[i][j] = acc * (1.0 / norm);
        }
    }
    Ok(JetVec(std::array::from_fn(|c| {
        ScalarJet::from_coeffs(p, JET_DEGREE, |i, j| table[i][j][c])
    })))
}
