use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointGeometry;
use crate::jet::fornberg_weights;

/// Functions `a, b, z` of `t` read back from a proper biconservative surface,
/// with `h3_22 = 1/a`, `ξ2 = m_s + b`, `h4_22 = −m − b s + z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma4 {
    pub t: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub z: Vec<f64>,
    pub a_prime: Vec<f64>,
    /// Largest spread of `a`, `b` or `z` along a line of constant `t`.
    pub s_independence: f64,
    /// Largest `|b + a′/a − L|`.
    pub bpl: f64,
}

/// Reads `a`, `b`, `z` back from frame values on lines of constant `t`.
///
/// Each inner vector holds the points of one line; at least five lines are
/// needed for the five-point derivative of `a`.
pub fn lemma4_extract(lines: &[Vec<PointGeometry>], kernel_tol: f64) -> Result<Lemma4> {
    if lines.len() < 5 || lines.iter().any(|l| l.is_empty()) {
        return Err(Error::InvalidGrid(
            "frame read-back needs at least five nonempty t-lines".into(),
        ));
    }
    let mut out = Lemma4 {
        t: Vec::new(),
        a: Vec::new(),
        b: Vec::new(),
        z: Vec::new(),
        a_prime: Vec::new(),
        s_independence: 0.0,
        bpl: 0.0,
    };
    for line in lines {
        let mut stats = [Spread::default(), Spread::default(), Spread::default()];
        for pg in line {
            let (s, t) = pg.p;
            if pg.h3_11.abs() > kernel_tol {
                return Err(Error::KernelPatternViolation {
                    s,
                    t,
                    quantity: "h3_11",
                    value: pg.h3_11,
                });
            }
            if pg.xi1.abs() > kernel_tol {
                return Err(Error::KernelPatternViolation {
                    s,
                    t,
                    quantity: "xi1",
                    value: pg.xi1,
                });
            }
            if pg.l.is_none() {
                return Err(Error::VanishingCurvature { s, t, k: pg.k });
            }
            let a = 1.0 / pg.h3_22;
            let b = pg.xi2 - pg.m_s;
            let z = pg.h4_22 + pg.m + b * s;
            for (st, v) in stats.iter_mut().zip([a, b, z]) {
                st.push(v);
            }
        }
        out.t.push(line[0].p.1);
        out.a.push(stats[0].mean());
        out.b.push(stats[1].mean());
        out.z.push(stats[2].mean());
        let spread = stats.iter().map(Spread::width).fold(0.0, f64::max);
        out.s_independence = out.s_independence.max(spread);
    }

    let n = out.t.len();
    for i in 0..n {
        let lo = i.saturating_sub(2).min(n - 5);
        let nodes = &out.t[lo..lo + 5];
        let w = fornberg_weights(out.t[i], nodes, 1);
        let d: f64 = w[1]
            .iter()
            .zip(&out.a[lo..lo + 5])
            .map(|(w, a)| w * a)
            .sum();
        out.a_prime.push(d);
    }
    for (i, line) in lines.iter().enumerate() {
        let lhs = out.b[i] + out.a_prime[i] / out.a[i];
        for pg in line {
            let l = pg.l.unwrap_or(f64::NAN);
            let gap = (lhs - l).abs();
            out.bpl = out.bpl.max(if gap.is_nan() { f64::INFINITY } else { gap });
        }
    }
    Ok(out)
}

#[derive(Default)]
struct Spread {
    min: Option<f64>,
    max: Option<f64>,
    sum: f64,
    n: usize,
}

impl Spread {
    fn push(&mut self, v: f64) {
        self.min = Some(self.min.map_or(v, |m| m.min(v)));
        self.max = Some(self.max.map_or(v, |m| m.max(v)));
        self.sum += v;
        self.n += 1;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    fn width(&self) -> f64 {
        self.max.unwrap_or(0.0) - self.min.unwrap_or(0.0)
    }
}
