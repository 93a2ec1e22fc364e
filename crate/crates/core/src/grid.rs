//! Rectangular parameter domains and sampling grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `[s0, s1] × [t0, t1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub s: [f64; 2],
    pub t: [f64; 2],
}

impl Rect {
    pub fn new(s: [f64; 2], t: [f64; 2]) -> Result<Rect> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if !ok(s) || !ok(t) {
            return Err(Error::InvalidGrid(format!(
                "degenerate rectangle {s:?} x {t:?}"
            )));
        }
        Ok(Rect { s, t })
    }

    /// `[−1, 1]²`.
    pub fn unit() -> Rect {
        Rect {
            s: [-1.0, 1.0],
            t: [-1.0, 1.0],
        }
    }
}

/// Uniform `ns × nt` grid including the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub rect: Rect,
    pub ns: usize,
    pub nt: usize,
}

pub const MIN_GRID: usize = 5;
pub const DEFAULT_GRID: usize = 41;

impl Grid {
    pub fn new(rect: Rect, ns: usize, nt: usize) -> Result<Grid> {
        let rect = Rect::new(rect.s, rect.t)?;
        if ns < MIN_GRID || nt < MIN_GRID {
            return Err(Error::InvalidGrid(format!(
                "grid {ns}x{nt} is smaller than {MIN_GRID}x{MIN_GRID}"
            )));
        }
        Ok(Grid { rect, ns, nt })
    }

    pub fn s_values(&self) -> Vec<f64> {
        linspace(self.rect.s, self.ns)
    }

    pub fn t_values(&self) -> Vec<f64> {
        linspace(self.rect.t, self.nt)
    }

    /// Points in row-major order: `t` outer, `s` inner.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let s = self.s_values();
        self.t_values()
            .into_iter()
            .flat_map(|t| s.iter().map(move |&s| (s, t)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.ns * self.nt
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn linspace(r: [f64; 2], n: usize) -> Vec<f64> {
    let h = (r[1] - r[0]) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i + 1 == n {
                r[1]
            } else {
                r[0] + i as f64 * h
            }
        })
        .collect()
}

impl std::str::FromStr for Grid {
    type Err = Error;

    /// Parses `NxM` over `[−1, 1]²`; callers replace the rectangle as needed.
    fn from_str(text: &str) -> Result<Grid> {
        let bad = || Error::InvalidGrid(format!("expected NxM, got {text:?}"));
        let (a, b) = text.split_once(['x', 'X']).ok_or_else(bad)?;
        let ns = a.trim().parse().map_err(|_| bad())?;
        let nt = b.trim().parse().map_err(|_| bad())?;
        Grid::new(Rect::unit(), ns, nt)
    }
}
