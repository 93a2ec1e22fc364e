//! Generators for the three families of quasi-minimal proper biconservative surfaces.
//!
//! A [`FamilySpec`] is plain data (JSON with a `"family"` tag). [`generate`]
//! validates it, builds the immersion with analytic jets and sweeps the
//! residuals over a grid, producing a [`GeneratedSurface`].

mod flat;
mod nonflat;

pub use flat::{FamilyI, FamilyII, FamilyIISpec, FamilyISpec, TAU_CURVE};
pub use nonflat::{
    solve_eta_prime, CurveData, FamilyIII, FamilyIIISpec, DEFAULT_STEPS, TAU_CONSTRAINT,
};

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{PointGeometry, SemiGeodesicMetric};
use crate::grid::{Grid, Rect, DEFAULT_GRID};
use crate::jet::{fd_jet, FdOrder, FdStep, JetVec, Vec4Jet};
use crate::linalg::Vec4;
use crate::residuals::{
    lemma4_extract, sweep, AmbientCurvature, Lemma4, ReportHeader, ResidualReport, Tolerances,
};

/// An arbitrary immersion given by four expressions, optionally with a declared `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub f: [Expr; 4],
    #[serde(default)]
    pub m: Option<Expr>,
    #[serde(default = "Rect::unit")]
    pub domain: Rect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum FamilySpec {
    #[serde(rename = "i")]
    I(FamilyISpec),
    #[serde(rename = "ii")]
    II(FamilyIISpec),
    #[serde(rename = "iii")]
    III(FamilyIIISpec),
    #[serde(rename = "surface")]
    Surface(SurfaceSpec),
}

impl FamilySpec {
    pub fn domain(&self) -> Rect {
        match self {
            FamilySpec::I(s) => s.domain,
            FamilySpec::II(s) => s.domain,
            FamilySpec::III(s) => s.domain,
            FamilySpec::Surface(s) => s.domain,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            FamilySpec::I(_) => "i",
            FamilySpec::II(_) => "ii",
            FamilySpec::III(_) => "iii",
            FamilySpec::Surface(_) => "surface",
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("specs always serialize");
        Sha256::digest(&json)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Names accepted by [`builtin`].
pub const BUILTINS: [&str; 4] = ["i-st", "i-exp", "ii-trig", "iii-I3"];

fn ex(src: &str) -> Expr {
    Expr::parse(src).expect("built-in expressions parse")
}

pub fn builtin(name: &str) -> Result<FamilySpec> {
    Ok(match name {
        "i-st" => FamilySpec::I(FamilyISpec {
            psi: ex("s*t"),
            domain: Rect::unit(),
        }),
        "i-exp" => FamilySpec::I(FamilyISpec {
            psi: ex("exp(s+t)"),
            domain: Rect::unit(),
        }),
        "ii-trig" => FamilySpec::II(FamilyIISpec {
            z: [ex("cos(s)"), ex("sin(s)"), ex("cos(s)"), ex("sin(s)")],
            w: [
                ex("-0.5*sin(s)"),
                ex("0.5*cos(s)"),
                ex("0.5*sin(s)"),
                ex("-0.5*cos(s)"),
            ],
            domain: Rect::unit(),
        }),
        "iii-I3" => FamilySpec::III(FamilyIIISpec {
            m: ex("exp(-t)*sqrt(s^2+1)"),
            alpha: [ex("cos(t)"), ex("sin(t)"), ex("cos(t)"), ex("sin(t)")],
            a: ex("exp(t/2)"),
            mu: ex("0"),
            eta0: Vec4::ZERO,
            steps: DEFAULT_STEPS,
            domain: Rect {
                s: [-1.0, 1.0],
                t: [0.0, 1.0],
            },
        }),
        other => return Err(Error::UnknownBuiltin(other.to_string())),
    })
}

/// How derivative jets are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum JetMode {
    #[default]
    Analytic,
    FiniteDifference {
        step: FdStep,
        order: FdOrder,
    },
}

impl JetMode {
    pub fn fd_default() -> Self {
        JetMode::FiniteDifference {
            step: FdStep::Auto,
            order: FdOrder::Fourth,
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, JetMode::Analytic)
    }
}

impl fmt::Display for JetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JetMode::Analytic => f.write_str("analytic"),
            JetMode::FiniteDifference { step, order } => {
                let h = match step {
                    FdStep::Auto => "auto".to_string(),
                    FdStep::Fixed(h) => format!("{h:e}"),
                };
                write!(f, "fd(order={}, h={h})", order.accuracy())
            }
        }
    }
}

/// A generic immersion from expressions.
#[derive(Clone, Debug)]
pub struct ExprSurface {
    pub spec: SurfaceSpec,
}

impl ExprSurface {
    pub fn jet(&self, s: f64, t: f64) -> Result<Vec4Jet> {
        let f = &self.spec.f;
        Ok(JetVec([
            f[0].jet(s, t)?,
            f[1].jet(s, t)?,
            f[2].jet(s, t)?,
            f[3].jet(s, t)?,
        ]))
    }

    pub fn position(&self, s: f64, t: f64) -> Result<Vec4> {
        let f = &self.spec.f;
        Ok(Vec4::new(
            f[0].eval(s, t)?,
            f[1].eval(s, t)?,
            f[2].eval(s, t)?,
            f[3].eval(s, t)?,
        ))
    }
}

/// A validated immersion of one of the families.
#[derive(Clone, Debug)]
pub enum Immersion {
    I(FamilyI),
    II(FamilyII),
    III(Box<FamilyIII>),
    Surface(ExprSurface),
}

impl Immersion {
    /// Validates `spec` on the nodes of `grid`.
    pub fn new(spec: &FamilySpec, grid: &Grid, tol: &Tolerances) -> Result<Immersion> {
        Ok(match spec {
            FamilySpec::I(s) => Immersion::I(FamilyI::new(s.clone(), grid, tol.delta)?),
            FamilySpec::II(s) => Immersion::II(FamilyII::new(s.clone(), grid)?),
            FamilySpec::III(s) => Immersion::III(Box::new(FamilyIII::new(s.clone(), grid)?)),
            FamilySpec::Surface(s) => Immersion::Surface(ExprSurface { spec: s.clone() }),
        })
    }

    /// Analytic jet at `(s, t)`.
    pub fn jet(&self, s: f64, t: f64) -> Result<Vec4Jet> {
        match self {
            Immersion::I(f) => f.jet(s, t),
            Immersion::II(f) => f.jet(s, t),
            Immersion::III(f) => f.jet(s, t),
            Immersion::Surface(f) => f.jet(s, t),
        }
    }

    pub fn position(&self, s: f64, t: f64) -> Result<Vec4> {
        match self {
            Immersion::I(f) => f.position(s, t),
            Immersion::II(f) => f.position(s, t),
            Immersion::III(f) => f.position(s, t),
            Immersion::Surface(f) => f.position(s, t),
        }
    }

    /// Jet at `(s, t)` in the requested mode.
    pub fn jet_with(&self, mode: JetMode, s: f64, t: f64) -> Result<Vec4Jet> {
        match mode {
            JetMode::Analytic => self.jet(s, t),
            JetMode::FiniteDifference { step, order } => {
                fd_jet(|s, t| self.position(s, t), (s, t), step, order)
            }
        }
    }

    /// The declared semi-geodesic metric, if any.
    pub fn metric(&self) -> Option<SemiGeodesicMetric> {
        match self {
            Immersion::I(_) | Immersion::II(_) => Some(SemiGeodesicMetric::flat()),
            Immersion::III(f) => Some(f.metric.clone()),
            Immersion::Surface(f) => f.spec.m.clone().map(SemiGeodesicMetric::new),
        }
    }
}

/// Grid, jets and thresholds for validation sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationOptions {
    /// `(ns, nt)`; the rectangle is the spec's domain.
    pub size: (usize, usize),
    pub jets: JetMode,
    pub tolerances: Tolerances,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            size: (DEFAULT_GRID, DEFAULT_GRID),
            jets: JetMode::Analytic,
            tolerances: Tolerances::analytic(),
        }
    }
}

impl ValidationOptions {
    pub fn with_jets(jets: JetMode) -> Self {
        let tolerances = if jets.is_analytic() {
            Tolerances::analytic()
        } else {
            Tolerances::finite_difference()
        };
        ValidationOptions {
            jets,
            tolerances,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedSurface {
    pub instance: String,
    pub spec: FamilySpec,
    pub spec_hash: String,
    pub grid: Grid,
    pub jets: JetMode,
    pub immersion: Immersion,
    pub validation: ResidualReport,
    /// Frame data per successfully evaluated point, in report order.
    pub geometry: Vec<PointGeometry>,
}

/// Validates `spec`, builds the immersion and sweeps its residuals.
///
/// Family instances must evaluate at every node (in particular, be isometric to
/// their declared metric); generic surfaces report failing nodes instead.
pub fn generate(
    instance: &str,
    spec: &FamilySpec,
    opts: &ValidationOptions,
) -> Result<GeneratedSurface> {
    let grid = Grid::new(spec.domain(), opts.size.0, opts.size.1)?;
    let immersion = Immersion::new(spec, &grid, &opts.tolerances)?;
    let metric = immersion.metric();
    let c = AmbientCurvature::FLAT;
    let (evals, failures) = sweep(
        &grid,
        |s, t| immersion.jet_with(opts.jets, s, t),
        metric.as_ref(),
        c,
        opts.tolerances.isometry,
    );
    if !matches!(spec, FamilySpec::Surface(_)) {
        if let Some(f) = failures.first() {
            return Err(Error::IncompleteGrid {
                failed: failures.len(),
                total: grid.len(),
                first: format!("({}, {}): {}", f.s, f.t, f.error),
            });
        }
    }
    let spec_hash = spec.hash();
    let header = ReportHeader {
        tool: "neutralgeom".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        instance: instance.to_string(),
        spec_hash: spec_hash.clone(),
        jets: opts.jets.to_string(),
        grid: format!(
            "{}x{} over s {:?}, t {:?}",
            grid.ns, grid.nt, grid.rect.s, grid.rect.t
        ),
        curvature: c.value(),
    };
    let mut geometry = Vec::new();
    let mut points = Vec::with_capacity(evals.len());
    for e in evals {
        geometry.extend(e.geometry);
        points.push(e.residuals);
    }
    let validation = ResidualReport::new(header, opts.tolerances, points, failures);
    Ok(GeneratedSurface {
        instance: instance.to_string(),
        spec: spec.clone(),
        spec_hash,
        grid,
        jets: opts.jets,
        immersion,
        validation,
        geometry,
    })
}

impl GeneratedSurface {
    /// The functions `a`, `b`, `z` read back from the frame on each line of constant `t`.
    pub fn lemma4(&self, kernel_tol: f64) -> Result<Lemma4> {
        let mut lines: Vec<Vec<PointGeometry>> = Vec::new();
        for g in &self.geometry {
            match lines.last_mut() {
                Some(line) if line[0].p.1 == g.p.1 => line.push(g.clone()),
                _ => lines.push(vec![g.clone()]),
            }
        }
        lemma4_extract(&lines, kernel_tol)
    }

    /// For family (iii), the factor `B(t)` with `e3 = B α`, averaged along each line of constant `t`.
    pub fn e3_alpha_factor(&self) -> Option<Vec<(f64, f64)>> {
        let FamilySpec::III(spec) = &self.spec else {
            return None;
        };
        let mut out: Vec<(f64, f64, usize)> = Vec::new();
        for g in &self.geometry {
            let t = g.p.1;
            let mut alpha = Vec4::ZERO;
            for (k, e) in spec.alpha.iter().enumerate() {
                alpha[k] = e.eval(g.p.0, t).ok()?;
            }
            let b = g.e3.euclid_dot(&alpha) / alpha.euclid_dot(&alpha);
            match out.last_mut() {
                Some(last) if last.0 == t => {
                    last.1 += b;
                    last.2 += 1;
                }
                _ => out.push((t, b, 1)),
            }
        }
        Some(
            out.into_iter()
                .map(|(t, sum, n)| (t, sum / n as f64))
                .collect(),
        )
    }
}
