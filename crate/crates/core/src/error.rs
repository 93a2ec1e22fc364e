use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value {0}")]
    NonFinite(String),

    // jets
    #[error("division by a jet whose constant term is zero")]
    DivisionByZeroConstantTerm,
    #[error("square root of a jet with non-positive constant term {0}")]
    NegativeSqrtConstantTerm(f64),
    #[error("{op} of a jet with constant term {value} outside the domain")]
    JetDomain { op: &'static str, value: f64 },
    #[error("derivative order {order} exceeds jet degree {degree}")]
    OrderOutOfRange { order: usize, degree: usize },
    #[error("sampler rejected stencil node ({s}, {t}): {reason}")]
    SamplerDomainError { s: f64, t: f64, reason: String },
    #[error("invalid finite-difference request: {0}")]
    InvalidStencil(String),

    // expressions
    #[error("cannot parse expression {expr:?} at byte {pos}: {msg}")]
    Parse {
        expr: String,
        pos: usize,
        msg: String,
    },
    #[error("expression {expr:?} may only depend on {allowed}")]
    ForbiddenVariable { expr: String, allowed: &'static str },

    // linear algebra / frames
    #[error("tangent plane is not Lorentzian (Gram determinant {gram})")]
    DegenerateTangentPlane { gram: f64 },
    #[error("mean curvature vector vanishes (scale {scale})")]
    ZeroMeanCurvature { scale: f64 },

    // surface geometry
    #[error("induced metric is not Lorentzian (det {det})")]
    NotLorentzian { det: f64 },
    #[error("immersion is not isometric to g_m: residual {residual:.3e} > {tolerance:.1e} at ({s}, {t})")]
    IsometryViolation {
        s: f64,
        t: f64,
        residual: f64,
        tolerance: f64,
    },
    #[error("Gaussian curvature {k:.3e} too small at ({s}, {t})")]
    VanishingCurvature { s: f64, t: f64, k: f64 },

    // residuals
    #[error("grid report incomplete: {failed} of {total} points failed ({first})")]
    IncompleteGrid {
        failed: usize,
        total: usize,
        first: String,
    },
    #[error("kernel pattern violated at ({s}, {t}): {quantity} = {value:.3e}")]
    KernelPatternViolation {
        s: f64,
        t: f64,
        quantity: &'static str,
        value: f64,
    },

    // families
    #[error("degenerate mean curvature: |psi_st| = {value:.3e} at ({s}, {t})")]
    DegenerateH { s: f64, t: f64, value: f64 },
    #[error("curve constraint {condition} violated at s = {s}: residual {residual:.3e}")]
    CurveConstraintViolation {
        condition: &'static str,
        s: f64,
        residual: f64,
    },
    #[error("span of alpha and alpha' collapses at t = {t} (Gram determinant {gram:.3e})")]
    RankDeficiency { t: f64, gram: f64 },
    #[error("no null eta' satisfies the pairing constraints at t = {t}: {detail}")]
    InconsistentConstraints { t: f64, detail: String },
    #[error("curve alpha is not a null curve on the light cone at t = {t}: {detail}")]
    CurveNotOnLightCone { t: f64, detail: String },
    #[error("function a must be positive, got a({t}) = {value}")]
    NonPositiveScale { t: f64, value: f64 },
    #[error("intrinsic L depends on s: dL/ds = {ds_l:.3e} at ({s}, {t})")]
    LNotFunctionOfT { s: f64, t: f64, ds_l: f64 },
    #[error("invalid domain or grid: {0}")]
    InvalidGrid(String),
    #[error("ambient curvature must be -1, 0 or 1, got {0}")]
    InvalidCurvature(f64),
    #[error("unknown tolerance {0:?}")]
    UnknownTolerance(String),
    #[error("unknown built-in instance {0:?}")]
    UnknownBuiltin(String),
}
