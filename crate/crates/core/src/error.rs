use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("timelike margin violated: |lambda'({tau})| = {speed} exceeds 1 - {margin}")]
    TimelikeMarginViolated { tau: f64, speed: f64, margin: f64 },

    #[error("boundary curves cross: lambda1({tau}) = {l1} >= lambda2({tau}) = {l2}")]
    CurvesCross { tau: f64, l1: f64, l2: f64 },

    #[error("point outside the null-cone exterior: f = {f} <= 0")]
    OutsideCone { f: f64 },

    #[error("degenerate radius: r = 0")]
    ZeroRadius,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no null-ray intersection within {max_span} time units from tau = {tau}")]
    NoIntersection { tau: f64, max_span: f64 },

    #[error("empty window or sample set: {0}")]
    EmptyWindow(String),

    #[error("CFL certificate violated: dt = {dt} exceeds bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("incompatible data: {0}")]
    IncompatibleData(String),

    #[error("conjugate gradient did not converge: relative residual {residual} after {iterations} iterations")]
    CgDidNotConverge { residual: f64, iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
