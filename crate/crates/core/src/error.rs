use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants fall into three classes that map to process exit codes:
/// validation problems with the inputs, numerical failures, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("detector ball intersects the quench patch (clearance {clearance:.3e})")]
    BallIntersectsPatch { clearance: f64 },

    #[error("point at distance {rho} from the ball center lies inside the ball of radius {radius}")]
    InsideBall { rho: f64, radius: f64 },

    #[error("evaluation point is {distance:.3e} from the patch, closer than 3x the node spacing {spacing:.3e}")]
    NearSingular { distance: f64, spacing: f64 },

    #[error("{which} = {value} violates the floor {floor} at node {node}, sample {sample}")]
    FloorViolation {
        which: &'static str,
        value: f64,
        floor: f64,
        node: usize,
        sample: usize,
    },

    #[error("{what}: no convergence after {cells} subdivisions (estimate {estimate:e}, error {error:e})")]
    NoConvergence {
        what: &'static str,
        estimate: f64,
        error: f64,
        cells: usize,
    },

    #[error("indicator values change sign inside the fit window; refine the surface or time quadrature")]
    InconsistentSigns,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("scenario {path}: {msg}")]
    Scenario { path: String, msg: String },

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Wraps the error with the name of the pipeline stage that raised it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code: 2 for validation failures, 3 for numerical ones.
    /// I/O and parse problems count as validation of the inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. } | Error::InconsistentSigns | Error::TooFewPoints { .. } => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
