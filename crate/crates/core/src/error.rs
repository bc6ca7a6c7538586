use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("accelerometer reading {0} m/s^2 exceeds gravity, attitude unresolvable")]
    OutOfRange(f64),

    #[error("point cannot be projected: {0}")]
    Unprojectable(String),

    #[error("point is behind the camera (depth {0})")]
    BehindCamera(f64),

    #[error("radius {0} cm cannot be brought into view with any tilt below 90 degrees")]
    Unreachable(f64),

    #[error("degenerate baseline: horizontal pixel separation {0} px")]
    DegenerateBaseline(f64),

    #[error("reference points coincide")]
    CoincidentPoints,

    #[error("compensated angle {0} deg reaches the tangent singularity")]
    TangentSingularity(f64),

    #[error("degenerate calibration scene: {0}")]
    DegenerateScene(String),

    #[error("infeasible code shape {rows}x{cols}: {reason}")]
    InfeasibleShape {
        rows: usize,
        cols: usize,
        reason: String,
    },

    #[error("enumeration of {count} codes exceeds cap {cap}")]
    CapExceeded { count: String, cap: u64 },

    #[error("invalid color code: {0}")]
    InvalidCode(String),

    #[error("no rotation of the grid carries a red header row")]
    NoHeader,

    #[error("more than one rotation of the grid carries a red header row")]
    AmbiguousHeader,

    #[error("blob layout does not match any registered grid shape: {0}")]
    GridMismatch(String),

    #[error("landmark code {0} is not registered")]
    UnknownLandmark(String),

    #[error("position fix is already in the world frame")]
    FrameError,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed PPM: {0}")]
    Ppm(String),
}

impl Error {
    /// True for errors caused by bad input documents rather than failures of
    /// the computation itself.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidArgument(_)
                | Error::InfeasibleShape { .. }
                | Error::InvalidCode(_)
                | Error::Ppm(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
