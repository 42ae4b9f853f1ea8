use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty image")]
    EmptyImage,

    #[error("image is {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall { width: usize, height: usize, min: usize },

    #[error("invalid pixel data: {0}")]
    InvalidPixels(String),

    #[error("window exceeds image")]
    WindowExceedsImage,

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("pnm parse error at byte {offset}: {message}")]
    Pnm { offset: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty pixel set")]
    EmptyBlob,

    #[error("degenerate ellipse")]
    DegenerateEllipse,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("degenerate projection")]
    DegenerateProjection,

    #[error("zero rotation axis")]
    ZeroAxis,

    #[error("quaternion norm {0} is not 1")]
    NonUnitQuaternion(f64),

    #[error("edge-on wheel")]
    EdgeOnWheel,

    #[error("coincident wheel centers")]
    CoincidentCenters,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
