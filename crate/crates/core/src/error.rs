use thiserror::Error;

/// Everything that can go wrong across the toolkit.
///
/// Variants map onto the CLI exit codes through [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("intrinsics diagonal must be positive, got {0}")]
    NonPositiveFocal(f64),
    #[error("translation norm {0:e} is too small to define an epipolar geometry")]
    DegenerateTranslation(f64),
    #[error("matrix is full rank (sigma3/sigma1 = {0:e})")]
    FullRank(f64),
    #[error("matrix has rank below two; null space is not one-dimensional")]
    RankDeficient,
    #[error("first two columns are linearly dependent (sigma ratio {0:e})")]
    DependentColumns(f64),
    #[error("ETR normalization divisor |f33| = {0:e} is below the guard threshold")]
    NearZeroDivisor(f64),
    #[error("cannot normalize the zero matrix")]
    ZeroMatrix,
    #[error("loss inputs were normalized differently ({pred} vs {target})")]
    MixedNormalization { pred: String, target: String },
    #[error("need at least {needed} correspondences, got {got}")]
    InsufficientCorrespondences { needed: usize, got: usize },
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("points are degenerate (all coincide or fewer than two)")]
    DegeneratePoints,
    #[error("minimal solver needs exactly 7 correspondences, got {0}")]
    WrongSampleSize(usize),
    #[error("no consensus: best hypothesis has {best} inliers, {required} required")]
    NoConsensus { best: usize, required: usize },
    #[error("initial estimate must have rank exactly two")]
    RankDeficientInit,
    #[error("both epipolar lines vanish; the point pair sits on the epipoles")]
    DegenerateLine,
    #[error("no correspondence passed the selection threshold")]
    EmptySelection,
    #[error("only {placed} of {requested} points could be placed in both views")]
    InfeasibleConfig { placed: usize, requested: usize },
    #[error("point is behind the camera (depth {0:e})")]
    BehindCamera(f64),
    #[error("camera centers coincide")]
    CoincidentCenters,
    #[error("projection matrix does not have rank three")]
    RankDeficientCamera,
    #[error("every start of the multi-start fit failed: {0}")]
    AllStartsFailed(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    /// Another error with a note on where it happened; keeps the inner
    /// exit code.
    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Context { source, .. } => source.exit_code(),
            Error::InvalidConfig(_) | Error::Parse(_) | Error::Io(_) => 2,
            Error::InfeasibleConfig { .. } => 3,
            Error::InsufficientCorrespondences { .. } | Error::WrongSampleSize(_) => 4,
            // degenerate data and every numerical layer failure
            _ => 5,
        }
    }
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context { context: context.into(), source: Box::new(self) }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
