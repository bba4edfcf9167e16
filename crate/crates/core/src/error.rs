//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Body construction rejected the shape description (unbounded polytope,
    /// non-simple polygon, degenerate extents, ...).
    #[error("invalid body: {0}")]
    InvalidBody(String),

    /// Scene construction rejected the body/law combination.
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    /// A numeric routine was called outside its domain (bad dimension, angle
    /// outside `[0, pi]`, non-monotone weight table, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The 3D proof-profile minimizer only covers normalized resistance
    /// values up to `27/256`; larger inputs use a different argument branch.
    #[error("normalized resistance {0} > 27/256 is outside the profile-minimizer branch")]
    OutOfBranch(f64),

    /// Reduced-quantity inputs contradict each other beyond statistical slack
    /// (e.g. measured volume exceeds the enclosing-ball volume by > 4 sigma).
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    /// An estimate undercut a proven lower bound by more than 4 standard
    /// errors.  This indicates a simulator bug, never a true optimum.
    #[error("soundness alarm: {0}")]
    SoundnessAlarm(String),

    /// Shape file could not be read or parsed.
    #[error("shape file error: {0}")]
    ShapeFile(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::ShapeFile(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::ShapeFile(e.to_string())
    }
}
