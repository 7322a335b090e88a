use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("invalid plane: {0}")]
    InvalidPlane(String),
    #[error("invalid quaternion: {0}")]
    InvalidQuaternion(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("mesh has no vertices")]
    EmptyMesh,
    #[error("bounding sphere has zero radius")]
    DegenerateBoundingSphere,
    #[error("mesh has no face with positive area")]
    NoArea,
    #[error("face {face} references vertex {index} but the mesh has {n_vertices} vertices")]
    FaceIndexOutOfRange {
        face: usize,
        index: usize,
        n_vertices: usize,
    },
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("point cloud is degenerate: {0}")]
    DegenerateCloud(String),

    #[error("aligned plane drifted {angle_deg:.2} deg from the requested direction (limit {limit_deg} deg)")]
    InitialDirectionRejected { angle_deg: f64, limit_deg: f64 },
    #[error("hypothesis and target are 90 deg apart; shortest arc to +/- target is ambiguous")]
    AntipodalAmbiguity,
    #[error("ground-truth set is empty; metrics are undefined")]
    EmptyGroundTruth,

    #[error("{path}: parse error at {location}: {message}")]
    Parse {
        path: PathBuf,
        location: ParseLocation,
        message: String,
    },
    #[error("{0}: unsupported format")]
    UnsupportedFormat(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document: {0}")]
    Document(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseLocation {
    Line(usize),
    Byte(usize),
}

impl std::fmt::Display for ParseLocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseLocation::Line(l) => write!(f, "line {l}"),
            ParseLocation::Byte(b) => write!(f, "byte {b}"),
        }
    }
}

impl Error {
    /// Stable machine-readable name, used for `--json-errors` and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidVector(_) => "InvalidVector",
            Error::InvalidPlane(_) => "InvalidPlane",
            Error::InvalidQuaternion(_) => "InvalidQuaternion",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::EmptyMesh => "EmptyMesh",
            Error::DegenerateBoundingSphere => "DegenerateBoundingSphere",
            Error::NoArea => "NoArea",
            Error::FaceIndexOutOfRange { .. } => "FaceIndexOutOfRange",
            Error::EmptyCloud => "EmptyCloud",
            Error::DegenerateCloud(_) => "DegenerateCloud",
            Error::InitialDirectionRejected { .. } => "InitialDirectionRejected",
            Error::AntipodalAmbiguity => "AntipodalAmbiguity",
            Error::EmptyGroundTruth => "EmptyGroundTruth",
            Error::Parse { .. } => "ParseError",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::Io { .. } => "Io",
            Error::Json(_) => "Json",
            Error::Document(_) => "Document",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
