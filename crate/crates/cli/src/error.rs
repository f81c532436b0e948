use csl_core::csl::CslError;
use csl_core::geometry::GeometryError;
use csl_core::oracle::OracleError;
use csl_core::units::UnitError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Units(#[from] UnitError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Csl(#[from] CslError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("validation failed: worst pairwise difference {worst:.3e} exceeds tolerance {tolerance:.3e}")]
    ToleranceExceeded { worst: f64, tolerance: f64 },
}

impl CliError {
    /// 0 success, 1 usage or config, 2 validation tolerance, 3 resource cap.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::ToleranceExceeded { .. } => 2,
            Self::Geometry(GeometryError::ResolutionOverflow { .. })
            | Self::Oracle(OracleError::GridTooLarge { .. })
            | Self::Oracle(OracleError::Geometry(GeometryError::ResolutionOverflow { .. }))
            | Self::Csl(CslError::Geometry(GeometryError::ResolutionOverflow { .. })) => 3,
            _ => 1,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
