use conifold_core::GeomError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    /// A precondition of the requested check does not hold.
    #[error("refused: {0}")]
    Refused(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl LabError {
    /// Bad input becomes a config error, numerical trouble an internal one.
    pub fn from_geom(e: GeomError) -> Self {
        match e {
            GeomError::Usage(_) | GeomError::Parameter(_) | GeomError::Rejected(_) => Self::Config(e.to_string()),
            _ => Self::Internal(e.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Refused(_) => 2,
            Self::Internal(_) => 3,
        }
    }
}

impl From<GeomError> for LabError {
    fn from(e: GeomError) -> Self {
        Self::from_geom(e)
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        Self::Internal(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        Self::Internal(e.to_string())
    }
}
