use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or non-finite input data.
    #[error("invalid input: {0}")]
    Input(String),

    /// A parameter outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Every singular value is zero, so entropy and stable rank are undefined.
    #[error("degenerate spectrum: all singular values are zero")]
    DegenerateSpectrum,

    /// No neighborhood produced a usable local value.
    #[error("all {count} neighborhoods are degenerate")]
    AllDegenerate { count: usize },

    /// The symmetrized k-NN graph has more than one connected component.
    #[error("neighborhood graph is disconnected ({} components, sizes {component_sizes:?})", component_sizes.len())]
    DisconnectedGraph { component_sizes: Vec<usize> },

    /// A linear-algebra step failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input or configuration rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Input(_) | Error::Parameter(_) | Error::Io { .. } | Error::Csv(_) | Error::Json(_)
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
