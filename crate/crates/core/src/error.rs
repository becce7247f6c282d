use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value violates its contract.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed (non-convergence, insignificant signal, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("carrier SNR {snr_db:.1} dB in 1 kHz is below the {threshold_db:.1} dB threshold")]
    CarrierSnr { snr_db: f64, threshold_db: f64 },

    #[error("phase null outside grid: fitted thermal amplitude does not change sign over [{lo}, {hi}] rad")]
    NullOutsideGrid { lo: f64, hi: f64 },

    #[error("calibration tone at {freq_hz:.6e} Hz not detected (SNR {snr_db:.1} dB)")]
    MissingTone { freq_hz: f64, snr_db: f64 },

    #[error("format error in {context}: {reason}")]
    Format { context: String, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn format(context: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            context: context.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::Format { .. } => 2,
            Error::Domain(_)
            | Error::Numeric(_)
            | Error::CarrierSnr { .. }
            | Error::NullOutsideGrid { .. }
            | Error::MissingTone { .. } => 3,
            Error::Io { .. } => 4,
        }
    }
}
