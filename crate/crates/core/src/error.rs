use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (‖A − A†‖_F = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (‖A†A − I‖_F = {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("imaginary part {imag:e} of a real-valued trace exceeds tolerance")]
    ImaginaryLeak { imag: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("negative frequency {0} passed to a spectral density")]
    NegativeFrequency(f64),

    #[error("spectral density is negative ({value}) at ω = {omega}")]
    NegativePsd { omega: f64, value: f64 },

    #[error("filter is unstable: pole magnitude {max_pole_magnitude}")]
    UnstableFilter { max_pole_magnitude: f64 },

    #[error("operator is not invertible")]
    NotInvertible,

    #[error(transparent)]
    Name(#[from] crate::dataset::NameError),

    #[error(transparent)]
    Format(#[from] crate::dataset::FormatError),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
