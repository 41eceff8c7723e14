use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {got} outside supported range {min}..={max}")]
    QubitRange { got: usize, min: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("site {site} out of range for {num_qubits} qubits")]
    SiteOutOfRange { site: usize, num_qubits: usize },

    #[error("duplicate site {0} in support")]
    DuplicateSite(usize),

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("operator is not traceless (trace {trace:.3e})")]
    NotTraceless { trace: f64 },

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("{len} values cannot be split into {batches} equal batches")]
    Divisibility { len: usize, batches: usize },

    #[error("observable is the identity")]
    IdentityObservable,

    #[error("expectation value is zero; relative accuracy is unattainable")]
    ZeroExpectation,

    #[error("negative probability mass {0:.3e}")]
    NegativeMass(f64),

    #[error("harmonic l={l} on {target} is fixed by the state and cannot be perturbed")]
    ForbiddenHarmonic { l: usize, target: &'static str },

    #[error("unsupported snapshot log version {0}")]
    LogVersion(u32),

    #[error("snapshot log is not a shadow log (bad magic)")]
    LogMagic,

    #[error("snapshot log is truncated")]
    LogTruncated,

    #[error("malformed snapshot log: {0}")]
    LogFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
