use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at sample {index}")]
    NonFinite { index: usize },

    #[error("waveform too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("unit mismatch: expected `{expected}`, found `{found}`")]
    UnitMismatch { expected: String, found: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("cutoff {f_cut} Hz is not below the Nyquist frequency {nyquist} Hz")]
    CutoffAboveNyquist { f_cut: f64, nyquist: f64 },

    #[error("analysis window covers {periods:.3} periods, at least {required} whole periods are required")]
    WindowTooShort { periods: f64, required: usize },

    #[error("insufficient history: kernel needs {needed} samples, signal has {available}")]
    InsufficientHistory { needed: usize, available: usize },

    #[error("kernel step {kernel_dt} s is not an integer multiple of signal step {signal_dt} s")]
    IncommensurateGrids { signal_dt: f64, kernel_dt: f64 },

    #[error("voltage vanishes or changes sign at t = {t} s (value {value})")]
    VoltageCrossesZero { t: f64, value: f64 },

    #[error("voltage is not strictly one-signed on the grid")]
    MixedSignVoltage,

    #[error("positivity cannot be satisfied: profile minimum is {min} F")]
    UnsatisfiablePositivity { min: f64 },

    #[error("{0} must be nonzero: the lossy-inductance modulation divides by R_L and R_C")]
    ZeroLossResistance(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("capacitance profile is not positive at t = {t} s (value {value} F)")]
    ProfileNotPositive { t: f64, value: f64 },

    #[error("capacitance profile vanishes or changes sign at t = {t} s; modulation bounds are unbounded")]
    ProfileCrossesZero { t: f64 },

    #[error("unsupported target for this operation: {0}")]
    UnsupportedTarget(&'static str),

    #[error("resistance must be positive, got {0} ohm")]
    NonpositiveResistance(f64),

    #[error("bounds are unordered: a = {a}, b = {b}")]
    UnorderedBounds { a: f64, b: f64 },

    #[error("capacitance must be nonzero")]
    ZeroCapacitance,

    #[error("modulated capacitance loses positivity at t = {t} s, before the requested end time")]
    PositivityViolated { t: f64 },

    #[error("grid too coarse: {cells} cells across the slab, at least {required} required")]
    GridTooCoarse { cells: usize, required: usize },

    #[error("Courant number {courant} exceeds 1")]
    CourantViolation { courant: f64 },

    #[error("variants do not share the same source and modulation")]
    MismatchedSources,

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
