use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max |U^dagger U - I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("non-finite value in {what} at t = {t:e} s")]
    NonFinite { what: &'static str, t: f64 },

    #[error("invalid subsystem selection: {0}")]
    Subsystem(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("step rule requires {required} steps, above the cap of {cap}")]
    StepCap { required: usize, cap: usize },

    #[error("ambiguous dressed-state assignment: {0}")]
    Ambiguous(String),

    #[error("near-resonant, perturbation theory invalid: {factor} = {value:.6e} rad/s")]
    NearResonant { factor: &'static str, value: f64 },

    #[error("formula out of range: P = {value:.6e} for {inputs}")]
    OutOfRange { value: f64, inputs: String },

    #[error(
        "fit did not converge after {iterations} iterations \
         (best T = {t_fit:.6e} s, delta = {delta:.6e} rad/s, rms = {rms:.3e})"
    )]
    FitNotConverged {
        iterations: usize,
        t_fit: f64,
        delta: f64,
        rms: f64,
    },

    #[error("ill-posed fit: {0}")]
    IllPosedFit(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("malformed gate: {0}")]
    Gate(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
