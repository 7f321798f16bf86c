use thiserror::Error;

/// Errors raised by the simulation and reconstruction routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("photon number {n} is outside the Fock cutoff (dim = {dim})")]
    Cutoff { n: usize, dim: usize },

    #[error("parametric gain {0} is non-physical (must satisfy 0 <= lambda < 1)")]
    NonPhysicalGain(f64),

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("trace deficit {deficit:.3e} after truncation exceeds 1e-6; raise the Fock cutoff")]
    TraceDeficit { deficit: f64 },

    #[error("lossless closed cavity: sqrt(R_i * R_m) = 1, build-up diverges")]
    DivergentCavity,

    #[error("herald pattern {pattern} can never fire for this source (total probability is zero)")]
    ImpossibleHerald { pattern: String },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("record {index} has probability {value:.3e} under the current estimate (no numerical support)")]
    NumericalSupport { index: usize, value: f64 },

    #[error("Hermite-function order {0} exceeds the stable limit of 170")]
    OrderOverflow(usize),

    #[error("matrix shape mismatch: {0}")]
    Shape(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain { name, value, domain }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Checks `lo <= value <= hi` and reports a domain error otherwise.
pub(crate) fn check_closed(name: &'static str, value: f64, lo: f64, hi: f64, domain: &'static str) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::domain(name, value, domain))
    }
}
