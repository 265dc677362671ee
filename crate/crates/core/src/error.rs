use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix argument is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("singular diffusion: p-Laplace exponent {exponent} is below 2 at zero gradient")]
    SingularDiffusion { exponent: f64 },

    #[error(
        "non-monotone stencil: |A12| = {off_diag:.6} exceeds min diagonal {min_diag:.6} at p = {p:?}"
    )]
    NonMonotoneStencil {
        p: Vec<f64>,
        off_diag: f64,
        min_diag: f64,
    },

    #[error("time step {tau:.6e} exceeds the monotone bound {tau_max:.6e}")]
    TimeStepTooLarge { tau: f64, tau_max: f64 },

    #[error("numerical divergence (NaN or infinity) at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error(
        "admissible-pair sampler starved: {accepted}/{requested} pairs after {attempts} attempts"
    )]
    SamplerStarvation {
        requested: usize,
        accepted: usize,
        attempts: usize,
    },

    #[error("comparison report does not hold on the requested interval; bounds refused")]
    ComparisonNotEstablished,

    #[error("expression parse error: {0}")]
    ExprParse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag used by the CLI error JSON and exit-code mapping.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::SingularDiffusion { .. } => "singular_diffusion",
            Error::NonMonotoneStencil { .. } => "non_monotone_stencil",
            Error::TimeStepTooLarge { .. } => "time_step_too_large",
            Error::Divergence { .. } => "divergence",
            Error::SamplerStarvation { .. } => "sampler_starvation",
            Error::ComparisonNotEstablished => "comparison_not_established",
            Error::ExprParse(_) => "expr_parse",
            Error::Io(_) => "io",
        }
    }
}
