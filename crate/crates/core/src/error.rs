use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse system config: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("unknown nonlinearity kind `{0}` (expected none, quadratic, cubic or homotopy)")]
    UnknownNonlinearity(String),

    #[error("flux matrix is not diagonal")]
    NotDiagonal,

    #[error("viscosity matrix is singular")]
    SingularViscosity,

    #[error("eigenvalue solver did not converge")]
    Eigen,

    #[error("growth rate still increasing at xi_max = {xi_max}; enlarge the window or check the viscosity spectrum")]
    GrowthBracket { xi_max: f64 },

    #[error("no sign change of the maximal growth rate on [{lo}, {hi}] (growth {growth_lo:.3e} .. {growth_hi:.3e})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        growth_lo: f64,
        growth_hi: f64,
    },

    #[error("neutral eigenvalue at xi = {xi} is real; the crossing is not of Hopf type")]
    NotHopfCrossing { xi: f64 },

    #[error("no complex eigenvalue pair of the profile Jacobian; not at a Hopf point")]
    NoComplexPair,

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("Newton converged to a constant state (oscillation {oscillation:.3e})")]
    TrivialSolution { oscillation: f64 },

    #[error("singular Newton Jacobian")]
    SingularJacobian,

    #[error("homotopy lost convergence at h = {h}: {source}")]
    Homotopy {
        h: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("branch tracking failed: {0}")]
    Tracking(String),

    #[error("solution blew up at t = {t}")]
    Blowup { t: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
