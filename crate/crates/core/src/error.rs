use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}` = {value}: must satisfy {bound}")]
    InvalidParameter {
        field: &'static str,
        bound: &'static str,
        value: f64,
    },

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("config: missing required key `{0}`")]
    MissingKey(&'static str),

    #[error("config: inconsistent kappa = {kappa}, psi/nu = {ratio}")]
    InconsistentKappa { kappa: f64, ratio: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "I - q*A is singular in the {regime} regime: the normal-times block has a unit root \
         (Blanchard-Kahn condition fails; the eigenvalues of qA must lie inside the unit circle)"
    )]
    IndeterminateTerminal { regime: &'static str },

    #[error("I - {which}*A* is singular: {which}*A* has an eigenvalue equal to 1 ({which} = {r})")]
    UnitEigenvalue { which: &'static str, r: f64 },

    #[error("stability assumption violated: spectral radius of pA* = {rho_p}, of qA* = {rho_q}; both must be < 1")]
    AssumptionViolated { rho_p: f64, rho_q: f64 },

    #[error("xi1 calibration is degenerate: the demand shock has no effect on inflation in state {state}")]
    DegenerateCalibration { state: usize },

    #[error("binding pattern violated at state {state} (margin {margin:e})")]
    BindingViolation { state: usize, margin: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular linear system at pivot {pivot}")]
    SingularSystem { pivot: usize },

    #[error("{0} is only available for the static Phillips curve")]
    StaticOnly(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the user's parameter file rather than the solver.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::ConfigSyntax { .. }
                | Error::UnknownKey { .. }
                | Error::MissingKey(_)
                | Error::InconsistentKappa { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
