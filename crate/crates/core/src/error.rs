use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// The shooting variable left the real band of the selected cubic branch.
    #[error("trajectory left the real branch band at eta = {eta}")]
    SingularTrajectory { eta: f64 },

    #[error("ODE integration failed at eta = {eta}: {reason}")]
    IntegrationFailure { eta: f64, reason: String },

    #[error("no periodic solution on branch {branch}")]
    NoPeriodicSolution { branch: usize },

    #[error("every candidate shoot on branch {branch} was singular")]
    SingularOnly { branch: usize },

    #[error("mean concentration sits on the spinodal point: |3<psi>^2 - 1| = {0:e}")]
    DegenerateMean(f64),

    #[error("Jacobian is singular at Newton iteration {iteration}")]
    JacobianSingular { iteration: usize },

    #[error("line search stalled at iteration {iteration} (alpha = {alpha:e}, f = {residual:e})")]
    LineSearchStalled {
        iteration: usize,
        alpha: f64,
        residual: f64,
    },

    #[error("Newton did not converge in {iterations} iterations (f = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("eigenvalue solver failed: {0}")]
    SpectrumFailure(String),

    #[error("simulation blew up at t = {time}")]
    BlowUp { time: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
