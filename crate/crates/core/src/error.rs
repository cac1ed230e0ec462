use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("Robin coefficient {value} at vertex {vertex} is below the lower bound {alpha}")]
    RobinBound { vertex: usize, value: f64, alpha: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("solver did not converge: relative residual {residual:e} exceeds tolerance {tol:e}")]
    NotConverged { residual: f64, tol: f64 },

    #[error("time step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("eigen-iteration did not converge: worst residual {residual:e} after basis size {basis}")]
    EigenNotConverged { residual: f64, basis: usize },

    #[error("t = 0 is not allowed for a positive fractional power")]
    ZeroTime,

    #[error("insufficient decay: dynamic range {decades:.2} decades, need at least 2")]
    InsufficientDecay { decades: f64 },

    #[error("sign condition violated: {what} at ({x:.6}, {y:.6}), value {value:e}")]
    SignViolation { what: &'static str, x: f64, y: f64, value: f64 },

    #[error("compact subset K is empty for threshold m = {m}")]
    EmptyK { m: f64 },

    #[error("|u_ref| = {value:e} below m = {m} at a point of K")]
    DivisionGuard { value: f64, m: f64 },

    #[error("flux too small: |integral of u.n over the outer boundary| = {flux:e} < m1 = {m1}")]
    FluxTooSmall { flux: f64, m1: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
