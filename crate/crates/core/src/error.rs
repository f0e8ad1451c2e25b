use thiserror::Error;

/// Errors raised by the solvers and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NsitError {
    /// A relaxation rate and its detuning are both zero, so the
    /// corresponding complex denominator vanishes.
    #[error("degenerate system: {0} has zero relaxation rate and zero detuning")]
    DegenerateSystem(&'static str),

    /// One or more parameter invariants are violated. Every violation is listed.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("invalid Doppler environment: {}", .0.join("; "))]
    InvalidEnv(Vec<String>),

    #[error("velocity {velocity} m/s is not below the speed of light")]
    InvalidVelocity { velocity: f64 },

    /// Quadrature result changed by more than the tolerance when the order was doubled.
    #[error("quadrature not converged at order {order}: relative change {change:.3e} exceeds {tolerance:.1e}")]
    NotConverged {
        order: usize,
        change: f64,
        tolerance: f64,
    },

    /// The trajectory did not settle before the integration horizon.
    #[error("no steady state reached by t = {t_max:.6e} (last relative change {last_change:.3e})")]
    NoConvergence { t_max: f64, last_change: f64 },

    /// The explicit integrator could not make progress (step underflow or step budget).
    #[error("stiffness failure at t = {t:.6e}: {reason}")]
    StiffnessFailure { t: f64, reason: String },

    #[error("feature not found: {0}")]
    FeatureNotFound(String),

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("invalid window [{lo}, {hi}]")]
    InvalidWindow { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, NsitError>;
