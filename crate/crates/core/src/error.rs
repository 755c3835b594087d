use thiserror::Error;

/// Errors raised by the spectral solvers and verification oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("linear slope must be positive to form xi = sqrt(nu) rho (got nu = {nu})")]
    NonPositiveSlope { nu: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("lambda = {lambda} does not equal 2n = {expected} (tolerance {tolerance:e})")]
    LambdaMismatch { lambda: f64, expected: f64, tolerance: f64 },

    #[error("no real ground-state energy: radicand {radicand} is negative")]
    NoRealSolution { radicand: f64 },

    #[error("degenerate Coulomb denominator 4b^2|eta| + 8b^2 - 2|eta| - 1 = {denominator:e}")]
    DegenerateDenominator { denominator: f64 },

    #[error("no positive-slope root of the truncation condition for alpha in ({alpha_min}, {alpha_max}]")]
    NoRoots { alpha_min: f64, alpha_max: f64 },

    #[error("finite-difference grid too coarse: eigenvalue {coarse} moved to {fine} on refinement")]
    GridTooCoarse { coarse: f64, fine: f64 },

    #[error("persistent current undefined at sigma = {sigma:e} (sign function of zero)")]
    UndefinedAtZeroFlux { sigma: f64 },

    #[error("effective angular momentum changes sign inside the flux stencil around {phi_b}")]
    KinkDetected { phi_b: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
