use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0} lies outside the open unit disk")]
    OutsideDisk(Complex64),
    #[error("finite-difference stencil leaves the domain: {0}")]
    StencilOutOfDomain(String),
    #[error("degenerate jet: first derivative vanishes at {0}")]
    DegenerateJet(Complex64),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("numerical underflow: height {0:e} below representable range")]
    Underflow(f64),
    #[error(
        "map is not an orientation-preserving immersion here (stretch eigenvalue {eigenvalue})"
    )]
    NotImmersed { eigenvalue: f64 },
    #[error("principal curvature denominator vanishes (critical t = {critical_t})")]
    DenominatorVanishes { critical_t: f64 },
    #[error("surface is not locally convex here (kappa = {kappa_plus}, {kappa_minus})")]
    NotConvex { kappa_plus: f64, kappa_minus: f64 },
    #[error("Schwarzian vanishes at {0}; its argument is undefined")]
    ZeroSchwarzian(Complex64),
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("singular matrix")]
    Singular,
    #[error("degenerate tangent plane")]
    DegeneratePlane,
    #[error("zero tangent vector")]
    ZeroVector,
    #[error("empty sample set")]
    EmptySamples,
    #[error("quadrature resolution {0} is below the minimum of 4 nodes per axis")]
    Resolution(usize),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("non-positive value {value} at index {index} cannot be log-transformed")]
    NonPositive { index: usize, value: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
