use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unsupported regularization order p = {0} (expected 1 or 2)")]
    UnsupportedOrder(u32),
    #[error("matrix singular at z = {z}: {detail}")]
    SingularPoint { z: Complex64, detail: String },
    #[error("contour placement: {0}")]
    ContourPlacement(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("invalid interval [{a}, {b}]")]
    Interval { a: f64, b: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("kernel not finite at node pair ({i}, {j}): x = {x}, x' = {xp}")]
    KernelSingularity { i: usize, j: usize, x: f64, xp: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("scaled evaluation required: {0}")]
    ScaledEvaluation(String),
    #[error("iteration did not converge: {0}")]
    Iteration(String),
    #[error("z = {0} is in the spectrum of the unperturbed operator")]
    ResolventSet(Complex64),
    #[error("z = {0} is an eigenvalue of the perturbed operator")]
    PerturbedSpectrum(Complex64),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("Dirichlet eigenvalue at or near z = {0}")]
    DirichletEigenvalue(Complex64),
    #[error("Neumann eigenvalue at or near z = {0}")]
    NeumannEigenvalue(Complex64),
    #[error("channel truncation not converged at l_max = {l_max}: last |log det2| = {last:e}")]
    ChannelTruncation { l_max: usize, last: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("ill-conditioned matching: {0}")]
    Matching(String),
    #[error("spectral point {0} coincides with the free spectrum")]
    SpectralPoint(Complex64),
}

pub type Result<T> = std::result::Result<T, Error>;
