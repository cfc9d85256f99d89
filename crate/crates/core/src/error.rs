use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bilinear map is singular (det A = {det:e})")]
    SingularMap { det: f64 },

    #[error("variant l = {0} is not supported (expected 1 or 2)")]
    BadVariant(i32),

    #[error("element is not unisolvent (det = {det:e})")]
    NotUnisolvent { det: f64 },

    #[error("circle-center system is rank deficient")]
    Degenerate,

    #[error("bad parameter: {0}")]
    BadParam(String),

    #[error("could not generate a convex mesh after {attempts} resampling attempts")]
    ConvexityFailure { attempts: usize },

    #[error("edge ({0}, {1}) is shared by more than two cells")]
    NonManifold(usize, usize),

    #[error("interior block of the local matrix is singular")]
    SingularInterior,

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("mesh file: {0}")]
    MeshFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
