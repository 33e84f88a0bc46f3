use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    /// `lambda` has a repeated part, so the polytope has zero volume.
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    /// `mu` lies on the boundary of the permutohedron; the condition number vanishes.
    #[error("weight on the permutohedron boundary: {0}")]
    Boundary(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("indeterminate at the precision cap: {0}")]
    Indeterminate(String),
    #[error("resource limit reached: {0}")]
    Resource(String),
    #[error("unbounded: {0}")]
    Unbounded(String),
    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimCap { dim: usize, cap: usize },
}
