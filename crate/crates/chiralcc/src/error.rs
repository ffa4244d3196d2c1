use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChiralError {
    #[error("qudit dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },

    #[error("site count mismatch: {left} vs {right}")]
    SiteCountMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("lattice is not bipartite: odd cycle through vertex {vertex}")]
    NotBipartite { vertex: usize },

    #[error("operation requires a closed lattice (no boundary)")]
    OpenLattice,

    #[error("lattice has no {0:?}-colored boundary")]
    MissingBoundary(crate::lattice::Color),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("ambiguous face label on path at vertex {vertex}")]
    AmbiguousFaceLabel { vertex: usize },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid surface region: {0}")]
    InvalidSurface(String),

    #[error("T-junction composite is not proportional to a stabilizer")]
    InvalidTJunction,

    #[error("unsupported for even qudit dimension d={0}: condense transparent bosons or fermions first")]
    EvenDimension(u32),

    #[error("d={d} and alpha={alpha} are not coprime")]
    NonCoprime { d: u32, alpha: u32 },

    #[error("measurement operators {first} and {second} do not commute")]
    NonCommutingMeasurement { first: usize, second: usize },

    #[error("linear system is infeasible")]
    Infeasible,

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("arithmetic overflow in exact integer computation")]
    Overflow,
}
