//! Virtual element method for the 2D Poisson/diffusion problem on general
//! polygonal meshes.
//!
//! The crate is organised bottom-up:
//!
//! - [`mesh`]: polygonal meshes, per-element geometry, quality metrics, text I/O
//! - [`meshgen`]: square/hexagon/Voronoi/Lloyd generators, glued meshes, edge splits
//! - [`quadrature`]: Gauss-Legendre and Gauss-Lobatto rules, polygon rules
//! - [`vem`]: local spaces, energy projector, gradient projection, stabilizations
//! - [`system`]: global numbering, sparse assembly, Dirichlet elimination, PCG
//! - [`diagnostics`]: error norms, convergence rates, stability-constant probes
//! - [`solution`]: manufactured solutions for the experiment suites

pub mod diagnostics;
pub mod mesh;
pub mod meshgen;
pub mod quadrature;
pub mod solution;
pub mod system;
pub mod vem;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    MeshParse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("cell {cell}: {msg}")]
    InvalidCell { cell: usize, msg: String },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("quadrature: {0}")]
    Quadrature(String),
    #[error("singular local system: {0}")]
    SingularLocal(String),
    #[error("solver did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },
    #[error("eigen solve did not converge: {0}")]
    EigenFailure(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
