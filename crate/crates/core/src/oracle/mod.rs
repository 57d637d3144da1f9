//! Independent discretization of the Dirac operator on a graph.

mod chain;
mod checks;
mod discretize;
mod eigs;

pub use chain::{ChainLayout, ChainOperator, SparseMatrix};
pub use checks::{
    convergence_study, gap_eigenvalues, square_spectrum_check, symmetry_residual, ConvergenceReport,
    SquareReport,
};
pub use discretize::{discretize, kirchhoff_laplacian, DiscreteOperator, Dof, EdgeGrid};
pub use eigs::{
    dense_eigensystem, eigen_residual, eigs_window, eigs_window_with_vectors, sample, EigenSystem,
    SampledEdge, SampledSpinor,
};
