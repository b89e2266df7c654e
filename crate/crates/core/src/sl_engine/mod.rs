//! Sturm–Liouville core: potentials, boundary-anchored solutions, Dirichlet
//! spectra on the full and split intervals, and direct eigenfunctions.

pub mod eigenfunction;
pub mod ode;
pub mod potential;
pub mod problem;
pub mod pruess;
pub mod spectrum;

pub use eigenfunction::{eigenfunction_direct, free_eigenfunction, Eigenfunction};
pub use ode::{integrate_solution, wronskian, wronskian_spread, Anchor, SolutionTrace};
pub use potential::{Potential, TrigTerm};
pub use problem::DirichletProblem;
pub use spectrum::{
    dirichlet_eigenvalues, dirichlet_eigenvalues_with, free_spectra, spectrum_to_csv, split_eigenvalues,
    split_eigenvalues_with, split_to_csv, SolverOptions, Spectrum, SplitSpectrum, Tag, SPECTRUM_HEADER,
};
