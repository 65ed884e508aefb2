//! Squared-slack soft-margin SVM.

pub mod kernel;
pub mod solver;

pub use kernel::{Gram, Kernel};
pub use solver::{
    decision_value, is_essential_support_vector, solve_soft_margin, support_vector_set,
    SolverConfig, SvCriterion, SvmSolution,
};
