//! Dense symmetric kernels shared by all modules: pseudo-inverse, PSD quadratic
//! forms, Schur complement elimination, the constrained minimization it must
//! agree with, and an exact rational solver for the reduction lab.

mod dense;
mod rational;

pub use dense::{min_quadratic_extension, schur_block, SymmetricMatrix};
pub use rational::{rational_solve, rational_solve_column, RationalMatrix};
