//! Executable stochastic models of interdependency-related failures between
//! an electricity infrastructure and the information infrastructure that
//! monitors and controls it.

pub mod model;
pub mod builtin;
pub mod statespace;
pub mod solvers;
pub mod montecarlo;
pub mod io;
pub mod checks;
pub mod cli;
