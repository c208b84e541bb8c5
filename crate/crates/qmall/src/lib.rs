//! Command-line front end for `qmall-core`: residual checks, Wigner grids,
//! Gaussian partition functions and Skorohod integrals of step processes.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod export;
pub mod process;
pub mod report;
