//! Non-commutative Malliavin calculus on a truncated bosonic Fock space.
//!
//! Every operator of the calculus (ladder operators, position and momentum,
//! Weyl operators, Weyl quantization, the derivation `D` and the divergence
//! `δ`) is materialized as a dense complex matrix over the occupation-number
//! basis of a Fock space truncated by total occupation. Identities of the
//! calculus then become residuals that can be measured, usually on an
//! interior subspace where truncation does not interfere.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the command
//! line front end and the residual report live in the `qmall` crate.
#![no_std]

extern crate alloc;

pub mod bridge;
pub mod divergence;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod malliavin;
pub mod operators;
pub mod state;
pub mod symbol;
pub mod weyl_calculus;
pub mod white_noise;
pub mod wigner;

pub use error::{Error, Result};
pub use fock::{DirectionPair, FockOp, FockSpace, FockVec, HVec, C64};
pub use state::State;
